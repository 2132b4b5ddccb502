use heatmap_codec::{
    decode, encode, pck, DecodeConfig, DecodeMethod, EncodingConfig, EncodingMode, Fallback, GaussianParams, Point,
    Quantiser,
};

fn cfg(mode: EncodingMode) -> EncodingConfig {
    EncodingConfig::new(4.0, GaussianParams::new(2.0).unwrap()).with_mode(mode).with_quantiser(Quantiser::Floor)
}

#[test]
fn encode_then_decode_every_method() {
    let joints = [Point::new(50.8, 33.2), Point::new(101.37, 180.05), Point::new(120.0, 60.0)];
    let sigma = GaussianParams::new(2.0).unwrap();
    for method in DecodeMethod::ALL {
        let dc = DecodeConfig { method, sigma: Some(sigma), ..DecodeConfig::argmax(4.0) };
        let preds: Vec<Point> = joints
            .iter()
            .map(|&g| {
                let (h, _) = encode(g, &cfg(EncodingMode::Unbiased), 64, 48).unwrap();
                let r = decode(&h, &dc).unwrap();
                assert_eq!(r.fallback, Fallback::None);
                r.p_hat
            })
            .collect();
        // argmax is within half a heatmap pixel per axis, λ·√2/2 overall
        let limit = if method == DecodeMethod::Dark { 1e-4 } else { 4.0 * 0.5f64.hypot(0.5) };
        assert_eq!(pck(&preds, &joints, limit, 1.0).unwrap().fraction, 1.0, "{method:?}");
    }
}

#[test]
fn biased_floor_moves_the_peak_down_and_left() {
    let g = Point::new(50.8, 33.2);
    let (h, joint) = encode(g, &cfg(EncodingMode::Biased), 64, 48).unwrap();
    let dark = DecodeConfig::dark(4.0, GaussianParams::new(2.0).unwrap()).with_modulation(false);
    let r = decode(&h, &dark).unwrap();
    assert_eq!(joint.g_double_prime.map(|q| (q.x, q.y)), Some((12, 8)));
    assert!((r.p_hat.x - 48.0).abs() < 1e-6 && (r.p_hat.y - 32.0).abs() < 1e-6);
}
