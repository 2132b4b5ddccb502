//! Acceptance suite. Prints one PASS/FAIL line per criterion (plus indented
//! detail lines) and exits non-zero if any criterion fails.
//!
//!     cargo test -p hmt --test acceptance

use std::process::{Command, ExitCode};
use std::time::Instant;

use heatmap_codec::{
    argmax_decode, generate_trial, standard_shift_decode, CodecError, DecodeConfig, Decoder, EncodingMode, Fallback,
    GaussianParams, Heatmap, NoiseModel, Point, Quantiser, TrialSpec,
};
use hmt::bench::{default_methods, evaluate, ErrorStats, EvalOptions};
use hmt::format::{decode_heatmaps, encode_heatmaps, read_heatmaps, write_heatmaps, HEADER_LEN};
use hmt::keypoints::{Keypoint, KeypointDocument};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const H: usize = 64;
const W: usize = 48;
const LAMBDA: f64 = 4.0;

/// E‖U‖ for U uniform on the unit square centred at the origin.
fn mean_norm_centered_square() -> f64 {
    (2f64.sqrt() + (1.0 + 2f64.sqrt()).ln()) / 6.0
}

#[derive(Default)]
struct Report {
    passed: usize,
    failed: Vec<&'static str>,
}

impl Report {
    fn check(&mut self, name: &'static str, ok: bool, detail: impl AsRef<str>) {
        println!("{} {name}: {}", if ok { "PASS" } else { "FAIL" }, detail.as_ref());
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(name);
        }
    }
}

fn note(s: impl AsRef<str>) {
    println!("     {}", s.as_ref());
}

fn suite(count: usize, seed: u64) -> TrialSpec {
    TrialSpec::new(count, H, W, (1.0, 3.0), LAMBDA, seed)
}

fn sigma(s: f64) -> GaussianParams {
    GaussianParams::new(s).unwrap()
}

fn run_suite(spec: &TrialSpec) -> Vec<ErrorStats> {
    evaluate(spec, &default_methods(spec).unwrap(), &EvalOptions::default()).unwrap()
}

fn by_label<'a>(stats: &'a [ErrorStats], label: &str) -> &'a ErrorStats {
    stats.iter().find(|s| s.label == label).unwrap()
}

/// Mean gap `a - b` in units of the combined (unpaired) standard error.
fn z_gap(a: &ErrorStats, b: &ErrorStats) -> f64 {
    let se = a.summary.std_error.hypot(b.summary.std_error);
    (a.summary.mean - b.summary.mean) / se
}

/// Same gap against the standard error of the per-trial differences.
fn z_paired(a: &ErrorStats, b: &ErrorStats) -> f64 {
    let d: Vec<f64> = a.errors.iter().zip(&b.errors).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    mean / (var / n).sqrt()
}

/// Per-axis brute force: for each candidate centre on a 1e-3 grid within one
/// pixel of `m`, least-squares fit of `a·exp(-(t-c)²/2σ²)` to the five
/// samples along the row (or column) through `m`.
fn grid_oracle(h: &Heatmap, s: f64, m: (usize, usize)) -> Point {
    let fit = |samples: &[(f64, f64)], m: f64| {
        let mut best = (f64::INFINITY, m);
        for i in -1000..=1000 {
            let c = m + i as f64 * 1e-3;
            let g: Vec<f64> = samples.iter().map(|(t, _)| (-(t - c).powi(2) / (2.0 * s * s)).exp()).collect();
            let a = samples.iter().zip(&g).map(|((_, v), g)| v * g).sum::<f64>() / g.iter().map(|g| g * g).sum::<f64>();
            let err: f64 = samples.iter().zip(&g).map(|((_, v), g)| (v - a * g).powi(2)).sum();
            if err < best.0 {
                best = (err, c);
            }
        }
        best.1
    };
    let (mx, my) = m;
    let row: Vec<(f64, f64)> = (mx.saturating_sub(2)..=(mx + 2).min(h.width() - 1))
        .map(|x| (x as f64, h.get(x, my)))
        .collect();
    let col: Vec<(f64, f64)> = (my.saturating_sub(2)..=(my + 2).min(h.height() - 1))
        .map(|y| (y as f64, h.get(mx, y)))
        .collect();
    Point::new(fit(&row, mx as f64), fit(&col, my as f64))
}

fn exact_recovery(r: &mut Report) {
    let spec = suite(10_000, 1);
    let decoder = Decoder::new(DecodeConfig::dark(LAMBDA, sigma(2.0)).with_modulation(false)).unwrap();
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let mut fallbacks = 0;
    let mut sampled = Vec::new();
    for i in 0..spec.count {
        let t = generate_trial(&spec, i).unwrap();
        let res = decoder.decode(&t.heatmap);
        worst = worst.max(res.p.max_axis_distance(t.center_heatmap));
        fallbacks += usize::from(res.fallback != Fallback::None);
        if i % 100 == 0 {
            sampled.push((t, res));
        }
    }
    let secs = t0.elapsed().as_secs_f64();

    let (mut oracle_truth, mut oracle_dark) = (0.0f64, 0.0f64);
    for (t, res) in &sampled {
        let o = grid_oracle(&t.heatmap, t.sigma, (res.m.x, res.m.y));
        oracle_truth = oracle_truth.max(o.max_axis_distance(t.center_heatmap));
        oracle_dark = oracle_dark.max(o.max_axis_distance(res.p));
    }
    note(format!(
        "grid oracle on {} trials: max |oracle - truth| = {oracle_truth:.2e}, max |oracle - dark| = {oracle_dark:.2e} (grid 1e-3)",
        sampled.len()
    ));
    let ok = worst < 1e-5 && secs < 5.0 && oracle_truth <= 1e-3 && oracle_dark <= 1e-3;
    r.check(
        "exact recovery",
        ok,
        format!("10000 trials, max per-axis error {worst:.2e} px (< 1e-5), {fallbacks} fallbacks, {secs:.2} s (< 5 s)"),
    );
}

fn argmax_baseline(r: &mut Report) {
    let closed = mean_norm_centered_square();
    let mut rng = StdRng::seed_from_u64(0xA11CE);
    let n = 1_000_000;
    let samples: Vec<f64> =
        (0..n).map(|_| (rng.random::<f64>() - 0.5).hypot(rng.random::<f64>() - 0.5)).collect();
    let mc = samples.iter().sum::<f64>() / n as f64;
    let mc_se = (samples.iter().map(|v| (v - mc).powi(2)).sum::<f64>() / (n as f64 - 1.0) / n as f64).sqrt();
    note(format!("closed form {closed:.5}, Monte Carlo {mc:.5} ± {mc_se:.1e}"));

    let spec = suite(10_000, 1);
    let stats = evaluate(&spec, &[default_methods(&spec).unwrap().remove(0)], &EvalOptions::default()).unwrap();
    let mean = stats[0].summary.mean / LAMBDA;
    let ok = (mean - 0.3826).abs() <= 0.01 && (mc - closed).abs() <= 5.0 * mc_se;
    r.check(
        "argmax baseline",
        ok,
        format!("mean heatmap-space error {mean:.4} px (0.3826 ± 0.01); {:.4} original px", stats[0].summary.mean),
    );
}

fn method_ordering(r: &mut Report) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, noise) in [("noiseless", NoiseModel::none()), ("gaussian 0.02", NoiseModel::gaussian(0.02))] {
        let stats = run_suite(&suite(10_000, 2).with_noise(noise));
        let (argmax, shift) = (by_label(&stats, "argmax"), by_label(&stats, "shift"));
        let z_as = z_gap(argmax, shift);
        ok &= z_as >= 5.0;
        let mut line = format!(
            "{name}: argmax {:.4} > shift {:.4} ({z_as:.1} SE, paired {:.1})",
            argmax.summary.mean,
            shift.summary.mean,
            z_paired(argmax, shift)
        );
        for label in ["dark+dm", "dark"] {
            let dark = by_label(&stats, label);
            let z = z_gap(shift, dark);
            ok &= z >= 5.0;
            line.push_str(&format!(
                "; shift > {label} {:.4} ({z:.1} SE, paired {:.1})",
                dark.summary.mean,
                z_paired(shift, dark)
            ));
        }
        note(&line);
        parts.push(name);
    }
    r.check("method ordering", ok, format!("dark < shift < argmax by >= 5 SE on {} suites", parts.join(" and ")));
}

fn encoding_gap(r: &mut Report) {
    // frac of a uniform coordinate is uniform on [0, 1): E‖frac‖ = 2·E‖U‖
    let mut rng = StdRng::seed_from_u64(0xF10A7);
    let n = 1_000_000;
    let mc = (0..n)
        .map(|_| {
            let (u, v) = (rng.random::<f64>() * 43.0 + 2.0, rng.random::<f64>() * 59.0 + 2.0);
            (u - u.floor()).hypot(v - v.floor())
        })
        .sum::<f64>()
        / n as f64;
    let predicted = LAMBDA * mc;
    note(format!("Monte Carlo E‖frac‖ = {mc:.4} (closed form {:.4}); predicted floor gap {predicted:.3} original px", 2.0 * mean_norm_centered_square()));

    let base = TrialSpec::new(10_000, H, W, (2.0, 2.0), LAMBDA, 3);
    let unbiased = run_suite(&base);
    let biased = run_suite(&base.with_encoding(EncodingMode::Biased, Quantiser::Floor));
    let mut ok = true;
    let mut line = String::new();
    for label in ["dark+dm", "dark"] {
        let (b, u) = (by_label(&biased, label), by_label(&unbiased, label));
        let gap = b.summary.mean - u.summary.mean;
        ok &= gap >= LAMBDA * 0.3;
        line.push_str(&format!("{label}: biased {:.4} - unbiased {:.4} = {gap:.4}; ", b.summary.mean, u.summary.mean));
    }
    // unmodulated dark recovers g'' exactly, so its biased error is λ‖frac‖
    let dark_b = by_label(&biased, "dark");
    let oracle_ok = (dark_b.summary.mean - predicted).abs() <= 5.0 * dark_b.summary.std_error;
    note(format!("biased unmodulated dark {:.4} vs predicted {predicted:.4} (SE {:.1e})", dark_b.summary.mean, dark_b.summary.std_error));
    r.check("encoding gap", ok && oracle_ok, format!("{line}threshold λ·0.3 = {:.1}", LAMBDA * 0.3));
}

fn modulation_gain(r: &mut Report) {
    let stats = run_suite(&suite(10_000, 4).with_noise(NoiseModel::impulse(0.5, 0.02)));
    let (with, without) = (by_label(&stats, "dark+dm"), by_label(&stats, "dark"));
    let z = z_gap(without, with);
    r.check(
        "modulation gain",
        with.summary.mean <= without.summary.mean && z >= 3.0,
        format!(
            "impulse 0.02/0.5: with {:.4} <= without {:.4}, {z:.1} SE (paired {:.1}, need 3)",
            with.summary.mean,
            without.summary.mean,
            z_paired(without, with)
        ),
    );
}

/// Heatmaps exercising every decode path: clean, noisy and purely random.
fn assorted_heatmaps(n: usize, seed: u64) -> Vec<Heatmap> {
    let quarter = n / 4;
    let mut out = Vec::with_capacity(n);
    let clean = suite(quarter, seed);
    let gaussian = suite(quarter, seed + 1).with_noise(NoiseModel::gaussian(0.05));
    let impulse = suite(quarter, seed + 2).with_noise(NoiseModel::impulse(0.5, 0.02));
    for spec in [clean, gaussian, impulse] {
        out.extend((0..spec.count).map(|i| generate_trial(&spec, i).unwrap().heatmap));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    while out.len() < n {
        let (h, w) = (rng.random_range(3..=20), rng.random_range(3..=20));
        out.push(Heatmap::from_fn(h, w, |_, _| rng.random::<f64>()).unwrap());
    }
    out
}

fn scale_invariance(r: &mut Report) {
    let maps = assorted_heatmaps(1000, 50);
    let decoders = [true, false].map(|m| Decoder::new(DecodeConfig::dark(LAMBDA, sigma(2.0)).with_modulation(m)).unwrap());
    let (mut worst, mut flag_mismatch, mut compared) = (0.0f64, 0, 0);
    for h in &maps {
        for d in &decoders {
            let base = d.decode(h);
            for c in [1e-3, 1.0, 1e3] {
                let res = d.decode(&h.scaled(c).unwrap());
                worst = worst.max(res.p.max_axis_distance(base.p));
                flag_mismatch += usize::from(res.fallback != base.fallback);
                compared += 1;
            }
        }
    }
    r.check(
        "scale invariance",
        worst <= 1e-9 && flag_mismatch == 0,
        format!("{} heatmaps × c ∈ {{1e-3, 1, 1e3}} × modulation on/off ({compared} decodes): max |Δp| {worst:.1e} (<= 1e-9), {flag_mismatch} fallback mismatches", maps.len()),
    );
}

fn shift_contract(r: &mut Report) {
    let mut maps = assorted_heatmaps(4000, 60);
    let biased = suite(1000, 64).with_encoding(EncodingMode::Biased, Quantiser::Floor);
    maps.extend((0..biased.count).map(|i| generate_trial(&biased, i).unwrap().heatmap));
    let (mut checked, mut degenerate, mut other_errors, mut worst_ulps) = (0, 0, 0, 0.0f64);
    for h in &maps {
        match standard_shift_decode(h) {
            Ok(p) => {
                let m: Point = argmax_decode(h).0.into();
                let dev = (p.distance(m) - 0.25).abs();
                // p is rounded once per axis when stored
                let ulp = f64::EPSILON * m.x.abs().max(m.y.abs()).max(1.0);
                worst_ulps = worst_ulps.max(dev / ulp);
                checked += 1;
            }
            Err(CodecError::AmbiguousSecondMax) => degenerate += 1,
            Err(_) => other_errors += 1,
        }
    }
    r.check(
        "standard shift contract",
        checked > 0 && other_errors == 0 && worst_ulps <= 4.0,
        format!("{checked} heatmaps: |‖p - m‖ - 0.25| <= {worst_ulps:.2} ulp(m) (<= 4); {degenerate} degenerate skipped"),
    );
}

fn format_round_trips(r: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();

    let maps = assorted_heatmaps(40, 70).into_iter().take(30).collect::<Vec<_>>();
    let bytes = encode_heatmaps(&maps).unwrap();
    let path = dir.path().join("maps.hmap");
    write_heatmaps(&path, &maps).unwrap();
    let back = read_heatmaps(&path).unwrap();
    let again = encode_heatmaps(&back).unwrap();
    if std::fs::read(&path).unwrap() != bytes || again != bytes {
        failures.push("heatmap bytes changed across write∘read");
    }
    let narrowed_ok = maps
        .iter()
        .zip(&back)
        .all(|(a, b)| a.values().iter().zip(b.values()).all(|(x, y)| (*x as f32).to_bits() == (*y as f32).to_bits()));
    if !narrowed_ok {
        failures.push("decoded values differ from the f32 narrowing");
    }

    let decoder = Decoder::new(DecodeConfig::dark(LAMBDA, sigma(2.0))).unwrap();
    let results: Vec<_> = back.iter().map(|h| decoder.decode(h)).collect();
    let doc = KeypointDocument {
        lambda: LAMBDA,
        keypoints: results.iter().map(|r| Keypoint::new(r.p_hat.x, r.p_hat.y, r.confidence)).collect(),
        fallbacks: Some(results.iter().map(|r| r.fallback).collect()),
    };
    let first = KeypointDocument::from_json(&doc.to_json().unwrap()).unwrap();
    let second = KeypointDocument::from_json(&first.to_json().unwrap()).unwrap();
    if first != doc || second != first {
        failures.push("keypoint JSON read∘write∘read changed values");
    }

    let single = encode_heatmaps(&maps[..1]).unwrap();
    let mut magic = single.clone();
    magic[0] = b'X';
    let truncated = &single[..single.len() - 1];
    let mut nan = single.clone();
    nan[HEADER_LEN..HEADER_LEN + 4].copy_from_slice(&f32::NAN.to_le_bytes());
    let named: Vec<Option<String>> = [&magic[..], truncated, &nan[..]]
        .iter()
        .map(|b| decode_heatmaps(b).err().and_then(|e| e.format_field().map(str::to_owned)))
        .collect();
    if named != [Some("magic".into()), Some("length".into()), Some("nan".into())] {
        failures.push("corruption errors not named magic/length/nan");
    }

    r.check(
        "format round-trips",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} heatmaps bitwise, {} keypoints value-exact, corruption -> {:?}", maps.len(), doc.keypoints.len(), named)
        } else {
            failures.join("; ")
        },
    );
}

fn hmt(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hmt")).args(args).output().expect("run hmt")
}

fn overhead(r: &mut Report) {
    let out = hmt(&["bench", "--trials", "10000", "--sigma-lo", "2", "--sigma-hi", "2", "--workers", "1"]);
    let text = String::from_utf8_lossy(&out.stdout);
    // "dark+dm costs 4.80x argmax per heatmap; 21000 heatmaps/s with 1 worker(s)"
    let parsed = text.lines().find(|l| l.starts_with("dark+dm costs")).and_then(|l| {
        let ratio: f64 = l.split_whitespace().nth(2)?.trim_end_matches('x').parse().ok()?;
        let rate: f64 = l.split("; ").nth(1)?.split_whitespace().next()?.parse().ok()?;
        Some((ratio, rate))
    });
    match parsed {
        Some((ratio, rate)) if out.status.success() => r.check(
            "overhead",
            ratio <= 25.0 && rate >= 10_000.0,
            format!("hmt bench 48×64 σ=2: dark+dm costs {ratio:.2}x argmax (<= 25), {rate:.0} heatmaps/s single-threaded (>= 10000)"),
        ),
        _ => r.check("overhead", false, format!("could not read the overhead line from hmt bench: {text}")),
    }
}

fn determinism(r: &mut Report) {
    let mut ok = true;
    let mut detail = Vec::new();
    for noise in [&["--noise", "none"][..], &["--noise", "gaussian"], &["--noise", "impulse", "--amplitude", "0.5"]] {
        let run = |workers: &str| {
            let mut args = vec!["bench", "--trials", "3000", "--seed", "17", "--json", "--workers", workers];
            args.extend_from_slice(noise);
            let out = hmt(&args);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            out.stdout
        };
        let reference = run("1");
        let same = [run("1"), run("4"), run("3")].iter().all(|o| *o == reference);
        ok &= same && !reference.is_empty();
        detail.push(format!("{} {}", noise[1], if same { "identical" } else { "DIFFERS" }));
    }
    r.check("determinism", ok, format!("bench --json, runs and workers 1/1/4/3: {}", detail.join(", ")));
}

fn main() -> ExitCode {
    let mut r = Report::default();
    exact_recovery(&mut r);
    argmax_baseline(&mut r);
    method_ordering(&mut r);
    encoding_gap(&mut r);
    modulation_gain(&mut r);
    scale_invariance(&mut r);
    shift_contract(&mut r);
    format_round_trips(&mut r);
    overhead(&mut r);
    determinism(&mut r);
    println!("acceptance: {} passed, {} failed", r.passed, r.failed.len());
    if r.failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", r.failed.join(", "));
        ExitCode::FAILURE
    }
}
