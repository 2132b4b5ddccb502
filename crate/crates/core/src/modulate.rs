//! Heatmap distribution modulation.
//!
//! Smooths a predicted heatmap with a Gaussian kernel of the training σ and
//! rescales the result affinely so that its minimum is 0 and its maximum
//! matches the input maximum.

use alloc::vec;
use alloc::vec::Vec;

use crate::heatmap::{GaussianParams, Heatmap};

/// Separable 1-D Gaussian weights truncated at `radius = ceil(3σ)` and
/// normalised to unit sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationKernel {
    sigma: f64,
    radius: usize,
    weights: Vec<f64>,
}

impl ModulationKernel {
    pub fn new(params: GaussianParams) -> Self {
        let sigma = params.sigma();
        let radius = libm::ceil(3.0 * sigma) as usize;
        let two_var = 2.0 * params.variance();
        let mut weights: Vec<f64> = (0..=2 * radius)
            .map(|i| {
                let d = i as f64 - radius as f64;
                libm::exp(-(d * d) / two_var)
            })
            .collect();
        // pairwise from the tails inwards keeps the sum symmetric
        let mut sum = weights[radius];
        for k in 1..=radius {
            sum += weights[radius - k] + weights[radius + k];
        }
        for w in &mut weights {
            *w /= sum;
        }
        Self { sigma, radius, weights }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Separable convolution with replicate (edge-clamp) padding.
    pub fn convolve(&self, h: &Heatmap) -> Vec<f64> {
        let (height, width) = (h.height(), h.width());
        let r = self.radius;
        let taps = self.weights.len();

        // rows
        let mut tmp = vec![0.0; height * width];
        let mut padded = vec![0.0; width + 2 * r];
        for y in 0..height {
            let row = h.row(y);
            padded[..r].fill(row[0]);
            padded[r..r + width].copy_from_slice(row);
            padded[r + width..].fill(row[width - 1]);
            let out = &mut tmp[y * width..(y + 1) * width];
            for (k, &w) in self.weights.iter().enumerate() {
                for (o, &p) in out.iter_mut().zip(&padded[k..k + width]) {
                    *o += w * p;
                }
            }
        }

        // columns
        let mut out = vec![0.0; height * width];
        for y in 0..height {
            let dst = &mut out[y * width..(y + 1) * width];
            for k in 0..taps {
                let sy = (y as isize + k as isize - r as isize).clamp(0, height as isize - 1) as usize;
                let w = self.weights[k];
                for (o, &s) in dst.iter_mut().zip(&tmp[sy * width..(sy + 1) * width]) {
                    *o += w * s;
                }
            }
        }
        out
    }
}

/// Output of [`modulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Modulated {
    pub heatmap: Heatmap,
    /// Set when the smoothed map is flat; `heatmap` is then the unchanged input.
    pub degenerate: bool,
}

/// Gaussian smoothing followed by the magnitude-preserving rescale
/// `(h' - min h') / (max h' - min h') · max h`.
pub fn modulate(h: &Heatmap, params: GaussianParams) -> Modulated {
    ModulationKernel::new(params).apply(h)
}

impl ModulationKernel {
    pub fn apply(&self, h: &Heatmap) -> Modulated {
        let mut smoothed = self.convolve(h);
        let (lo, hi) = smoothed
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if hi <= lo {
            return Modulated { heatmap: h.clone(), degenerate: true };
        }
        let range = hi - lo;
        let target = h.max();
        for v in &mut smoothed {
            *v = (*v - lo) / range * target;
        }
        Modulated {
            heatmap: Heatmap::from_parts_unchecked(h.height(), h.width(), smoothed),
            degenerate: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::{synthesize_heatmap, Normalization};
    use crate::heatmap::{Pixel, Point};
    use crate::argmax_decode;
    use proptest::prelude::*;

    fn sigma(s: f64) -> GaussianParams {
        GaussianParams::new(s).unwrap()
    }

    /// Dense 2-D convolution with the outer-product kernel and clamped indices,
    /// followed by the affine rescale. Independent of the separable path.
    fn dense_oracle(h: &Heatmap, s: f64) -> Vec<f64> {
        let r = (3.0 * s).ceil() as isize;
        let mut k1: Vec<f64> = (-r..=r).map(|d| (-(d * d) as f64 / (2.0 * s * s)).exp()).collect();
        let sum: f64 = k1.iter().sum();
        k1.iter_mut().for_each(|w| *w /= sum);
        let (hh, ww) = (h.height() as isize, h.width() as isize);
        let mut out = vec![0.0; (hh * ww) as usize];
        for y in 0..hh {
            for x in 0..ww {
                let mut acc = 0.0;
                for dy in -r..=r {
                    for dx in -r..=r {
                        let sx = (x + dx).clamp(0, ww - 1) as usize;
                        let sy = (y + dy).clamp(0, hh - 1) as usize;
                        acc += k1[(dx + r) as usize] * k1[(dy + r) as usize] * h.get(sx, sy);
                    }
                }
                out[(y * ww + x) as usize] = acc;
            }
        }
        let lo = out.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = out.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        out.iter().map(|v| (v - lo) / (hi - lo) * h.max()).collect()
    }

    #[test]
    fn kernel_is_symmetric_normalised_positive() {
        for s in [0.3, 1.0, 2.0, 2.7, 3.0] {
            let k = ModulationKernel::new(sigma(s));
            assert_eq!(k.radius(), (3.0 * s).ceil() as usize);
            assert_eq!(k.weights().len(), 2 * k.radius() + 1);
            let w = k.weights();
            for i in 0..w.len() {
                assert_eq!(w[i], w[w.len() - 1 - i]);
                assert!(w[i] > 0.0);
            }
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn impulse_response() {
        let mut v = vec![0.0; 21 * 21];
        v[10 * 21 + 10] = 1.0;
        let h = Heatmap::new(21, 21, v).unwrap();
        let m = modulate(&h, sigma(2.0));
        assert!(!m.degenerate);
        let (peak, value) = argmax_decode(&m.heatmap);
        assert_eq!(peak, Pixel::new(10, 10));
        assert_eq!(value, 1.0);
        assert_eq!(m.heatmap.min(), 0.0);

        let oracle = dense_oracle(&h, 2.0);
        for (a, b) in m.heatmap.values().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn gaussian_keeps_its_argmax() {
        for c in [Point::new(12.0, 8.0), Point::new(12.4, 8.3), Point::new(20.6, 11.2)] {
            let h = synthesize_heatmap(c, sigma(2.0), 24, 32, Normalization::PeakOne).unwrap();
            let m = modulate(&h, sigma(2.0));
            assert_eq!(argmax_decode(&m.heatmap).0, argmax_decode(&h).0);
            let oracle = dense_oracle(&h, 2.0);
            let mut best = 0;
            for i in 0..oracle.len() {
                if oracle[i] > oracle[best] {
                    best = i;
                }
            }
            assert_eq!(argmax_decode(&m.heatmap).0, Pixel::new(best % 32, best / 32));
        }
    }

    #[test]
    fn constant_input_is_returned_unchanged() {
        let h = Heatmap::new(5, 6, vec![0.7; 30]).unwrap();
        let m = modulate(&h, sigma(2.0));
        assert!(m.degenerate);
        assert_eq!(m.heatmap, h);
    }

    proptest! {
        #[test]
        fn magnitude_contract(vals in proptest::collection::vec(0.0f64..1.0, 9 * 11), s in 0.5f64..3.0) {
            let h = Heatmap::new(9, 11, vals).unwrap();
            let m = modulate(&h, sigma(s));
            if !m.degenerate {
                prop_assert_eq!(m.heatmap.max(), h.max());
                prop_assert_eq!(m.heatmap.min(), 0.0);
                let oracle = dense_oracle(&h, s);
                for (a, b) in m.heatmap.values().iter().zip(&oracle) {
                    prop_assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }
}
