//! Seeded synthetic trials for benchmarking decoders.
//!
//! Trial `i` of a `TrialSpec` is a pure function of `(seed, i)`: it draws from a
//! ChaCha8 stream keyed by `seed` and positioned on stream `i`, so trials can
//! be generated in any order or in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::encode::{encode, EncodingConfig, EncodingMode, Normalization, Quantiser};
use crate::heatmap::{GaussianParams, Heatmap, Point};
use crate::{CodecError, Result};

/// Margin kept between drawn centres and the heatmap border, in pixels.
pub const CENTER_MARGIN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseKind {
    #[default]
    None,
    /// `N(0, (amplitude·peak)²)` added to every pixel.
    GaussianAdditive,
    /// With probability `density`, a pixel gains `amplitude·peak`.
    Impulse,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    /// Fraction of the clean heatmap's peak value.
    pub amplitude: f64,
    /// Impulse probability per pixel.
    pub density: f64,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn gaussian(amplitude: f64) -> Self {
        Self { kind: NoiseKind::GaussianAdditive, amplitude, density: 0.0 }
    }

    pub fn impulse(amplitude: f64, density: f64) -> Self {
        Self { kind: NoiseKind::Impulse, amplitude, density }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(CodecError::InvalidConfig("noise amplitude must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.density) {
            return Err(CodecError::InvalidConfig("noise density must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Perturbs `values` in place; results are clamped at 0 from below.
    pub fn apply<R: Rng + ?Sized>(&self, values: &mut [f64], peak: f64, rng: &mut R) {
        let scale = self.amplitude * peak;
        match self.kind {
            NoiseKind::None => {}
            NoiseKind::GaussianAdditive => {
                for v in values.iter_mut() {
                    let n: f64 = rng.sample(StandardNormal);
                    *v = (*v + scale * n).max(0.0);
                }
            }
            NoiseKind::Impulse => {
                for v in values.iter_mut() {
                    if rng.random::<f64>() < self.density {
                        *v += scale;
                    }
                    *v = v.max(0.0);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSpec {
    pub count: usize,
    pub height: usize,
    pub width: usize,
    /// Inclusive `[low, high]` range σ is drawn from.
    pub sigma_range: (f64, f64),
    pub lambda: f64,
    pub encoding_mode: EncodingMode,
    pub quantiser: Quantiser,
    pub normalization: Normalization,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl TrialSpec {
    /// Noiseless unbiased suite with peak-one targets.
    pub fn new(count: usize, height: usize, width: usize, sigma_range: (f64, f64), lambda: f64, seed: u64) -> Self {
        Self {
            count,
            height,
            width,
            sigma_range,
            lambda,
            encoding_mode: EncodingMode::Unbiased,
            quantiser: Quantiser::Floor,
            normalization: Normalization::PeakOne,
            noise: NoiseModel::none(),
            seed,
        }
    }

    pub fn with_encoding(mut self, mode: EncodingMode, quantiser: Quantiser) -> Self {
        self.encoding_mode = mode;
        self.quantiser = quantiser;
        self
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(CodecError::InvalidConfig("trial count must be >= 1"));
        }
        // centres are drawn from [2, W-3] × [2, H-3]
        if self.height < 5 || self.width < 5 {
            return Err(CodecError::InvalidConfig("trial heatmaps must be at least 5×5"));
        }
        let (lo, hi) = self.sigma_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(CodecError::InvalidConfig("sigma range must satisfy 0 < low <= high"));
        }
        crate::encode::check_lambda(self.lambda)?;
        self.noise.validate()
    }

    /// σ midpoint, used as the modulation σ when benchmarking.
    pub fn nominal_sigma(&self) -> f64 {
        0.5 * (self.sigma_range.0 + self.sigma_range.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub heatmap: Heatmap,
    /// Ground-truth joint in original-image space (before any quantisation).
    pub center: Point,
    /// The heatmap-space centre the joint was drawn at.
    pub center_heatmap: Point,
    pub sigma: f64,
}

/// Generator for trial `index`.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn generate_trial(spec: &TrialSpec, index: usize) -> Result<Trial> {
    spec.validate()?;
    if index >= spec.count {
        return Err(CodecError::InvalidInput("trial index out of range"));
    }
    let mut rng = trial_rng(spec.seed, index);
    let (lo, hi) = spec.sigma_range;
    let sigma = lo + (hi - lo) * rng.random::<f64>();
    let span_x = spec.width as f64 - 1.0 - 2.0 * CENTER_MARGIN;
    let span_y = spec.height as f64 - 1.0 - 2.0 * CENTER_MARGIN;
    let center_heatmap = Point::new(
        CENTER_MARGIN + span_x * rng.random::<f64>(),
        CENTER_MARGIN + span_y * rng.random::<f64>(),
    );
    let center = center_heatmap.scale(spec.lambda);

    let config = EncodingConfig::new(spec.lambda, GaussianParams::new(sigma)?)
        .with_mode(spec.encoding_mode)
        .with_quantiser(spec.quantiser)
        .with_normalization(spec.normalization);
    let (clean, _) = encode(center, &config, spec.height, spec.width)?;

    let heatmap = if spec.noise.kind == NoiseKind::None {
        clean
    } else {
        let peak = clean.max();
        let mut values = clean.into_values();
        spec.noise.apply(&mut values, peak, &mut rng);
        Heatmap::new(spec.height, spec.width, values)?
    };
    Ok(Trial { heatmap, center, center_heatmap, sigma })
}
