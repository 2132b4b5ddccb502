//! Heatmap to coordinate decoding.

use crate::encode::check_lambda;
use crate::heatmap::{GaussianParams, Heatmap, Pixel, Point};
use crate::modulate::ModulationKernel;
use crate::taylor::{build_log_patch, newton_refine};
use crate::{CodecError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DecodeMethod {
    Argmax,
    StandardShift,
    #[default]
    Dark,
}

impl DecodeMethod {
    pub const ALL: [DecodeMethod; 3] = [DecodeMethod::Argmax, DecodeMethod::StandardShift, DecodeMethod::Dark];

    pub fn label(self) -> &'static str {
        match self {
            DecodeMethod::Argmax => "argmax",
            DecodeMethod::StandardShift => "shift",
            DecodeMethod::Dark => "dark",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.label() == s)
    }
}

/// Which degradation path, if any, produced a decode result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Fallback {
    #[default]
    None,
    /// Maximum on the border; the standard shift was used instead.
    Border,
    /// Hessian not negative definite or singular; `p = m`.
    NonNegativeDefinite,
    /// Newton step exceeded the per-axis cap and was clamped.
    StepCapped,
    /// No second maximum exists (flat heatmap); `p = m`.
    AmbiguousSecondMax,
}

impl Fallback {
    pub const ALL: [Fallback; 5] = [
        Fallback::None,
        Fallback::Border,
        Fallback::NonNegativeDefinite,
        Fallback::StepCapped,
        Fallback::AmbiguousSecondMax,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Fallback::None => "none",
            Fallback::Border => "border",
            Fallback::NonNegativeDefinite => "non_negative_definite",
            Fallback::StepCapped => "step_capped",
            Fallback::AmbiguousSecondMax => "ambiguous_second_max",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.label() == s)
    }

    /// Stable numeric code for array-oriented consumers.
    pub fn code(self) -> u8 {
        match self {
            Fallback::None => 0,
            Fallback::Border => 1,
            Fallback::NonNegativeDefinite => 2,
            Fallback::StepCapped => 3,
            Fallback::AmbiguousSecondMax => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeConfig {
    pub method: DecodeMethod,
    /// Smooth and rescale the heatmap before locating the maximum.
    pub modulate: bool,
    /// Required for `modulate` and for [`DecodeMethod::Dark`].
    pub sigma: Option<GaussianParams>,
    pub lambda: f64,
    /// Per-axis bound on the Newton step, heatmap pixels.
    pub step_cap: f64,
    /// Activations are clamped to this before taking logs.
    pub log_floor: f64,
}

pub const DEFAULT_STEP_CAP: f64 = 1.0;
pub const DEFAULT_LOG_FLOOR: f64 = 1e-10;

impl DecodeConfig {
    fn base(method: DecodeMethod, lambda: f64) -> Self {
        Self {
            method,
            modulate: false,
            sigma: None,
            lambda,
            step_cap: DEFAULT_STEP_CAP,
            log_floor: DEFAULT_LOG_FLOOR,
        }
    }

    pub fn argmax(lambda: f64) -> Self {
        Self::base(DecodeMethod::Argmax, lambda)
    }

    pub fn standard_shift(lambda: f64) -> Self {
        Self::base(DecodeMethod::StandardShift, lambda)
    }

    /// Full pipeline with modulation enabled.
    pub fn dark(lambda: f64, sigma: GaussianParams) -> Self {
        Self { modulate: true, sigma: Some(sigma), ..Self::base(DecodeMethod::Dark, lambda) }
    }

    pub fn with_modulation(mut self, modulate: bool) -> Self {
        self.modulate = modulate;
        self
    }

    pub fn with_sigma(mut self, sigma: GaussianParams) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn with_step_cap(mut self, step_cap: f64) -> Self {
        self.step_cap = step_cap;
        self
    }

    pub fn with_log_floor(mut self, log_floor: f64) -> Self {
        self.log_floor = log_floor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        if !(self.step_cap.is_finite() && self.step_cap > 0.0) {
            return Err(CodecError::InvalidConfig("step_cap must be finite and > 0"));
        }
        if !(self.log_floor.is_finite() && self.log_floor > 0.0) {
            return Err(CodecError::InvalidConfig("log_floor must be finite and > 0"));
        }
        if self.modulate && self.sigma.is_none() {
            return Err(CodecError::InvalidConfig("sigma is required when modulation is enabled"));
        }
        if self.method == DecodeMethod::Dark && self.sigma.is_none() {
            return Err(CodecError::InvalidConfig("sigma is required for dark decoding"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeResult {
    /// Integer maximum of the (possibly modulated) heatmap.
    pub m: Pixel,
    /// Heatmap-space estimate.
    pub p: Point,
    /// Original-image estimate, `λ·p`.
    pub p_hat: Point,
    /// Maximum of the input heatmap, before modulation.
    pub confidence: f64,
    pub fallback: Fallback,
}

/// First maximal pixel in row-major order.
pub fn argmax_decode(h: &Heatmap) -> (Pixel, f64) {
    let values = h.values();
    let mut best = 0;
    let mut best_v = values[0];
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    (Pixel::new(best % h.width(), best / h.width()), best_v)
}

/// Highest pixel other than `m`, first in row-major order among ties.
pub fn second_max(h: &Heatmap, m: Pixel) -> Result<Pixel> {
    let values = h.values();
    let skip = m.y * h.width() + m.x;
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return Err(CodecError::AmbiguousSecondMax);
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if i == skip {
            continue;
        }
        match best {
            Some((_, bv)) if v <= bv => {}
            _ => best = Some((i, v)),
        }
    }
    // at least 9 pixels, so `best` is always set
    let (i, _) = best.ok_or(CodecError::AmbiguousSecondMax)?;
    Ok(Pixel::new(i % h.width(), i / h.width()))
}

/// Moves the maximum a quarter pixel towards the second maximum.
pub fn standard_shift_decode(h: &Heatmap) -> Result<Point> {
    let (m, _) = argmax_decode(h);
    let s = second_max(h, m)?;
    Ok(shift_towards(m, s))
}

fn shift_towards(m: Pixel, s: Pixel) -> Point {
    let dx = s.x as f64 - m.x as f64;
    let dy = s.y as f64 - m.y as f64;
    let norm = libm::hypot(dx, dy);
    Point::new(m.x as f64 + 0.25 * dx / norm, m.y as f64 + 0.25 * dy / norm)
}

/// `λ·p`.
pub fn recover_resolution(p: Point, lambda: f64) -> Result<Point> {
    check_lambda(lambda)?;
    Ok(p.scale(lambda))
}

/// Decodes with the method named in `config`.
pub fn decode(h: &Heatmap, config: &DecodeConfig) -> Result<DecodeResult> {
    config.validate()?;
    let kernel = match (config.modulate, config.sigma) {
        (true, Some(sigma)) => Some(ModulationKernel::new(sigma)),
        _ => None,
    };
    Ok(decode_validated(h, config, kernel.as_ref()))
}

/// Modulation (optional), Taylor refinement at the maximum, resolution
/// recovery. Degenerate inputs degrade to coarser estimates and are flagged
/// in [`DecodeResult::fallback`]; only an invalid config is an error.
pub fn dark_decode(h: &Heatmap, config: &DecodeConfig) -> Result<DecodeResult> {
    decode(h, &DecodeConfig { method: DecodeMethod::Dark, ..*config })
}

/// Decoder with a prebuilt modulation kernel, for decoding many heatmaps
/// under one config.
#[derive(Debug, Clone)]
pub struct Decoder {
    config: DecodeConfig,
    kernel: Option<ModulationKernel>,
}

impl Decoder {
    pub fn new(config: DecodeConfig) -> Result<Self> {
        config.validate()?;
        let kernel = match (config.modulate, config.sigma) {
            (true, Some(sigma)) => Some(ModulationKernel::new(sigma)),
            _ => None,
        };
        Ok(Self { config, kernel })
    }

    pub fn config(&self) -> &DecodeConfig {
        &self.config
    }

    pub fn decode(&self, h: &Heatmap) -> DecodeResult {
        decode_validated(h, &self.config, self.kernel.as_ref())
    }
}

fn decode_validated(h: &Heatmap, config: &DecodeConfig, kernel: Option<&ModulationKernel>) -> DecodeResult {
    let confidence = h.max();
    let modulated;
    let work = match kernel {
        Some(k) => {
            modulated = k.apply(h).heatmap;
            &modulated
        }
        None => h,
    };
    let (m, _) = argmax_decode(work);
    let (p, fallback) = match config.method {
        DecodeMethod::Argmax => (Point::from(m), Fallback::None),
        DecodeMethod::StandardShift => shift_or_argmax(work, m),
        DecodeMethod::Dark => match build_log_patch(work, m, config.log_floor) {
            Ok(patch) => newton_refine(m, &patch, config.step_cap),
            Err(_) => match shift_or_argmax(work, m) {
                (p, Fallback::None) => (p, Fallback::Border),
                degraded => degraded,
            },
        },
    };
    DecodeResult { m, p, p_hat: p.scale(config.lambda), confidence, fallback }
}

fn shift_or_argmax(h: &Heatmap, m: Pixel) -> (Point, Fallback) {
    match second_max(h, m) {
        Ok(s) => (shift_towards(m, s), Fallback::None),
        Err(_) => (Point::from(m), Fallback::AmbiguousSecondMax),
    }
}
