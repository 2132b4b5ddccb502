//! Coordinate encoding: image-space joint coordinate to Gaussian heatmap.
//!
//! The pipeline is resolution reduction `g' = g / λ`, optional quantisation
//! `g'' = quantise(g')`, then synthesis of an isotropic Gaussian centred at
//! `g''` (biased) or directly at `g'` (unbiased).

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::heatmap::{GaussianParams, GridPoint, Heatmap, Point, MIN_SIDE};
use crate::{CodecError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EncodingMode {
    /// Centre the kernel at the quantised coordinate.
    Biased,
    /// Centre the kernel at the exact sub-pixel coordinate.
    #[default]
    Unbiased,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quantiser {
    #[default]
    Floor,
    Ceil,
    /// Ties resolve half-away-from-zero.
    Round,
}

impl Quantiser {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Quantiser::Floor => libm::floor(v),
            Quantiser::Ceil => libm::ceil(v),
            Quantiser::Round => libm::round(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Amplitude `1 / (2πσ²)`.
    Normalized,
    /// Amplitude 1, so the centre pixel of an on-grid kernel is exactly 1.
    #[default]
    PeakOne,
}

impl Normalization {
    pub fn amplitude(self, params: GaussianParams) -> f64 {
        match self {
            Normalization::Normalized => 1.0 / (2.0 * PI * params.variance()),
            Normalization::PeakOne => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingConfig {
    pub lambda: f64,
    pub sigma: GaussianParams,
    pub mode: EncodingMode,
    /// Ignored for [`EncodingMode::Unbiased`].
    pub quantiser: Quantiser,
    pub normalization: Normalization,
}

impl EncodingConfig {
    /// Unbiased, floor quantiser, peak-one amplitude.
    pub fn new(lambda: f64, sigma: GaussianParams) -> Self {
        Self {
            lambda,
            sigma,
            mode: EncodingMode::default(),
            quantiser: Quantiser::default(),
            normalization: Normalization::default(),
        }
    }

    pub fn with_mode(mut self, mode: EncodingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_quantiser(mut self, quantiser: Quantiser) -> Self {
        self.quantiser = quantiser;
        self
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)
    }
}

/// A joint in all three coordinate frames produced during encoding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthJoint {
    /// Original-image coordinate.
    pub g: Point,
    /// Heatmap-space coordinate `g / λ`.
    pub g_prime: Point,
    /// Quantised heatmap coordinate; only set for biased encoding.
    pub g_double_prime: Option<GridPoint>,
}

impl GroundTruthJoint {
    /// The point the Gaussian kernel was centred on.
    pub fn center(&self) -> Point {
        match self.g_double_prime {
            Some(q) => q.into(),
            None => self.g_prime,
        }
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(CodecError::InvalidConfig("lambda must be finite and > 0"));
    }
    Ok(())
}

/// `g / λ`, component-wise.
pub fn reduce_coordinate(g: Point, lambda: f64) -> Result<Point> {
    check_lambda(lambda)?;
    if !g.is_finite() {
        return Err(CodecError::InvalidInput("coordinate must be finite"));
    }
    Ok(Point::new(g.x / lambda, g.y / lambda))
}

pub fn quantise_coordinate(g_prime: Point, quantiser: Quantiser) -> GridPoint {
    GridPoint::new(quantiser.apply(g_prime.x) as i64, quantiser.apply(g_prime.y) as i64)
}

/// Evaluates the Gaussian at every pixel of a `height × width` grid.
///
/// No truncation window is applied. The kernel is evaluated as a product of
/// the per-axis factors `exp(-(x-u)²/2σ²)·exp(-(y-v)²/2σ²)`, which keeps
/// values mirrored about an on-grid centre bit-for-bit.
pub fn synthesize_heatmap(
    center: Point,
    params: GaussianParams,
    height: usize,
    width: usize,
    normalization: Normalization,
) -> Result<Heatmap> {
    if height < MIN_SIDE || width < MIN_SIDE {
        return Err(CodecError::InvalidConfig("heatmap height and width must be at least 3"));
    }
    if !center.is_finite() {
        return Err(CodecError::InvalidInput("centre must be finite"));
    }
    let two_var = 2.0 * params.variance();
    let axis = |n: usize, c: f64| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let d = i as f64 - c;
                libm::exp(-(d * d) / two_var)
            })
            .collect()
    };
    let ex = axis(width, center.x);
    let ey = axis(height, center.y);
    let amplitude = normalization.amplitude(params);

    let mut values = Vec::with_capacity(height * width);
    for &fy in &ey {
        match normalization {
            Normalization::PeakOne => values.extend(ex.iter().map(|&fx| fx * fy)),
            Normalization::Normalized => values.extend(ex.iter().map(|&fx| amplitude * (fx * fy))),
        }
    }
    Ok(Heatmap::from_parts_unchecked(height, width, values))
}

/// Encodes an original-image joint into a heatmap target.
pub fn encode(
    joint: Point,
    config: &EncodingConfig,
    height: usize,
    width: usize,
) -> Result<(Heatmap, GroundTruthJoint)> {
    config.validate()?;
    let g_prime = reduce_coordinate(joint, config.lambda)?;
    let g_double_prime = match config.mode {
        EncodingMode::Biased => Some(quantise_coordinate(g_prime, config.quantiser)),
        EncodingMode::Unbiased => None,
    };
    let gt = GroundTruthJoint { g: joint, g_prime, g_double_prime };
    let heatmap = synthesize_heatmap(gt.center(), config.sigma, height, width, config.normalization)?;
    Ok((heatmap, gt))
}
