//! Domain types shared by the encoder and the decoders.

use alloc::vec::Vec;

use crate::{CodecError, Result};

/// A real coordinate pair. `x` runs along columns (u), `y` along rows (v).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }

    /// Chebyshev (per-axis maximum) distance.
    pub fn max_axis_distance(&self, other: Point) -> f64 {
        libm::fmax(libm::fabs(self.x - other.x), libm::fabs(self.y - other.y))
    }

    pub fn scale(&self, factor: f64) -> Point {
        Point::new(self.x * factor, self.y * factor)
    }
}

impl From<Pixel> for Point {
    fn from(p: Pixel) -> Self {
        Point::new(p.x as f64, p.y as f64)
    }
}

impl From<GridPoint> for Point {
    fn from(p: GridPoint) -> Self {
        Point::new(p.x as f64, p.y as f64)
    }
}

/// A pixel index inside a heatmap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pixel {
    pub x: usize,
    pub y: usize,
}

impl Pixel {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

/// An integer coordinate that may lie off the heatmap grid (quantised centres).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridPoint {
    pub x: i64,
    pub y: i64,
}

impl GridPoint {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }
}

/// Isotropic Gaussian spread. The covariance is `diag(sigma², sigma²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    sigma: f64,
}

impl GaussianParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(CodecError::InvalidConfig("sigma must be finite and > 0"));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    /// `diag(sigma², sigma²)` as a row-major 2×2 matrix.
    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let v = self.variance();
        [[v, 0.0], [0.0, v]]
    }
}

/// Smallest accepted heatmap side; the decoder needs an interior 3×3 patch.
pub const MIN_SIDE: usize = 3;

/// An `height × width` grid of finite activations for a single joint,
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl Heatmap {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        check_shape(height, width)?;
        if values.len() != height * width {
            return Err(CodecError::InvalidHeatmap("value count does not match height × width"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CodecError::InvalidHeatmap("non-finite activation"));
        }
        Ok(Self { height, width, values })
    }

    /// Builds a heatmap by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_shape(height, width)?;
        let mut values = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(height, width, values)
    }

    /// Skips validation; callers guarantee shape and finiteness.
    pub(crate) fn from_parts_unchecked(height: usize, width: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), height * width);
        Self { height, width, values }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.values[y * self.width..(y + 1) * self.width]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn at(&self, p: Pixel) -> f64 {
        self.get(p.x, p.y)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when `p` has a full 3×3 neighbourhood.
    pub fn is_interior(&self, p: Pixel) -> bool {
        p.x >= 1 && p.y >= 1 && p.x + 2 <= self.width && p.y + 2 <= self.height
    }

    /// Element-wise multiple `c·h`. Fails if the product overflows.
    pub fn scaled(&self, c: f64) -> Result<Heatmap> {
        Heatmap::new(self.height, self.width, self.values.iter().map(|v| v * c).collect())
    }
}

fn check_shape(height: usize, width: usize) -> Result<()> {
    if height < MIN_SIDE || width < MIN_SIDE {
        return Err(CodecError::InvalidHeatmap("height and width must be at least 3"));
    }
    Ok(())
}
