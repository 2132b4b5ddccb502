//! Second-order Taylor refinement of a heatmap maximum.
//!
//! Under the Gaussian model the log-heatmap is an exact quadratic, so the
//! mean satisfies `μ = m - H⁻¹ g`, where `g` and `H` are the gradient and
//! Hessian of the log-heatmap at the integer maximum `m`. Both are estimated
//! with 3×3 central differences.

use crate::decode::Fallback;
use crate::heatmap::{Heatmap, Pixel, Point};
use crate::{CodecError, Result};

/// Below this `|det H|` the Newton system is treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Log-values of the 3×3 neighbourhood around `m` and the derivative
/// estimates taken from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPatch {
    /// `values[1 + dy][1 + dx] = ln(max(h(m + (dx, dy)), floor))`.
    pub values: [[f64; 3]; 3],
    /// First derivative `(∂x, ∂y)`.
    pub gradient: [f64; 2],
    /// Second derivative, symmetric; `hessian[0][1] == hessian[1][0]`.
    pub hessian: [[f64; 2]; 2],
}

impl LogPatch {
    /// Computes derivative estimates from a 3×3 block of log values.
    pub fn from_log_values(values: [[f64; 3]; 3]) -> Self {
        let p = |dx: isize, dy: isize| values[(1 + dy) as usize][(1 + dx) as usize];
        let gx = (p(1, 0) - p(-1, 0)) / 2.0;
        let gy = (p(0, 1) - p(0, -1)) / 2.0;
        let dxx = p(1, 0) - 2.0 * p(0, 0) + p(-1, 0);
        let dyy = p(0, 1) - 2.0 * p(0, 0) + p(0, -1);
        let dxy = (p(1, 1) - p(1, -1) - p(-1, 1) + p(-1, -1)) / 4.0;
        Self { values, gradient: [gx, gy], hessian: [[dxx, dxy], [dxy, dyy]] }
    }

    pub fn determinant(&self) -> f64 {
        let [[a, b], [_, d]] = self.hessian;
        a * d - b * b
    }

    /// Both eigenvalues strictly negative.
    pub fn is_negative_definite(&self) -> bool {
        let [[a, _], [_, d]] = self.hessian;
        a < 0.0 && d < 0.0 && self.determinant() > 0.0
    }
}

/// Takes `ln(max(v, log_floor))` over the 3×3 patch centred at `m`.
pub fn build_log_patch(h: &Heatmap, m: Pixel, log_floor: f64) -> Result<LogPatch> {
    if !h.is_interior(m) {
        return Err(CodecError::BorderMax);
    }
    let mut values = [[0.0; 3]; 3];
    for (dy, row) in values.iter_mut().enumerate() {
        for (dx, v) in row.iter_mut().enumerate() {
            let raw = h.get(m.x + dx - 1, m.y + dy - 1);
            *v = libm::log(raw.max(log_floor));
        }
    }
    Ok(LogPatch::from_log_values(values))
}

/// One Newton step from `m`. Returns `m` itself when the Hessian is not
/// negative definite (or singular), and clamps the step to `step_cap` per
/// axis otherwise.
pub fn newton_refine(m: Pixel, patch: &LogPatch, step_cap: f64) -> (Point, Fallback) {
    let origin = Point::from(m);
    let det = patch.determinant();
    if !patch.is_negative_definite() || libm::fabs(det) < SINGULAR_DET {
        return (origin, Fallback::NonNegativeDefinite);
    }
    let [[a, b], [_, d]] = patch.hessian;
    let [gx, gy] = patch.gradient;
    // -H⁻¹ g with H⁻¹ = adj(H) / det
    let ox = -(d * gx - b * gy) / det;
    let oy = -(a * gy - b * gx) / det;
    if !(ox.is_finite() && oy.is_finite()) {
        return (origin, Fallback::NonNegativeDefinite);
    }
    if libm::fabs(ox) > step_cap || libm::fabs(oy) > step_cap {
        let cx = ox.clamp(-step_cap, step_cap);
        let cy = oy.clamp(-step_cap, step_cap);
        return (Point::new(origin.x + cx, origin.y + cy), Fallback::StepCapped);
    }
    (Point::new(origin.x + ox, origin.y + oy), Fallback::None)
}
