//! Error summaries and the PCK metric.

use alloc::vec::Vec;

use crate::decode::Fallback;
use crate::heatmap::Point;
use crate::{CodecError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PckResult {
    pub threshold: f64,
    pub norm: f64,
    /// Fraction of keypoints within `threshold·norm`, in `[0, 1]`.
    pub fraction: f64,
}

/// Percentage of correct keypoints. A prediction at exactly
/// `threshold·norm` counts as correct.
pub fn pck(predictions: &[Point], ground_truths: &[Point], threshold: f64, norm: f64) -> Result<PckResult> {
    if predictions.len() != ground_truths.len() {
        return Err(CodecError::InvalidInput("predictions and ground truths differ in length"));
    }
    if predictions.is_empty() {
        return Err(CodecError::InvalidInput("at least one keypoint is required"));
    }
    check_pck_params(threshold, norm)?;
    let errors: Vec<f64> = predictions.iter().zip(ground_truths).map(|(p, g)| p.distance(*g)).collect();
    Ok(pck_from_errors(&errors, threshold, norm))
}

fn check_pck_params(threshold: f64, norm: f64) -> Result<()> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(CodecError::InvalidConfig("pck threshold must be finite and > 0"));
    }
    if !(norm.is_finite() && norm > 0.0) {
        return Err(CodecError::InvalidConfig("pck norm must be finite and > 0"));
    }
    Ok(())
}

/// PCK over precomputed Euclidean errors.
pub fn pck_from_errors(errors: &[f64], threshold: f64, norm: f64) -> PckResult {
    let radius = threshold * norm;
    let hits = errors.iter().filter(|e| **e <= radius).count();
    let fraction = if errors.is_empty() { 0.0 } else { hits as f64 / errors.len() as f64 };
    PckResult { threshold, norm, fraction }
}

/// Location statistics of a set of non-negative errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSummary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
    pub max: f64,
    /// Standard error of the mean (sample standard deviation / √n).
    pub std_error: f64,
}

impl ErrorSummary {
    /// Summarises `errors`; the mean is accumulated in input order so equal
    /// inputs give bit-equal summaries. Returns `None` for an empty slice.
    pub fn from_errors(errors: &[f64]) -> Option<Self> {
        if errors.is_empty() {
            return None;
        }
        let n = errors.len() as f64;
        let mean = errors.iter().sum::<f64>() / n;
        let std_error = if errors.len() > 1 {
            let ss: f64 = errors.iter().map(|e| (e - mean) * (e - mean)).sum();
            libm::sqrt(ss / (n - 1.0)) / libm::sqrt(n)
        } else {
            0.0
        };
        let mut sorted = errors.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Self {
            count: errors.len(),
            mean,
            median: quantile_sorted(&sorted, 0.5),
            p95: quantile_sorted(&sorted, 0.95),
            max: sorted[sorted.len() - 1],
            std_error,
        })
    }
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FallbackCounts {
    pub none: usize,
    pub border: usize,
    pub non_negative_definite: usize,
    pub step_capped: usize,
    pub ambiguous_second_max: usize,
}

impl FallbackCounts {
    pub fn record(&mut self, fallback: Fallback) {
        *self.slot(fallback) += 1;
    }

    pub fn get(&self, fallback: Fallback) -> usize {
        match fallback {
            Fallback::None => self.none,
            Fallback::Border => self.border,
            Fallback::NonNegativeDefinite => self.non_negative_definite,
            Fallback::StepCapped => self.step_capped,
            Fallback::AmbiguousSecondMax => self.ambiguous_second_max,
        }
    }

    fn slot(&mut self, fallback: Fallback) -> &mut usize {
        match fallback {
            Fallback::None => &mut self.none,
            Fallback::Border => &mut self.border,
            Fallback::NonNegativeDefinite => &mut self.non_negative_definite,
            Fallback::StepCapped => &mut self.step_capped,
            Fallback::AmbiguousSecondMax => &mut self.ambiguous_second_max,
        }
    }

    pub fn total(&self) -> usize {
        Fallback::ALL.iter().map(|f| self.get(*f)).sum()
    }
}

impl FromIterator<Fallback> for FallbackCounts {
    fn from_iter<I: IntoIterator<Item = Fallback>>(iter: I) -> Self {
        let mut counts = Self::default();
        for f in iter {
            counts.record(f);
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn pck_examples() {
        let gts = vec![Point::new(1.0, 2.0), Point::new(5.0, 5.0)];
        assert_eq!(pck(&gts, &gts, 0.5, 10.0).unwrap().fraction, 1.0);

        let r = pck(&[Point::new(3.0, 4.0)], &[Point::new(0.0, 0.0)], 0.5, 10.0).unwrap();
        assert_eq!(r.fraction, 1.0);

        let norm = 3.0;
        let preds = vec![Point::new(1.0, 2.0), Point::new(5.0 + 10.0 * norm, 5.0)];
        assert_eq!(pck(&preds, &gts, 0.5, norm).unwrap().fraction, 0.5);

        assert!(matches!(pck(&preds[..1], &gts, 0.5, 1.0), Err(CodecError::InvalidInput(_))));
        assert!(pck(&preds, &gts, 0.0, 1.0).is_err());
        assert!(pck(&preds, &gts, 0.5, 0.0).is_err());
    }

    #[test]
    fn summary_single_sample() {
        let s = ErrorSummary::from_errors(&[0.7]).unwrap();
        assert_eq!((s.mean, s.median, s.p95, s.std_error), (0.7, 0.7, 0.7, 0.0));
        assert!(ErrorSummary::from_errors(&[]).is_none());
    }

    #[test]
    fn summary_quantiles() {
        let errs: Vec<f64> = (0..=100).rev().map(|i| i as f64).collect();
        let s = ErrorSummary::from_errors(&errs).unwrap();
        assert_eq!(s.mean, 50.0);
        assert_eq!(s.median, 50.0);
        assert_eq!(s.p95, 95.0);
        assert_eq!(s.max, 100.0);
        let s = ErrorSummary::from_errors(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.median, 2.5);
    }

    #[test]
    fn fallback_counts_sum() {
        let c: FallbackCounts = [Fallback::None, Fallback::Border, Fallback::None, Fallback::StepCapped]
            .into_iter()
            .collect();
        assert_eq!(c.none, 2);
        assert_eq!(c.border, 1);
        assert_eq!(c.total(), 4);
    }

    proptest! {
        #[test]
        fn pck_monotone_in_threshold(errs in proptest::collection::vec(0.0f64..10.0, 1..50),
                                     t1 in 0.01f64..5.0, dt in 0.0f64..5.0) {
            let a = pck_from_errors(&errs, t1, 1.5).fraction;
            let b = pck_from_errors(&errs, t1 + dt, 1.5).fraction;
            prop_assert!(a <= b);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
