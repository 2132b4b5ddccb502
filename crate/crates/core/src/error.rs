use core::fmt;

/// Errors raised by the codec.
///
/// Decoding degeneracies (border maxima, flat curvature) are not errors; they
/// are reported through [`crate::Fallback`] on the decode result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodecError {
    /// A configuration value is out of range. Names the offending field.
    InvalidConfig(&'static str),
    /// Caller-supplied data violates a precondition.
    InvalidInput(&'static str),
    /// Heatmap construction failed (degenerate shape or non-finite values).
    InvalidHeatmap(&'static str),
    /// Every pixel holds the same activation, so no second maximum exists.
    AmbiguousSecondMax,
    /// The maximum lies on the heatmap border; no 3×3 neighbourhood exists.
    BorderMax,
}

impl fmt::Display for CodecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodecError::InvalidConfig(what) => write!(f, "invalid config: {what}"),
            CodecError::InvalidInput(what) => write!(f, "invalid input: {what}"),
            CodecError::InvalidHeatmap(what) => write!(f, "invalid heatmap: {what}"),
            CodecError::AmbiguousSecondMax => f.write_str("all activations are equal, no second maximum"),
            CodecError::BorderMax => f.write_str("maximum lies on the heatmap border"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CodecError {}
