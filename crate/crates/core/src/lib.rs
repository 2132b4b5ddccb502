//! Keypoint heatmap codec.
//!
//! Encodes joint coordinates into Gaussian heatmaps and decodes predicted
//! heatmaps back into sub-pixel coordinates. Three decoders are provided:
//!
//! - [`DecodeMethod::Argmax`] – the maximal pixel, scaled to image space.
//! - [`DecodeMethod::StandardShift`] – the maximal pixel moved a quarter pixel
//!   towards the second-highest activation.
//! - [`DecodeMethod::Dark`] – distribution-aware decoding: optional Gaussian
//!   modulation of the heatmap, then a second-order Taylor expansion of the
//!   log-heatmap around the maximum solved with one Newton step.
//!
//! Encoding comes in a biased (quantised centre) and an unbiased (sub-pixel
//! centre) flavour, see [`encode`].
//!
//! The [`synth`] and [`metrics`] modules generate seeded synthetic trials and
//! summarise decode errors; they back the benchmark harness in the `hmt`
//! crate.
//!
//! # Features
//!
//! - `std` *(default)* – implements `std::error::Error` for [`CodecError`].
//!   Without it the crate is `no_std` + `alloc`; all floating point math goes
//!   through `libm` either way, so results are bit-identical across the two
//!   configurations.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod decode;
pub mod encode;
mod error;
pub mod heatmap;
pub mod metrics;
pub mod modulate;
pub mod synth;
pub mod taylor;

pub use crate::decode::{
    argmax_decode, dark_decode, decode, recover_resolution, second_max, standard_shift_decode,
    DecodeConfig, DecodeMethod, DecodeResult, Decoder, Fallback,
};
pub use crate::encode::{
    encode, quantise_coordinate, reduce_coordinate, synthesize_heatmap, EncodingConfig,
    EncodingMode, GroundTruthJoint, Normalization, Quantiser,
};
pub use crate::error::CodecError;
pub use crate::heatmap::{GaussianParams, GridPoint, Heatmap, Pixel, Point};
pub use crate::metrics::{pck, ErrorSummary, FallbackCounts, PckResult};
pub use crate::modulate::{modulate, Modulated, ModulationKernel};
pub use crate::synth::{generate_trial, NoiseKind, NoiseModel, Trial, TrialSpec};
pub use crate::taylor::{build_log_patch, newton_refine, LogPatch};

pub type Result<T> = core::result::Result<T, CodecError>;
