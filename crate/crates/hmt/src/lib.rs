//! File formats, benchmark harness and command-line front end for
//! [`heatmap_codec`].
//!
//! - [`format`] – the `HMAP` binary heatmap tensor file.
//! - [`keypoints`] – the JSON keypoint document.
//! - [`bench`] – seeded synthetic evaluation of decoders and the comparison
//!   report.
//! - [`cli`] – the `hmt` subcommands.

pub mod bench;
pub mod cli;
mod error;
pub mod format;
pub mod keypoints;

pub use crate::error::{Error, Result};
