use std::io;
use std::path::PathBuf;

use heatmap_codec::CodecError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    /// A file failed validation. `field` names what was wrong, e.g. `magic`,
    /// `length`, `nan`, or a missing JSON key.
    #[error("format error ({field}): {detail}")]
    Format { field: String, detail: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

impl Error {
    pub(crate) fn format(field: &str, detail: impl Into<String>) -> Self {
        Error::Format { field: field.to_owned(), detail: detail.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// The offending field of a [`Error::Format`].
    pub fn format_field(&self) -> Option<&str> {
        match self {
            Error::Format { field, .. } => Some(field),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
