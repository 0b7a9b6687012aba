//! Error type shared by all modules of the crate.

use std::path::PathBuf;

/// Errors produced by tensor I/O, transforms, and the cost model.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Underlying filesystem failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The file is not a valid tensor file (bad magic, version, or dtype).
    #[error("format error: {0}")]
    Format(String),

    /// Header and payload disagree about how many bytes should be present.
    #[error("length error: expected {expected} payload bytes, found {found}")]
    Length { expected: u64, found: u64 },

    /// Data violates an invariant (non-finite values, inconsistent dims).
    #[error("validation error: {0}")]
    Validation(String),

    /// A shape precondition does not hold (non-square length, C > N, ...).
    #[error("shape error: {0}")]
    Shape(String),

    /// A numeric parameter is outside its legal range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A cost-model config file could not be parsed.
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
