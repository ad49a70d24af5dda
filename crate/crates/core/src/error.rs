use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Counts or sequences were built for a different number of cells.
    #[error("dimension mismatch: distribution has {expected} cells, data has {found}")]
    DimensionMismatch { expected: u64, found: u64 },

    /// Malformed data (counts, probabilities, sequences).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested computation would exceed a memory guard.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },
}

impl Error {
    /// True for errors caused by bad data rather than bad parameters.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidInput(_)
                | Error::Io { .. }
                | Error::Parse { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid_param(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
