use thiserror::Error;

/// Failure of a subcommand, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration (exit 1).
    #[error("{0}")]
    Usage(String),
    /// Unreadable or malformed data (exit 2).
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<chi2_regimes::Error> for CliError {
    fn from(e: chi2_regimes::Error) -> Self {
        if e.is_data_error() || matches!(e, chi2_regimes::Error::ResourceLimit(_)) {
            CliError::Data(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
