use std::process::ExitCode;

use polarsim_core::Error;

/// Failure of one command, carrying its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unreadable or invalid input, violated preconditions.
    #[error("{0}")]
    Input(String),
    /// The engine detected a numerical or kernel invariant breach.
    #[error("invariant breach: {0}")]
    Invariant(String),
    /// An executed schedule missed its post-condition.
    #[error("post-condition failed: {0}")]
    PostCondition(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Input(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::PostCondition(_) => 4,
        })
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateUpdate { .. } | Error::KernelViolation { .. } => {
                CliError::Invariant(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
