use thiserror::Error;

use crate::config::Origin;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("numerical guard: {0}")]
    Guard(String),

    #[error("{failed} verification check(s) failed")]
    VerifyFailed { failed: usize },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    pub fn usage(origin: &Origin, key: &str, reason: String) -> Self {
        CliError::Usage(format!("{origin} ({key}): {reason}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) | CliError::Output(_) => 1,
            CliError::Guard(_) => 2,
            CliError::VerifyFailed { .. } => 3,
        }
    }
}

impl From<spinberry_core::Error> for CliError {
    fn from(e: spinberry_core::Error) -> Self {
        use spinberry_core::Error as E;
        match e {
            E::Aliasing { .. }
            | E::ZeroSample { .. }
            | E::IntegrationFailure { .. }
            | E::DerivativeFailure { .. }
            | E::EigenFailure
            | E::NotUnitary { .. } => CliError::Guard(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
