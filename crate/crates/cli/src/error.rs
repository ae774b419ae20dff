use bergman_core::Error as CoreError;
use serde_json::json;
use speclab::SpecError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// 0 success, 1 failed checks, 2 invalid input, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed { .. } => 1,
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Numerical(_) => "numerical",
            CliError::ChecksFailed { .. } => "checks-failed",
            CliError::Io(_) => "io",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": self.kind(), "message": self.to_string(), "exit": self.exit_code() })
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Parse(_)
            | CoreError::InvalidJets(_)
            | CoreError::DimensionMismatch(_)
            | CoreError::IndexOutOfRange { .. }
            | CoreError::NotKahler
            | CoreError::InvalidModel(_)
            | CoreError::PiUnavailable => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        match e {
            SpecError::Core(c) => c.into(),
            SpecError::Io(m) => CliError::Io(m),
            SpecError::InvalidSpec(_) | SpecError::QuantizationViolated(_) | SpecError::GridTooCoarse { .. } => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
