use thiserror::Error;

use treespec::ErrorClass;

/// Failures of a CLI run, each with a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Parse(_) => 1,
            CliError::Validation(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub fn class(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io",
            CliError::Parse(_) => "parse",
            CliError::Validation(_) => "validation",
            CliError::NonConvergence(_) => "non-convergence",
            CliError::Internal(_) => "internal",
        }
    }
}

impl From<treespec::Error> for CliError {
    fn from(e: treespec::Error) -> Self {
        match e.class() {
            ErrorClass::Validation => CliError::Validation(e.to_string()),
            ErrorClass::Internal => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
