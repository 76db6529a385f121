//! Configuration-driven experiment runner and self-check suite.

pub mod config;
pub mod runner;
pub mod selfcheck;

use serde_json::json;
use thiserror::Error;

/// Failure of a CLI invocation, each kind with its own exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(crate::Error),
    #[error("masing threshold violated: {0}")]
    Masing(crate::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::GainExceedsLoss { .. } => CliError::Masing(e),
            other => CliError::Solver(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Masing(_) => 4,
            CliError::Io(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Solver(_) => "solver",
            CliError::Masing(_) => "masing",
            CliError::Io(_) => "io",
        }
    }

    /// Machine-readable error record.
    pub fn record(&self) -> String {
        json!({
            "error": {
                "code": self.exit_code(),
                "kind": self.kind(),
                "message": self.to_string(),
            }
        })
        .to_string()
    }
}
