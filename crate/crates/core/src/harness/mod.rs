//! Figure and table reproduction: configuration, commands and persisted artifacts.

pub mod artifact;
pub mod commands;
pub mod config;

pub use artifact::{verify_dir, write_artifact, Artifact, ArtifactMeta, Cell, Column, RunContext, VerifyEntry};
pub use commands::{run_command, Command};
pub use config::{OutputFormat, RunConfig};

use crate::error::SpinError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("integrity check failed: {0}")]
    Integrity(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io(_) => 1,
            HarnessError::Config(_) => 2,
            HarnessError::Numerical(_) | HarnessError::Integrity(_) => 3,
        }
    }
}

impl From<SpinError> for HarnessError {
    fn from(e: SpinError) -> Self {
        if e.is_config_error() {
            HarnessError::Config(e.to_string())
        } else {
            HarnessError::Numerical(e.to_string())
        }
    }
}
