use std::path::PathBuf;

use passfeas_core::{ChannelError, ScenarioError, SimError};

/// Process exit codes, one per error class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const DOMAIN: i32 = 3;
    pub const IO: i32 = 4;
    pub const DURATION_LIMIT: i32 = 5;
    pub const REPRO_MISMATCH: i32 = 6;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    DurationLimit(String),
    #[error("reproduction mismatch: {0}")]
    ReproMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Domain(_) => exit::DOMAIN,
            CliError::Io { .. } => exit::IO,
            CliError::DurationLimit(_) => exit::DURATION_LIMIT,
            CliError::ReproMismatch(_) => exit::REPRO_MISMATCH,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::DurationLimitExceeded { .. } => CliError::DurationLimit(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}
