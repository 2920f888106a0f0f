use std::path::PathBuf;

use thiserror::Error;

/// Failures of the harness, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("missing artifacts: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    MissingArtifacts(Vec<PathBuf>),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Core(#[from] kwcseg_core::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Json { .. } => 2,
            HarnessError::Core(e) => core_exit_code(e),
            HarnessError::Invariant(_) => 4,
            _ => 1,
        }
    }
}

/// Divergence is 3; every other library error stems from bad input and is 2.
pub fn core_exit_code(e: &kwcseg_core::Error) -> i32 {
    match e {
        kwcseg_core::Error::Divergence { .. } => 3,
        _ => 2,
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
