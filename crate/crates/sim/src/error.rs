use std::io;
use std::path::PathBuf;

use hav_core::ScenarioError;
use thiserror::Error;

/// Process exit codes.
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_GENERATION: i32 = 3;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: invalid CSV: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{0}")]
    Scenario(#[from] ScenarioError),
    #[error("unsupported schema version {found} in {path} (expected {expected})")]
    Version {
        path: PathBuf,
        found: u32,
        expected: u32,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Pool(_) => EXIT_IO,
            Error::Scenario(ScenarioError::GenerationExhausted { .. }) => EXIT_GENERATION,
            Error::Json { .. }
            | Error::Csv { .. }
            | Error::Scenario(_)
            | Error::Version { .. }
            | Error::Invalid(_) => EXIT_INVALID,
        }
    }
}
