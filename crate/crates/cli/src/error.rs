use std::path::PathBuf;

use projgrowth_core::snapshot::ParseFailure;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {failure}")]
    Parse { path: PathBuf, failure: ParseFailure },
    #[error(transparent)]
    Core(#[from] projgrowth_core::Error),
    /// Results were written, but at least one fit did not converge.
    #[error("{0}")]
    NotConverged(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => 2,
            CliError::Io { .. } => 3,
            CliError::Core(projgrowth_core::Error::NonConvergence { .. }) | CliError::NotConverged(_) => 4,
            CliError::Core(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
