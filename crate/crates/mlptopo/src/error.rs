use std::path::{Path, PathBuf};

use mlptopo_core::Error as CoreError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures of the file formats and the command line, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration or arguments.
    #[error("configuration error: {0}")]
    Config(String),
    /// An input file is missing or cannot be read as its format.
    #[error("{path}: {reason}")]
    Artifact { path: PathBuf, reason: String },
    /// Training diverged or a numerical routine failed.
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Artifact { .. } => 3,
            Error::Numeric(_) => 4,
            Error::Write { .. } => 1,
        }
    }

    pub fn artifact(path: &Path, reason: impl ToString) -> Self {
        Error::Artifact { path: path.to_path_buf(), reason: reason.to_string() }
    }

    pub fn config(reason: impl ToString) -> Self {
        Error::Config(reason.to_string())
    }
}

impl From<CoreError> for Error {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Divergence { .. }
            | CoreError::NonMonotoneFiltration { .. }
            | CoreError::SizeGuard { .. }
            | CoreError::NestingViolation { .. } => Error::Numeric(e.to_string()),
            _ => Error::Config(e.to_string()),
        }
    }
}
