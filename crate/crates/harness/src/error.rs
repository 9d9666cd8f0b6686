use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("spec line {line}: {msg}")]
    Spec { line: usize, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: bad record: {msg}")]
    Record { path: PathBuf, line: usize, msg: String },
    #[error("no completed records in {0}")]
    EmptyResults(PathBuf),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] fpp_core::Error),
}

impl HarnessError {
    pub fn spec(line: usize, msg: impl Into<String>) -> Self {
        HarnessError::Spec { line, msg: msg.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Spec { .. } | HarnessError::EmptyResults(_) | HarnessError::Usage(_) | HarnessError::Core(_) => 2,
            HarnessError::Io { .. } | HarnessError::Record { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
