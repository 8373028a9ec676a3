use std::path::{Path, PathBuf};

use thiserror::Error;

/// Every failure of the command-line tool, each class with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{what} not found: {}", path.display())]
    NotFound { what: String, path: PathBuf },
    #[error("{}: {msg}", path.display())]
    Schema { path: PathBuf, msg: String },
    #[error("unknown algorithm `{0}` (expected bb, refine, fixed-state or max-tile)")]
    UnknownAlgorithm(String),
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NotFound { .. } => 10,
            CliError::Schema { .. } => 11,
            CliError::UnknownAlgorithm(_) => 12,
            CliError::Usage(_) => 13,
            CliError::Io { .. } => 14,
            CliError::Internal(_) => 15,
        }
    }

    pub fn schema(path: &Path, msg: impl Into<String>) -> Self {
        CliError::Schema {
            path: path.to_path_buf(),
            msg: msg.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            CliError::NotFound {
                what: "file".into(),
                path: path.to_path_buf(),
            }
        } else {
            CliError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
