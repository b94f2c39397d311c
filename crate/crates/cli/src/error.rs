use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// A spec field that failed validation, with its dotted key path.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{path}: {message}")]
pub struct SpecError {
    pub path: String,
    pub message: String,
}

impl SpecError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        SpecError {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Spec(#[from] SpecError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Core(#[from] fockline::Error),

    /// A result failed a post-run sanity check.
    #[error("numerical invariant violated: {0}")]
    Invariant(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 0 is success; 1 covers configuration and I/O problems; 2 means a
    /// numerical invariant was violated.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(fockline::Error::Numerical(_) | fockline::Error::RegistryMismatch)
            | CliError::Invariant(_) => 2,
            _ => 1,
        }
    }
}
