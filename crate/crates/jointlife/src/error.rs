//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: bad CSV cells, unparseable dates, invalid flag values.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A parameter or argument lies outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A risk set came out empty after conditioning or filtering.
    #[error("empty risk set: {0}")]
    EmptyRiskSet(String),

    /// A numerical routine exhausted its budget without converging, or a
    /// fitted parameter landed on the boundary of its search range.
    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wrap an io error with the path it occurred on.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool: 2 for input and
    /// domain problems, 3 for non-convergence, 4 for an empty risk set.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence(_) => 3,
            Error::EmptyRiskSet(_) => 4,
            _ => 2,
        }
    }
}
