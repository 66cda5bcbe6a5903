use std::path::PathBuf;

use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed arguments: wrong shapes, non-finite values, out-of-range indices.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The panel does not hold enough consecutive samples for the requested model.
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    /// Well-formed input outside the mathematical domain of the operation
    /// (disconnected graph, velocity not orthogonal to constants, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A cell of a tabular input file could not be interpreted.
    #[error("{}: row {row}, column {column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
