use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the numerical routines, file formats and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (bad dimension, shape mismatch, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A series has zero power, so its correlation with anything is undefined.
    #[error("degenerate series at row {row}: zero signal power")]
    DegenerateSeries { row: usize },

    /// The requested number of eigenvalues reaches into the numerical null space.
    #[error("rank deficient: eigenvalue {index} is {value:e}")]
    RankDeficient { index: usize, value: f64 },

    /// A computed quantity violates an identity it must satisfy.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("numerical failure after {iterations} iterations: {message}")]
    Numeric { message: String, iterations: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
