use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("vector must have at least one entry")]
    Empty,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    #[error("periodic vector must satisfy x[0] = x[N] (got {first} and {last})")]
    Periodicity { first: f64, last: f64 },

    #[error("requested {requested} Fourier modes but only {resolvable} are resolvable on this grid")]
    Aliasing { requested: usize, resolvable: usize },

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("could not parse config {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
