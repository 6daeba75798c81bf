//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A linear system was singular or too ill-conditioned to solve reliably.
    #[error("ill-conditioned system (condition estimate {cond:.3e}): {context}")]
    IllConditioned { cond: f64, context: String },

    /// The gradient covariance carries no usable spectral information.
    #[error("no active subspace: {0}")]
    NoActiveSubspace(String),

    /// A numerical routine failed to produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A quantity is undefined for the given input (e.g. relative error
    /// against a zero field).
    #[error("undefined result: {0}")]
    Undefined(String),

    /// Failure while training the regressor of one modal coefficient.
    #[error("mode {mode}: {source}")]
    Mode {
        mode: usize,
        #[source]
        source: Box<Error>,
    },

    /// Failure inside one cross-validation fold.
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    /// Underlying I/O failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Malformed text or binary input.
    #[error("parse error at {path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Attaches the index of the modal coefficient whose fit failed.
    pub fn in_mode(self, mode: usize) -> Self {
        Error::Mode {
            mode,
            source: Box::new(self),
        }
    }

    /// Attaches the id of the cross-validation fold that failed.
    pub fn in_fold(self, fold: usize) -> Self {
        Error::Fold {
            fold,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
