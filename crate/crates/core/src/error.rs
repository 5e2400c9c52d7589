use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad user input: malformed files, out-of-range values, empty masks.
    #[error("input error: {0}")]
    Input(String),

    /// Malformed input at a specific file location.
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A caller broke an operation's precondition (shape mismatch, asymmetric matrix, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Non-finite values or a solver that failed to converge.
    #[error("numeric error: {message}")]
    Numeric {
        message: String,
        /// Residual reached by an iterative solver, when one was involved.
        residual: Option<f64>,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric {
            message: msg.into(),
            residual: None,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
