use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the toolkit.
///
/// The variants map onto the CLI exit codes: `Precondition` is a hypothesis
/// failure (exit 2), `Invariant` is an internal bug signal (exit 3), the rest
/// are usage or input problems (exit 1).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: usize, right: usize },

    #[error("precondition failed: {what} (lhs = {lhs}, rhs = {rhs})")]
    Precondition { what: String, lhs: f64, rhs: f64 },

    #[error("cost guard: {0}")]
    CostGuard(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn precondition(what: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Error::Precondition {
            what: what.into(),
            lhs,
            rhs,
        }
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
