use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation was invoked in the wrong regime (sub vs super,
    /// critical vs supercritical, degenerate vs non-degenerate spectrum).
    #[error("regime error: {0}")]
    Regime(String),

    /// A parameter search (ε ladder, bracketing, bisection) found no
    /// admissible value.
    #[error("search failed: {0}")]
    Search(String),

    /// A numerical consistency check inside an operation failed.
    #[error("consistency check failed: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn regime(msg: impl Into<String>) -> Self {
        Error::Regime(msg.into())
    }
    pub(crate) fn search(msg: impl Into<String>) -> Self {
        Error::Search(msg.into())
    }
    pub(crate) fn inconsistent(msg: impl Into<String>) -> Self {
        Error::Inconsistent(msg.into())
    }
}
