use thiserror::Error;

/// Errors raised by the geometry engine and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Caller mixed incompatible inputs (unknown letter, wrong family, ...).
    #[error("usage error: {0}")]
    Usage(String),
    /// An operation was invoked outside its documented domain.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Malformed configuration; `field` names the offending entry.
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    /// A size cap (ball radius, trials x steps) would be exceeded.
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    /// A boundary proxy was not deep enough; retry with a longer trajectory.
    #[error("proxy not stable, retry with a deeper proxy: {0}")]
    Retry(String),
    /// An internal invariant failed. Always a bug.
    #[error("internal invariant failed: {0}")]
    Internal(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
