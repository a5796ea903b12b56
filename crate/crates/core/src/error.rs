use thiserror::Error;

/// Errors raised by the library.
///
/// `Usage` covers violated preconditions that the caller controls (orders,
/// grid sizes, parameter ranges). `Domain` is reserved for inputs outside
/// the region where the mathematics is defined (radii, poles).
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),
    #[error("hypothesis not met: {0}")]
    Hypothesis(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
