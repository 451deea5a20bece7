use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid parameters or model description.
    #[error("configuration error: {0}")]
    Config(String),
    /// The problem is well formed but has no solution in the requested domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// The body or ratio is degenerate (e.g. `r* <= 1`), so the exponent is infinite.
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    /// The numerical routine could not produce an estimate from its inputs.
    #[error("estimation failed: {0}")]
    Estimation(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
