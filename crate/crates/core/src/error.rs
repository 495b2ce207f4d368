use thiserror::Error;

/// Errors raised by the library. Every variant carries enough context for a
/// one-line CLI diagnostic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} exceeds the exact-computation cap (estimated {estimate:.3e} > {cap:.3e})")]
    OverCap {
        what: String,
        estimate: f64,
        cap: f64,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("inconsistent state statistics: {0}")]
    InconsistentStats(String),

    #[error("model is not enumerable: {0}")]
    NotEnumerable(String),

    #[error("output failed: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
