use thiserror::Error;

/// Errors raised by models, samplers and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the requested construction.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A model string could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// The model lacks something the operation needs (exact sampler, closed form, ...).
    #[error("capability error: {0}")]
    Capability(String),

    /// A numerical routine failed (non-convergence, singular ratio, guard tripped).
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        Error::Capability(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
