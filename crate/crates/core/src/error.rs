use thiserror::Error;

/// Errors raised by the numerical routines and the identity machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("divergent: {0}")]
    Divergent(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("quadrature did not converge after {levels} levels (last two level values {previous} and {last})")]
    NonConvergence {
        levels: usize,
        previous: String,
        last: String,
    },

    #[error("insufficient precision: at least {required} digits are needed")]
    InsufficientPrecision { required: u32 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("catalog error: {0}")]
    Catalog(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
