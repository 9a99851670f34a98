use thiserror::Error;

/// Errors raised by the library. Numerical failures that still carry a
/// value (divergence, stalled refinement) are reported through
/// [`QuadStatus`](crate::QuadStatus) instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("missing input `{0}`")]
    MissingInput(&'static str),
    #[error("input `{0}` carries a divergent quadrature result")]
    DivergentInput(&'static str),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
