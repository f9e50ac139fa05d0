use thiserror::Error;

/// Errors produced by grid construction, operator application and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// Two objects live on different grids, or an array has the wrong length.
    #[error("shape error: {0}")]
    Shape(String),

    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A discretization is too coarse for the requested evaluation.
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    /// A parameter combination violates a named constraint.
    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    /// Malformed binary or JSON input.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
