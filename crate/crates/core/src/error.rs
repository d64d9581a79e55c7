use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("duplicate frequency {0:?}")]
    DuplicateFrequency(Vec<i64>),

    #[error("grid of {requested} points exceeds the cap of {cap}")]
    GridTooLarge { requested: u128, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("support is not contained in the cuboid: {0:?}")]
    OutsideCuboid(Vec<i64>),

    #[error("zero polynomial")]
    ZeroPolynomial,

    #[error("quadrature did not converge: relative disagreement {0:e}")]
    QuadratureNonConvergence(f64),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error at `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
