use thiserror::Error;

/// Crate-wide error type. Numerical routines return `Err` instead of
/// panicking so the CLI can map failures to its error exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Adaptive quadrature hit its panel cap before two successive
    /// refinements agreed to the requested tolerance.
    #[error("quadrature did not converge: last refinement changed by {achieved:e} (requested {requested:e})")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("field contains a non-finite value at flat index {0}")]
    NonFiniteField(usize),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
