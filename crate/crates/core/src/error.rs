use thiserror::Error;

/// Errors produced by the numerical kernels and harnesses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The scalar relating `π(x)π(y)` to `π(x+y)` is not unimodular.
    #[error("representation inconsistency at x={x:?}, y={y:?}: |m| = {modulus}")]
    RepresentationInconsistency {
        x: Vec<usize>,
        y: Vec<usize>,
        modulus: f64,
    },

    #[error("Jacobi SVD did not converge within {sweeps} sweeps (off-diagonal mass {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    /// A hypothesis of an inequality does not hold for the requested exponents.
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("csv: {0}")]
    Csv(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of a numerical kernel rather than of the caller's input.
    pub fn is_kernel_failure(&self) -> bool {
        matches!(self, Error::NoConvergence { .. })
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
