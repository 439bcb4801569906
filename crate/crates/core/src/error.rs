use thiserror::Error;

/// Errors raised by constructors, bounds and protocols.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension list: {0}")]
    InvalidDims(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("not a valid quantum state: {0}")]
    NotAState(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("channel is not unital; its adjoint is not trace preserving")]
    NotUnital,

    #[error("channel is not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("invalid ensemble decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
