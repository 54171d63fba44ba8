use thiserror::Error;

/// Errors raised by the solver and its supporting kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^dagger| = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not unitary (||U U^dagger - I||_F = {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("eigendecomposition did not converge")]
    EigenFailure,

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("decomposition size {requested} is below the numerical rank {rank}")]
    TooFewStates { requested: usize, rank: usize },

    #[error("state has zero weight (norm^2 = {weight:.3e})")]
    ZeroWeightState { weight: f64 },

    #[error("direction is not a descent direction (dE/dalpha = {slope:.3e})")]
    NotDescentDirection { slope: f64 },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
