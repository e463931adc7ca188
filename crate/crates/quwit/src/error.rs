use thiserror::Error;

/// Crate-wide error type. Validation failures carry the measured deviation so
/// callers can report how far an input was from acceptable.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension must be at least {min}, got {actual}")]
    DimensionTooSmall { min: usize, actual: usize },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not idempotent (max deviation {deviation:.3e})")]
    NotIdempotent { deviation: f64 },

    #[error("state norm squared is {norm_sqr}, outside the accepted band")]
    NotNormalized { norm_sqr: f64 },

    #[error("density matrix trace is {trace}, expected 1")]
    BadTrace { trace: f64 },

    #[error("density matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("vectors are not orthonormal (max deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("computed probability {value} lies outside the tolerated range")]
    ProbabilityRange { value: f64 },

    #[error("invalid outcome partition: {reason}")]
    BadPartition { reason: String },

    #[error("invalid detector efficiencies: {reason}")]
    BadEfficiencies { reason: String },

    #[error("corrected counts sum to zero; probabilities are undefined")]
    ZeroTotalCounts,

    #[error("significance is undefined: relevant variances are all zero")]
    UndefinedSignificance,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
