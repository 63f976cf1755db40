use thiserror::Error;

/// Errors raised by the numerical engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate Fock space: mode cutoff must be at least 1")]
    DegenerateSpace,
    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeOutOfRange { index: usize, n_modes: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("squeezing parameter {0} outside [0, 1)")]
    LambdaOutOfRange(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("state not normalized: squared norm {norm_sq}")]
    NotNormalized { norm_sq: f64 },
    #[error("degenerate denominator: |<[dA, dB]>| = {comm_abs:e}")]
    DegenerateDenominator { comm_abs: f64 },
    #[error("cutoff margin {0} below the minimum of 2")]
    MarginTooSmall(usize),
    #[error("outcome probability density {0:e} below underflow threshold")]
    OutcomeImpossible(f64),
    #[error("series truncated at cutoff {cutoff} with relative tail {tail:e}")]
    SeriesNotConverged { cutoff: usize, tail: f64 },
    #[error("quadrature did not converge: {value} vs {refined} under refinement")]
    QuadratureNotConverged { value: f64, refined: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
