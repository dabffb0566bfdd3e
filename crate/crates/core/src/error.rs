use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("retarded-time solver did not converge after {iterations} iterations (residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("sensor within {distance:e} of the source trajectory (near-field threshold {threshold:e})")]
    NearField { distance: f64, threshold: f64 },

    #[error("observation times not strictly increasing at emission index {index} (supersonic source?)")]
    NonMonotoneObservation { index: usize },

    #[error("source speed {speed} is not below the wave speed {wave_speed}")]
    Supersonic { speed: f64, wave_speed: f64 },

    #[error("kernel matrix not positive definite even with jitter {jitter:e}")]
    IllConditionedKernel { jitter: f64 },

    #[error("conditioning failed: {0}")]
    Conditioning(String),

    #[error("degenerate functional: L^2[k] = {0:e}")]
    DegenerateFunctional(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("no retained samples after burn-in")]
    EmptySampleSet,

    #[error("unknown case id {0}")]
    UnknownCase(u32),
}
