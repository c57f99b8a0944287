use thiserror::Error;

/// Errors raised by the laboratory operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("unsupported exponent p = {0}: operation requires an even integer exponent")]
    UnsupportedExponent(f64),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("parameter outside the family domain: |a| = {norm} but radius is {radius}")]
    Domain { norm: f64, radius: f64 },
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate marked-point triple: {0}")]
    DegenerateTriple(String),
    #[error("Mobius element outside the identity neighbourhood: distance {distance} exceeds {radius}")]
    OutOfNeighborhood { distance: f64, radius: f64 },
    #[error("slice projection failed: {0}")]
    ProjectionFailure(String),
    #[error("interpolation error: {0}")]
    Interpolation(String),
    #[error("C2 witness failure: {0}")]
    WitnessFailure(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
