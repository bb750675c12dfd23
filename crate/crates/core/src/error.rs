use thiserror::Error;

/// Errors raised by the n-norm toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("expected {expected} vectors, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("n = {n} exceeds the ambient dimension d = {d}")]
    TooManyArguments { n: usize, d: usize },
    #[error("non-finite entry in vector {vector} at coordinate {coord}")]
    NonFinite { vector: usize, coord: usize },
    #[error("invalid exponent p = {0}; expected 1 <= p < inf")]
    InvalidExponent(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("anchor vectors are linearly dependent")]
    DependentAnchors,
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid index subset: {0}")]
    InvalidSubset(String),
    #[error("class size m = {m} out of range 1..={n}")]
    ClassOutOfRange { m: usize, n: usize },
    #[error("Gram determinant {0:e} is negative beyond tolerance")]
    NumericalBreakdown(f64),
    #[error("no informative pairs among {0} samples")]
    NoInformativePairs(usize),
    #[error("iteration diverged: step norm grew for {growth_steps} consecutive steps (iteration {iterations})")]
    Diverged { iterations: usize, growth_steps: usize },
    #[error("non-finite iterate at iteration {0}")]
    NonFiniteIterate(usize),
    #[error("unknown registered mapping {0:?}")]
    UnknownMapping(String),
    #[error("matrix is singular")]
    Singular,
    #[error("certification unavailable: {0}")]
    CertificationUnavailable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
