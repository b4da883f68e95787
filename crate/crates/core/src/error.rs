use crate::lattice::AttemptRecord;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("enumeration aborted: {visited} candidate visits exceed the cap of {cap}")]
    EnumerationCap { visited: u64, cap: u64 },

    #[error("no prime in [{lo}, {hi}] satisfies the requested conditions")]
    NoSuitablePrime { lo: u64, hi: u64 },

    #[error(
        "lattice construction failed after {attempts} attempts \
         (best coverage {best_covered}/{target})"
    )]
    ConstructionFailed {
        attempts: u32,
        best_covered: usize,
        target: usize,
        log: Vec<AttemptRecord>,
    },

    #[error("lattice does not cover the frequency set ({covered}/{target} frequencies)")]
    NotReconstructing { covered: usize, target: usize },

    #[error("sample vector {index} has length {got}, lattice size is {expected}")]
    SampleLengthMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },

    #[error("sample data does not match the lattice (hash {got:#018x}, expected {expected:#018x})")]
    SampleHashMismatch { expected: u64, got: u64 },

    #[error("inconsistent origin sample: lattice {index} disagrees by {deviation:e}")]
    InconsistentOrigin { index: usize, deviation: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
