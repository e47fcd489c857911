use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("division by zero in the field")]
    DivisionByZero,
    #[error("matrix is degenerate (determinant = 0)")]
    Degenerate,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension {0} out of supported range 1..=8")]
    DimensionOutOfRange(usize),
    #[error("element index {index} out of range for a field of {q} elements")]
    ElementOutOfRange { index: u64, q: u64 },
    #[error("lambda = 0 rejected; pass allow_zero to run the zero-target variant")]
    ZeroLambda,
    #[error("operation needs {needed} loop iterations, over the guardrail of {limit}")]
    TooLarge { needed: u128, limit: u64 },
    #[error("set family has {got} sets but the system has {expected} variables")]
    ArityMismatch { expected: usize, got: usize },
    #[error("set contains a vector outside the required hyperplane")]
    NotInHyperplane,
    #[error("the base vector must be nonzero")]
    ZeroVector,
    #[error("set contains the origin; pass allow_origin to keep it")]
    ContainsOrigin,
    #[error("k-th power sumsets stabilized at {stable_size} elements without covering Z_p")]
    NotGenerating { stable_size: usize },
    #[error("set must be nonempty")]
    EmptySet,
    #[error("duplicate edge ({i}, {j}) in equation system")]
    DuplicateEdge { i: usize, j: usize },
    #[error("invalid edge ({i}, {j}); edges need 0 <= i < j < k")]
    InvalidEdge { i: usize, j: usize },
    #[error("invalid field spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
