use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: malformed input: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("negative weight {weight} on edge ({i}, {j})")]
    NegativeWeight { i: usize, j: usize, weight: f64 },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("node index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("edge probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty vector")]
    EmptyVector,
    #[error("({0}, {1}) is not an edge")]
    NoSuchEdge(usize, usize),
    #[error("lower bound exceeds upper bound at index {0}")]
    InvalidBounds(usize),
    #[error("negative budget {0}")]
    NegativeTotal(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("iterative solver hit {0} iterations without reaching tolerance")]
    MaxIterationsExceeded(usize),
    #[error("alternating projections did not converge (gap {0:e})")]
    NoConvergence(f64),
    #[error("objective is not finite")]
    NonFiniteObjective,
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("enumeration of {0} candidates exceeds the brute-force limit")]
    TooLarge(u128),
    #[error("k = {k} exceeds number of nodes {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("{metric} bound violated: value {value} > bound {bound}")]
    BoundViolated {
        metric: &'static str,
        value: f64,
        bound: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
