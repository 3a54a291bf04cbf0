use thiserror::Error;

/// Errors raised by form construction and the analyses built on top of it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("invalid measure space: {0}")]
    InvalidSpace(String),

    #[error("invalid form: {0}")]
    InvalidForm(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("form is not Markovian: {0}")]
    NotMarkovian(String),

    #[error("function does not vanish off the domain (node {node}, value {value:e})")]
    DomainViolation { node: usize, value: f64 },

    #[error("cut-off function leaves [0, 1] at node {node} (value {value})")]
    RangeViolation { node: usize, value: f64 },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("forms live on different measure spaces")]
    SpaceMismatch,

    #[error("target set is not contained in the form domain (node {0})")]
    Infeasible(usize),

    #[error("pair is not admissible: {0}")]
    NotAdmissible(String),

    #[error("form is not sandwiched: {0}")]
    NotSandwiched(String),

    #[error("form is not representable by a measure: coefficient ({x}, {y}) = {value:e}")]
    NotRepresentable { x: usize, y: usize, value: f64 },

    #[error("bad dimension: {0}")]
    BadDimension(String),

    #[error("negative Robin coefficient {0}")]
    NegativeRobin(f64),

    #[error("fractional exponent must lie in (0, 1), got {0}")]
    BadExponent(f64),

    #[error("instance too large for enumeration: {nodes} nodes (limit {limit})")]
    TooLarge { nodes: usize, limit: usize },

    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = FormError> = std::result::Result<T, E>;
