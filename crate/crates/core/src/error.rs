use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grade {grade} out of range 1..={max}")]
    GradeOutOfRange { grade: usize, max: usize },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("non-finite weight at (n={n}, k={k})")]
    NonFiniteWeight { n: usize, k: usize },

    #[error("zero weight at (n={n}, k={k}) in a dual ratio")]
    ZeroWeight { n: usize, k: usize },

    #[error("zero denominator at index {n}")]
    ZeroDenominator { n: usize },

    #[error("invalid truncation policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("invalid weight grid: {0}")]
    InvalidGrid(String),

    #[error("theta is not in the target space: {0}")]
    ThetaNotInTarget(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error(
        "chain enumeration needs {count} terms (limit {limit}); use the dynamic-programming path"
    )]
    CombinatorialBlowup { count: f64, limit: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-finite sample at quadrature node {node}")]
    NonFiniteSample { node: usize },

    #[error("n_max = {n_max} needs more than {nodes} quadrature nodes (n_max < nodes/2)")]
    TooFewNodes { n_max: usize, nodes: usize },

    #[error("radius constraint violated: {0}")]
    RadiusConstraint(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
