use thiserror::Error;

/// A callable returned something that is not a finite number, or the wrong shape.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluationError {
    #[error("{function} is not finite at x = {x:?}")]
    NonFinite { function: String, x: Vec<f64> },
    #[error("{function}: expected dimension {expected}, got {actual}")]
    Dimension {
        function: String,
        expected: usize,
        actual: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error("multiplier {index} = {value} lies outside its dual-feasible interval")]
    DualInfeasible { index: usize, value: f64 },
    #[error("no admissible pivot element in column {column}")]
    SingularPivot { column: usize },
    #[error("subproblem hit the pivot limit ({pivots}) without satisfying the penalty ratio test")]
    SubproblemStalled { pivots: usize },
    #[error("line search gave up after {trials} trials")]
    LineSearchFailure { trials: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
