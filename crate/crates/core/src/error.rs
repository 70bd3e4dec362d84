use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty distribution")]
    EmptyDistribution,
    #[error("negative probability {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid axis list: {0}")]
    InvalidAxes(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("infeasible cost constraint: cap {cap} below minimum letter cost {min_cost}")]
    InfeasibleCost { cap: f64, min_cost: f64 },
    #[error("optimizer did not converge (best value {best})")]
    NonConvergence { best: f64 },
    #[error("infeasible problem: {0}")]
    Infeasible(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("codebook construction failed: {0}")]
    Construction(String),
    #[error("invalid channel spec: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
