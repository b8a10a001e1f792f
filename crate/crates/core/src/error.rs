use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for ground set of size {n}")]
    InvalidIndex { index: usize, n: usize },

    #[error("coordinate {index} = {value} lies outside [0, 1]")]
    OutOfBox { index: usize, value: f64 },

    #[error("point has mass {mass} which exceeds the budget {ell}")]
    BudgetExceeded { mass: f64, ell: f64 },

    #[error("invalid potential {index}: {reason}")]
    InvalidPotential { index: usize, reason: String },

    #[error("probabilities do not form a distribution (sum = {sum})")]
    NotADistribution { sum: f64 },

    #[error("entry H[{i}][{j}] = {value} is positive")]
    PositiveInteraction { i: usize, j: usize, value: f64 },

    #[error("quadratic function is not monotone: marginal of element {index} at the full set is {value}")]
    NegativeMarginal { index: usize, value: f64 },

    #[error("invalid matroid: {0}")]
    InvalidMatroid(String),

    #[error("simplex did not converge within {pivots} pivots")]
    PivotLimit { pivots: usize },

    #[error("linear program is {0}")]
    LpStatus(&'static str),

    #[error("linear program too large for the dense solver ({rows} rows x {cols} columns)")]
    LpTooLarge { rows: usize, cols: usize },

    #[error("sparse solver failed: {0}")]
    SparseSolver(String),

    #[error("exact enumeration needs {needed} candidates but the budget is {budget}")]
    EnumerationBudget { needed: u128, budget: u64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
