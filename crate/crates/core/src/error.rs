use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two distributions with different outcome widths were compared.
    #[error("outcome width mismatch: {left} bits vs {right} bits")]
    DimensionMismatch { left: u32, right: u32 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Parameters violated a precondition that the guarantees depend on
    /// (for example the space bound for the streaming attack).
    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    /// The requested exhaustive computation exceeds the configured budget.
    /// Verifiers refuse instead of silently sampling.
    #[error("work budget exceeded: needs {needed} units, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("streaming program is not forgetless; violating positions: {positions:?}")]
    NotForgetless { positions: Vec<usize> },

    #[error("sweep trial failed at k={k}, trial={trial}: {source}")]
    SweepTrial {
        k: usize,
        trial: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
