use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Dimension or depth mismatch between algebraic operands.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// Operand outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed user input (paths, samples, parameters).
    #[error("invalid input: {0}")]
    Input(String),
    /// A numerical procedure failed to produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A dense signature would exceed the configured coefficient budget.
    #[error("dense signature needs {needed} coefficients (budget {budget}); evaluate word_coefficient or pair_on_path instead")]
    Budget { needed: usize, budget: usize },
    /// CSV or text-format parse failure.
    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },
    /// Inconsistent configuration or artifact metadata.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
