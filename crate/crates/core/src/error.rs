use alloc::string::String;

/// Errors raised by the selection library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("mode {mode} out of range for tensor of order {order}")]
    ModeOutOfRange { mode: usize, order: usize },
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("index {index} out of range for mode of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("duplicate index {index} in mode {mode}")]
    DuplicateIndex { index: usize, mode: usize },
    #[error("requested count {k} outside 1..={max}")]
    CountOutOfRange { k: usize, max: usize },
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("matrix is not symmetric (max deviation {deviation:e})")]
    NotSymmetric { deviation: f64 },
    #[error("matrix has eigenvalue {value:e} below the PSD tolerance")]
    NegativeEigenvalue { value: f64 },
    #[error("DEIM interpolation block is singular at step {step}")]
    SingularInterpolation { step: usize },
    #[error("posterior precision is not positive definite")]
    SingularPosterior,
    #[error("forward operator has no adjoint; use the sketch-first path instead")]
    AdjointUnavailable,
    #[error("exhaustive search over {count} designs exceeds the budget of {budget}")]
    BudgetExceeded { count: u128, budget: u128 },
    #[error("problem is missing {0}")]
    MissingData(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = core::result::Result<T, Error>;
