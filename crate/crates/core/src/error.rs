use alloc::string::String;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("register label `{0}` appears more than once")]
    DuplicateLabel(String),
    #[error("register `{0}` must have dimension at least 1")]
    ZeroDimension(String),
    #[error("unknown register label `{0}`")]
    UnknownLabel(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operands live on different register systems")]
    SystemMismatch,
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("Kraus operators are not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),
    #[error("matrix is not an isometry (deviation {0:e})")]
    NotIsometry(f64),
    #[error("measurement operators do not sum to the identity (deviation {0:e})")]
    IncompletePovm(f64),
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    InvalidEpsilon(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("support of the first state is not contained in the support of the second")]
    SupportViolation,
    #[error("operator is not a free measurement operator: {0}")]
    NotFree(String),
    #[error("simulation needs {required} complex amplitudes but the budget is {budget}")]
    BudgetExceeded { required: usize, budget: usize },
    #[error("bound violated ({what}): measured {measured}, bound {bound}")]
    BoundViolated {
        what: String,
        measured: f64,
        bound: f64,
    },
}

pub type Result<T> = core::result::Result<T, Error>;
