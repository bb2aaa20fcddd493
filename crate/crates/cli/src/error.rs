use std::path::PathBuf;

/// Process exit status for each failure class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    Input = 2,
    Budget = 3,
    BoundViolated = 4,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{0} is infinite (support violation); pass --allow-inf to print it")]
    Infinite(String),
    #[error("self-test failed: {0}")]
    SelfTest(String),
    #[error(transparent)]
    Core(#[from] qsr_core::Error),
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Core(qsr_core::Error::BudgetExceeded { .. }) => ExitStatus::Budget,
            CliError::Core(qsr_core::Error::BoundViolated { .. }) | CliError::SelfTest(_) => {
                ExitStatus::BoundViolated
            }
            _ => ExitStatus::Input,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
