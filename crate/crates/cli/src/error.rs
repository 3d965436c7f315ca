use thiserror::Error;

pub const REMEDIATION: &str = "lower --alpha or shrink --window";

/// Failures mapped onto the process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, configs or inputs; exit status 1.
    #[error("{0}")]
    Validation(String),
    /// Failure while running or writing results; exit status 2.
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
    /// A significance relation that is not a strict partial order; exit
    /// status 3.
    #[error("{0}; {REMEDIATION}")]
    InvalidRelation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::InvalidRelation(_) => 3,
        }
    }

    pub fn runtime(message: impl std::fmt::Display) -> Self {
        CliError::Runtime(anyhow::anyhow!("{message}"))
    }
}
