use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Core(#[from] surgeflow_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for failed certificates, 2 for anything wrong with the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) | CliError::Core(surgeflow_core::Error::ContractViolation(_)) => 1,
            _ => 2,
        }
    }
}
