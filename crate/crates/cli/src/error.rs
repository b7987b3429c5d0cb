use fastdvm::DvmError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical error: {0}")]
    Numerical(DvmError),

    #[error("wall-clock budget exceeded: {0}")]
    Budget(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 config, 3 numerical, 4 budget, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<DvmError> for CliError {
    fn from(e: DvmError) -> Self {
        match e {
            DvmError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            DvmError::Io(msg) => CliError::Io(std::io::Error::other(msg)),
            other => CliError::Numerical(other),
        }
    }
}

/// Maps grid/parameter validation failures to config errors.
pub(crate) fn config_err(e: DvmError) -> CliError {
    CliError::Config(e.to_string())
}
