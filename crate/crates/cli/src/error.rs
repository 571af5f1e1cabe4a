use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("budget exhausted: {0}")]
    Budget(String),

    #[error("tolerance gate failed: {0}")]
    Gate(String),

    #[error(transparent)]
    Core(#[from] hrsfer::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Budget(_) => ExitCode::from(2),
            CliError::Gate(_) => ExitCode::from(3),
            _ => ExitCode::from(1),
        }
    }
}

pub fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub type CliResult<T> = Result<T, CliError>;
