use thiserror::Error;

/// Exit statuses: 2 for unreadable or invalid input data, 3 for invalid
/// configuration, 1 for anything else.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}
