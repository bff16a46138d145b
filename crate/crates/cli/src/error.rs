use thiserror::Error;

/// Failure of a subcommand, carrying its exit code class.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config values or arguments. Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// The command ran but could not produce its result. Exit code 1.
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }

    pub fn io(context: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        CliError::Domain(format!("{context}: {e}"))
    }
}
