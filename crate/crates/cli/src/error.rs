use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] mfent_core::Error),

    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    /// 1 for numeric failures (no bracket, no convergence), 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numeric() => 1,
            _ => 2,
        }
    }
}
