use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Missing, malformed or inconsistent flags; nothing was computed.
    #[error("{0}")]
    Flag(String),
    #[error(transparent)]
    Core(#[from] qpoly_core::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Flag(_) | CliError::Io(_) => 2,
            CliError::Core(_) => 3,
        }
    }
}

pub fn need<T>(v: Option<T>, flag: &str, context: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Flag(format!("{context} requires --{flag}")))
}
