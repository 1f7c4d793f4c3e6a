use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{origin}:{line}:{column}: {message}")]
    Parse { origin: String, line: usize, column: usize, message: String },
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] cocycle_core::Error),
}

impl CliError {
    /// 2 for unreadable or malformed input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Validation(_) => 2,
            CliError::Core(e) => match e {
                cocycle_core::Error::Validation(_)
                | cocycle_core::Error::Syntax { .. }
                | cocycle_core::Error::UndefinedSymbol(_)
                | cocycle_core::Error::Dimension { .. }
                | cocycle_core::Error::Arity { .. } => 2,
                _ => 1,
            },
        }
    }
}
