use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("arity mismatch: expected {expected} inputs, found {found}")]
    Arity { expected: usize, found: usize },

    #[error("domain error at {point}: {message}")]
    Domain { point: String, message: String },

    #[error("missing label for cell {0}")]
    MissingLabel(String),

    #[error("missing transition {0}")]
    MissingTransition(String),

    #[error("undefined symbol `{0}`")]
    UndefinedSymbol(String),

    #[error("{0}")]
    Numerical(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn domain(point: &[num_complex::Complex64], msg: impl Into<String>) -> Self {
        Error::Domain { point: crate::linalg::format_point(point), message: msg.into() }
    }
}
