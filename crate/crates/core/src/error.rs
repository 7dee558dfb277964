use thiserror::Error;

/// Errors raised across the crate.
///
/// The variants map onto the exit codes of the batch runner: parse errors
/// exit with 2, precondition and hypothesis failures with 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "hypothesis violated ({what}): measured defect {defect:e} exceeds admissible {bound:e}"
    )]
    Hypothesis {
        what: String,
        defect: f64,
        bound: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn hypothesis(what: impl Into<String>, defect: f64, bound: f64) -> Self {
        Error::Hypothesis {
            what: what.into(),
            defect,
            bound,
        }
    }
}
