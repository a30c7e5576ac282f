use thiserror::Error;

use crate::term::Variable;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    NTriples { line: usize, message: String },

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown prefix `{0}:`")]
    UnknownPrefix(String),

    #[error("unsafe filter: variable {0} is not bound by the filtered pattern")]
    UnsafeFilter(Variable),

    #[error("query is not well-designed: variable {var} {detail}")]
    NotWellDesigned { var: Variable, detail: String },

    #[error("query is not connected (Cartesian product); use the oracle evaluator")]
    Disconnected,

    #[error("unsupported-by-index: {0}")]
    UnsupportedByIndex(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("oracle intermediate result exceeded {0} rows")]
    OracleLimit(usize),

    #[error("invalid store file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Rejections caused by the shape of the query rather than by I/O or the engine.
    pub fn is_rejection(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownPrefix(_)
                | Error::UnsafeFilter(_)
                | Error::NotWellDesigned { .. }
                | Error::Disconnected
        )
    }
}
