use thiserror::Error;

use crate::nested_words::Violation;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A tagged word is not well matched. `position` is 1-based and names the
    /// first offending letter: an unmatched return, or the earliest call that is
    /// still open at the end of the word.
    #[error("word is not well matched (first offending position {position})")]
    NotWellMatched { position: usize },

    #[error("nested word is invalid: {0:?}")]
    InvalidNestedWord(Vec<Violation>),

    #[error("letter `{0}` is not in the alphabet")]
    UnknownLetter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is zero")]
    ZeroMatrix,

    #[error("matrix has numerical rank {0}, expected 1")]
    NotRankOne(usize),

    #[error("{terms} expansion terms requested for a matrix of rank {rank}")]
    InsufficientTerms { terms: usize, rank: usize },

    /// A target vector is not a linear combination of the given rows.
    #[error("{context}: target not in span of basis rows (residual {residual:.3e})")]
    NotInSpan { context: String, residual: f64 },

    /// No spanning set with nonzero function values could be selected.
    #[error("no spanning rows with nonzero function value: {0}")]
    NoNonzeroBasis(String),

    #[error("Hankel rank did not stabilize up to length {max_len} (ranks {ranks:?})")]
    NotStabilized { max_len: usize, ranks: Vec<usize> },

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
