use thiserror::Error;

use crate::report::Report;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("empty guard expression")]
    Empty,
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("formula mentions {atoms} atoms, exhaustive check is capped at {cap}")]
    AtomCapExceeded { atoms: usize, cap: usize },
}

/// Error in a model text file, located by 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl FormatError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        FormatError {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("`{entity}` is invalid:\n{report}")]
    Invalid { entity: String, report: Report },
    #[error("machine `{machine}` has incomplete state `{state}`")]
    Incomplete { machine: String, state: String },
    #[error("unknown state `{state}` in `{machine}`")]
    UnknownState { machine: String, state: String },
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("state vector {0:?} does not fit the system")]
    InvalidVector(Vec<usize>),
    #[error("transition {transition} of `{machine}` does not leave its current state")]
    MismatchedTransition { machine: String, transition: usize },
    #[error("symbol `{0}` is both internal and environment")]
    SymbolClash(String),
    #[error("symbol `{symbol}` used by `{machine}` is neither internal nor environment")]
    UnclassifiedSymbol { machine: String, symbol: String },
    #[error("environment input contains internal symbol `{0}`")]
    InternalInjected(String),
    #[error("machine `{machine}` has no enabled transition in state `{state}`")]
    NoEnabledTransition { machine: String, state: String },
    #[error("malformed state pattern `{0}`")]
    Pattern(String),
    #[error("node {0} is not in the graph")]
    UnknownNode(usize),
    #[error("graph document: {0}")]
    Document(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
