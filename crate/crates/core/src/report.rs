//! Findings produced by model validation.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Issue {
    DuplicateState {
        state: String,
    },
    MissingInitial,
    UnknownInitial {
        state: String,
    },
    DanglingEndpoint {
        from: String,
        to: String,
    },
    GuardOutsideAlphabet {
        from: String,
        to: String,
        symbol: String,
    },
    OutputOutsideAlphabet {
        state: String,
        symbol: String,
    },
    FalseGuard {
        from: String,
        to: String,
    },
    UnsatisfiableGuard {
        from: String,
        to: String,
    },
    GuardTooWide {
        from: String,
        to: String,
        atoms: usize,
    },
    Unreachable {
        state: String,
    },
    Incomplete {
        state: String,
    },
    Overlap {
        state: String,
        first: String,
        second: String,
    },
    Unclassified {
        symbol: String,
    },
    Misclassified {
        symbol: String,
        role: String,
    },
    MultiplyClassified {
        symbol: String,
    },
    InvalidName {
        name: String,
    },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::DuplicateState { state } => write!(f, "duplicate state `{state}`"),
            Issue::MissingInitial => write!(f, "missing initial state"),
            Issue::UnknownInitial { state } => write!(f, "initial state `{state}` is not declared"),
            Issue::DanglingEndpoint { from, to } => {
                write!(f, "transition {from} -> {to} names an undeclared state")
            }
            Issue::GuardOutsideAlphabet { from, to, symbol } => {
                write!(f, "guard of {from} -> {to} uses `{symbol}` outside the input alphabet")
            }
            Issue::OutputOutsideAlphabet { state, symbol } => {
                write!(f, "state `{state}` outputs `{symbol}` outside the output alphabet")
            }
            Issue::FalseGuard { from, to } => write!(f, "transition {from} -> {to} is guarded by 0"),
            Issue::UnsatisfiableGuard { from, to } => {
                write!(f, "guard of {from} -> {to} is unsatisfiable")
            }
            Issue::GuardTooWide { from, to, atoms } => {
                write!(f, "guard of {from} -> {to} has {atoms} atoms, above the enumeration cap")
            }
            Issue::Unreachable { state } => write!(f, "state `{state}` is unreachable"),
            Issue::Incomplete { state } => {
                write!(f, "state `{state}` is incomplete: its outgoing guards do not cover every input")
            }
            Issue::Overlap { state, first, second } => write!(
                f,
                "state `{state}`: guards towards `{first}` and `{second}` overlap (nondeterministic)"
            ),
            Issue::Unclassified { symbol } => write!(f, "symbol `{symbol}` is not classified"),
            Issue::Misclassified { symbol, role } => {
                write!(f, "symbol `{symbol}` is used as {role} but classified otherwise")
            }
            Issue::MultiplyClassified { symbol } => {
                write!(f, "symbol `{symbol}` is classified more than once")
            }
            Issue::InvalidName { name } => write!(f, "invalid or duplicate name `{name}`"),
        }
    }
}

/// Validation result. An empty `errors` list means the entity is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl Report {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn is_clean(&self) -> bool {
        self.errors.is_empty() && self.warnings.is_empty()
    }

    pub fn error(&mut self, issue: Issue) {
        self.errors.push(issue);
    }

    pub fn warn(&mut self, issue: Issue) {
        self.warnings.push(issue);
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}
