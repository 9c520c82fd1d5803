//! Verification toolkit for systems of Concurrent State Machines (CSMs).
//!
//! Machines are Moore automata whose transitions are guarded by Boolean
//! formulas over input symbols ([`formula`], [`model`]). Extended state
//! diagrams are turned into CSMs with an acknowledgment handshake
//! ([`statechart`]). Systems of machines communicate by broadcast and are
//! explored into reachability graphs ([`compose`], [`simulate`]), which are
//! then searched for traps and deadlocks ([`analyze`]).

pub mod analyze;
pub mod compose;
pub mod error;
pub mod fixtures;
pub mod formula;
pub mod io;
pub mod model;
pub mod report;
pub mod simulate;
pub mod statechart;

pub use analyze::{
    classify_deadlocks, diff_graphs, find_terminal_sccs, witness_paths, AnalysisReport, Deadlock,
    GraphDiff, StatePattern,
};
pub use compose::{
    compose, compose_with, ComposeOptions, GraphEdge, ReachabilityGraph, StateVector, SystemModel,
    SystemState,
};
pub use error::{Error, FormatError, FormulaError, Result};
pub use formula::{conjoin, parse_formula, render_formula, Assignment, Formula, Symbol, SymbolSet};
pub use model::{Csm, CsmState, CsmTransition};
pub use report::{Issue, Report};
pub use simulate::{Policy, Simulator, StepRecord, Trace};
pub use statechart::{MessageDecl, StTransition, Statechart, Trigger};
