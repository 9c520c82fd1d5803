//! Concurrent state machines in behavioral-pattern form.
//!
//! A [`Csm`] is a Moore machine: every state carries a (possibly empty) set
//! of output symbols, and transitions are guarded by [`Formula`]s over the
//! input alphabet. Input and output alphabets may overlap.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, FormulaError, Result};
use crate::formula::{conjoin, disjoin, negate, Formula, SymbolSet, DEFAULT_ATOM_CAP};
use crate::report::{Issue, Report};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CsmState {
    pub name: String,
    pub outputs: SymbolSet,
}

impl CsmState {
    pub fn new(name: impl Into<String>) -> Self {
        CsmState {
            name: name.into(),
            outputs: SymbolSet::new(),
        }
    }

    pub fn with_outputs(name: impl Into<String>, outputs: SymbolSet) -> Self {
        CsmState {
            name: name.into(),
            outputs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsmTransition {
    pub from: String,
    pub guard: Formula,
    pub to: String,
}

impl CsmTransition {
    pub fn new(from: impl Into<String>, guard: Formula, to: impl Into<String>) -> Self {
        CsmTransition {
            from: from.into(),
            guard,
            to: to.into(),
        }
    }

    pub fn is_self_loop(&self) -> bool {
        self.from == self.to
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csm {
    pub name: String,
    pub inputs: SymbolSet,
    pub outputs: SymbolSet,
    pub states: Vec<CsmState>,
    /// Empty when no initial state has been declared.
    pub initial: String,
    pub transitions: Vec<CsmTransition>,
}

impl Csm {
    pub fn new(name: impl Into<String>) -> Self {
        Csm {
            name: name.into(),
            inputs: SymbolSet::new(),
            outputs: SymbolSet::new(),
            states: Vec::new(),
            initial: String::new(),
            transitions: Vec::new(),
        }
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn state(&self, name: &str) -> Option<&CsmState> {
        self.states.iter().find(|s| s.name == name)
    }

    /// Indices of transitions leaving `state`, in declaration order.
    pub fn outgoing<'a>(&'a self, state: &'a str) -> impl Iterator<Item = usize> + 'a {
        self.transitions
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.from == state)
            .map(|(i, _)| i)
    }

    pub fn validate(&self) -> Report {
        self.validate_with_cap(DEFAULT_ATOM_CAP)
    }

    /// Structural errors, then reachability, completeness and overlap warnings.
    pub fn validate_with_cap(&self, cap: usize) -> Report {
        let mut report = Report::default();
        let mut seen = BTreeSet::new();
        for s in &self.states {
            if !seen.insert(s.name.as_str()) {
                report.error(Issue::DuplicateState {
                    state: s.name.clone(),
                });
            }
            for out in s.outputs.difference(&self.outputs) {
                report.error(Issue::OutputOutsideAlphabet {
                    state: s.name.clone(),
                    symbol: out.to_string(),
                });
            }
        }
        if self.initial.is_empty() {
            report.error(Issue::MissingInitial);
        } else if !seen.contains(self.initial.as_str()) {
            report.error(Issue::UnknownInitial {
                state: self.initial.clone(),
            });
        }
        for t in &self.transitions {
            let (from, to) = (t.from.clone(), t.to.clone());
            if !seen.contains(t.from.as_str()) || !seen.contains(t.to.as_str()) {
                report.error(Issue::DanglingEndpoint {
                    from: from.clone(),
                    to: to.clone(),
                });
            }
            for atom in t.guard.atoms().difference(&self.inputs) {
                report.error(Issue::GuardOutsideAlphabet {
                    from: from.clone(),
                    to: to.clone(),
                    symbol: atom.to_string(),
                });
            }
            if t.guard.is_const_false() {
                report.error(Issue::FalseGuard { from, to });
                continue;
            }
            match t.guard.is_satisfiable_capped(cap) {
                Ok(true) => {}
                Ok(false) => report.error(Issue::UnsatisfiableGuard { from, to }),
                Err(FormulaError::AtomCapExceeded { atoms, .. }) => {
                    report.error(Issue::GuardTooWide { from, to, atoms })
                }
                Err(_) => unreachable!("enumeration only fails on the atom cap"),
            }
        }
        if !report.is_valid() {
            return report;
        }

        let reachable = self.local_reachable_states_with_cap(cap);
        for s in &self.states {
            if !reachable.contains(&s.name) {
                report.warn(Issue::Unreachable {
                    state: s.name.clone(),
                });
            }
        }
        for s in &self.states {
            match self.is_complete(&s.name, cap) {
                Ok(true) => {}
                Ok(false) => report.warn(Issue::Incomplete {
                    state: s.name.clone(),
                }),
                Err(FormulaError::AtomCapExceeded { atoms, .. }) => {
                    report.error(Issue::GuardTooWide {
                        from: s.name.clone(),
                        to: "*".into(),
                        atoms,
                    })
                }
                Err(_) => unreachable!(),
            }
            let out: Vec<usize> = self.outgoing(&s.name).collect();
            for (k, &i) in out.iter().enumerate() {
                for &j in &out[k + 1..] {
                    let both = conjoin([
                        self.transitions[i].guard.clone(),
                        self.transitions[j].guard.clone(),
                    ]);
                    if both.is_satisfiable_capped(cap).unwrap_or(false) {
                        report.warn(Issue::Overlap {
                            state: s.name.clone(),
                            first: self.transitions[i].to.clone(),
                            second: self.transitions[j].to.clone(),
                        });
                    }
                }
            }
        }
        report
    }

    /// True if the outgoing guards of `state` cover every input subset.
    pub fn is_complete(&self, state: &str, cap: usize) -> Result<bool, FormulaError> {
        self.coverage(state).is_tautology_capped(cap)
    }

    fn coverage(&self, state: &str) -> Formula {
        disjoin(
            self.outgoing(state)
                .map(|i| self.transitions[i].guard.clone()),
        )
    }

    /// States reachable from the initial state through satisfiable guards.
    pub fn local_reachable_states(&self) -> BTreeSet<String> {
        self.local_reachable_states_with_cap(DEFAULT_ATOM_CAP)
    }

    fn local_reachable_states_with_cap(&self, cap: usize) -> BTreeSet<String> {
        let mut reached = BTreeSet::new();
        if self.state_index(&self.initial).is_none() {
            return reached;
        }
        let mut queue = VecDeque::from([self.initial.clone()]);
        reached.insert(self.initial.clone());
        while let Some(s) = queue.pop_front() {
            for i in self.outgoing(&s) {
                let t = &self.transitions[i];
                // guards above the cap are assumed satisfiable
                if t.guard.is_satisfiable_capped(cap).unwrap_or(true)
                    && self.state_index(&t.to).is_some()
                    && reached.insert(t.to.clone())
                {
                    queue.push_back(t.to.clone());
                }
            }
        }
        reached
    }

    /// Adds a self-loop guarded by the negated coverage to every incomplete state.
    pub fn completeness_closure(&self) -> Result<Csm> {
        let mut closed = self.clone();
        for s in &self.states {
            let coverage = self.coverage(&s.name);
            if !coverage.is_tautology()? {
                closed
                    .transitions
                    .push(CsmTransition::new(&s.name, negate(coverage), &s.name));
            }
        }
        Ok(closed)
    }

    /// Unions `extra` into the outputs of `state`, extending the output alphabet.
    pub fn augment_outputs(&self, state: &str, extra: &SymbolSet) -> Result<Csm> {
        let idx = self.state_index(state).ok_or_else(|| Error::UnknownState {
            machine: self.name.clone(),
            state: state.to_string(),
        })?;
        let mut m = self.clone();
        m.states[idx].outputs.extend(extra.iter().cloned());
        m.outputs.extend(extra.iter().cloned());
        Ok(m)
    }
}

pub fn validate_csm(m: &Csm) -> Report {
    m.validate()
}

pub fn completeness_closure(m: &Csm) -> Result<Csm> {
    m.completeness_closure()
}

pub fn local_reachable_states(m: &Csm) -> BTreeSet<String> {
    m.local_reachable_states()
}

pub fn augment_outputs(m: &Csm, state: &str, extra: &SymbolSet) -> Result<Csm> {
    m.augment_outputs(state, extra)
}
