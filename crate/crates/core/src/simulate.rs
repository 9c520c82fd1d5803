//! Step-by-step execution of a system under explicit environment inputs.
//!
//! Symbols live for exactly one step: the global set of a step is the
//! environment input plus the outputs of the current states, and nothing
//! is carried over to the next step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compose::{CartesianProduct, StateVector, SystemModel};
use crate::error::{Error, Result};
use crate::formula::SymbolSet;

/// How a machine with several enabled transitions picks one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Return every combination of enabled transitions.
    EnumerateAll,
    /// Take the enabled transition declared first.
    FirstDeclared,
    /// Pick uniformly, reproducibly from the seed.
    SeededRandom(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub env: SymbolSet,
    pub before: StateVector,
    pub global: SymbolSet,
    /// Transition indices enabled per machine.
    pub enabled: Vec<Vec<usize>>,
    /// Chosen combinations, one transition index per machine.
    pub chosen: Vec<Vec<usize>>,
    /// Successor vector for each chosen combination.
    pub after: Vec<StateVector>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub initial: StateVector,
    pub steps: Vec<StepRecord>,
}

impl Trace {
    pub fn final_vector(&self) -> &StateVector {
        self.steps.last().map_or(&self.initial, |s| &s.after[0])
    }
}

pub struct Simulator<'a> {
    system: &'a SystemModel,
    policy: Policy,
    rng: ChaCha8Rng,
}

impl<'a> Simulator<'a> {
    pub fn new(system: &'a SystemModel, policy: Policy) -> Self {
        let seed = match policy {
            Policy::SeededRandom(seed) => seed,
            _ => 0,
        };
        Simulator {
            system,
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn step(&mut self, v: &[usize], env: &SymbolSet) -> Result<StepRecord> {
        let sys = self.system;
        if let Some(s) = env.iter().find(|s| sys.internal.contains(*s)) {
            return Err(Error::InternalInjected(s.to_string()));
        }
        if let Some(s) = env.iter().find(|s| !sys.environment.contains(*s)) {
            return Err(Error::UnknownEntity(format!("environment symbol `{s}`")));
        }
        let mut global = sys.system_output(v)?;
        global.extend(env.iter().cloned());

        let mut enabled = Vec::with_capacity(sys.machines.len());
        for (m, &s) in sys.machines.iter().zip(v) {
            let state = &m.states[s].name;
            let on: Vec<usize> = m
                .outgoing(state)
                .filter(|&i| m.transitions[i].guard.eval(&global))
                .collect();
            if on.is_empty() {
                return Err(Error::NoEnabledTransition {
                    machine: m.name.clone(),
                    state: state.clone(),
                });
            }
            enabled.push(on);
        }

        let chosen: Vec<Vec<usize>> = match self.policy {
            Policy::EnumerateAll => {
                let lists: Vec<&Vec<usize>> = enabled.iter().collect();
                CartesianProduct::new(&lists).collect()
            }
            Policy::FirstDeclared => vec![enabled.iter().map(|on| on[0]).collect()],
            Policy::SeededRandom(_) => {
                vec![enabled
                    .iter()
                    .map(|on| on[self.rng.random_range(0..on.len())])
                    .collect()]
            }
        };
        let after = chosen
            .iter()
            .map(|combo| {
                sys.machines
                    .iter()
                    .zip(combo)
                    .map(|(m, &t)| {
                        m.state_index(&m.transitions[t].to)
                            .expect("validated endpoint")
                    })
                    .collect()
            })
            .collect();
        Ok(StepRecord {
            env: env.clone(),
            before: v.to_vec(),
            global,
            enabled,
            chosen,
            after,
        })
    }

    /// Folds `step` over `inputs` from the initial vector, following the
    /// first successor of each step.
    pub fn run(&mut self, inputs: &[SymbolSet]) -> Result<Trace> {
        let initial = self.system.initial_vector()?;
        let mut current = initial.clone();
        let mut steps = Vec::with_capacity(inputs.len());
        for env in inputs {
            let rec = self.step(&current, env)?;
            current = rec.after[0].clone();
            steps.push(rec);
        }
        Ok(Trace { initial, steps })
    }
}

pub fn step(
    system: &SystemModel,
    v: &[usize],
    env: &SymbolSet,
    policy: Policy,
) -> Result<StepRecord> {
    Simulator::new(system, policy).step(v, env)
}

pub fn run(system: &SystemModel, inputs: &[SymbolSet], policy: Policy) -> Result<Trace> {
    Simulator::new(system, policy).run(inputs)
}

/// Parses an environment sequence: one comma-separated symbol set per line,
/// an empty line standing for the empty set. Lines starting with `#` are skipped.
pub fn parse_env_sequence(text: &str) -> Result<Vec<SymbolSet>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        let mut set = SymbolSet::new();
        for part in line.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if !crate::formula::is_identifier(part) {
                return Err(crate::error::FormatError::new(
                    i + 1,
                    format!("invalid symbol `{part}`"),
                )
                .into());
            }
            set.insert(part.into());
        }
        out.push(set);
    }
    Ok(out)
}
