//! Test-only generators and brute-force oracles.
//!
//! Nothing here calls the library's evaluation, restriction or composition
//! code: formulas are evaluated by a separate recursive walk and system
//! behavior is enumerated directly from the machine definitions.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use csm_core::{Csm, CsmState, CsmTransition, Formula, Symbol, SymbolSet, SystemModel};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Independent evaluator: atoms are true iff present.
pub fn truth(f: &Formula, present: &BTreeSet<&str>) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(s) => present.contains(s.as_str()),
        Formula::Not(c) => !truth(c, present),
        Formula::And(cs) => {
            let mut v = true;
            for c in cs {
                v &= truth(c, present);
            }
            v
        }
        Formula::Or(cs) => {
            let mut v = false;
            for c in cs {
                v |= truth(c, present);
            }
            v
        }
    }
}

pub fn atoms_of(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::Atom(s) => {
            out.insert(s.as_str().to_string());
        }
        Formula::Not(c) => atoms_of(c, out),
        Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| atoms_of(c, out)),
        _ => {}
    }
}

/// Every subset of `universe`, as a bitmask-indexed list.
pub fn subsets(universe: &[String]) -> Vec<BTreeSet<&str>> {
    (0..1u64 << universe.len())
        .map(|mask| {
            universe
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, s)| s.as_str())
                .collect()
        })
        .collect()
}

/// Full truth table of `f` over the sorted atom list `atoms`.
pub fn table(f: &Formula, atoms: &[String]) -> Vec<bool> {
    subsets(atoms).iter().map(|s| truth(f, s)).collect()
}

pub fn random_formula(rng: &mut impl Rng, atoms: &[String], depth: u32) -> Formula {
    let leaf = depth == 0 || rng.random_bool(0.3);
    if leaf {
        return match rng.random_range(0..12) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::atom(atoms.choose(rng).unwrap().as_str()),
        };
    }
    match rng.random_range(0..3) {
        0 => Formula::not(random_formula(rng, atoms, depth - 1)),
        k => {
            let n = rng.random_range(2..=3);
            let children = (0..n)
                .map(|_| random_formula(rng, atoms, depth - 1))
                .collect();
            if k == 1 {
                Formula::And(children)
            } else {
                Formula::Or(children)
            }
        }
    }
}

fn random_subset(rng: &mut impl Rng, pool: &[String], p: f64) -> SymbolSet {
    pool.iter()
        .filter(|_| rng.random_bool(p))
        .map(|s| Symbol::from(s.as_str()))
        .collect()
}

/// Random complete system: ≤ `max_machines` machines × ≤ 4 states over ≤ 6 symbols.
pub fn random_system(rng: &mut impl Rng, max_machines: usize) -> SystemModel {
    let n_symbols = rng.random_range(1..=6);
    let pool: Vec<String> = (0..n_symbols).map(|i| format!("s{i}")).collect();
    let n_machines = rng.random_range(1..=max_machines);
    let mut machines = Vec::new();
    for k in 0..n_machines {
        let mut m = Csm::new(format!("M{k}"));
        let n_states = rng.random_range(1..=4);
        m.outputs = random_subset(rng, &pool, 0.25);
        m.inputs = random_subset(rng, &pool, 0.6);
        let outs: Vec<String> = m.outputs.iter().map(|s| s.to_string()).collect();
        for i in 0..n_states {
            m.states.push(CsmState::with_outputs(
                format!("q{i}"),
                random_subset(rng, &outs, 0.5),
            ));
        }
        m.initial = "q0".into();
        let ins: Vec<String> = m.inputs.iter().map(|s| s.to_string()).collect();
        for i in 0..n_states {
            for _ in 0..rng.random_range(0..=3) {
                let guard = if ins.is_empty() {
                    Formula::True
                } else {
                    random_formula(rng, &ins, 2)
                };
                let table_any = {
                    let atoms: Vec<String> = {
                        let mut a = BTreeSet::new();
                        atoms_of(&guard, &mut a);
                        a.into_iter().collect()
                    };
                    table(&guard, &atoms).into_iter().any(|b| b)
                };
                if !table_any {
                    continue;
                }
                let to = rng.random_range(0..n_states);
                m.transitions
                    .push(CsmTransition::new(format!("q{i}"), guard, format!("q{to}")));
            }
        }
        machines.push(m.completeness_closure().expect("small alphabets"));
    }
    SystemModel::new("Random", machines).expect("default classification")
}

/// Brute-force step relation over the full product space.
pub struct Oracle {
    pub environment: Vec<String>,
    /// (vector, env mask) -> successor vectors
    pub steps: BTreeMap<(Vec<usize>, usize), BTreeSet<Vec<usize>>>,
    pub reachable: BTreeSet<Vec<usize>>,
}

impl Oracle {
    pub fn build(sys: &SystemModel) -> Oracle {
        let environment: Vec<String> = sys.environment.iter().map(|s| s.to_string()).collect();
        let envs = subsets(&environment);
        let dims: Vec<usize> = sys.machines.iter().map(|m| m.states.len()).collect();
        let mut all = vec![Vec::new()];
        for &d in &dims {
            all = all
                .into_iter()
                .flat_map(|prefix: Vec<usize>| {
                    (0..d).map(move |i| {
                        let mut v = prefix.clone();
                        v.push(i);
                        v
                    })
                })
                .collect();
        }
        let mut steps: BTreeMap<(Vec<usize>, usize), BTreeSet<Vec<usize>>> = BTreeMap::new();
        for v in &all {
            let mut outputs: BTreeSet<String> = BTreeSet::new();
            for (m, &s) in sys.machines.iter().zip(v) {
                outputs.extend(m.states[s].outputs.iter().map(|o| o.to_string()));
            }
            for (mask, env) in envs.iter().enumerate() {
                let mut global: BTreeSet<&str> = env.clone();
                global.extend(outputs.iter().map(String::as_str));
                let mut options: Vec<Vec<usize>> = Vec::new();
                for (m, &s) in sys.machines.iter().zip(v) {
                    let here = &m.states[s].name;
                    let targets: Vec<usize> = m
                        .transitions
                        .iter()
                        .filter(|t| &t.from == here && truth(&t.guard, &global))
                        .map(|t| m.states.iter().position(|x| x.name == t.to).unwrap())
                        .collect();
                    options.push(targets);
                }
                let mut succ = vec![Vec::new()];
                for opts in &options {
                    succ = succ
                        .into_iter()
                        .flat_map(|p: Vec<usize>| {
                            opts.iter().map(move |&o| {
                                let mut q = p.clone();
                                q.push(o);
                                q
                            })
                        })
                        .collect();
                }
                steps.insert((v.clone(), mask), succ.into_iter().collect());
            }
        }
        let init: Vec<usize> = sys
            .machines
            .iter()
            .map(|m| m.states.iter().position(|s| s.name == m.initial).unwrap())
            .collect();
        let mut reachable = BTreeSet::from([init.clone()]);
        let mut queue = VecDeque::from([init]);
        while let Some(v) = queue.pop_front() {
            for mask in 0..envs.len() {
                for w in &steps[&(v.clone(), mask)] {
                    if reachable.insert(w.clone()) {
                        queue.push_back(w.clone());
                    }
                }
            }
        }
        Oracle {
            environment,
            steps,
            reachable,
        }
    }
}

/// Maps a graph node's name vector back to state indices.
pub fn vector_of(sys: &SystemModel, names: &[String]) -> Vec<usize> {
    sys.machines
        .iter()
        .zip(names)
        .map(|(m, n)| m.states.iter().position(|s| &s.name == n).unwrap())
        .collect()
}
