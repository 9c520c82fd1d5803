//! Broadcast composition of a system of CSMs.
//!
//! At every instant the global symbol set is the union of the environment
//! input and the outputs of every component's current state, and all
//! components step simultaneously. An edge of the reachability graph is the
//! product of one guard per component, reduced by fixing every internal
//! symbol to its value in the source state's output. Edges whose reduced
//! guard is unsatisfiable are dropped.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::analyze::StatePattern;
use crate::error::{Error, Result};
use crate::formula::{conjoin, disjoin, Assignment, Formula, SymbolSet, DEFAULT_ATOM_CAP};
use crate::model::Csm;

/// One state index per machine, in machine order.
pub type StateVector = Vec<usize>;

#[derive(Debug, Clone)]
pub struct SystemModel {
    pub name: String,
    pub machines: Vec<Csm>,
    /// Symbols whose truth is fixed by the component outputs.
    pub internal: SymbolSet,
    /// Symbols the environment may inject freely.
    pub environment: SymbolSet,
    pub accepting: Vec<StatePattern>,
}

impl SystemModel {
    /// Builds a system with default symbol classification: everything some
    /// machine outputs is internal, every other input is environment.
    pub fn new(name: impl Into<String>, machines: Vec<Csm>) -> Result<Self> {
        Self::with_classification(name, machines, None, None)
    }

    /// Explicit `internal`/`environment` sets override the defaults. When only
    /// the environment is given, internal symbols are the outputs not in it.
    pub fn with_classification(
        name: impl Into<String>,
        machines: Vec<Csm>,
        internal: Option<SymbolSet>,
        environment: Option<SymbolSet>,
    ) -> Result<Self> {
        let outputs: SymbolSet = machines
            .iter()
            .flat_map(|m| m.outputs.iter().cloned())
            .collect();
        let inputs: SymbolSet = machines
            .iter()
            .flat_map(|m| m.inputs.iter().cloned())
            .collect();
        let (internal, environment) = match (internal, environment) {
            (Some(i), Some(e)) => (i, e),
            (Some(i), None) => {
                let e = inputs.difference(&i).cloned().collect();
                (i, e)
            }
            (None, Some(e)) => (outputs.difference(&e).cloned().collect(), e),
            (None, None) => {
                let e = inputs.difference(&outputs).cloned().collect();
                (outputs, e)
            }
        };
        if let Some(s) = internal.intersection(&environment).next() {
            return Err(Error::SymbolClash(s.to_string()));
        }
        let mut names = BTreeSet::new();
        for m in &machines {
            if !names.insert(m.name.as_str()) {
                return Err(Error::UnknownEntity(format!(
                    "duplicate machine `{}`",
                    m.name
                )));
            }
            for t in &m.transitions {
                if let Some(s) = t
                    .guard
                    .atoms()
                    .into_iter()
                    .find(|s| !internal.contains(s) && !environment.contains(s))
                {
                    return Err(Error::UnclassifiedSymbol {
                        machine: m.name.clone(),
                        symbol: s.to_string(),
                    });
                }
            }
        }
        Ok(SystemModel {
            name: name.into(),
            machines,
            internal,
            environment,
            accepting: Vec::new(),
        })
    }

    pub fn initial_vector(&self) -> Result<StateVector> {
        self.machines
            .iter()
            .map(|m| {
                m.state_index(&m.initial)
                    .ok_or_else(|| Error::UnknownState {
                        machine: m.name.clone(),
                        state: m.initial.clone(),
                    })
            })
            .collect()
    }

    pub fn vector_from_names(&self, names: &[&str]) -> Result<StateVector> {
        if names.len() != self.machines.len() {
            return Err(Error::InvalidVector(Vec::new()));
        }
        self.machines
            .iter()
            .zip(names)
            .map(|(m, n)| {
                m.state_index(n).ok_or_else(|| Error::UnknownState {
                    machine: m.name.clone(),
                    state: n.to_string(),
                })
            })
            .collect()
    }

    pub(crate) fn check_vector(&self, v: &[usize]) -> Result<()> {
        if v.len() != self.machines.len()
            || self
                .machines
                .iter()
                .zip(v)
                .any(|(m, &i)| i >= m.states.len())
        {
            return Err(Error::InvalidVector(v.to_vec()));
        }
        Ok(())
    }

    pub fn state_names(&self, v: &[usize]) -> Vec<String> {
        self.machines
            .iter()
            .zip(v)
            .map(|(m, &i)| m.states[i].name.clone())
            .collect()
    }

    /// Union of the component state outputs.
    pub fn system_output(&self, v: &[usize]) -> Result<SymbolSet> {
        self.check_vector(v)?;
        Ok(self
            .machines
            .iter()
            .zip(v)
            .flat_map(|(m, &i)| m.states[i].outputs.iter().cloned())
            .collect())
    }

    /// Values forced on symbols by the outputs of state `v`.
    fn forced_assignment(&self, outputs: &SymbolSet) -> Assignment {
        let mut fixed: Assignment = self
            .internal
            .iter()
            .map(|s| (s.clone(), outputs.contains(s)))
            .collect();
        // environment symbols some component emits are present regardless of the environment
        fixed.extend(
            self.environment
                .intersection(outputs)
                .map(|s| (s.clone(), true)),
        );
        fixed
    }

    /// Reduced product guard for moving each machine along `chosen[i]`.
    pub fn edge_guard(&self, from: &[usize], chosen: &[usize]) -> Result<Formula> {
        let outputs = self.system_output(from)?;
        if chosen.len() != self.machines.len() {
            return Err(Error::InvalidVector(chosen.to_vec()));
        }
        let mut guards = Vec::with_capacity(chosen.len());
        for ((m, &s), &t) in self.machines.iter().zip(from).zip(chosen) {
            match m.transitions.get(t) {
                Some(tr) if tr.from == m.states[s].name => guards.push(tr.guard.clone()),
                _ => {
                    return Err(Error::MismatchedTransition {
                        machine: m.name.clone(),
                        transition: t,
                    })
                }
            }
        }
        Ok(conjoin(guards).restrict(&self.forced_assignment(&outputs)))
    }

    fn outgoing_table(&self) -> Vec<Vec<Vec<usize>>> {
        self.machines
            .iter()
            .map(|m| {
                let mut per_state = vec![Vec::new(); m.states.len()];
                for (i, t) in m.transitions.iter().enumerate() {
                    if let Some(s) = m.state_index(&t.from) {
                        per_state[s].push(i);
                    }
                }
                per_state
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SystemState {
    pub vector: Vec<String>,
    pub name: String,
    pub outputs: SymbolSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub guard: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityGraph {
    pub machines: Vec<String>,
    pub environment: SymbolSet,
    /// Breadth-first discovery order.
    pub nodes: Vec<SystemState>,
    pub initial: usize,
    pub edges: Vec<GraphEdge>,
}

impl ReachabilityGraph {
    pub fn node_by_name(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn outgoing(&self, node: usize) -> impl Iterator<Item = &GraphEdge> {
        self.edges.iter().filter(move |e| e.from == node)
    }

    pub fn incoming(&self, node: usize) -> impl Iterator<Item = &GraphEdge> {
        self.edges.iter().filter(move |e| e.to == node)
    }

    /// Successor lists indexed by node, in edge order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.from].push(e.to);
        }
        adj
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ComposeOptions {
    /// Compose even if some state's guards do not cover every input.
    pub allow_incomplete: bool,
    pub atom_cap: usize,
}

impl Default for ComposeOptions {
    fn default() -> Self {
        ComposeOptions {
            allow_incomplete: false,
            atom_cap: DEFAULT_ATOM_CAP,
        }
    }
}

/// Composite state name: component names joined with `_`.
pub fn composite_name(names: &[String]) -> String {
    names.join("_")
}

pub fn compose(system: &SystemModel) -> Result<ReachabilityGraph> {
    compose_with(system, ComposeOptions::default())
}

pub fn compose_with(system: &SystemModel, opts: ComposeOptions) -> Result<ReachabilityGraph> {
    for m in &system.machines {
        let report = m.validate_with_cap(opts.atom_cap);
        if !report.is_valid() {
            return Err(Error::Invalid {
                entity: m.name.clone(),
                report,
            });
        }
        if !opts.allow_incomplete {
            for s in &m.states {
                if !m.is_complete(&s.name, opts.atom_cap)? {
                    return Err(Error::Incomplete {
                        machine: m.name.clone(),
                        state: s.name.clone(),
                    });
                }
            }
        }
    }

    let table = system.outgoing_table();
    let initial = system.initial_vector()?;
    let mut index: HashMap<StateVector, usize> = HashMap::from([(initial.clone(), 0)]);
    let mut vectors = vec![initial];
    let mut edges: Vec<GraphEdge> = Vec::new();
    let mut queue = VecDeque::from([0usize]);

    while let Some(node) = queue.pop_front() {
        let from = vectors[node].clone();
        let forced = system.forced_assignment(&system.system_output(&from)?);
        let choices: Vec<&Vec<usize>> = system
            .machines
            .iter()
            .enumerate()
            .map(|(k, _)| &table[k][from[k]])
            .collect();
        let first_edge = edges.len();
        // edge slot per target within this node, for merging parallel edges
        let mut slot: HashMap<usize, usize> = HashMap::new();

        for combo in CartesianProduct::new(&choices) {
            let guard = conjoin(
                system
                    .machines
                    .iter()
                    .zip(&combo)
                    .map(|(m, &t)| m.transitions[t].guard.clone()),
            )
            .restrict(&forced);
            if !guard.is_satisfiable_capped(opts.atom_cap)? {
                continue;
            }
            let target: StateVector = system
                .machines
                .iter()
                .zip(&combo)
                .map(|(m, &t)| m.state_index(&m.transitions[t].to).expect("validated"))
                .collect();
            let to = match index.get(&target) {
                Some(&i) => i,
                None => {
                    let i = vectors.len();
                    index.insert(target.clone(), i);
                    vectors.push(target);
                    queue.push_back(i);
                    i
                }
            };
            match slot.get(&to) {
                Some(&e) => {
                    let merged = &mut edges[first_edge + e];
                    if merged.guard != guard {
                        merged.guard = disjoin([merged.guard.clone(), guard]);
                    }
                }
                None => {
                    slot.insert(to, edges.len() - first_edge);
                    edges.push(GraphEdge {
                        from: node,
                        to,
                        guard,
                    });
                }
            }
        }
    }

    let mut nodes: Vec<SystemState> = vectors
        .iter()
        .map(|v| {
            let vector = system.state_names(v);
            SystemState {
                name: composite_name(&vector),
                outputs: system.system_output(v).expect("explored vectors are valid"),
                vector,
            }
        })
        .collect();
    let distinct: BTreeSet<&str> = nodes.iter().map(|n| n.name.as_str()).collect();
    if distinct.len() != nodes.len() {
        // component names containing `_` made joined names ambiguous
        for n in &mut nodes {
            let qualified: Vec<String> = system
                .machines
                .iter()
                .zip(&n.vector)
                .map(|(m, s)| format!("{}.{}", m.name, s))
                .collect();
            n.name = composite_name(&qualified);
        }
    }

    Ok(ReachabilityGraph {
        machines: system.machines.iter().map(|m| m.name.clone()).collect(),
        environment: system.environment.clone(),
        nodes,
        initial: 0,
        edges,
    })
}

/// Lexicographic enumeration of one element per list, first list outermost.
pub(crate) struct CartesianProduct<'a> {
    lists: &'a [&'a Vec<usize>],
    cursor: Vec<usize>,
    done: bool,
}

impl<'a> CartesianProduct<'a> {
    pub(crate) fn new(lists: &'a [&'a Vec<usize>]) -> Self {
        CartesianProduct {
            lists,
            cursor: vec![0; lists.len()],
            done: lists.iter().any(|l| l.is_empty()),
        }
    }
}

impl Iterator for CartesianProduct<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let item = self
            .cursor
            .iter()
            .zip(self.lists)
            .map(|(&c, l)| l[c])
            .collect();
        let mut k = self.lists.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.cursor[k] += 1;
            if self.cursor[k] < self.lists[k].len() {
                break;
            }
            self.cursor[k] = 0;
        }
        Some(item)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, symbols};
    use crate::model::tests::m1;
    use crate::model::{CsmState, CsmTransition};

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn toggle(name: &str, input: &str) -> Csm {
        Csm {
            name: name.into(),
            inputs: symbols([input]),
            outputs: SymbolSet::new(),
            states: vec![CsmState::new("lo"), CsmState::new("hi")],
            initial: "lo".into(),
            transitions: vec![
                CsmTransition::new("lo", f(input), "hi"),
                CsmTransition::new("lo", negate_atom(input), "lo"),
                CsmTransition::new("hi", f(input), "lo"),
                CsmTransition::new("hi", negate_atom(input), "hi"),
            ],
        }
    }

    fn negate_atom(s: &str) -> Formula {
        Formula::not(Formula::atom(s))
    }

    #[test]
    fn cartesian_order() {
        let a = vec![1, 2];
        let b = vec![7, 8, 9];
        let lists = [&a, &b];
        let all: Vec<_> = CartesianProduct::new(&lists).collect();
        assert_eq!(
            all,
            vec![
                vec![1, 7],
                vec![1, 8],
                vec![1, 9],
                vec![2, 7],
                vec![2, 8],
                vec![2, 9]
            ]
        );
        let empty = vec![];
        let lists = [&a, &empty];
        assert_eq!(CartesianProduct::new(&lists).count(), 0);
        let lists: [&Vec<usize>; 0] = [];
        assert_eq!(CartesianProduct::new(&lists).count(), 1);
    }

    #[test]
    fn default_classification() {
        let s = SystemModel::new("S", vec![m1()]).unwrap();
        assert_eq!(s.internal, symbols(["go"]));
        assert_eq!(s.environment, symbols(["start", "end"]));
        let clash = SystemModel::with_classification(
            "S",
            vec![m1()],
            Some(symbols(["start"])),
            Some(symbols(["start"])),
        );
        assert!(matches!(clash, Err(Error::SymbolClash(_))));
        let unclassified = SystemModel::with_classification(
            "S",
            vec![m1()],
            Some(SymbolSet::new()),
            Some(symbols(["start"])),
        );
        assert!(matches!(
            unclassified,
            Err(Error::UnclassifiedSymbol { .. })
        ));
    }

    #[test]
    fn system_output_examples() {
        let s = SystemModel::new("S", vec![m1()]).unwrap();
        assert_eq!(s.system_output(&[1]).unwrap(), symbols(["go"]));
        assert_eq!(s.system_output(&[0]).unwrap(), SymbolSet::new());
        assert!(s.system_output(&[2]).is_err());
        assert!(s.system_output(&[0, 0]).is_err());

        let mut a = Csm::new("A");
        a.outputs = symbols(["a"]);
        a.states.push(CsmState::with_outputs("p", symbols(["a"])));
        a.initial = "p".into();
        let mut b = Csm::new("B");
        b.outputs = symbols(["a", "b"]);
        b.states
            .push(CsmState::with_outputs("q", symbols(["a", "b"])));
        b.initial = "q".into();
        let s = SystemModel::new("S", vec![a, b]).unwrap();
        assert_eq!(s.system_output(&[0, 0]).unwrap(), symbols(["a", "b"]));
    }

    fn sender_receiver() -> SystemModel {
        // sender emits `req` in `busy`; receiver waits for it
        let mut snd = Csm::new("Snd");
        snd.inputs = symbols(["kick"]);
        snd.outputs = symbols(["req"]);
        snd.states = vec![
            CsmState::new("idle"),
            CsmState::with_outputs("busy", symbols(["req"])),
        ];
        snd.initial = "idle".into();
        snd.transitions = vec![
            CsmTransition::new("idle", f("kick"), "busy"),
            CsmTransition::new("idle", f("!kick"), "idle"),
            CsmTransition::new("busy", f("1"), "busy"),
        ];
        let mut rcv = Csm::new("Rcv");
        rcv.inputs = symbols(["req"]);
        rcv.states = vec![CsmState::new("w"), CsmState::new("got")];
        rcv.initial = "w".into();
        rcv.transitions = vec![
            CsmTransition::new("w", f("req"), "got"),
            CsmTransition::new("w", f("!req"), "w"),
            CsmTransition::new("got", f("1"), "got"),
        ];
        SystemModel::new("SR", vec![snd, rcv]).unwrap()
    }

    #[test]
    fn edge_guard_reduces_internal_symbols() {
        let s = sender_receiver();
        // idle emits nothing: `req` is false
        assert_eq!(s.edge_guard(&[0, 0], &[1, 0]).unwrap(), Formula::False);
        assert_eq!(s.edge_guard(&[0, 0], &[0, 1]).unwrap(), f("kick"));
        // busy emits `req`
        assert_eq!(s.edge_guard(&[1, 0], &[2, 0]).unwrap(), Formula::True);
        assert_eq!(s.edge_guard(&[1, 0], &[2, 1]).unwrap(), Formula::False);
        assert!(matches!(
            s.edge_guard(&[0, 0], &[2, 0]),
            Err(Error::MismatchedTransition { .. })
        ));
    }

    #[test]
    fn compose_m1_alone() {
        let s = SystemModel::new("S", vec![m1()]).unwrap();
        let g = compose(&s).unwrap();
        let names: Vec<_> = g.nodes.iter().map(|n| n.name.as_str()).collect();
        assert_eq!(names, ["wait", "run"]);
        assert_eq!(g.edges.len(), 4);
        assert_eq!(
            g.edges[0],
            GraphEdge {
                from: 0,
                to: 1,
                guard: f("start")
            }
        );
        assert_eq!(
            g.edges[1],
            GraphEdge {
                from: 0,
                to: 0,
                guard: f("!start")
            }
        );
        assert_eq!(g.nodes[1].outputs, symbols(["go"]));
    }

    #[test]
    fn compose_independent_full_product() {
        let s = SystemModel::new("S", vec![toggle("A", "x"), toggle("B", "y")]).unwrap();
        let g = compose(&s).unwrap();
        assert_eq!(g.nodes.len(), 4);
        // every node has an edge to every node
        assert_eq!(g.edges.len(), 16);
        assert_eq!(g.nodes[0].name, "lo_lo");
    }

    #[test]
    fn compose_sender_receiver() {
        let g = compose(&sender_receiver()).unwrap();
        let names: Vec<_> = g.nodes.iter().map(|n| n.name.as_str()).collect();
        assert_eq!(names, ["idle_w", "busy_w", "busy_got"]);
        let e = g.edges.iter().find(|e| e.from == 1 && e.to == 2).unwrap();
        assert_eq!(e.guard, Formula::True);
        assert!(g
            .edges
            .iter()
            .all(|e| e.guard.atoms().is_subset(&g.environment)));
    }

    #[test]
    fn incomplete_machines_are_refused() {
        let mut m = m1();
        m.transitions.remove(1);
        let s = SystemModel::new("S", vec![m]).unwrap();
        assert!(matches!(compose(&s), Err(Error::Incomplete { .. })));
        let g = compose_with(
            &s,
            ComposeOptions {
                allow_incomplete: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges.len(), 3);
    }

    #[test]
    fn parallel_edges_merge() {
        let mut m = m1();
        m.inputs.insert("alt".into());
        m.transitions
            .push(CsmTransition::new("wait", f("alt"), "run"));
        let s = SystemModel::new("S", vec![m]).unwrap();
        let g = compose(&s).unwrap();
        let e: Vec<_> = g
            .edges
            .iter()
            .filter(|e| e.from == 0 && e.to == 1)
            .collect();
        assert_eq!(e.len(), 1);
        assert!(e[0].guard.equivalent(&f("start+alt"), 20).unwrap());
    }

    #[test]
    fn ambiguous_names_are_qualified() {
        let mut a = Csm::new("A");
        a.states = vec![CsmState::new("x_y"), CsmState::new("x")];
        a.inputs = symbols(["e"]);
        a.initial = "x_y".into();
        a.transitions = vec![
            CsmTransition::new("x_y", f("e"), "x"),
            CsmTransition::new("x_y", f("!e"), "x_y"),
            CsmTransition::new("x", f("1"), "x"),
        ];
        let mut b = Csm::new("B");
        b.states = vec![CsmState::new("z"), CsmState::new("y_z")];
        b.inputs = symbols(["e"]);
        b.initial = "z".into();
        b.transitions = vec![
            CsmTransition::new("z", f("e"), "y_z"),
            CsmTransition::new("z", f("!e"), "z"),
            CsmTransition::new("y_z", f("1"), "y_z"),
        ];
        let g = compose(&SystemModel::new("S", vec![a, b]).unwrap()).unwrap();
        assert_eq!(g.nodes[0].name, "A.x_y_B.z");
        assert_eq!(g.nodes[1].name, "A.x_B.y_z");
    }
}
