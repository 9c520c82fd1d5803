//! Trap and deadlock analysis of reachability graphs.
//!
//! A set of states that "cannot be left" is a terminal strongly connected
//! component: once the system enters it, every continuation stays inside.
//! Terminal components not matched by an accepting pattern are deadlocks.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::compose::ReachabilityGraph;
use crate::error::{Error, Result};
use crate::formula::{Formula, DEFAULT_ATOM_CAP};

/// Glob over composite state names: `*` matches any run, `?` one character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatePattern(String);

impl StatePattern {
    pub fn new(pattern: &str) -> Result<Self> {
        let ok = !pattern.is_empty()
            && pattern
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '*' | '?' | '.'));
        if ok {
            Ok(StatePattern(pattern.to_string()))
        } else {
            Err(Error::Pattern(pattern.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn matches(&self, name: &str) -> bool {
        fn go(p: &[u8], s: &[u8]) -> bool {
            match p.split_first() {
                None => s.is_empty(),
                Some((b'*', rest)) => (0..=s.len()).any(|k| go(rest, &s[k..])),
                Some((b'?', rest)) => !s.is_empty() && go(rest, &s[1..]),
                Some((c, rest)) => s.first() == Some(c) && go(rest, &s[1..]),
            }
        }
        go(self.0.as_bytes(), name.as_bytes())
    }
}

impl fmt::Display for StatePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Strongly connected components in reverse topological order (Tarjan).
pub fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // (node, next successor position)
        let mut work = vec![(root, 0usize)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = work.last_mut() {
            if let Some(&w) = adj[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps
}

/// Components with no edge leaving them, ordered by smallest member.
pub fn find_terminal_sccs(g: &ReachabilityGraph) -> Vec<Vec<usize>> {
    let adj = g.adjacency();
    let comps = strongly_connected_components(&adj);
    let mut owner = vec![0; adj.len()];
    for (c, members) in comps.iter().enumerate() {
        for &v in members {
            owner[v] = c;
        }
    }
    let mut terminal: Vec<Vec<usize>> = comps
        .iter()
        .enumerate()
        .filter(|(c, members)| {
            members
                .iter()
                .all(|&v| adj[v].iter().all(|&w| owner[w] == *c))
        })
        .map(|(_, members)| members.clone())
        .collect();
    terminal.sort_by_key(|m| m[0]);
    terminal
}

/// Edge indices from the initial node, in order.
pub type Path = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Deadlock {
    pub members: Vec<usize>,
    /// Edges entering the component from outside.
    pub incoming: Vec<usize>,
    pub witness: Path,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    /// Nodes whose only successors are themselves.
    pub terminal_nodes: Vec<usize>,
    pub terminal_sccs: Vec<Vec<usize>>,
    /// Terminal components matched by an accepting pattern.
    pub accepting: Vec<Vec<usize>>,
    pub deadlocks: Vec<Deadlock>,
}

impl AnalysisReport {
    pub fn has_deadlocks(&self) -> bool {
        !self.deadlocks.is_empty()
    }
}

/// A terminal component is accepting when every member matches some pattern.
pub fn classify_deadlocks(g: &ReachabilityGraph, accepting: &[StatePattern]) -> AnalysisReport {
    let terminal_sccs = find_terminal_sccs(g);
    let terminal_nodes = (0..g.nodes.len())
        .filter(|&v| g.outgoing(v).all(|e| e.to == v))
        .collect();
    let mut report = AnalysisReport {
        terminal_nodes,
        terminal_sccs: terminal_sccs.clone(),
        accepting: Vec::new(),
        deadlocks: Vec::new(),
    };
    for comp in terminal_sccs {
        let is_accepting = comp
            .iter()
            .all(|&v| accepting.iter().any(|p| p.matches(&g.nodes[v].name)));
        if is_accepting {
            report.accepting.push(comp);
            continue;
        }
        let members: BTreeSet<usize> = comp.iter().copied().collect();
        let incoming = g
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| members.contains(&e.to) && !members.contains(&e.from))
            .map(|(i, _)| i)
            .collect();
        let witness = witness_paths(g, comp[0], 1)
            .ok()
            .and_then(|mut p| p.pop())
            .unwrap_or_default();
        report.deadlocks.push(Deadlock {
            members: comp,
            incoming,
            witness,
        });
    }
    report
}

/// Up to `k` shortest paths from the initial node to `target`.
///
/// Every returned path has the minimal length; paths are enumerated in
/// edge order with predecessors taken by ascending node index.
pub fn witness_paths(g: &ReachabilityGraph, target: usize, k: usize) -> Result<Vec<Path>> {
    if target >= g.nodes.len() {
        return Err(Error::UnknownNode(target));
    }
    let mut dist = vec![usize::MAX; g.nodes.len()];
    dist[g.initial] = 0;
    let mut queue = VecDeque::from([g.initial]);
    while let Some(v) = queue.pop_front() {
        for e in g.outgoing(v) {
            if dist[e.to] == usize::MAX {
                dist[e.to] = dist[v] + 1;
                queue.push_back(e.to);
            }
        }
    }
    if dist[target] == usize::MAX {
        return Err(Error::UnknownNode(target));
    }

    // shortest-path DAG edges into each node, by predecessor index
    let mut into: Vec<Vec<usize>> = vec![Vec::new(); g.nodes.len()];
    for (i, e) in g.edges.iter().enumerate() {
        if dist[e.from] != usize::MAX && dist[e.from] + 1 == dist[e.to] {
            into[e.to].push(i);
        }
    }
    for list in &mut into {
        list.sort_by_key(|&i| (g.edges[i].from, i));
    }

    fn back(
        g: &ReachabilityGraph,
        into: &[Vec<usize>],
        v: usize,
        suffix: &mut Vec<usize>,
        k: usize,
        out: &mut Vec<Path>,
    ) {
        if out.len() >= k {
            return;
        }
        if v == g.initial {
            out.push(suffix.iter().rev().copied().collect());
            return;
        }
        for &e in &into[v] {
            suffix.push(e);
            back(g, into, g.edges[e].from, suffix, k, out);
            suffix.pop();
            if out.len() >= k {
                return;
            }
        }
    }
    let mut out = Vec::new();
    back(g, &into, target, &mut Vec::new(), k, &mut out);
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GuardChange {
    pub from: String,
    pub to: String,
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GraphDiff {
    /// False when the graphs are built from different machine lists.
    pub comparable: bool,
    pub nodes_only_left: Vec<String>,
    pub nodes_only_right: Vec<String>,
    pub edges_only_left: Vec<(String, String)>,
    pub edges_only_right: Vec<(String, String)>,
    pub guard_changes: Vec<GuardChange>,
}

impl GraphDiff {
    pub fn is_empty(&self) -> bool {
        self.comparable
            && self.nodes_only_left.is_empty()
            && self.nodes_only_right.is_empty()
            && self.edges_only_left.is_empty()
            && self.edges_only_right.is_empty()
            && self.guard_changes.is_empty()
    }
}

impl fmt::Display for GraphDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.comparable {
            return writeln!(f, "graphs are built from different machine lists");
        }
        if self.is_empty() {
            return writeln!(f, "graphs are identical");
        }
        for n in &self.nodes_only_left {
            writeln!(f, "- node {n}")?;
        }
        for n in &self.nodes_only_right {
            writeln!(f, "+ node {n}")?;
        }
        for (a, b) in &self.edges_only_left {
            writeln!(f, "- edge {a} -> {b}")?;
        }
        for (a, b) in &self.edges_only_right {
            writeln!(f, "+ edge {a} -> {b}")?;
        }
        for c in &self.guard_changes {
            writeln!(
                f,
                "~ edge {} -> {}: {} => {}",
                c.from, c.to, c.left, c.right
            )?;
        }
        Ok(())
    }
}

pub fn diff_graphs(left: &ReachabilityGraph, right: &ReachabilityGraph) -> GraphDiff {
    if left.machines != right.machines {
        return GraphDiff::default();
    }
    let names = |g: &ReachabilityGraph| -> BTreeSet<String> {
        g.nodes.iter().map(|n| n.name.clone()).collect()
    };
    let edges = |g: &ReachabilityGraph| -> BTreeMap<(String, String), Formula> {
        g.edges
            .iter()
            .map(|e| {
                (
                    (g.nodes[e.from].name.clone(), g.nodes[e.to].name.clone()),
                    e.guard.clone(),
                )
            })
            .collect()
    };
    let (ln, rn) = (names(left), names(right));
    let (le, re) = (edges(left), edges(right));
    let mut diff = GraphDiff {
        comparable: true,
        nodes_only_left: ln.difference(&rn).cloned().collect(),
        nodes_only_right: rn.difference(&ln).cloned().collect(),
        ..Default::default()
    };
    for (key, lg) in &le {
        match re.get(key) {
            None => diff.edges_only_left.push(key.clone()),
            Some(rg) => {
                // guards too wide to enumerate are compared structurally
                let same = lg.equivalent(rg, DEFAULT_ATOM_CAP).unwrap_or(lg == rg);
                if !same {
                    diff.guard_changes.push(GuardChange {
                        from: key.0.clone(),
                        to: key.1.clone(),
                        left: lg.to_string(),
                        right: rg.to_string(),
                    });
                }
            }
        }
    }
    diff.edges_only_right = re
        .keys()
        .filter(|k| !le.contains_key(*k))
        .cloned()
        .collect();
    diff
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::{GraphEdge, SystemState};
    use crate::formula::{parse_formula, symbols, SymbolSet};

    /// Graph with named nodes and `1`-guarded edges.
    pub(crate) fn graph(names: &[&str], edges: &[(usize, usize)]) -> ReachabilityGraph {
        ReachabilityGraph {
            machines: vec!["M".into()],
            environment: SymbolSet::new(),
            nodes: names
                .iter()
                .map(|n| SystemState {
                    vector: vec![n.to_string()],
                    name: n.to_string(),
                    outputs: SymbolSet::new(),
                })
                .collect(),
            initial: 0,
            edges: edges
                .iter()
                .map(|&(from, to)| GraphEdge {
                    from,
                    to,
                    guard: Formula::True,
                })
                .collect(),
        }
    }

    #[test]
    fn patterns() {
        let p = StatePattern::new("EndDes_*").unwrap();
        assert!(p.matches("EndDes_Wait"));
        assert!(!p.matches("SendGo_Wait"));
        assert!(StatePattern::new("*").unwrap().matches(""));
        assert!(StatePattern::new("a?c").unwrap().matches("abc"));
        assert!(!StatePattern::new("a?c").unwrap().matches("ac"));
        assert!(StatePattern::new("").is_err());
        assert!(StatePattern::new("a b").is_err());
        assert!(StatePattern::new("[x]").is_err());
    }

    #[test]
    fn tarjan_on_small_graphs() {
        let adj = vec![vec![1], vec![0, 2], vec![2]];
        let mut comps = strongly_connected_components(&adj);
        comps.sort();
        assert_eq!(comps, vec![vec![0, 1], vec![2]]);
        // long chain stays iterative
        let n = 100_000;
        let chain: Vec<Vec<usize>> = (0..n)
            .map(|i| if i + 1 < n { vec![i + 1] } else { vec![] })
            .collect();
        assert_eq!(strongly_connected_components(&chain).len(), n);
    }

    #[test]
    fn terminal_components() {
        let g = graph(&["a", "b", "c"], &[(0, 1), (1, 0), (0, 2), (2, 2)]);
        assert_eq!(find_terminal_sccs(&g), vec![vec![2]]);
        let ring = graph(&["a", "b", "c"], &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(find_terminal_sccs(&ring), vec![vec![0, 1, 2]]);
        let sink = graph(&["a", "b"], &[(0, 1)]);
        assert_eq!(find_terminal_sccs(&sink), vec![vec![1]]);
    }

    #[test]
    fn deadlock_classification() {
        let g = graph(
            &["a", "end", "stuck"],
            &[(0, 1), (0, 2), (1, 1), (2, 2), (0, 0)],
        );
        let accept = [StatePattern::new("end").unwrap()];
        let r = classify_deadlocks(&g, &accept);
        assert_eq!(r.terminal_nodes, vec![1, 2]);
        assert_eq!(r.accepting, vec![vec![1]]);
        assert_eq!(r.deadlocks.len(), 1);
        assert_eq!(r.deadlocks[0].members, vec![2]);
        assert_eq!(r.deadlocks[0].incoming, vec![1]);
        assert_eq!(r.deadlocks[0].witness, vec![1]);

        let all = [StatePattern::new("*").unwrap()];
        assert!(!classify_deadlocks(&g, &all).has_deadlocks());

        let ring = graph(&["a", "b"], &[(0, 1), (1, 0)]);
        let r = classify_deadlocks(&ring, &[]);
        assert_eq!(r.terminal_sccs, vec![vec![0, 1]]);
        assert!(r.terminal_nodes.is_empty());
        // a cycle through the initial node is a trap too unless declared accepting
        assert_eq!(r.deadlocks.len(), 1);
    }

    #[test]
    fn witness_path_examples() {
        let g = graph(&["a", "b", "c"], &[(0, 1), (1, 2)]);
        assert_eq!(witness_paths(&g, 0, 1).unwrap(), vec![Vec::<usize>::new()]);
        assert_eq!(witness_paths(&g, 2, 3).unwrap(), vec![vec![0, 1]]);
        assert!(witness_paths(&g, 7, 1).is_err());

        let diamond = graph(
            &["s", "l", "r", "t"],
            &[(0, 2), (0, 1), (1, 3), (2, 3), (0, 0)],
        );
        let paths = witness_paths(&diamond, 3, 5).unwrap();
        assert_eq!(paths, vec![vec![1, 2], vec![0, 3]]);
        assert_eq!(witness_paths(&diamond, 3, 1).unwrap(), vec![vec![1, 2]]);

        let unreachable = graph(&["a", "b"], &[]);
        assert!(witness_paths(&unreachable, 1, 1).is_err());
    }

    #[test]
    fn diffs() {
        let g = graph(&["a", "b"], &[(0, 1), (1, 1)]);
        assert!(diff_graphs(&g, &g).is_empty());

        let mut h = graph(&["a", "b", "c"], &[(0, 1), (1, 2), (2, 2)]);
        h.edges[0].guard = parse_formula("x").unwrap();
        h.environment = symbols(["x"]);
        let d = diff_graphs(&g, &h);
        assert!(d.comparable);
        assert_eq!(d.nodes_only_right, vec!["c".to_string()]);
        assert_eq!(d.edges_only_left, vec![("b".into(), "b".into())]);
        assert_eq!(
            d.edges_only_right,
            vec![("b".into(), "c".into()), ("c".into(), "c".into())]
        );
        assert_eq!(d.guard_changes.len(), 1);

        let mut other = g.clone();
        other.machines = vec!["N".into()];
        let d = diff_graphs(&g, &other);
        assert!(!d.comparable);
        assert!(!d.is_empty());
    }
}
