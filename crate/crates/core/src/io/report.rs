//! Text and JSON renderings of analysis reports and traces.

use std::fmt::Write as _;

use serde::Serialize;

use crate::analyze::AnalysisReport;
use crate::compose::{ReachabilityGraph, SystemModel};
use crate::simulate::Trace;

#[derive(Debug, Serialize)]
struct EdgeView<'a> {
    from: &'a str,
    to: &'a str,
    guard: String,
}

#[derive(Debug, Serialize)]
struct DeadlockView<'a> {
    states: Vec<&'a str>,
    incoming: Vec<EdgeView<'a>>,
    witness: Vec<EdgeView<'a>>,
}

#[derive(Debug, Serialize)]
struct ReportView<'a> {
    nodes: usize,
    edges: usize,
    terminal_nodes: Vec<&'a str>,
    terminal_sccs: Vec<Vec<&'a str>>,
    accepting: Vec<Vec<&'a str>>,
    deadlocks: Vec<DeadlockView<'a>>,
}

fn view<'a>(g: &'a ReachabilityGraph, r: &AnalysisReport) -> ReportView<'a> {
    let name = |i: usize| g.nodes[i].name.as_str();
    let names = |c: &Vec<usize>| c.iter().map(|&i| name(i)).collect::<Vec<_>>();
    let edge = |i: usize| {
        let e = &g.edges[i];
        EdgeView {
            from: name(e.from),
            to: name(e.to),
            guard: e.guard.to_string(),
        }
    };
    ReportView {
        nodes: g.nodes.len(),
        edges: g.edges.len(),
        terminal_nodes: r.terminal_nodes.iter().map(|&i| name(i)).collect(),
        terminal_sccs: r.terminal_sccs.iter().map(names).collect(),
        accepting: r.accepting.iter().map(names).collect(),
        deadlocks: r
            .deadlocks
            .iter()
            .map(|d| DeadlockView {
                states: names(&d.members),
                incoming: d.incoming.iter().map(|&i| edge(i)).collect(),
                witness: d.witness.iter().map(|&i| edge(i)).collect(),
            })
            .collect(),
    }
}

pub fn report_json(g: &ReachabilityGraph, r: &AnalysisReport) -> String {
    let mut s = serde_json::to_string_pretty(&view(g, r)).expect("report serializes");
    s.push('\n');
    s
}

pub fn report_text(g: &ReachabilityGraph, r: &AnalysisReport) -> String {
    let v = view(g, r);
    let mut out = String::new();
    writeln!(out, "reachable states: {}, edges: {}", v.nodes, v.edges).unwrap();
    for c in &v.accepting {
        writeln!(out, "accepting terminal: {}", c.join(", ")).unwrap();
    }
    if v.deadlocks.is_empty() {
        out.push_str("no deadlocks\n");
    }
    for d in &v.deadlocks {
        writeln!(out, "DEADLOCK: {}", d.states.join(", ")).unwrap();
        writeln!(out, "  entered by {} edge(s):", d.incoming.len()).unwrap();
        for e in &d.incoming {
            writeln!(out, "    {} -> {} : {}", e.from, e.to, e.guard).unwrap();
        }
        writeln!(out, "  shortest path from the initial state:").unwrap();
        for e in &d.witness {
            writeln!(out, "    {} -> {} : {}", e.from, e.to, e.guard).unwrap();
        }
    }
    out
}

pub fn trace_text(sys: &SystemModel, t: &Trace) -> String {
    let join = |set: &crate::formula::SymbolSet| {
        set.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(",")
    };
    let mut out = String::new();
    writeln!(out, "initial  {}", sys.state_names(&t.initial).join("_")).unwrap();
    for (i, s) in t.steps.iter().enumerate() {
        let next: Vec<String> = s
            .after
            .iter()
            .map(|v| sys.state_names(v).join("_"))
            .collect();
        writeln!(
            out,
            "{:<8} env={{{}}} global={{{}}} {} -> {}",
            i + 1,
            join(&s.env),
            join(&s.global),
            sys.state_names(&s.before).join("_"),
            next.join(" | ")
        )
        .unwrap();
    }
    out
}

pub fn trace_json(t: &Trace) -> String {
    let mut s = serde_json::to_string_pretty(t).expect("trace serializes");
    s.push('\n');
    s
}
