//! Graphviz rendering of reachability graphs.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::compose::ReachabilityGraph;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// One `digraph`; nodes in `marks` are drawn filled black.
pub fn export_dot(g: &ReachabilityGraph, marks: &BTreeSet<usize>) -> String {
    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", escape(&g.machines.join("_"))).unwrap();
    out.push_str("  node [shape=box, fontname=\"Helvetica\"];\n");
    out.push_str("  edge [fontname=\"Helvetica\", fontsize=10];\n");
    for (i, n) in g.nodes.iter().enumerate() {
        let outputs: Vec<&str> = n.outputs.iter().map(|s| s.as_str()).collect();
        let mut attrs = format!("label=\"{}\\n{{{}}}\"", escape(&n.name), outputs.join(", "));
        if i == g.initial {
            attrs.push_str(", peripheries=2");
        }
        if marks.contains(&i) {
            attrs.push_str(", style=filled, fillcolor=black, fontcolor=white");
        }
        writeln!(out, "  n{i} [{attrs}];").unwrap();
    }
    for e in &g.edges {
        writeln!(
            out,
            "  n{} -> n{} [label=\"{}\"];",
            e.from,
            e.to,
            escape(&e.guard.to_string())
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
