//! JSON document for reachability graphs.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::compose::{GraphEdge, ReachabilityGraph, SystemState};
use crate::error::{Error, Result};
use crate::formula::{parse_formula, SymbolSet};

pub const GRAPH_FORMAT: &str = "csm-graph/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    /// SHA-256 of the model text the graph was built from, if known.
    pub model_hash: Option<String>,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub index: usize,
    pub name: String,
    pub vector: Vec<String>,
    pub outputs: SymbolSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub from: usize,
    pub to: usize,
    pub guard: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub format: String,
    pub metadata: Metadata,
    pub machines: Vec<String>,
    pub environment: SymbolSet,
    pub initial: usize,
    pub nodes: Vec<NodeEntry>,
    pub edges: Vec<EdgeEntry>,
}

pub fn model_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl GraphDocument {
    pub fn from_graph(g: &ReachabilityGraph, model_hash: Option<String>) -> Self {
        GraphDocument {
            format: GRAPH_FORMAT.to_string(),
            metadata: Metadata {
                model_hash,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
            },
            machines: g.machines.clone(),
            environment: g.environment.clone(),
            initial: g.initial,
            nodes: g
                .nodes
                .iter()
                .enumerate()
                .map(|(index, n)| NodeEntry {
                    index,
                    name: n.name.clone(),
                    vector: n.vector.clone(),
                    outputs: n.outputs.clone(),
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeEntry {
                    from: e.from,
                    to: e.to,
                    guard: e.guard.to_string(),
                })
                .collect(),
        }
    }

    pub fn to_graph(&self) -> Result<ReachabilityGraph> {
        if self.format != GRAPH_FORMAT {
            return Err(Error::Document(format!(
                "unsupported format `{}`",
                self.format
            )));
        }
        let n = self.nodes.len();
        if self.initial >= n && n > 0 {
            return Err(Error::Document(format!(
                "initial node {} out of range",
                self.initial
            )));
        }
        let mut nodes = Vec::with_capacity(n);
        for (i, entry) in self.nodes.iter().enumerate() {
            if entry.index != i {
                return Err(Error::Document(format!(
                    "node {i} carries index {}",
                    entry.index
                )));
            }
            if entry.vector.len() != self.machines.len() {
                return Err(Error::Document(format!(
                    "node {i} vector length differs from machine count"
                )));
            }
            nodes.push(SystemState {
                vector: entry.vector.clone(),
                name: entry.name.clone(),
                outputs: entry.outputs.clone(),
            });
        }
        let edges = self
            .edges
            .iter()
            .map(|e| {
                if e.from >= n || e.to >= n {
                    return Err(Error::Document(format!(
                        "edge {} -> {} out of range",
                        e.from, e.to
                    )));
                }
                Ok(GraphEdge {
                    from: e.from,
                    to: e.to,
                    guard: parse_formula(&e.guard)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ReachabilityGraph {
            machines: self.machines.clone(),
            environment: self.environment.clone(),
            nodes,
            initial: self.initial,
            edges,
        })
    }

    /// Pretty JSON with a trailing newline; stable for identical graphs.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
