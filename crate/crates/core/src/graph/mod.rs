//! Labelled bipartite graphs of almost-Riemannian structures.
//!
//! A vertex stands for a connected component of the complement of the
//! singular locus and carries `(sign, chi)`. An edge stands for a locus
//! component; it runs from its `M-` side (`alpha`) to its `M+` side
//! (`omega`) and carries the cyclic sequence of tangency contributions met
//! when walking along it.

mod build;
mod fixtures;
mod iso;

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::locus::LocusError;

pub use build::build_graph;
pub use fixtures::{builtin_graph, builtin_graph_json, GRAPH_FIXTURE_NAMES};
pub use iso::{equivalent, EquivalenceWitness};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("malformed graph file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(
        "the labelled graph needs a compact surface; plane charts only support local analysis"
    )]
    NotCompact,
    #[error("curve {curve} does not separate exactly one M- component from one M+ component")]
    AdjacencyAmbiguous { curve: usize },
    #[error("curve {curve} was not traced at resolution {resolution}")]
    Provenance { curve: usize, resolution: usize },
    #[error(transparent)]
    Locus(#[from] LocusError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphVertex {
    pub id: String,
    pub sign: i8,
    pub chi: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphEdge {
    pub id: String,
    pub alpha: String,
    pub omega: String,
    pub cycle: Vec<i8>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawGraph {
    vertices: Vec<GraphVertex>,
    edges: Vec<GraphEdge>,
}

/// Validated graph. Vertices and edges are kept sorted by id and every
/// cycle is stored in canonical rotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct LabelledGraph {
    vertices: Vec<GraphVertex>,
    edges: Vec<GraphEdge>,
}

impl TryFrom<RawGraph> for LabelledGraph {
    type Error = GraphError;

    fn try_from(raw: RawGraph) -> Result<Self, GraphError> {
        LabelledGraph::new(raw.vertices, raw.edges)
    }
}

impl From<LabelledGraph> for RawGraph {
    fn from(g: LabelledGraph) -> Self {
        RawGraph {
            vertices: g.vertices,
            edges: g.edges,
        }
    }
}

fn unit(v: i8) -> bool {
    v == 1 || v == -1
}

impl LabelledGraph {
    pub fn new(
        mut vertices: Vec<GraphVertex>,
        mut edges: Vec<GraphEdge>,
    ) -> Result<Self, GraphError> {
        let invalid = |m: String| Err(GraphError::Invalid(m));
        let mut ids = HashSet::new();
        for v in &vertices {
            if !ids.insert(v.id.as_str()) {
                return invalid(format!("duplicate vertex id `{}`", v.id));
            }
            if !unit(v.sign) {
                return invalid(format!("vertex `{}` has sign {}", v.id, v.sign));
            }
        }
        let mut edge_ids = HashSet::new();
        for e in &edges {
            if !edge_ids.insert(e.id.as_str()) {
                return invalid(format!("duplicate edge id `{}`", e.id));
            }
            if let Some(bad) = e.cycle.iter().find(|s| !unit(**s)) {
                return invalid(format!("edge `{}` has cycle entry {bad}", e.id));
            }
            for (end, want) in [(&e.alpha, -1), (&e.omega, 1)] {
                match vertices.iter().find(|v| &v.id == end) {
                    None => {
                        return invalid(format!("edge `{}` refers to unknown vertex `{end}`", e.id))
                    }
                    Some(v) if v.sign != want => {
                        return invalid(format!(
                            "edge `{}` must run from a negative to a positive vertex",
                            e.id
                        ))
                    }
                    _ => {}
                }
            }
        }
        for e in &mut edges {
            e.cycle = canonical_cycle(&e.cycle);
        }
        vertices.sort_by(|a, b| a.id.cmp(&b.id));
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(LabelledGraph { vertices, edges })
    }

    pub fn vertices(&self) -> &[GraphVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn vertex(&self, id: &str) -> Option<&GraphVertex> {
        self.vertices
            .binary_search_by(|v| v.id.as_str().cmp(id))
            .ok()
            .map(|k| &self.vertices[k])
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Pretty-printed JSON with vertices and edges sorted by id.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    /// Graphviz rendering with `sign,chi` vertex labels and the cycle as
    /// edge label, directed from `alpha` to `omega`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ars {\n");
        for v in &self.vertices {
            let _ = writeln!(
                out,
                "  \"{}\" [label=\"{},{}\"];",
                v.id,
                fmt_sign(v.sign),
                v.chi
            );
        }
        for e in &self.edges {
            if e.cycle.is_empty() {
                let _ = writeln!(out, "  \"{}\" -> \"{}\";", e.alpha, e.omega);
            } else {
                let labels: Vec<&str> = e.cycle.iter().map(|s| fmt_sign(*s)).collect();
                let _ = writeln!(
                    out,
                    "  \"{}\" -> \"{}\" [label=\"({})\"];",
                    e.alpha,
                    e.omega,
                    labels.join(",")
                );
            }
        }
        out.push_str("}\n");
        out
    }
}

fn fmt_sign(s: i8) -> &'static str {
    if s > 0 {
        "+1"
    } else {
        "-1"
    }
}

/// Lexicographically least rotation of a sign sequence (`-1 < +1`), by
/// Booth's algorithm.
pub fn canonical_cycle(seq: &[i8]) -> Vec<i8> {
    let n = seq.len();
    if n == 0 {
        return Vec::new();
    }
    let s: Vec<i8> = seq.iter().chain(seq).copied().collect();
    let mut fail = vec![-1isize; 2 * n];
    let mut k = 0usize;
    for j in 1..2 * n {
        let sj = s[j];
        let mut i = fail[j - k - 1];
        while i != -1 && sj != s[k + i as usize + 1] {
            if sj < s[k + i as usize + 1] {
                k = j - i as usize - 1;
            }
            i = fail[i as usize];
        }
        if i == -1 && sj != s[k] {
            if sj < s[k] {
                k = j;
            }
            fail[j - k] = -1;
        } else {
            fail[j - k] = i + 1;
        }
    }
    s[k..k + n].to_vec()
}

/// The graph of the same structure with the bundle orientation reversed:
/// signs negate, `alpha` and `omega` swap and every cycle is reversed and
/// negated.
pub fn flip(g: &LabelledGraph) -> LabelledGraph {
    let vertices = g
        .vertices
        .iter()
        .map(|v| GraphVertex {
            sign: -v.sign,
            ..v.clone()
        })
        .collect();
    let edges = g
        .edges
        .iter()
        .map(|e| {
            let reversed: Vec<i8> = e.cycle.iter().rev().map(|s| -s).collect();
            GraphEdge {
                id: e.id.clone(),
                alpha: e.omega.clone(),
                omega: e.alpha.clone(),
                cycle: canonical_cycle(&reversed),
            }
        })
        .collect();
    LabelledGraph { vertices, edges }
}

/// `sum sign(v) chi(v) + sum tau(e)`.
pub fn euler_number(g: &LabelledGraph) -> i64 {
    let vertex_part: i64 = g.vertices.iter().map(|v| i64::from(v.sign) * v.chi).sum();
    let edge_part: i64 = g
        .edges
        .iter()
        .flat_map(|e| e.cycle.iter())
        .map(|s| i64::from(*s))
        .sum();
    vertex_part + edge_part
}

/// Sum of the Euler characteristics of the vertices.
pub fn total_chi(g: &LabelledGraph) -> i64 {
    g.vertices.iter().map(|v| v.chi).sum()
}
