use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{flip, GraphEdge, GraphVertex, LabelledGraph};

/// Label-preserving isomorphism between two graphs, possibly after
/// flipping the second one.
///
/// With `flipped = true` the bijections map onto `flip(g2)`, whose ids are
/// those of `g2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceWitness {
    pub flipped: bool,
    pub vertex_bijection: BTreeMap<String, String>,
    pub edge_bijection: BTreeMap<String, String>,
}

impl EquivalenceWitness {
    /// Checks that the bijections preserve labels and commute with
    /// `alpha` and `omega`.
    pub fn verify(&self, g1: &LabelledGraph, g2: &LabelledGraph) -> bool {
        let target = if self.flipped { flip(g2) } else { g2.clone() };
        let u = &self.vertex_bijection;
        let k = &self.edge_bijection;
        if u.len() != g1.vertices.len()
            || k.len() != g1.edges.len()
            || g1.vertices.len() != target.vertices.len()
            || g1.edges.len() != target.edges.len()
        {
            return false;
        }
        let mut seen_v: Vec<&String> = u.values().collect();
        seen_v.sort();
        seen_v.dedup();
        let mut seen_e: Vec<&String> = k.values().collect();
        seen_e.sort();
        seen_e.dedup();
        if seen_v.len() != u.len() || seen_e.len() != k.len() {
            return false;
        }
        let vertices_ok = g1.vertices.iter().all(|v| {
            let Some(w) = u.get(&v.id).and_then(|id| target.vertex(id)) else {
                return false;
            };
            v.sign == w.sign && v.chi == w.chi
        });
        let edge_of = |id: &str| target.edges.iter().find(|e| e.id == id);
        let edges_ok = g1.edges.iter().all(|e| {
            let Some(f) = k.get(&e.id).and_then(|id| edge_of(id)) else {
                return false;
            };
            e.cycle == f.cycle
                && u.get(&e.alpha) == Some(&f.alpha)
                && u.get(&e.omega) == Some(&f.omega)
        });
        vertices_ok && edges_ok
    }
}

/// Decides whether two graphs are equivalent: isomorphic as labelled
/// multigraphs, directly or after flipping the second.
pub fn equivalent(g1: &LabelledGraph, g2: &LabelledGraph) -> Option<EquivalenceWitness> {
    if let Some((u, k)) = isomorphism(g1, g2) {
        return Some(EquivalenceWitness {
            flipped: false,
            vertex_bijection: u,
            edge_bijection: k,
        });
    }
    isomorphism(g1, &flip(g2)).map(|(u, k)| EquivalenceWitness {
        flipped: true,
        vertex_bijection: u,
        edge_bijection: k,
    })
}

/// Invariant used to prune candidate images of a vertex.
#[derive(Debug, PartialEq, Eq)]
struct Signature {
    sign: i8,
    chi: i64,
    cycles: Vec<Vec<i8>>,
}

fn signature(g: &LabelledGraph, v: &GraphVertex) -> Signature {
    let mut cycles: Vec<Vec<i8>> = g
        .edges
        .iter()
        .filter(|e| e.alpha == v.id || e.omega == v.id)
        .map(|e| e.cycle.clone())
        .collect();
    cycles.sort();
    Signature {
        sign: v.sign,
        chi: v.chi,
        cycles,
    }
}

/// Sorted cycles of the edges from vertex `a` to vertex `b`, by index.
type PairCycles = HashMap<(usize, usize), Vec<Vec<i8>>>;

fn pair_cycles(g: &LabelledGraph) -> PairCycles {
    let index: HashMap<&str, usize> = g
        .vertices
        .iter()
        .enumerate()
        .map(|(k, v)| (v.id.as_str(), k))
        .collect();
    let mut out: PairCycles = HashMap::new();
    for e in &g.edges {
        out.entry((index[e.alpha.as_str()], index[e.omega.as_str()]))
            .or_default()
            .push(e.cycle.clone());
    }
    for list in out.values_mut() {
        list.sort();
    }
    out
}

fn isomorphism(
    g1: &LabelledGraph,
    g2: &LabelledGraph,
) -> Option<(BTreeMap<String, String>, BTreeMap<String, String>)> {
    let n = g1.vertices.len();
    if n != g2.vertices.len() || g1.edges.len() != g2.edges.len() {
        return None;
    }
    let sig1: Vec<Signature> = g1.vertices.iter().map(|v| signature(g1, v)).collect();
    let sig2: Vec<Signature> = g2.vertices.iter().map(|v| signature(g2, v)).collect();
    let candidates: Vec<Vec<usize>> = sig1
        .iter()
        .map(|s| (0..n).filter(|&j| sig2[j] == *s).collect())
        .collect();
    if candidates.iter().any(|c| c.is_empty()) {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (candidates[i].len(), i));

    let p1 = pair_cycles(g1);
    let p2 = pair_cycles(g2);
    let mut state = Search {
        order: &order,
        candidates: &candidates,
        p1: &p1,
        p2: &p2,
        map: vec![usize::MAX; n],
        used: vec![false; n],
    };
    if !state.extend(0) {
        return None;
    }
    let map = state.map;

    let vertex_bijection: BTreeMap<String, String> = (0..n)
        .map(|i| (g1.vertices[i].id.clone(), g2.vertices[map[i]].id.clone()))
        .collect();
    // edges between matched endpoints with equal cycles are interchangeable
    let mut pool: HashMap<(&str, &str, &[i8]), Vec<&GraphEdge>> = HashMap::new();
    for e in &g2.edges {
        pool.entry((e.alpha.as_str(), e.omega.as_str(), e.cycle.as_slice()))
            .or_default()
            .push(e);
    }
    for list in pool.values_mut() {
        list.reverse();
    }
    let mut edge_bijection = BTreeMap::new();
    for e in &g1.edges {
        let a = vertex_bijection[&e.alpha].as_str();
        let b = vertex_bijection[&e.omega].as_str();
        let f = pool.get_mut(&(a, b, e.cycle.as_slice()))?.pop()?;
        edge_bijection.insert(e.id.clone(), f.id.clone());
    }
    Some((vertex_bijection, edge_bijection))
}

struct Search<'a> {
    order: &'a [usize],
    candidates: &'a [Vec<usize>],
    p1: &'a PairCycles,
    p2: &'a PairCycles,
    map: Vec<usize>,
    used: Vec<bool>,
}

impl Search<'_> {
    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let v = self.order[depth];
        for &w in &self.candidates[v] {
            if self.used[w] || !self.consistent(v, w, depth) {
                continue;
            }
            self.map[v] = w;
            self.used[w] = true;
            if self.extend(depth + 1) {
                return true;
            }
            self.used[w] = false;
            self.map[v] = usize::MAX;
        }
        false
    }

    /// Edges between `v` and every already placed vertex must match those
    /// between their images, cycle for cycle and in the same direction.
    fn consistent(&self, v: usize, w: usize, depth: usize) -> bool {
        let empty = Vec::new();
        self.order[..depth].iter().all(|&x| {
            let y = self.map[x];
            let fwd1 = self.p1.get(&(v, x)).unwrap_or(&empty);
            let fwd2 = self.p2.get(&(w, y)).unwrap_or(&empty);
            let back1 = self.p1.get(&(x, v)).unwrap_or(&empty);
            let back2 = self.p2.get(&(y, w)).unwrap_or(&empty);
            fwd1 == fwd2 && back1 == back2
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(cycle: Vec<i8>) -> LabelledGraph {
        LabelledGraph::new(
            vec![
                GraphVertex {
                    id: "a".into(),
                    sign: -1,
                    chi: 0,
                },
                GraphVertex {
                    id: "b".into(),
                    sign: 1,
                    chi: 0,
                },
            ],
            vec![GraphEdge {
                id: "e".into(),
                alpha: "a".into(),
                omega: "b".into(),
                cycle,
            }],
        )
        .unwrap()
    }

    #[test]
    fn rotations_are_equivalent_and_verified() {
        let g1 = path(vec![1, 1, -1]);
        let g2 = path(vec![-1, 1, 1]);
        let w = equivalent(&g1, &g2).unwrap();
        assert!(!w.flipped);
        assert!(w.verify(&g1, &g2));
    }

    #[test]
    fn flip_needed() {
        // (+1, +1, -1) flips to (+1, -1, -1)
        let g1 = path(vec![1, 1, -1]);
        let g2 = path(vec![1, -1, -1]);
        let w = equivalent(&g1, &g2).unwrap();
        assert!(w.flipped);
        assert!(w.verify(&g1, &g2));
        assert!(equivalent(&g1, &path(vec![1, 1])).is_none());
    }

    #[test]
    fn tampered_witness_fails() {
        let g = path(vec![1]);
        let mut w = equivalent(&g, &g).unwrap();
        w.vertex_bijection.insert("a".into(), "b".into());
        assert!(!w.verify(&g, &g));
    }
}
