use std::collections::BTreeSet;

use super::{canonical_cycle, GraphEdge, GraphError, GraphVertex, LabelledGraph};
use crate::locus::grid::{edge_nodes, Diagonal, SignGrid};
use crate::locus::SingularCurve;
use crate::model::ArsSpec;

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so labels do not depend on merge order
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

/// Components of the complement of the locus on the sign lattice, with the
/// Euler characteristic `V - E + F` of each component's cell complex.
pub(crate) struct Regions {
    /// Component index of every lattice node.
    pub label: Vec<usize>,
    /// Whether each component is on the `det > 0` side.
    pub positive: Vec<bool>,
    pub chi: Vec<i64>,
}

pub(crate) fn regions(grid: &SignGrid) -> Regions {
    let lat = &grid.lat;
    let n = lat.len();
    let mut uf = UnionFind::new(n);
    let mut edge_count = vec![0i64; n];
    let mut face_count = vec![0i64; n];
    let mut lattice_edges = Vec::new();
    for node in 0..n {
        let (i, j) = lat.coords(node);
        let here = grid.is_positive(node);
        let ends = [
            lat.right(i).map(|r| lat.node(r, j)),
            lat.up(j).map(|u| lat.node(i, u)),
        ];
        for other in ends.into_iter().flatten() {
            if grid.is_positive(other) == here {
                uf.union(node, other);
                lattice_edges.push(node);
            }
        }
    }
    let mut diagonals = Vec::new();
    for (&cell, &d) in &grid.saddles {
        let (i, j) = lat.coords(cell);
        let c = lat.cell_corners(i, j);
        let (a, b) = match d {
            Diagonal::D02 => (c[0], c[2]),
            Diagonal::D13 => (c[1], c[3]),
        };
        uf.union(a, b);
        diagonals.push(a);
    }
    let mut faces = Vec::new();
    for j in 0..lat.cells_y() {
        for i in 0..lat.cells_x() {
            let c = lat.cell_corners(i, j);
            let s = grid.is_positive(c[0]);
            if c.iter().all(|&k| grid.is_positive(k) == s) {
                faces.push(c[0]);
            }
        }
    }

    let mut compact = vec![usize::MAX; n];
    let mut label = vec![0; n];
    let mut positive = Vec::new();
    for node in 0..n {
        let root = uf.find(node);
        if compact[root] == usize::MAX {
            compact[root] = positive.len();
            positive.push(grid.is_positive(node));
        }
        label[node] = compact[root];
    }
    let count = positive.len();
    let mut chi = vec![0i64; count];
    for node in 0..n {
        chi[label[node]] += 1;
    }
    for node in lattice_edges.into_iter().chain(diagonals) {
        edge_count[label[node]] += 1;
    }
    for node in faces {
        face_count[label[node]] += 1;
    }
    for k in 0..count {
        chi[k] += face_count[k] - edge_count[k];
    }
    Regions {
        label,
        positive,
        chi,
    }
}

/// Labelled graph of a structure on a torus chart from its traced curves.
///
/// `curves` must come from tracing `spec` at `resolution` and carry their
/// tangencies; the complement of the locus is recomputed on the same
/// lattice.
pub fn build_graph(
    spec: &ArsSpec,
    curves: &[SingularCurve],
    resolution: usize,
) -> Result<LabelledGraph, GraphError> {
    if !spec.chart.is_torus() {
        return Err(GraphError::NotCompact);
    }
    for c in curves {
        if c.traced_resolution() != Some(resolution) || c.grid_edges.is_empty() {
            return Err(GraphError::Provenance {
                curve: c.id,
                resolution,
            });
        }
    }
    let grid = SignGrid::sample(spec, resolution)?;
    let regions = regions(&grid);
    let sigma = spec.orientation.sign() > 0.0;
    let vertex_id = |k: usize| format!("v{k}");

    let vertices: Vec<GraphVertex> = (0..regions.chi.len())
        .map(|k| GraphVertex {
            id: vertex_id(k),
            sign: if regions.positive[k] == sigma { 1 } else { -1 },
            chi: regions.chi[k],
        })
        .collect();

    let mut edges = Vec::new();
    for c in curves {
        let mut plus = BTreeSet::new();
        let mut minus = BTreeSet::new();
        for &edge in &c.grid_edges {
            let (a, b) = edge_nodes(&grid.lat, edge);
            let (pos, neg) = if grid.is_positive(a) { (a, b) } else { (b, a) };
            if grid.is_positive(pos) == grid.is_positive(neg) {
                return Err(GraphError::AdjacencyAmbiguous { curve: c.id });
            }
            let (m_plus, m_minus) = if sigma { (pos, neg) } else { (neg, pos) };
            plus.insert(regions.label[m_plus]);
            minus.insert(regions.label[m_minus]);
        }
        if plus.len() != 1 || minus.len() != 1 {
            return Err(GraphError::AdjacencyAmbiguous { curve: c.id });
        }
        edges.push(GraphEdge {
            id: format!("e{}", c.id),
            alpha: vertex_id(*minus.first().unwrap()),
            omega: vertex_id(*plus.first().unwrap()),
            cycle: canonical_cycle(&c.contributions()),
        });
    }
    LabelledGraph::new(vertices, edges)
}
