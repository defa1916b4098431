use std::collections::HashMap;

use rayon::prelude::*;

use super::LocusError;
use crate::model::{ArsSpec, SurfaceChart};
use crate::Vec2;

/// Sampling lattice over the chart. Torus charts use `n x n` periodic
/// nodes, plane charts `(n + 1) x (n + 1)` nodes including the boundary.
#[derive(Debug, Clone)]
pub(crate) struct Lattice {
    pub origin: Vec2,
    pub step: Vec2,
    pub nx: usize,
    pub ny: usize,
    pub periodic: bool,
}

impl Lattice {
    pub fn new(chart: &SurfaceChart, resolution: usize) -> Self {
        let (origin, size) = chart.bounds();
        let periodic = chart.is_torus();
        let n = if periodic { resolution } else { resolution + 1 };
        Lattice {
            origin,
            step: size / resolution as f64,
            nx: n,
            ny: n,
            periodic,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        i + j * self.nx
    }

    pub fn coords(&self, node: usize) -> (usize, usize) {
        (node % self.nx, node / self.nx)
    }

    pub fn pos(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new(i as f64 * self.step[0], j as f64 * self.step[1])
    }

    pub fn cells_x(&self) -> usize {
        if self.periodic {
            self.nx
        } else {
            self.nx - 1
        }
    }

    pub fn cells_y(&self) -> usize {
        if self.periodic {
            self.ny
        } else {
            self.ny - 1
        }
    }

    /// Right neighbour index, if the edge exists.
    pub fn right(&self, i: usize) -> Option<usize> {
        if i + 1 < self.nx {
            Some(i + 1)
        } else if self.periodic {
            Some(0)
        } else {
            None
        }
    }

    pub fn up(&self, j: usize) -> Option<usize> {
        if j + 1 < self.ny {
            Some(j + 1)
        } else if self.periodic {
            Some(0)
        } else {
            None
        }
    }

    /// Corners of cell `(i, j)` counter-clockwise from the lower left.
    pub fn cell_corners(&self, i: usize, j: usize) -> [usize; 4] {
        let r = self.right(i).expect("cell inside lattice");
        let u = self.up(j).expect("cell inside lattice");
        [
            self.node(i, j),
            self.node(r, j),
            self.node(r, u),
            self.node(i, u),
        ]
    }
}

/// Grid edge id: `2 * node` for the edge to the right neighbour,
/// `2 * node + 1` for the edge to the upper neighbour.
pub(crate) fn edge_nodes(lat: &Lattice, edge: usize) -> (usize, usize) {
    let a = edge / 2;
    let (i, j) = lat.coords(a);
    let b = if edge % 2 == 0 {
        lat.node(lat.right(i).expect("edge exists"), j)
    } else {
        lat.node(i, lat.up(j).expect("edge exists"))
    };
    (a, b)
}

/// Which diagonal of a saddle cell joins its same-sign corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Diagonal {
    /// Lower-left to upper-right corners are connected.
    D02,
    /// Lower-right to upper-left corners are connected.
    D13,
}

/// `det(X, Y)` sampled on the lattice with saddle cells resolved.
#[derive(Debug)]
pub(crate) struct SignGrid {
    pub lat: Lattice,
    pub values: Vec<f64>,
    /// Largest `|X| |Y|` over the nodes; scale for refinement targets.
    pub frame_scale: f64,
    pub saddles: HashMap<usize, Diagonal>,
}

/// Nodes with `det >= 0` count as positive, so exact zeros on the lattice
/// still produce a crossing on one side.
pub(crate) fn positive(v: f64) -> bool {
    v >= 0.0
}

impl SignGrid {
    pub fn sample(spec: &ArsSpec, resolution: usize) -> Result<Self, LocusError> {
        let lat = Lattice::new(&spec.chart, resolution);
        let samples: Result<Vec<(f64, f64)>, LocusError> = (0..lat.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = lat.coords(k);
                let p = lat.pos(i, j);
                let (x, y) = spec.frame_at(p)?;
                Ok((x[0] * y[1] - x[1] * y[0], x.norm() * y.norm()))
            })
            .collect();
        let samples = samples?;
        let frame_scale = samples.iter().fold(0.0f64, |m, s| m.max(s.1));
        let values: Vec<f64> = samples.into_iter().map(|s| s.0).collect();
        let mut grid = SignGrid {
            lat,
            values,
            frame_scale: if frame_scale > 0.0 { frame_scale } else { 1.0 },
            saddles: HashMap::new(),
        };
        grid.resolve_saddles(spec)?;
        Ok(grid)
    }

    pub fn is_positive(&self, node: usize) -> bool {
        positive(self.values[node])
    }

    fn resolve_saddles(&mut self, spec: &ArsSpec) -> Result<(), LocusError> {
        let lat = &self.lat;
        let mut found = Vec::new();
        for j in 0..lat.cells_y() {
            for i in 0..lat.cells_x() {
                let c = lat.cell_corners(i, j);
                let s: Vec<bool> = c.iter().map(|&k| self.is_positive(k)).collect();
                if s[0] == s[2] && s[1] == s[3] && s[0] != s[1] {
                    found.push((i, j, s[0]));
                }
            }
        }
        let resolved: Result<Vec<(usize, Diagonal)>, LocusError> = found
            .par_iter()
            .map(|&(i, j, s0)| {
                let d = resolve_cell(spec, lat, i, j, s0)?;
                Ok((lat.node(i, j), d))
            })
            .collect();
        self.saddles = resolved?.into_iter().collect();
        Ok(())
    }
}

const SUB: usize = 4;

/// Subsamples a saddle cell 4x per side and floods the sign pattern to see
/// which diagonal pair of corners is connected.
fn resolve_cell(
    spec: &ArsSpec,
    lat: &Lattice,
    i: usize,
    j: usize,
    s0: bool,
) -> Result<Diagonal, LocusError> {
    let n = SUB + 1;
    let base = lat.pos(i, j);
    let mut sign = vec![false; n * n];
    for b in 0..n {
        for a in 0..n {
            let p = base
                + Vec2::new(
                    lat.step[0] * a as f64 / SUB as f64,
                    lat.step[1] * b as f64 / SUB as f64,
                );
            sign[a + b * n] = positive(spec.det_at(p)?);
        }
    }
    // corners take the lattice signs
    sign[0] = s0;
    sign[n * n - 1] = s0;
    sign[SUB] = !s0;
    sign[SUB * n] = !s0;

    let connected = |from: usize, to: usize, want: bool| {
        let mut seen = vec![false; n * n];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(k) = stack.pop() {
            if k == to {
                return true;
            }
            let (a, b) = (k % n, k / n);
            let mut push = |m: usize| {
                if !seen[m] && sign[m] == want {
                    seen[m] = true;
                    stack.push(m);
                }
            };
            if a > 0 {
                push(k - 1);
            }
            if a + 1 < n {
                push(k + 1);
            }
            if b > 0 {
                push(k - n);
            }
            if b + 1 < n {
                push(k + n);
            }
        }
        false
    };
    let d02 = connected(0, n * n - 1, s0);
    let d13 = connected(SUB, SUB * n, !s0);
    match (d02, d13) {
        (true, false) => Ok(Diagonal::D02),
        (false, true) => Ok(Diagonal::D13),
        _ => Err(LocusError::SaddleAmbiguity(base + 0.5 * lat.step)),
    }
}

/// A chain of crossings of the zero set with grid edges.
#[derive(Debug)]
pub(crate) struct Chain {
    pub closed: bool,
    /// Crossed grid edges in chain order.
    pub edges: Vec<usize>,
    /// Linear-interpolation points, unwrapped along the chain.
    pub points: Vec<Vec2>,
}

/// Marching squares over the sign grid.
pub(crate) fn chains(grid: &SignGrid) -> Vec<Chain> {
    let lat = &grid.lat;
    let mut index: HashMap<usize, usize> = HashMap::new();
    let mut edges = Vec::new();
    for node in 0..lat.len() {
        let (i, j) = lat.coords(node);
        let here = grid.is_positive(node);
        if let Some(r) = lat.right(i) {
            if grid.is_positive(lat.node(r, j)) != here {
                index.insert(2 * node, edges.len());
                edges.push(2 * node);
            }
        }
        if let Some(u) = lat.up(j) {
            if grid.is_positive(lat.node(i, u)) != here {
                index.insert(2 * node + 1, edges.len());
                edges.push(2 * node + 1);
            }
        }
    }

    let mut links: Vec<Vec<usize>> = vec![Vec::new(); edges.len()];
    let mut link = |a: usize, b: usize| {
        let (ka, kb) = (index[&a], index[&b]);
        links[ka].push(kb);
        links[kb].push(ka);
    };
    for j in 0..lat.cells_y() {
        for i in 0..lat.cells_x() {
            let c = lat.cell_corners(i, j);
            let e = [2 * c[0], 2 * c[1] + 1, 2 * c[3], 2 * c[0] + 1];
            let ends = [(c[0], c[1]), (c[1], c[2]), (c[3], c[2]), (c[0], c[3])];
            let crossed: Vec<usize> = (0..4)
                .filter(|&k| grid.is_positive(ends[k].0) != grid.is_positive(ends[k].1))
                .collect();
            match crossed.len() {
                2 => link(e[crossed[0]], e[crossed[1]]),
                4 => match grid.saddles[&c[0]] {
                    Diagonal::D02 => {
                        link(e[0], e[1]);
                        link(e[2], e[3]);
                    }
                    Diagonal::D13 => {
                        link(e[0], e[3]);
                        link(e[1], e[2]);
                    }
                },
                _ => {}
            }
        }
    }

    let mut visited = vec![false; edges.len()];
    let mut out = Vec::new();
    let walk = |start: usize, visited: &mut Vec<bool>| {
        let mut order = vec![start];
        visited[start] = true;
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            let next = links[cur]
                .iter()
                .copied()
                .find(|&k| k != prev && !visited[k]);
            match next {
                Some(k) => {
                    visited[k] = true;
                    order.push(k);
                    prev = cur;
                    cur = k;
                }
                None => break,
            }
        }
        order
    };
    // open chains start at crossings with a single link
    for k in 0..edges.len() {
        if !visited[k] && links[k].len() < 2 {
            let order = walk(k, &mut visited);
            out.push(make_chain(grid, &edges, &order, false));
        }
    }
    for k in 0..edges.len() {
        if !visited[k] {
            // every remaining crossing has two links: a loop
            let order = walk(k, &mut visited);
            out.push(make_chain(grid, &edges, &order, true));
        }
    }
    out
}

fn make_chain(grid: &SignGrid, edges: &[usize], order: &[usize], closed: bool) -> Chain {
    let lat = &grid.lat;
    let mut points: Vec<Vec2> = Vec::with_capacity(order.len());
    let mut chain_edges = Vec::with_capacity(order.len());
    for &k in order {
        let edge = edges[k];
        let (a, b) = edge_nodes(lat, edge);
        let (i, j) = lat.coords(a);
        let pa = lat.pos(i, j);
        let dir = if edge % 2 == 0 {
            Vec2::new(lat.step[0], 0.0)
        } else {
            Vec2::new(0.0, lat.step[1])
        };
        let (fa, fb) = (grid.values[a], grid.values[b]);
        let t = if fa == fb { 0.5 } else { fa / (fa - fb) };
        let mut p = pa + t.clamp(0.0, 1.0) * dir;
        // keep the chain continuous across the periodic seams
        if let Some(last) = points.last() {
            let size = lat
                .step
                .component_mul(&Vec2::new(lat.nx as f64, lat.ny as f64));
            if lat.periodic {
                for c in 0..2 {
                    p[c] -= size[c] * ((p[c] - last[c]) / size[c]).round();
                }
            }
        }
        points.push(p);
        chain_edges.push(edge);
    }
    Chain {
        closed,
        edges: chain_edges,
        points,
    }
}
