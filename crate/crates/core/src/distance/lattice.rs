use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::expr::ExprError;
use crate::model::{frame_metric_cost, ArsSpec};
use crate::tolerance::Tolerances;
use crate::Vec2;

/// Lattice offsets of the 16-neighbour stencil.
pub(crate) const STENCIL: [(i64, i64); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (1, 2),
    (1, -2),
    (-1, 2),
    (-1, -2),
    (2, 1),
    (2, -1),
    (-2, 1),
    (-2, -1),
];

/// Rectangular lattice `origin + (i hx, j hy)`, periodic on tori.
#[derive(Debug, Clone)]
pub(crate) struct Window {
    pub origin: Vec2,
    pub step: Vec2,
    pub nx: usize,
    pub ny: usize,
    pub periodic: bool,
}

impl Window {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        i + j * self.nx
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn pos(&self, k: usize) -> Vec2 {
        let (i, j) = self.coords(k);
        self.origin + Vec2::new(i as f64 * self.step[0], j as f64 * self.step[1])
    }

    fn half_dims(&self) -> (usize, usize) {
        if self.periodic {
            (2 * self.nx, 2 * self.ny)
        } else {
            (2 * self.nx - 1, 2 * self.ny - 1)
        }
    }

    fn neighbour(&self, i: usize, j: usize, di: i64, dj: i64) -> Option<(usize, usize)> {
        let (ni, nj) = (i as i64 + di, j as i64 + dj);
        if self.periodic {
            Some((
                ni.rem_euclid(self.nx as i64) as usize,
                nj.rem_euclid(self.ny as i64) as usize,
            ))
        } else if ni >= 0 && nj >= 0 && (ni as usize) < self.nx && (nj as usize) < self.ny {
            Some((ni as usize, nj as usize))
        } else {
            None
        }
    }
}

/// Frames sampled on the half-step lattice, which holds every stencil
/// midpoint.
pub(crate) struct FrameCache {
    hx: usize,
    frames: Vec<(Vec2, Vec2)>,
}

impl FrameCache {
    pub fn new(spec: &ArsSpec, w: &Window) -> Result<Self, ExprError> {
        let (hx, hy) = w.half_dims();
        let frames: Result<Vec<(Vec2, Vec2)>, ExprError> = (0..hx * hy)
            .into_par_iter()
            .map(|k| {
                let (a, b) = (k % hx, k / hx);
                let p =
                    w.origin + Vec2::new(a as f64 * 0.5 * w.step[0], b as f64 * 0.5 * w.step[1]);
                spec.frame_at(p)
            })
            .collect();
        Ok(FrameCache {
            hx,
            frames: frames?,
        })
    }

    fn at(&self, w: &Window, a: i64, b: i64) -> (Vec2, Vec2) {
        let (hx, hy) = w.half_dims();
        let (a, b) = if w.periodic {
            (
                a.rem_euclid(hx as i64) as usize,
                b.rem_euclid(hy as i64) as usize,
            )
        } else {
            (a as usize, b as usize)
        };
        self.frames[a + b * self.hx]
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// When a Dijkstra sweep may stop.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Stop {
    /// Once this node is settled.
    Target(usize),
    /// Once settled values exceed the bound.
    Bound(f64),
    Exhaust,
}

pub(crate) struct Sweep {
    pub dist: Vec<f64>,
    pub pred: Vec<usize>,
}

/// Dijkstra over the stencil graph. Edge weights are the step length
/// measured with the metric at the edge midpoint; inadmissible edges are
/// skipped.
pub(crate) fn dijkstra(
    w: &Window,
    cache: &FrameCache,
    source: usize,
    stop: Stop,
    tol: &Tolerances,
) -> Sweep {
    let n = w.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry {
        dist: 0.0,
        node: source,
    });
    let steps: Vec<Vec2> = STENCIL
        .iter()
        .map(|&(a, b)| Vec2::new(a as f64 * w.step[0], b as f64 * w.step[1]))
        .collect();
    while let Some(Entry { dist: d, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        match stop {
            Stop::Target(t) if t == node => break,
            Stop::Bound(b) if d > b => break,
            _ => {}
        }
        let (i, j) = w.coords(node);
        for (s, &(di, dj)) in STENCIL.iter().enumerate() {
            let Some((ni, nj)) = w.neighbour(i, j, di, dj) else {
                continue;
            };
            let next = w.node(ni, nj);
            if done[next] {
                continue;
            }
            let (x, y) = cache.at(w, 2 * i as i64 + di, 2 * j as i64 + dj);
            let g = frame_metric_cost(x, y, steps[s], tol);
            if !g.is_finite() {
                continue;
            }
            let nd = d + g.sqrt();
            if nd < dist[next] {
                dist[next] = nd;
                pred[next] = node;
                heap.push(Entry {
                    dist: nd,
                    node: next,
                });
            }
        }
    }
    Sweep { dist, pred }
}
