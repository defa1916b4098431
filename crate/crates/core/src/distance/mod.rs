//! Carnot-Caratheodory distances: lattice shortest paths, normal
//! extremals and lengths of admissible curves.
//!
//! [`cc_distance_grid`] runs Dijkstra on a 16-neighbour stencil whose edge
//! weights measure each step with the metric at its midpoint. On plane
//! charts the first sweep covers the whole chart; later sweeps re-grid the
//! bounding box of nearly optimal nodes, so the lattice follows the scale
//! of the answer instead of the scale of the chart.

mod lattice;
mod shoot;

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::ExprError;
use crate::model::{ArsSpec, SurfaceChart};
use crate::tolerance::Tolerances;
use crate::Vec2;
use lattice::{dijkstra, FrameCache, Stop, Window};

pub use shoot::{
    curve_length, geodesic_shoot, hamiltonian_drift, AdmissibleCurve, CURVE_TOL, HAMILTONIAN_DRIFT,
};

/// Smallest accepted lattice resolution.
pub const MIN_GRID_RESOLUTION: usize = 32;
/// Nodes whose distances from both ends add up to at most `1 + SLACK`
/// times the current estimate define the next window.
const SLACK: f64 = 0.5;
const MAX_SWEEPS: usize = 4;
/// Margin added around the nearly optimal nodes, in lattice steps.
const MARGIN: f64 = 2.0;
/// A window that keeps at least this fraction of both sides ends the
/// refinement.
const SETTLED: f64 = 0.8;

#[derive(Debug, Error)]
pub enum DistanceError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("point ({}, {}) is outside the chart", .0[0], .0[1])]
    OutsideChart(Vec2),
    #[error("resolution {0} is below the minimum of {MIN_GRID_RESOLUTION}")]
    Resolution(usize),
    #[error("no finite-cost lattice path at resolution {resolution}")]
    Unreachable { resolution: usize },
    #[error("covector annihilates the distribution at the start point")]
    DegenerateCovector,
    #[error("Hamiltonian drifted by {drift:e} (relative)")]
    StepUnstable { drift: f64 },
    #[error("sample {0} has a velocity outside the distribution")]
    InadmissibleSample(usize),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid scale range [{0}, {1}]")]
    InvalidRange(f64, f64),
}

/// Single-source shortest-path values on a lattice over the whole chart.
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub resolution: usize,
    pub source: Vec2,
    pub origin: Vec2,
    pub step: Vec2,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    pub predecessor: Vec<Option<usize>>,
    periodic: bool,
}

impl GridSolution {
    pub fn node_position(&self, k: usize) -> Vec2 {
        let (i, j) = (k % self.nx, k / self.nx);
        self.origin + Vec2::new(i as f64 * self.step[0], j as f64 * self.step[1])
    }

    /// Lattice node nearest to `p`.
    pub fn nearest_node(&self, p: Vec2) -> usize {
        let idx = |c: usize, n: usize| {
            let t = ((p[c] - self.origin[c]) / self.step[c]).round() as i64;
            if self.periodic {
                t.rem_euclid(n as i64) as usize
            } else {
                t.clamp(0, n as i64 - 1) as usize
            }
        };
        idx(0, self.nx) + idx(1, self.ny) * self.nx
    }

    pub fn value_at(&self, p: Vec2) -> f64 {
        self.values[self.nearest_node(p)]
    }

    /// Node sequence from the source to `k` along predecessors.
    pub fn path_to(&self, k: usize) -> Vec<usize> {
        let mut path = vec![k];
        let mut cur = k;
        while let Some(prev) = self.predecessor[cur] {
            path.push(prev);
            cur = prev;
        }
        path.reverse();
        path
    }
}

fn check_point(spec: &ArsSpec, p: Vec2) -> Result<(), DistanceError> {
    if spec.chart.contains(p) {
        Ok(())
    } else {
        Err(DistanceError::OutsideChart(p))
    }
}

fn check_resolution(resolution: usize) -> Result<(), DistanceError> {
    if resolution < MIN_GRID_RESOLUTION {
        Err(DistanceError::Resolution(resolution))
    } else {
        Ok(())
    }
}

/// Lattice over `[lo, hi]` with roughly `resolution` cells per side,
/// containing `p` as a node and, when the spacing allows, `q` as well.
fn aligned_window(p: Vec2, q: Vec2, lo: Vec2, hi: Vec2, resolution: usize) -> Window {
    let mut origin = Vec2::zeros();
    let mut step = Vec2::zeros();
    let mut count = [0usize; 2];
    for c in 0..2 {
        let nominal = (hi[c] - lo[c]) / resolution as f64;
        let delta = (q[c] - p[c]).abs();
        let cells = (delta / nominal).round();
        let h = if cells >= 1.0 { delta / cells } else { nominal };
        let kmin = ((lo[c] - p[c]) / h - 1e-9).ceil();
        let kmax = ((hi[c] - p[c]) / h + 1e-9).floor();
        origin[c] = p[c] + kmin * h;
        step[c] = h;
        count[c] = (kmax - kmin) as usize + 1;
    }
    Window {
        origin,
        step,
        nx: count[0],
        ny: count[1],
        periodic: false,
    }
}

fn nearest(w: &Window, p: Vec2, chart: &SurfaceChart) -> usize {
    let d = chart.min_image(p - w.origin);
    let idx = |c: usize, n: usize| {
        let t = (d[c] / w.step[c]).round() as i64;
        if w.periodic {
            t.rem_euclid(n as i64) as usize
        } else {
            t.clamp(0, n as i64 - 1) as usize
        }
    };
    w.node(idx(0, w.nx), idx(1, w.ny))
}

/// Carnot-Caratheodory distance estimate with default tolerances.
pub fn cc_distance_grid(
    spec: &ArsSpec,
    p: Vec2,
    q: Vec2,
    resolution: usize,
) -> Result<f64, DistanceError> {
    cc_distance_grid_with(spec, p, q, resolution, &Tolerances::from_env())
}

/// Shortest-path estimate of `d(p, q)`. The pair is put in a fixed order
/// first, so the estimate is exactly symmetric.
pub fn cc_distance_grid_with(
    spec: &ArsSpec,
    p: Vec2,
    q: Vec2,
    resolution: usize,
    tol: &Tolerances,
) -> Result<f64, DistanceError> {
    check_resolution(resolution)?;
    check_point(spec, p)?;
    check_point(spec, q)?;
    if spec.chart.min_image(q - p).norm() == 0.0 {
        return Ok(0.0);
    }
    let (p, q) = if (p[0], p[1]) <= (q[0], q[1]) {
        (p, q)
    } else {
        (q, p)
    };
    match spec.chart {
        SurfaceChart::Torus { periods } => {
            let w = Window {
                origin: p,
                step: Vec2::new(periods[0], periods[1]) / resolution as f64,
                nx: resolution,
                ny: resolution,
                periodic: true,
            };
            let cache = FrameCache::new(spec, &w)?;
            let target = nearest(&w, q, &spec.chart);
            let sweep = dijkstra(&w, &cache, 0, Stop::Target(target), tol);
            finite(sweep.dist[target], resolution)
        }
        SurfaceChart::Plane { .. } => windowed_distance(spec, p, q, resolution, tol),
    }
}

fn finite(d: f64, resolution: usize) -> Result<f64, DistanceError> {
    if d.is_finite() {
        Ok(d)
    } else {
        Err(DistanceError::Unreachable { resolution })
    }
}

fn windowed_distance(
    spec: &ArsSpec,
    p: Vec2,
    q: Vec2,
    resolution: usize,
    tol: &Tolerances,
) -> Result<f64, DistanceError> {
    let (chart_lo, size) = spec.chart.bounds();
    let chart_hi = chart_lo + size;
    let (mut lo, mut hi) = (chart_lo, chart_hi);
    let mut estimate = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        let w = aligned_window(p, q, lo, hi, resolution);
        let cache = FrameCache::new(spec, &w)?;
        let source = nearest(&w, p, &spec.chart);
        let target = nearest(&w, q, &spec.chart);
        let from_p = dijkstra(&w, &cache, source, Stop::Target(target), tol);
        let d = finite(from_p.dist[target], resolution)?;
        estimate = d;

        // nearly optimal region from the two one-sided fields
        let bound = (1.0 + SLACK) * d;
        let from_p = dijkstra(&w, &cache, source, Stop::Bound(bound), tol);
        let from_q = dijkstra(&w, &cache, target, Stop::Bound(bound), tol);
        let mut box_lo = Vec2::repeat(f64::INFINITY);
        let mut box_hi = Vec2::repeat(f64::NEG_INFINITY);
        for k in 0..w.len() {
            if from_p.dist[k] + from_q.dist[k] <= bound {
                let x = w.pos(k);
                box_lo = box_lo.inf(&x);
                box_hi = box_hi.sup(&x);
            }
        }
        let margin = MARGIN * w.step;
        let new_lo = (box_lo - margin).sup(&chart_lo);
        let new_hi = (box_hi + margin).inf(&chart_hi);
        let old = hi - lo;
        let new = new_hi - new_lo;
        if new[0] >= SETTLED * old[0] && new[1] >= SETTLED * old[1] {
            break;
        }
        lo = new_lo;
        hi = new_hi;
    }
    Ok(estimate)
}

/// Shortest-path values from `source` to every node of a lattice over the
/// whole chart (no window refinement).
pub fn grid_solution(
    spec: &ArsSpec,
    source: Vec2,
    resolution: usize,
) -> Result<GridSolution, DistanceError> {
    grid_solution_with(spec, source, resolution, &Tolerances::from_env())
}

pub fn grid_solution_with(
    spec: &ArsSpec,
    source: Vec2,
    resolution: usize,
    tol: &Tolerances,
) -> Result<GridSolution, DistanceError> {
    check_resolution(resolution)?;
    check_point(spec, source)?;
    let (lo, size) = spec.chart.bounds();
    let w = match spec.chart {
        SurfaceChart::Torus { .. } => Window {
            origin: source,
            step: size / resolution as f64,
            nx: resolution,
            ny: resolution,
            periodic: true,
        },
        SurfaceChart::Plane { .. } => aligned_window(source, source, lo, lo + size, resolution),
    };
    let cache = FrameCache::new(spec, &w)?;
    let start = nearest(&w, source, &spec.chart);
    let sweep = dijkstra(&w, &cache, start, Stop::Exhaust, tol);
    Ok(GridSolution {
        resolution,
        source,
        origin: w.origin,
        step: w.step,
        nx: w.nx,
        ny: w.ny,
        values: sweep.dist,
        predecessor: sweep
            .pred
            .into_iter()
            .map(|k| (k != usize::MAX).then_some(k))
            .collect(),
        periodic: w.periodic,
    })
}

/// Distances used by a scaling-exponent fit.
#[derive(Debug, Clone, PartialEq)]
pub struct BallBoxFit {
    pub exponent: f64,
    /// `(h, d(p, p + h direction))` for each sampled scale.
    pub samples: Vec<(f64, f64)>,
}

/// Number of scales sampled by [`ballbox_exponent`].
pub const BALLBOX_SAMPLES: usize = 8;

/// Least-squares slope of `log d(p, p + h direction)` against `log h`
/// over log-spaced `h` in `[h_min, h_max]`.
pub fn ballbox_exponent(
    spec: &ArsSpec,
    p: Vec2,
    direction: Vec2,
    h_min: f64,
    h_max: f64,
    resolution: usize,
) -> Result<BallBoxFit, DistanceError> {
    if !(h_min > 0.0) || !(h_max >= 16.0 * h_min) {
        return Err(DistanceError::InvalidRange(h_min, h_max));
    }
    let dir = direction.normalize();
    let hs: Vec<f64> = (0..BALLBOX_SAMPLES)
        .map(|k| h_min * (h_max / h_min).powf(k as f64 / (BALLBOX_SAMPLES - 1) as f64))
        .collect();
    let ds: Result<Vec<f64>, DistanceError> = hs
        .par_iter()
        .map(|&h| cc_distance_grid(spec, p, p + h * dir, resolution))
        .collect();
    let samples: Vec<(f64, f64)> = hs.into_iter().zip(ds?).collect();
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(BallBoxFit {
        exponent: sxy / sxx,
        samples,
    })
}
