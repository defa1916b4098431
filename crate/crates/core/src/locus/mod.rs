//! The singular locus: tracing, orientation, tangency points and the
//! number of revolutions of the distribution along each component.

mod angle;
pub(crate) mod grid;

use std::f64::consts::{FRAC_PI_4, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::ExprError;
use crate::model::{rank_of, ArsSpec};
use crate::tolerance::Tolerances;
use crate::Vec2;

pub use angle::wrap_half;

/// Smallest accepted lattice resolution.
pub const MIN_RESOLUTION: usize = 64;

const NEWTON_ITERATIONS: usize = 20;
/// Bisection stops once the bracket is this fraction of the chart size.
const ARC_TOL: f64 = 1e-9;
/// Largest allowed rounding residual of the revolution count.
const REVOLUTION_RESIDUAL: f64 = 0.1;

#[derive(Debug, Error)]
pub enum LocusError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("resolution {0} is below the minimum of {MIN_RESOLUTION}")]
    Resolution(usize),
    #[error("saddle cell at ({}, {}) is not resolved by subsampling", .0[0], .0[1])]
    SaddleAmbiguity(Vec2),
    #[error("refinement stalled near ({}, {}): zero is not a regular value there", .0[0], .0[1])]
    NotRegular(Vec2),
    #[error("angle defect touches zero without changing sign near ({}, {})", .0[0], .0[1])]
    TangencyNotTransversal(Vec2),
    #[error("curve {curve}: angle lift jumps by {jump} rad between samples")]
    LiftUnstable { curve: usize, jump: f64 },
    #[error("curve {0} is not closed")]
    NotClosed(usize),
    #[error("curve {curve}: revolution count {value} is not close to an integer")]
    Residual { curve: usize, value: f64 },
}

/// Point where the distribution is tangent to the locus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangencyPoint {
    pub location: Vec2,
    /// `+1` when the angle from the locus to the distribution increases
    /// through the point, `-1` when it decreases.
    pub contribution: i8,
    /// Singular value ratio of `X, Y` and brackets up to order three at the
    /// point; bounded away from zero when the point is a genuine tangency.
    pub delta3_ratio: f64,
}

/// One connected component of the singular locus as a polyline with
/// `M+` on its left.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularCurve {
    pub id: usize,
    pub closed: bool,
    /// Vertices reduced into the fundamental domain.
    pub points: Vec<Vec2>,
    /// Number of times the curve wraps around each torus period.
    pub winding: [i64; 2],
    pub tangencies: Vec<TangencyPoint>,
    pub revolutions: Option<i64>,
    /// Grid edges crossed by the curve at the traced resolution.
    #[serde(skip)]
    pub(crate) grid_edges: Vec<usize>,
    #[serde(skip)]
    pub(crate) resolution: usize,
}

// grid provenance is not part of the value
impl PartialEq for SingularCurve {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.closed == other.closed
            && self.points == other.points
            && self.winding == other.winding
            && self.tangencies == other.tangencies
            && self.revolutions == other.revolutions
    }
}

impl SingularCurve {
    /// Tangency contributions in walking order.
    pub fn contributions(&self) -> Vec<i8> {
        self.tangencies.iter().map(|t| t.contribution).collect()
    }

    /// Resolution the curve was traced at, if it came from [`trace_locus`].
    pub fn traced_resolution(&self) -> Option<usize> {
        (self.resolution > 0).then_some(self.resolution)
    }

    fn segment_count(&self) -> usize {
        match (self.closed, self.points.len()) {
            (_, 0) => 0,
            (true, n) => n,
            (false, n) => n - 1,
        }
    }
}

/// Traces the zero set of `det(X, Y)` with default tolerances.
pub fn trace_locus(spec: &ArsSpec, resolution: usize) -> Result<Vec<SingularCurve>, LocusError> {
    trace_locus_with(spec, resolution, &Tolerances::from_env())
}

/// Marching squares on the lattice, Newton refinement of every vertex
/// along the gradient of the determinant, orientation with `M+` on the
/// left.
pub fn trace_locus_with(
    spec: &ArsSpec,
    resolution: usize,
    tol: &Tolerances,
) -> Result<Vec<SingularCurve>, LocusError> {
    if resolution < MIN_RESOLUTION {
        return Err(LocusError::Resolution(resolution));
    }
    let sign_grid = grid::SignGrid::sample(spec, resolution)?;
    let target = refine_target(&sign_grid, tol);
    let max_move = 4.0 * sign_grid.lat.step.amax();
    let dedupe = 1e-12 * sign_grid.lat.step.amax();

    let mut curves = Vec::new();
    for (id, chain) in grid::chains(&sign_grid).into_iter().enumerate() {
        let refined: Result<Vec<Vec2>, LocusError> = chain
            .points
            .par_iter()
            .map(|&p| refine(spec, p, target, max_move))
            .collect();
        let mut points: Vec<Vec2> = Vec::with_capacity(chain.points.len());
        for p in refined? {
            match points.last() {
                Some(last) if (p - last).norm() <= dedupe => {}
                _ => points.push(p),
            }
        }
        if chain.closed && points.len() > 1 {
            let gap = spec.chart.min_image(points[0] - points[points.len() - 1]);
            if gap.norm() <= dedupe {
                points.pop();
            }
        }
        let mut curve = SingularCurve {
            id,
            closed: chain.closed,
            winding: [0, 0],
            points,
            tangencies: Vec::new(),
            revolutions: None,
            grid_edges: chain.edges,
            resolution,
        };
        if walking_agreement(spec, &curve)? < 0.0 {
            curve.points.reverse();
            curve.grid_edges.reverse();
        }
        curve.winding = winding(spec, &curve);
        for p in &mut curve.points {
            *p = spec.chart.wrap(*p);
        }
        curves.push(curve);
    }
    Ok(curves)
}

/// Absolute refinement target for `|det|` on this grid.
pub(crate) fn refine_target(g: &grid::SignGrid, tol: &Tolerances) -> f64 {
    tol.refine * g.frame_scale
}

fn refine(spec: &ArsSpec, start: Vec2, target: f64, max_move: f64) -> Result<Vec2, LocusError> {
    let mut p = start;
    for _ in 0..=NEWTON_ITERATIONS {
        let f = spec.det_at(p)?;
        if f.abs() <= target {
            return Ok(p);
        }
        let g = spec.det_grad_at(p)?;
        let gg = g.norm_squared();
        if !(gg > 0.0) || !gg.is_finite() {
            return Err(LocusError::NotRegular(start));
        }
        p -= (f / gg) * g;
        if (p - start).norm() > max_move {
            return Err(LocusError::NotRegular(start));
        }
    }
    Err(LocusError::NotRegular(start))
}

/// Sum of agreements between the chain direction and the walking
/// direction; negative when the chain runs backwards.
fn walking_agreement(spec: &ArsSpec, c: &SingularCurve) -> Result<f64, LocusError> {
    let n = c.points.len();
    let mut total = 0.0;
    for i in 0..n {
        let (prev, next) = if c.closed {
            ((i + n - 1) % n, (i + 1) % n)
        } else {
            (i.saturating_sub(1), (i + 1).min(n - 1))
        };
        if prev == next {
            continue;
        }
        let seg = spec.chart.min_image(c.points[next] - c.points[prev]);
        let d = angle::walking_direction(spec, c.points[i])?;
        if d.norm() > 0.0 {
            total += seg.dot(&d) / (seg.norm() * d.norm()).max(f64::MIN_POSITIVE);
        }
    }
    Ok(total)
}

fn winding(spec: &ArsSpec, c: &SingularCurve) -> [i64; 2] {
    let crate::model::SurfaceChart::Torus { periods } = spec.chart else {
        return [0, 0];
    };
    if !c.closed {
        return [0, 0];
    }
    let n = c.points.len();
    let mut total = Vec2::zeros();
    for i in 0..n {
        total += spec.chart.min_image(c.points[(i + 1) % n] - c.points[i]);
    }
    [
        (total[0] / periods[0]).round() as i64,
        (total[1] / periods[1]).round() as i64,
    ]
}

fn defects(spec: &ArsSpec, c: &SingularCurve) -> Result<Vec<f64>, LocusError> {
    c.points
        .par_iter()
        .map(|&p| angle::defect(spec, p).map_err(LocusError::from))
        .collect()
}

/// Locates tangency points on a traced curve with default tolerances.
pub fn find_tangencies(spec: &ArsSpec, curve: &SingularCurve) -> Result<SingularCurve, LocusError> {
    find_tangencies_with(spec, curve, &Tolerances::from_env())
}

/// Finds the sign changes of the angle defect along the polyline, refines
/// each by bisection on the locus and assigns the contribution from the
/// direction of the change.
pub fn find_tangencies_with(
    spec: &ArsSpec,
    curve: &SingularCurve,
    tol: &Tolerances,
) -> Result<SingularCurve, LocusError> {
    let phi = defects(spec, curve)?;
    let n = curve.points.len();
    let (_, size) = spec.chart.bounds();
    let arc_tol = ARC_TOL * size.amax();
    let resolution = curve.resolution.max(MIN_RESOLUTION);
    let step = size.amax() / resolution as f64;
    let frame_scale = frame_scale_along(spec, curve)?;
    let target = tol.refine * frame_scale;

    let mut found = Vec::new();
    for i in 0..curve.segment_count() {
        let j = (i + 1) % n;
        let (a, b) = (phi[i], phi[j]);
        if (a >= 0.0) == (b >= 0.0) || (a - b).abs() >= PI / 2.0 {
            continue;
        }
        let start = curve.points[i];
        let chord = spec.chart.min_image(curve.points[j] - start);
        let at = |s: f64| -> Result<Vec2, LocusError> {
            refine(spec, start + s * chord, target, 4.0 * step)
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        while (hi - lo) * chord.norm() > arc_tol {
            let mid = 0.5 * (lo + hi);
            let v = angle::defect(spec, at(mid)?)?;
            if (v >= 0.0) == (a >= 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let location = spec.chart.wrap(at(0.5 * (lo + hi))?);
        let ratio = rank_of(&spec.flag_at(location)?, tol.rank).1;
        found.push(TangencyPoint {
            location,
            contribution: if b > a { 1 } else { -1 },
            delta3_ratio: ratio,
        });
    }
    check_touching(spec, curve, &phi)?;
    Ok(SingularCurve {
        tangencies: found,
        ..curve.clone()
    })
}

fn frame_scale_along(spec: &ArsSpec, c: &SingularCurve) -> Result<f64, LocusError> {
    let mut m = 0.0f64;
    for &p in &c.points {
        let (x, y) = spec.frame_at(p)?;
        m = m
            .max(x.norm() * y.norm())
            .max(x.norm_squared())
            .max(y.norm_squared());
    }
    Ok(if m > 0.0 { m } else { 1.0 })
}

/// Rejects local minima of `|defect|` where a parabola through three
/// consecutive samples reaches zero without a sign change.
fn check_touching(spec: &ArsSpec, c: &SingularCurve, phi: &[f64]) -> Result<(), LocusError> {
    let n = phi.len();
    if n < 3 {
        return Ok(());
    }
    let range = if c.closed { 0..n } else { 1..n - 1 };
    for i in range {
        let (p, q) = ((i + n - 1) % n, (i + 1) % n);
        let (a, b, d) = (phi[p], phi[i], phi[q]);
        let same = (a > 0.0 && b > 0.0 && d > 0.0) || (a < 0.0 && b < 0.0 && d < 0.0);
        if !same || (a - b).abs() > FRAC_PI_4 || (d - b).abs() > FRAC_PI_4 {
            continue;
        }
        if b.abs() > a.abs() || b.abs() > d.abs() {
            continue;
        }
        let l1 = spec.chart.min_image(c.points[i] - c.points[p]).norm();
        let l2 = spec.chart.min_image(c.points[q] - c.points[i]).norm();
        if l1 == 0.0 || l2 == 0.0 {
            continue;
        }
        // phi(s) = b + u s + w s^2 through (-l1, a), (0, b), (l2, d)
        let w = ((d - b) / l2 + (a - b) / l1) / (l1 + l2);
        let u = (d - b) / l2 - w * l2;
        if w == 0.0 {
            continue;
        }
        let s = -u / (2.0 * w);
        if s < -l1 || s > l2 {
            continue;
        }
        let m = b + u * s + w * s * s;
        if m * b.signum() <= 1e-9 {
            return Err(LocusError::TangencyNotTransversal(c.points[i]));
        }
    }
    Ok(())
}

/// Number of revolutions of the distribution along a closed curve,
/// relative to the tangent of the curve, in half turns.
pub fn revolutions(spec: &ArsSpec, curve: &SingularCurve) -> Result<i64, LocusError> {
    if !curve.closed {
        return Err(LocusError::NotClosed(curve.id));
    }
    let phi = defects(spec, curve)?;
    let n = phi.len();
    let mut total = 0.0;
    for i in 0..n {
        let jump = wrap_half(phi[(i + 1) % n] - phi[i]);
        if jump.abs() > FRAC_PI_4 {
            return Err(LocusError::LiftUnstable {
                curve: curve.id,
                jump,
            });
        }
        total += jump;
    }
    let value = total / PI;
    let rounded = value.round();
    if (value - rounded).abs() > REVOLUTION_RESIDUAL {
        return Err(LocusError::Residual {
            curve: curve.id,
            value,
        });
    }
    Ok(rounded as i64)
}

/// Traces the locus, locates tangencies on every curve and counts the
/// revolutions of every closed curve.
pub fn analyze_locus(
    spec: &ArsSpec,
    resolution: usize,
    tol: &Tolerances,
) -> Result<Vec<SingularCurve>, LocusError> {
    trace_locus_with(spec, resolution, tol)?
        .iter()
        .map(|c| {
            let mut c = find_tangencies_with(spec, c, tol)?;
            if c.closed {
                c.revolutions = Some(revolutions(spec, &c)?);
            }
            Ok(c)
        })
        .collect()
}
