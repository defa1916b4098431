use nalgebra::Matrix2;

use super::DistanceError;
use crate::expr::{Expr, ExprError};
use crate::model::ArsSpec;
use crate::Vec2;

/// Default bound on the per-step reconstruction defect, relative to the
/// distance travelled in the step.
pub const CURVE_TOL: f64 = 1e-3;
/// Largest accepted relative drift of the Hamiltonian while shooting.
pub const HAMILTONIAN_DRIFT: f64 = 1e-6;

/// Sampled curve with controls: between consecutive samples the
/// displacement matches the trapezoid rule applied to `a X + b Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleCurve {
    times: Vec<f64>,
    points: Vec<Vec2>,
    controls: Vec<[f64; 2]>,
}

impl AdmissibleCurve {
    /// Validates strictly increasing times and the reconstruction defect
    /// `|dq - dt (v_i + v_(i+1)) / 2| <= tol * dt * (|v_i| + |v_(i+1)|) / 2`
    /// with `v = a X + b Y`, plus a round-off floor.
    pub fn new(
        spec: &ArsSpec,
        times: Vec<f64>,
        points: Vec<Vec2>,
        controls: Vec<[f64; 2]>,
        tol: f64,
    ) -> Result<Self, DistanceError> {
        let n = times.len();
        if n < 2 || points.len() != n || controls.len() != n {
            return Err(DistanceError::InvalidCurve(
                "need at least two samples with matching times, points and controls".into(),
            ));
        }
        let velocities = velocities(spec, &points, &controls)?;
        let scale = points.iter().fold(1.0f64, |m, p| m.max(p.amax()));
        for i in 0..n - 1 {
            let dt = times[i + 1] - times[i];
            if !(dt > 0.0) {
                return Err(DistanceError::InvalidCurve(format!(
                    "times not increasing at sample {i}"
                )));
            }
            let mean = 0.5 * (velocities[i] + velocities[i + 1]);
            let moved = spec.chart.min_image(points[i + 1] - points[i]);
            let defect = (moved - dt * mean).norm();
            let allowed =
                tol * dt * 0.5 * (velocities[i].norm() + velocities[i + 1].norm()) + 1e-12 * scale;
            if defect > allowed {
                return Err(DistanceError::InvalidCurve(format!(
                    "reconstruction defect {defect:e} exceeds {allowed:e} at sample {i}"
                )));
            }
        }
        Ok(AdmissibleCurve {
            times,
            points,
            controls,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn controls(&self) -> &[[f64; 2]] {
        &self.controls
    }

    pub fn start(&self) -> Vec2 {
        self.points[0]
    }

    pub fn end(&self) -> Vec2 {
        self.points[self.points.len() - 1]
    }

    pub fn duration(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }
}

fn velocities(
    spec: &ArsSpec,
    points: &[Vec2],
    controls: &[[f64; 2]],
) -> Result<Vec<Vec2>, ExprError> {
    points
        .iter()
        .zip(controls)
        .map(|(&p, c)| {
            let (x, y) = spec.frame_at(p)?;
            Ok(c[0] * x + c[1] * y)
        })
        .collect()
}

/// `l(c)`: composite trapezoid rule for the integral of `sqrt(g(q'))`.
pub fn curve_length(spec: &ArsSpec, c: &AdmissibleCurve) -> Result<f64, DistanceError> {
    let v = velocities(spec, &c.points, &c.controls)?;
    let mut speeds = Vec::with_capacity(v.len());
    for (i, (&p, &vi)) in c.points.iter().zip(&v).enumerate() {
        let g = spec.metric_cost(p, vi)?;
        if !g.is_finite() {
            return Err(DistanceError::InadmissibleSample(i));
        }
        speeds.push(g.sqrt());
    }
    Ok(c.times
        .windows(2)
        .zip(speeds.windows(2))
        .map(|(t, s)| 0.5 * (t[1] - t[0]) * (s[0] + s[1]))
        .sum())
}

fn eval_matrix(m: &[[Expr; 2]; 2], p: Vec2) -> Result<Matrix2<f64>, ExprError> {
    let e = |r: usize, c: usize| m[r][c].eval(p[0], p[1]);
    Ok(Matrix2::new(e(0, 0)?, e(0, 1)?, e(1, 0)?, e(1, 1)?))
}

/// Right-hand side of the normal extremal equations for
/// `H = ((lambda . X)^2 + (lambda . Y)^2) / 2`.
fn field(spec: &ArsSpec, q: Vec2, lambda: Vec2) -> Result<(Vec2, Vec2), ExprError> {
    let d = spec.derived();
    let (x, y) = spec.frame_at(q)?;
    let (a, b) = (lambda.dot(&x), lambda.dot(&y));
    let dx = eval_matrix(&d.jac_x, q)?;
    let dy = eval_matrix(&d.jac_y, q)?;
    let qdot = a * x + b * y;
    let ldot = -(a * dx.transpose() * lambda + b * dy.transpose() * lambda);
    Ok((qdot, ldot))
}

fn hamiltonian(spec: &ArsSpec, q: Vec2, lambda: Vec2) -> Result<(f64, [f64; 2]), ExprError> {
    let (x, y) = spec.frame_at(q)?;
    let (a, b) = (lambda.dot(&x), lambda.dot(&y));
    Ok((0.5 * (a * a + b * b), [a, b]))
}

/// Integrates the normal extremal from `p` with initial covector `p0` for
/// time `t_end` by fixed-step RK4, recording the controls
/// `(p0 . X, p0 . Y)` along the way.
pub fn geodesic_shoot(
    spec: &ArsSpec,
    p: Vec2,
    p0: Vec2,
    t_end: f64,
    steps: usize,
) -> Result<AdmissibleCurve, DistanceError> {
    if steps == 0 || !(t_end > 0.0) {
        return Err(DistanceError::InvalidCurve(
            "need positive time and step count".into(),
        ));
    }
    let (h0, c0) = hamiltonian(spec, p, p0)?;
    if !(h0 > 0.0) {
        return Err(DistanceError::DegenerateCovector);
    }
    let dt = t_end / steps as f64;
    let mut q = p;
    let mut lambda = p0;
    let mut times = vec![0.0];
    let mut points = vec![p];
    let mut controls = vec![c0];
    let mut drift = 0.0f64;
    for k in 0..steps {
        let (k1q, k1l) = field(spec, q, lambda)?;
        let (k2q, k2l) = field(spec, q + 0.5 * dt * k1q, lambda + 0.5 * dt * k1l)?;
        let (k3q, k3l) = field(spec, q + 0.5 * dt * k2q, lambda + 0.5 * dt * k2l)?;
        let (k4q, k4l) = field(spec, q + dt * k3q, lambda + dt * k3l)?;
        q += dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        lambda += dt / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l);
        let (h, c) = hamiltonian(spec, q, lambda)?;
        drift = drift.max((h - h0).abs() / h0);
        times.push((k + 1) as f64 * dt);
        points.push(q);
        controls.push(c);
    }
    if drift > HAMILTONIAN_DRIFT {
        return Err(DistanceError::StepUnstable { drift });
    }
    AdmissibleCurve::new(spec, times, points, controls, CURVE_TOL)
}

/// Largest relative change of the Hamiltonian along a shot curve, using the
/// recorded controls.
pub fn hamiltonian_drift(c: &AdmissibleCurve) -> f64 {
    let h = |k: &[f64; 2]| 0.5 * (k[0] * k[0] + k[1] * k[1]);
    let h0 = h(&c.controls[0]);
    c.controls
        .iter()
        .map(|k| (h(k) - h0).abs() / h0)
        .fold(0.0, f64::max)
}
