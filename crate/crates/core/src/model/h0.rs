use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::{rank_of, ArsSpec};
use crate::expr::ExprError;
use crate::locus::SingularCurve;
use crate::tolerance::Tolerances;
use crate::Vec2;

/// Lattice used to scan for critical points of the determinant.
const SCAN: usize = 128;
/// Gradient norm on the locus below this fraction of the largest gradient
/// counts as vanishing.
const GRADIENT_FLOOR: f64 = 1e-6;
const MAX_REPORTED: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum H0Failure {
    /// The gradient of `det(X, Y)` vanishes on the locus.
    SingularValue { point: Vec2 },
    /// Two tangency points closer than one grid step.
    TangenciesNotIsolated { first: Vec2, second: Vec2 },
    /// Brackets up to order three do not span at a tangency point.
    Delta3Deficient { point: Vec2, ratio: f64 },
}

/// Outcome of the (H0) check: the locus is a regular level set, tangency
/// points are isolated and brackets of order three span at them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H0Report {
    pub passed: bool,
    pub failures: Vec<H0Failure>,
}

impl ArsSpec {
    pub fn check_h0(&self, curves: &[SingularCurve]) -> Result<H0Report, ExprError> {
        self.check_h0_with(curves, &Tolerances::from_env())
    }

    pub fn check_h0_with(
        &self,
        curves: &[SingularCurve],
        tol: &Tolerances,
    ) -> Result<H0Report, ExprError> {
        let (origin, size) = self.chart.bounds();
        let resolution = curves
            .iter()
            .filter_map(|c| c.traced_resolution())
            .max()
            .unwrap_or(SCAN);
        let step = size.amax() / resolution as f64;
        let mut failures = Vec::new();

        let scan = Scan::new(self, origin, size)?;
        let floor = GRADIENT_FLOOR * scan.max_grad;
        for c in curves {
            for &p in &c.points {
                if self.det_grad_at(p)?.norm() <= floor {
                    push_point(&mut failures, p, step, self);
                }
            }
        }
        for p in scan.critical_zeros(self, floor)? {
            push_point(&mut failures, p, step, self);
        }

        let tangencies: Vec<Vec2> = curves
            .iter()
            .flat_map(|c| c.tangencies.iter().map(|t| t.location))
            .collect();
        for (i, &a) in tangencies.iter().enumerate() {
            for &b in &tangencies[i + 1..] {
                if self.chart.min_image(b - a).norm() <= step {
                    failures.push(H0Failure::TangenciesNotIsolated {
                        first: a,
                        second: b,
                    });
                }
            }
            let ratio = rank_of(&self.flag_at(a)?, tol.rank).1;
            if ratio < tol.rank {
                failures.push(H0Failure::Delta3Deficient { point: a, ratio });
            }
        }
        Ok(H0Report {
            passed: failures.is_empty(),
            failures,
        })
    }
}

fn push_point(failures: &mut Vec<H0Failure>, p: Vec2, step: f64, spec: &ArsSpec) {
    let near = failures.iter().any(|f| match f {
        H0Failure::SingularValue { point } => spec.chart.min_image(point - p).norm() <= step,
        _ => false,
    });
    let count = failures
        .iter()
        .filter(|f| matches!(f, H0Failure::SingularValue { .. }))
        .count();
    if !near && count < MAX_REPORTED {
        failures.push(H0Failure::SingularValue { point: p });
    }
}

struct Scan {
    origin: Vec2,
    step: Vec2,
    n: usize,
    periodic: bool,
    det: Vec<f64>,
    max_grad: f64,
    max_det: f64,
}

impl Scan {
    fn new(spec: &ArsSpec, origin: Vec2, size: Vec2) -> Result<Self, ExprError> {
        let periodic = spec.chart.is_torus();
        let n = if periodic { SCAN } else { SCAN + 1 };
        let step = size / SCAN as f64;
        let mut det = Vec::with_capacity(n * n);
        let (mut max_grad, mut max_det) = (0.0f64, 0.0f64);
        for j in 0..n {
            for i in 0..n {
                let p = origin + Vec2::new(i as f64 * step[0], j as f64 * step[1]);
                let d = spec.det_at(p)?;
                max_det = max_det.max(d.abs());
                max_grad = max_grad.max(spec.det_grad_at(p)?.norm());
                det.push(d);
            }
        }
        Ok(Scan {
            origin,
            step,
            n,
            periodic,
            det,
            max_grad,
            max_det,
        })
    }

    fn value(&self, i: isize, j: isize) -> Option<f64> {
        let n = self.n as isize;
        let (i, j) = if self.periodic {
            (i.rem_euclid(n), j.rem_euclid(n))
        } else if (0..n).contains(&i) && (0..n).contains(&j) {
            (i, j)
        } else {
            return None;
        };
        Some(self.det[(i + j * n) as usize])
    }

    /// Critical points of the determinant lying on its zero set, found by
    /// Newton iteration on the gradient from local minima of `|det|`.
    fn critical_zeros(&self, spec: &ArsSpec, floor: f64) -> Result<Vec<Vec2>, ExprError> {
        let mut out = Vec::new();
        let zero = 1e-8 * self.max_det.max(f64::MIN_POSITIVE);
        let reach = 2.0 * self.step.amax();
        for j in 0..self.n as isize {
            for i in 0..self.n as isize {
                let v = self.value(i, j).unwrap().abs();
                let is_min = (-1..=1)
                    .flat_map(|dj| (-1..=1).map(move |di| (di, dj)))
                    .filter(|&d| d != (0, 0))
                    .all(|(di, dj)| self.value(i + di, j + dj).map_or(true, |w| v <= w.abs()));
                if !is_min {
                    continue;
                }
                let start =
                    self.origin + Vec2::new(i as f64 * self.step[0], j as f64 * self.step[1]);
                let mut p = start;
                let mut converged = false;
                for _ in 0..30 {
                    let g = spec.det_grad_at(p)?;
                    if g.norm() <= floor {
                        converged = true;
                        break;
                    }
                    let h: Matrix2<f64> = spec.det_hessian_at(p)?;
                    let Ok(pinv) = h.pseudo_inverse(1e-12 * h.norm().max(f64::MIN_POSITIVE)) else {
                        break;
                    };
                    let delta = pinv * g;
                    if delta.norm() == 0.0 {
                        break;
                    }
                    p -= delta;
                    if (p - start).norm() > reach {
                        break;
                    }
                }
                if converged && (p - start).norm() <= reach && spec.det_at(p)?.abs() <= zero {
                    out.push(spec.chart.wrap(p));
                }
            }
        }
        Ok(out)
    }
}
