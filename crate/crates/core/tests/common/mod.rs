#![allow(dead_code)]

use ars2d::expr::Func;
use ars2d::graph::{GraphEdge, GraphVertex};
use ars2d::model::{builtin, BundleOrientation, FixtureParams};
use ars2d::{ArsSpec, Expr, LabelledGraph, SurfaceChart, Var, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> ArsSpec {
    builtin(name, &FixtureParams::default()).unwrap().unwrap()
}

pub fn torus(x: [&str; 2], y: [&str; 2]) -> ArsSpec {
    ArsSpec::new(
        SurfaceChart::Torus {
            periods: [1.0, 1.0],
        },
        VectorField::parse(x[0], x[1]).unwrap(),
        VectorField::parse(y[0], y[1]).unwrap(),
        BundleOrientation::Positive,
    )
    .unwrap()
}

/// Distribution turns once around each vertical locus circle.
pub fn twisted_torus() -> ArsSpec {
    torus(
        ["cos(2*pi*y)", "sin(2*pi*y)"],
        ["-sin(2*pi*x)*sin(2*pi*y)", "sin(2*pi*x)*cos(2*pi*y)"],
    )
}

/// Two contractible locus loops around the negative bumps of a product.
pub fn islands_torus() -> ArsSpec {
    torus(["1", "0"], ["0", "sin(2*pi*x)*sin(2*pi*y) + 0.1"])
}

pub fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..4) {
            0 => Expr::x(),
            1 => Expr::y(),
            2 => Expr::Pi,
            _ => Expr::num((rng.gen_range(-30..=30) as f64) / 10.0),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(random_expr(rng, depth - 1));
    match rng.gen_range(0..10) {
        0 => Expr::Neg(sub(rng)),
        1 => Expr::Add(sub(rng), sub(rng)),
        2 => Expr::Sub(sub(rng), sub(rng)),
        3 | 4 => Expr::Mul(sub(rng), sub(rng)),
        5 => Expr::Div(sub(rng), sub(rng)),
        6 => Expr::Pow(sub(rng), rng.gen_range(-2..=3)),
        _ => {
            let f = [Func::Sin, Func::Cos, Func::Exp, Func::Sqrt, Func::Atan][rng.gen_range(0..5)];
            Expr::Call(f, sub(rng))
        }
    }
}

fn five_point(e: &Expr, var: Var, x: f64, y: f64, h: f64) -> Option<f64> {
    let at = |k: f64| match var {
        Var::X => e.eval(x + k * h, y),
        Var::Y => e.eval(x, y + k * h),
    };
    let v: Vec<f64> = [-2.0, -1.0, 1.0, 2.0]
        .iter()
        .map(|&k| at(k).ok().filter(|v| v.is_finite() && v.abs() < 1e3))
        .collect::<Option<_>>()?;
    Some((v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h))
}

/// Fourth-order central difference, or `None` where halving the step
/// changes the estimate noticeably (near a pole or a branch point).
pub fn finite_difference(e: &Expr, var: Var, x: f64, y: f64) -> Option<f64> {
    let coarse = five_point(e, var, x, y, 1e-3)?;
    let fine = five_point(e, var, x, y, 5e-4)?;
    ((coarse - fine).abs() <= 1e-6 * (1.0 + fine.abs())).then_some(fine)
}

pub fn random_graph(rng: &mut ChaCha8Rng) -> LabelledGraph {
    let n_neg = rng.gen_range(1..5);
    let n_pos = rng.gen_range(1..5);
    let mut vertices = Vec::new();
    for k in 0..n_neg + n_pos {
        vertices.push(GraphVertex {
            id: format!("n{k}"),
            sign: if k < n_neg { -1 } else { 1 },
            chi: rng.gen_range(-4..=2),
        });
    }
    let edges = (0..rng.gen_range(1..9))
        .map(|k| {
            let len = rng.gen_range(0..7);
            GraphEdge {
                id: format!("c{k}"),
                alpha: format!("n{}", rng.gen_range(0..n_neg)),
                omega: format!("n{}", n_neg + rng.gen_range(0..n_pos)),
                cycle: (0..len)
                    .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
                    .collect(),
            }
        })
        .collect();
    LabelledGraph::new(vertices, edges).unwrap()
}

/// Compares symbolic derivatives of `cases` random expressions with finite
/// differences at tolerance `1e-5 (1 + |d|)`.
pub fn check_derivatives(seed: u64, cases: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    while checked < cases {
        let e = random_expr(&mut rng, 4);
        let mut compared = false;
        for var in [Var::X, Var::Y] {
            let de = e.differentiate(var);
            for _ in 0..5 {
                let (x, y) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let Some(fd) = finite_difference(&e, var, x, y) else {
                    continue;
                };
                let Ok(v) = de.eval(x, y) else { continue };
                if (v - fd).abs() > 1e-5 * (1.0 + v.abs()) {
                    return Err(format!(
                        "d/d{} of {e} at ({x}, {y}): symbolic {v}, numeric {fd}",
                        var.name()
                    ));
                }
                compared = true;
            }
        }
        if compared {
            checked += 1;
        }
    }
    Ok(())
}
