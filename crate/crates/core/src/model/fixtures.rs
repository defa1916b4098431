//! Built-in structures: the local normal forms around ordinary, Grushin
//! and tangency points, and a few frames on the unit torus.

use super::{ArsSpec, BundleOrientation, ModelError, SurfaceChart, VectorField};
use crate::expr::{parse, Expr};
use crate::Vec2;

pub const FIXTURE_NAMES: &[&str] = &[
    "grushin-plane",
    "F1",
    "F2",
    "F3",
    "grushin-torus",
    "tangency-torus",
    "riemannian-torus",
    "nonregular-plane",
];

/// Free functions of the normal forms, as expression text.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureParams {
    pub phi: String,
    pub psi: String,
    pub xi: String,
}

impl Default for FixtureParams {
    fn default() -> Self {
        FixtureParams {
            phi: "0".into(),
            psi: "1".into(),
            xi: "0".into(),
        }
    }
}

/// Local charts are `[-1, 1]^2`; every distance query used by the tests
/// keeps its near-optimal paths well inside this square.
const LOCAL_DOMAIN: [[f64; 2]; 2] = [[-1.0, 1.0], [-1.0, 1.0]];

fn plane() -> SurfaceChart {
    SurfaceChart::Plane {
        domain: LOCAL_DOMAIN,
    }
}

fn unit_torus() -> SurfaceChart {
    SurfaceChart::Torus {
        periods: [1.0, 1.0],
    }
}

fn exp_of(e: &Expr) -> Expr {
    if *e == Expr::Num(0.0) {
        Expr::Num(1.0)
    } else {
        Expr::Call(crate::expr::Func::Exp, Box::new(e.clone()))
    }
}

fn times(a: Expr, b: Expr) -> Expr {
    if b == Expr::Num(1.0) {
        a
    } else {
        Expr::Mul(Box::new(a), Box::new(b))
    }
}

fn horizontal() -> VectorField {
    VectorField::new(Expr::Num(1.0), Expr::Num(0.0))
}

fn vertical(e2: Expr) -> VectorField {
    VectorField::new(Expr::Num(0.0), e2)
}

/// Looks up a built-in structure by name. Returns `Ok(None)` for unknown
/// names.
pub fn builtin(name: &str, params: &FixtureParams) -> Result<Option<ArsSpec>, ModelError> {
    let phi = parse(&params.phi)?;
    let psi = parse(&params.psi)?;
    let xi = parse(&params.xi)?;
    let (chart, y) = match name {
        "grushin-plane" => (plane(), vertical(Expr::x())),
        "F1" => {
            check_phi(&phi)?;
            (plane(), vertical(exp_of(&phi)))
        }
        "F2" => {
            check_phi(&phi)?;
            (plane(), vertical(times(Expr::x(), exp_of(&phi))))
        }
        "F3" => {
            let psi0 = psi.eval(0.0, 0.0)?;
            if psi0 <= 0.0 {
                return Err(ModelError::Invalid(format!(
                    "F3 needs psi(0) > 0, got {psi0}"
                )));
            }
            let parabola = Expr::Sub(
                Box::new(Expr::y()),
                Box::new(times(Expr::Pow(Box::new(Expr::x()), 2), psi)),
            );
            (plane(), vertical(times(parabola, exp_of(&xi))))
        }
        "grushin-torus" => (unit_torus(), vertical(parse("sin(2*pi*x)")?)),
        "tangency-torus" => (
            unit_torus(),
            vertical(parse("sin(2*pi*y) - 0.5*cos(2*pi*x)")?),
        ),
        "riemannian-torus" => (unit_torus(), vertical(Expr::Num(1.0))),
        "nonregular-plane" => (plane(), vertical(parse("x^2")?)),
        _ => return Ok(None),
    };
    ArsSpec::new(chart, horizontal(), y, BundleOrientation::Positive).map(Some)
}

fn check_phi(phi: &Expr) -> Result<(), ModelError> {
    for k in 0..9 {
        let y = -1.0 + 0.25 * k as f64;
        let v = phi.eval(0.0, y)?;
        if v.abs() > 1e-12 {
            return Err(ModelError::Invalid(format!(
                "normal forms need phi(0, y) = 0, got {v} at {:?}",
                Vec2::new(0.0, y)
            )));
        }
    }
    Ok(())
}
