//! Almost-Riemannian structures given by a global orthonormal frame.

mod classify;
mod fixtures;
mod h0;
mod metric;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::expr::{Expr, ExprError, Var};
use crate::tolerance::Tolerances;
use crate::Vec2;

pub use classify::{rank_of, PointClass};
pub use fixtures::{builtin, FixtureParams, FIXTURE_NAMES};
pub use h0::{H0Failure, H0Report};
pub use metric::frame_metric_cost;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("invalid structure: {0}")]
    Invalid(String),
    #[error("component {component} is not periodic: {lhs} != {rhs} at ({x}, {y})")]
    NotPeriodic {
        component: String,
        x: f64,
        y: f64,
        lhs: f64,
        rhs: f64,
    },
    #[error("frame is not Lie bracket generating at ({}, {})", .0[0], .0[1])]
    NotBracketGenerating(Vec2),
    #[error("degenerate point ({}, {}): brackets up to order three do not span the plane", .0[0], .0[1])]
    DegeneratePoint(Vec2),
    #[error("point ({}, {}) is outside the chart", .0[0], .0[1])]
    OutsideChart(Vec2),
    #[error("malformed structure file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Coordinate chart carrying the structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SurfaceChart {
    /// `[0, Lx) x [0, Ly)` with opposite sides identified.
    Torus { periods: [f64; 2] },
    /// `[xmin, xmax] x [ymin, ymax]`, for local analysis only.
    Plane { domain: [[f64; 2]; 2] },
}

impl SurfaceChart {
    pub fn is_torus(&self) -> bool {
        matches!(self, SurfaceChart::Torus { .. })
    }

    /// Lower-left corner and side lengths.
    pub fn bounds(&self) -> (Vec2, Vec2) {
        match self {
            SurfaceChart::Torus { periods } => (Vec2::zeros(), Vec2::new(periods[0], periods[1])),
            SurfaceChart::Plane { domain } => (
                Vec2::new(domain[0][0], domain[1][0]),
                Vec2::new(domain[0][1] - domain[0][0], domain[1][1] - domain[1][0]),
            ),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        match self {
            SurfaceChart::Torus { .. } => p.iter().all(|c| c.is_finite()),
            SurfaceChart::Plane { domain } => {
                let eps = 1e-12 * (1.0 + self.bounds().1.amax());
                p[0] >= domain[0][0] - eps
                    && p[0] <= domain[0][1] + eps
                    && p[1] >= domain[1][0] - eps
                    && p[1] <= domain[1][1] + eps
            }
        }
    }

    /// Reduces a point into the fundamental domain (identity on planes).
    pub fn wrap(&self, p: Vec2) -> Vec2 {
        match self {
            SurfaceChart::Torus { periods } => {
                Vec2::new(p[0].rem_euclid(periods[0]), p[1].rem_euclid(periods[1]))
            }
            SurfaceChart::Plane { .. } => p,
        }
    }

    /// Shortest representative of a displacement (identity on planes).
    pub fn min_image(&self, d: Vec2) -> Vec2 {
        match self {
            SurfaceChart::Torus { periods } => Vec2::new(
                d[0] - periods[0] * (d[0] / periods[0]).round(),
                d[1] - periods[1] * (d[1] / periods[1]).round(),
            ),
            SurfaceChart::Plane { .. } => d,
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        let (_, size) = self.bounds();
        let finite = match self {
            SurfaceChart::Torus { periods } => periods.iter().all(|v| v.is_finite()),
            SurfaceChart::Plane { domain } => domain.iter().flatten().all(|v| v.is_finite()),
        };
        if !finite || size[0] <= 0.0 || size[1] <= 0.0 {
            return Err(ModelError::Invalid(format!("degenerate chart {self:?}")));
        }
        Ok(())
    }
}

/// A vector field `(e1, e2)` in chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "[Expr; 2]", into = "[Expr; 2]")]
pub struct VectorField {
    pub e1: Expr,
    pub e2: Expr,
}

impl From<[Expr; 2]> for VectorField {
    fn from([e1, e2]: [Expr; 2]) -> Self {
        VectorField { e1, e2 }
    }
}

impl From<VectorField> for [Expr; 2] {
    fn from(v: VectorField) -> Self {
        [v.e1, v.e2]
    }
}

impl VectorField {
    pub fn new(e1: Expr, e2: Expr) -> Self {
        VectorField { e1, e2 }
    }

    pub fn parse(e1: &str, e2: &str) -> Result<Self, ExprError> {
        Ok(VectorField::new(crate::parse(e1)?, crate::parse(e2)?))
    }

    pub fn eval(&self, p: Vec2) -> Result<Vec2, ExprError> {
        Ok(Vec2::new(
            self.e1.eval(p[0], p[1])?,
            self.e2.eval(p[0], p[1])?,
        ))
    }

    /// Jacobian rows `[d e1/dx, d e1/dy]`, `[d e2/dx, d e2/dy]`.
    pub fn jacobian(&self) -> [[Expr; 2]; 2] {
        [
            [self.e1.differentiate(Var::X), self.e1.differentiate(Var::Y)],
            [self.e2.differentiate(Var::X), self.e2.differentiate(Var::Y)],
        ]
    }

    pub fn scaled(&self, f: &Expr) -> VectorField {
        let m = |e: &Expr| Expr::Mul(Box::new(f.clone()), Box::new(e.clone()));
        VectorField::new(m(&self.e1), m(&self.e2))
    }
}

/// `[V, W] = (DW) V - (DV) W`, computed symbolically.
pub fn lie_bracket(v: &VectorField, w: &VectorField) -> VectorField {
    use crate::expr::diff::{add, mul, sub};
    let dv = v.jacobian();
    let dw = w.jacobian();
    let apply = |j: &[[Expr; 2]; 2], f: &VectorField, row: usize| {
        add(
            mul(j[row][0].clone(), f.e1.clone()),
            mul(j[row][1].clone(), f.e2.clone()),
        )
    };
    VectorField::new(
        sub(apply(&dw, v, 0), apply(&dv, w, 0)),
        sub(apply(&dw, v, 1), apply(&dv, w, 1)),
    )
}

/// Orientation of the bundle relative to the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum BundleOrientation {
    #[default]
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl BundleOrientation {
    pub fn sign(self) -> f64 {
        match self {
            BundleOrientation::Positive => 1.0,
            BundleOrientation::Negative => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            BundleOrientation::Positive => BundleOrientation::Negative,
            BundleOrientation::Negative => BundleOrientation::Positive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
struct FrameFile {
    X: VectorField,
    Y: VectorField,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpecFile {
    surface: SurfaceChart,
    frame: FrameFile,
    #[serde(default)]
    bundle_orientation: BundleOrientation,
}

/// Expressions derived once from the frame.
#[derive(Debug)]
pub struct DerivedFields {
    pub det: Expr,
    pub det_grad: [Expr; 2],
    /// `[dxx, dxy, dyy]`
    pub det_hessian: [Expr; 3],
    pub xy: VectorField,
    pub x_xy: VectorField,
    pub y_xy: VectorField,
    pub jac_x: [[Expr; 2]; 2],
    pub jac_y: [[Expr; 2]; 2],
}

impl DerivedFields {
    fn new(x: &VectorField, y: &VectorField) -> Self {
        use crate::expr::diff::{mul, sub};
        let det = sub(
            mul(x.e1.clone(), y.e2.clone()),
            mul(x.e2.clone(), y.e1.clone()),
        );
        let dx = det.differentiate(Var::X);
        let dy = det.differentiate(Var::Y);
        let det_hessian = [
            dx.differentiate(Var::X),
            dx.differentiate(Var::Y),
            dy.differentiate(Var::Y),
        ];
        let xy = lie_bracket(x, y);
        DerivedFields {
            det_grad: [dx, dy],
            det_hessian,
            x_xy: lie_bracket(x, &xy),
            y_xy: lie_bracket(y, &xy),
            xy,
            jac_x: x.jacobian(),
            jac_y: y.jacobian(),
            det,
        }
    }
}

/// A 2-ARS on a chart: orthonormal frame `(X, Y)` and bundle orientation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SpecFile", into = "SpecFile")]
pub struct ArsSpec {
    pub chart: SurfaceChart,
    pub x: VectorField,
    pub y: VectorField,
    pub orientation: BundleOrientation,
    derived: Arc<DerivedFields>,
}

impl PartialEq for ArsSpec {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart
            && self.x == other.x
            && self.y == other.y
            && self.orientation == other.orientation
    }
}

impl TryFrom<SpecFile> for ArsSpec {
    type Error = ModelError;

    fn try_from(f: SpecFile) -> Result<Self, Self::Error> {
        ArsSpec::new(f.surface, f.frame.X, f.frame.Y, f.bundle_orientation)
    }
}

impl From<ArsSpec> for SpecFile {
    fn from(s: ArsSpec) -> Self {
        SpecFile {
            surface: s.chart,
            frame: FrameFile { X: s.x, Y: s.y },
            bundle_orientation: s.orientation,
        }
    }
}

/// Samples per axis for the bracket-generating check.
const GENERATING_SAMPLES: usize = 24;
const PERIODIC_SAMPLES: usize = 16;

impl ArsSpec {
    /// Builds and validates a structure: chart sanity, periodicity of the
    /// frame on torus charts and the bracket-generating condition on a
    /// sample grid.
    pub fn new(
        chart: SurfaceChart,
        x: VectorField,
        y: VectorField,
        orientation: BundleOrientation,
    ) -> Result<Self, ModelError> {
        chart.validate()?;
        let derived = Arc::new(DerivedFields::new(&x, &y));
        let spec = ArsSpec {
            chart,
            x,
            y,
            orientation,
            derived,
        };
        let tol = Tolerances::from_env();
        spec.check_periodic(tol)?;
        spec.check_bracket_generating(GENERATING_SAMPLES, tol)?;
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: SpecFile = serde_json::from_str(text)?;
        ArsSpec::try_from(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("structure serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_json().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn derived(&self) -> &DerivedFields {
        &self.derived
    }

    /// Same frame with the opposite bundle orientation.
    pub fn reversed(&self) -> ArsSpec {
        ArsSpec {
            orientation: self.orientation.reversed(),
            ..self.clone()
        }
    }

    /// Both frame fields multiplied by `f`. The submodule spanned by the
    /// frame is unchanged when `f` never vanishes.
    pub fn with_scaled_frame(&self, f: &Expr) -> Result<ArsSpec, ModelError> {
        ArsSpec::new(
            self.chart.clone(),
            self.x.scaled(f),
            self.y.scaled(f),
            self.orientation,
        )
    }

    /// `det(X, Y)` as an expression.
    pub fn det_frame(&self) -> &Expr {
        &self.derived.det
    }

    pub fn frame_at(&self, p: Vec2) -> Result<(Vec2, Vec2), ExprError> {
        Ok((self.x.eval(p)?, self.y.eval(p)?))
    }

    pub fn det_at(&self, p: Vec2) -> Result<f64, ExprError> {
        self.derived.det.eval(p[0], p[1])
    }

    pub fn det_grad_at(&self, p: Vec2) -> Result<Vec2, ExprError> {
        let [dx, dy] = &self.derived.det_grad;
        Ok(Vec2::new(dx.eval(p[0], p[1])?, dy.eval(p[0], p[1])?))
    }

    pub fn det_hessian_at(&self, p: Vec2) -> Result<nalgebra::Matrix2<f64>, ExprError> {
        let [xx, xy, yy] = &self.derived.det_hessian;
        let (a, b, c) = (
            xx.eval(p[0], p[1])?,
            xy.eval(p[0], p[1])?,
            yy.eval(p[0], p[1])?,
        );
        Ok(nalgebra::Matrix2::new(a, b, b, c))
    }

    /// `X, Y, [X,Y], [X,[X,Y]], [Y,[X,Y]]` evaluated at `p`.
    pub fn flag_at(&self, p: Vec2) -> Result<[Vec2; 5], ExprError> {
        let d = &self.derived;
        Ok([
            self.x.eval(p)?,
            self.y.eval(p)?,
            d.xy.eval(p)?,
            d.x_xy.eval(p)?,
            d.y_xy.eval(p)?,
        ])
    }

    /// Sign `+1` on `M+`, `-1` on `M-`, `0` on the singular locus (exact
    /// zero only).
    pub fn side_sign(&self, det: f64) -> f64 {
        let s = self.orientation.sign() * det;
        if s > 0.0 {
            1.0
        } else if s < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    /// `g_p(v)`: minimal squared control norm realising `v`, or infinity.
    pub fn metric_cost(&self, p: Vec2, v: Vec2) -> Result<f64, ExprError> {
        let (x, y) = self.frame_at(p)?;
        Ok(frame_metric_cost(x, y, v, &Tolerances::from_env()))
    }

    pub fn classify_point(&self, p: Vec2) -> Result<PointClass, ModelError> {
        self.classify_point_with(p, &Tolerances::from_env())
    }

    pub fn classify_point_with(&self, p: Vec2, tol: &Tolerances) -> Result<PointClass, ModelError> {
        if !self.chart.contains(p) {
            return Err(ModelError::OutsideChart(p));
        }
        classify::classify(&self.flag_at(p)?, self.det_at(p)?, tol)
            .ok_or(ModelError::DegeneratePoint(p))
    }

    fn check_periodic(&self, tol: Tolerances) -> Result<(), ModelError> {
        let SurfaceChart::Torus { periods } = self.chart else {
            return Ok(());
        };
        let comps = [
            ("X.0", &self.x.e1),
            ("X.1", &self.x.e2),
            ("Y.0", &self.y.e1),
            ("Y.1", &self.y.e2),
        ];
        for k in 0..PERIODIC_SAMPLES {
            let t = (k as f64 + 0.37) / PERIODIC_SAMPLES as f64;
            let pairs = [
                ((0.0, t * periods[1]), (periods[0], t * periods[1])),
                ((t * periods[0], 0.0), (t * periods[0], periods[1])),
            ];
            for (name, e) in comps {
                for ((x0, y0), (x1, y1)) in pairs {
                    let lhs = e.eval(x0, y0)?;
                    let rhs = e.eval(x1, y1)?;
                    if (lhs - rhs).abs() > tol.periodic * (1.0 + lhs.abs().max(rhs.abs())) {
                        return Err(ModelError::NotPeriodic {
                            component: name.to_string(),
                            x: x0,
                            y: y0,
                            lhs,
                            rhs,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_bracket_generating(&self, n: usize, tol: Tolerances) -> Result<(), ModelError> {
        let (origin, size) = self.chart.bounds();
        for i in 0..n {
            for j in 0..n {
                let p = origin
                    + Vec2::new(
                        size[0] * (i as f64 + 0.5) / n as f64,
                        size[1] * (j as f64 + 0.5) / n as f64,
                    );
                let flag = self.flag_at(p)?;
                if rank_of(&flag, tol.rank).0 < 2 {
                    return Err(ModelError::NotBracketGenerating(p));
                }
            }
        }
        Ok(())
    }
}
