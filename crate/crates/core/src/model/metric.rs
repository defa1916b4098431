use crate::tolerance::Tolerances;
use crate::Vec2;

/// `g(v)` for the frame `(x, y)` at a point: the minimum of `a^2 + b^2`
/// over `a x + b y = v`, or `+inf` when `v` leaves the span of the frame.
///
/// Where the frame is singular the minimal-norm solution of the rank-one
/// system is used.
pub fn frame_metric_cost(x: Vec2, y: Vec2, v: Vec2, tol: &Tolerances) -> f64 {
    let det = x[0] * y[1] - x[1] * y[0];
    let scale = x.norm_squared() + y.norm_squared();
    if det.abs() > tol.det * scale {
        let a = (v[0] * y[1] - y[0] * v[1]) / det;
        let b = (x[0] * v[1] - v[0] * x[1]) / det;
        return a * a + b * b;
    }
    let vv = v.norm_squared();
    if vv == 0.0 {
        return 0.0;
    }
    if scale == 0.0 {
        return f64::INFINITY;
    }
    // Principal direction of x x^T + y y^T spans the image of the frame.
    let (a, b, c) = (
        x[0] * x[0] + y[0] * y[0],
        x[0] * x[1] + y[0] * y[1],
        x[1] * x[1] + y[1] * y[1],
    );
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let u = Vec2::new(theta.cos(), theta.sin());
    let along = u.dot(&v);
    let off = (vv - along * along).max(0.0).sqrt();
    if off > tol.span * vv.sqrt() {
        return f64::INFINITY;
    }
    // rank one: the only singular value squared is the trace
    along * along / scale
}
