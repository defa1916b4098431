use std::f64::consts::{FRAC_PI_2, PI};

use crate::expr::ExprError;
use crate::model::ArsSpec;
use crate::Vec2;

/// Reduces an angle to the projective circle, `[-pi/2, pi/2]`.
pub fn wrap_half(a: f64) -> f64 {
    let r = a - PI * (a / PI).round();
    if r < -FRAC_PI_2 {
        r + PI
    } else if r > FRAC_PI_2 {
        r - PI
    } else {
        r
    }
}

/// Angle of the line spanned by the frame: principal axis of
/// `X X^T + Y Y^T`.
pub(crate) fn line_angle(x: Vec2, y: Vec2) -> f64 {
    let a = x[0] * x[0] + y[0] * y[0];
    let b = x[0] * x[1] + y[0] * y[1];
    let c = x[1] * x[1] + y[1] * y[1];
    0.5 * (2.0 * b).atan2(a - c)
}

/// Walking direction along the locus with `M+` on the left.
pub(crate) fn walking_direction(spec: &ArsSpec, p: Vec2) -> Result<Vec2, ExprError> {
    let g = spec.det_grad_at(p)?;
    Ok(spec.orientation.sign() * Vec2::new(g[1], -g[0]))
}

/// Angle from the oriented tangent of the locus to the distribution,
/// taken in the projective circle.
pub(crate) fn defect(spec: &ArsSpec, p: Vec2) -> Result<f64, ExprError> {
    let (x, y) = spec.frame_at(p)?;
    let d = walking_direction(spec, p)?;
    Ok(wrap_half(line_angle(x, y) - d[1].atan2(d[0])))
}
