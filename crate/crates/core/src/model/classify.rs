use serde::{Deserialize, Serialize};

use crate::tolerance::Tolerances;
use crate::Vec2;

/// Pointwise type of a point of the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointClass {
    /// The frame spans the tangent plane.
    Ordinary,
    /// The frame is rank one and its first bracket is transversal.
    Grushin,
    /// The frame and its first bracket are rank one, second brackets are
    /// not.
    Tangency,
}

/// Numerical rank of a family of plane vectors together with the ratio of
/// its singular values (`sigma_min / sigma_max`, 0 for the zero family).
pub fn rank_of(vectors: &[Vec2], rank_tol: f64) -> (usize, f64) {
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for v in vectors {
        a += v[0] * v[0];
        b += v[0] * v[1];
        c += v[1] * v[1];
    }
    let mean = 0.5 * (a + c);
    let radius = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let top = mean + radius;
    if top <= 0.0 || !top.is_finite() {
        return (0, 0.0);
    }
    // a*c - b*b is exact-er than mean - radius when the family is nearly
    // rank one
    let low = ((a * c - b * b) / top).max(0.0);
    let ratio = (low / top).sqrt();
    (if ratio >= rank_tol { 2 } else { 1 }, ratio)
}

/// `flag` holds `X, Y, [X,Y], [X,[X,Y]], [Y,[X,Y]]` at the point.
pub(crate) fn classify(flag: &[Vec2; 5], det: f64, tol: &Tolerances) -> Option<PointClass> {
    let scale = flag[0].norm_squared() + flag[1].norm_squared();
    if det.abs() > tol.det * scale {
        return Some(PointClass::Ordinary);
    }
    if rank_of(&flag[..3], tol.rank).0 == 2 {
        return Some(PointClass::Grushin);
    }
    if rank_of(flag, tol.rank).0 == 2 {
        return Some(PointClass::Tangency);
    }
    None
}
