//! Numerical thresholds shared by the analyses.

/// Environment variable multiplying every tolerance.
pub const TOL_SCALE_ENV: &str = "ARS2D_TOL_SCALE";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// `|det(X, Y)| <= det * (|X|^2 + |Y|^2)` counts as singular.
    pub det: f64,
    /// Smallest-to-largest singular value ratio below which a family of
    /// vectors is rank deficient.
    pub rank: f64,
    /// Relative distance from the span of the frame above which a vector
    /// is inadmissible.
    pub span: f64,
    /// Refinement target for locus vertices, relative to the grid-scale
    /// frame magnitude.
    pub refine: f64,
    /// Periodicity check on torus charts.
    pub periodic: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            det: 1e-8,
            rank: 1e-6,
            span: 1e-7,
            refine: 1e-10,
            periodic: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn scaled(self, factor: f64) -> Self {
        Tolerances {
            det: self.det * factor,
            rank: self.rank * factor,
            span: self.span * factor,
            refine: self.refine * factor,
            periodic: self.periodic * factor,
        }
    }

    /// Defaults scaled by `ARS2D_TOL_SCALE` when it is set to a positive
    /// number.
    pub fn from_env() -> Self {
        let factor = std::env::var(TOL_SCALE_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|f| f.is_finite() && *f > 0.0)
            .unwrap_or(1.0);
        Tolerances::default().scaled(factor)
    }
}
