//! The full analysis of one structure, as written by `ars2d analyze`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::ExprError;
use crate::graph::{build_graph, euler_number, total_chi, GraphError, LabelledGraph};
use crate::locus::{analyze_locus, LocusError, SingularCurve};
use crate::model::{ArsSpec, H0Report, ModelError, PointClass};
use crate::tolerance::Tolerances;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Locus(#[from] LocusError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// How the traced locus vertices classify.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub ordinary: usize,
    pub grushin: usize,
    pub tangency: usize,
    pub degenerate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    /// SHA-256 of the canonical JSON form of the input structure.
    pub spec_digest: String,
    pub resolution: usize,
    pub h0: H0Report,
    pub locus_classes: ClassCounts,
    pub curves: Vec<SingularCurve>,
    /// Graph of the structure; absent on plane charts.
    pub graph: Option<LabelledGraph>,
    /// Sum of all tangency contributions.
    pub tau_total: i64,
    pub euler_number: Option<i64>,
    pub total_chi: Option<i64>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn tangency_count(&self) -> usize {
        self.curves.iter().map(|c| c.tangencies.len()).sum()
    }
}

/// Traces the locus, finds tangencies and revolutions, checks (H0) and
/// builds the graph on torus charts.
pub fn analyze(spec: &ArsSpec, resolution: usize) -> Result<AnalysisReport, ReportError> {
    analyze_with(spec, resolution, &Tolerances::from_env())
}

pub fn analyze_with(
    spec: &ArsSpec,
    resolution: usize,
    tol: &Tolerances,
) -> Result<AnalysisReport, ReportError> {
    let curves = analyze_locus(spec, resolution, tol)?;
    let h0 = spec.check_h0_with(&curves, tol)?;
    let mut classes = ClassCounts::default();
    for c in &curves {
        for &p in &c.points {
            match spec.classify_point_with(p, tol) {
                Ok(PointClass::Ordinary) => classes.ordinary += 1,
                Ok(PointClass::Grushin) => classes.grushin += 1,
                Ok(PointClass::Tangency) => classes.tangency += 1,
                Err(ModelError::Expr(e)) => return Err(e.into()),
                Err(_) => classes.degenerate += 1,
            }
        }
    }
    let graph = if spec.chart.is_torus() {
        Some(build_graph(spec, &curves, resolution)?)
    } else {
        None
    };
    let tau_total = curves
        .iter()
        .flat_map(|c| c.tangencies.iter())
        .map(|t| i64::from(t.contribution))
        .sum();
    Ok(AnalysisReport {
        spec_digest: spec.digest(),
        resolution,
        h0,
        locus_classes: classes,
        euler_number: graph.as_ref().map(euler_number),
        total_chi: graph.as_ref().map(total_chi),
        graph,
        curves,
        tau_total,
    })
}
