use super::{GraphError, LabelledGraph};

/// Names of the bundled example graphs.
pub const GRAPH_FIXTURE_NAMES: &[&str] = &["fig1", "fig3a", "fig3b", "fig3c", "fig5"];

/// Raw JSON of a bundled example graph.
pub fn builtin_graph_json(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => include_str!("../../fixtures/graphs/fig1.json"),
        "fig3a" => include_str!("../../fixtures/graphs/fig3a.json"),
        "fig3b" => include_str!("../../fixtures/graphs/fig3b.json"),
        "fig3c" => include_str!("../../fixtures/graphs/fig3c.json"),
        "fig5" => include_str!("../../fixtures/graphs/fig5.json"),
        _ => return None,
    })
}

/// Bundled example graphs on genus-four surfaces: `fig1` and its
/// orientation-reversed counterpart `fig5`; `fig3a`, `fig3b` (a rotation
/// of the same cycle) and `fig3c` (a different cycle).
pub fn builtin_graph(name: &str) -> Result<Option<LabelledGraph>, GraphError> {
    builtin_graph_json(name)
        .map(LabelledGraph::from_json)
        .transpose()
}
