//! Analysis of two-dimensional almost-Riemannian structures given by a
//! global orthonormal frame `(X, Y)` on a torus or planar chart.
//!
//! The pipeline traces the singular locus (where `X` and `Y` are
//! parallel), classifies its points, measures how the distribution turns
//! along each locus component, assembles the labelled bipartite graph of
//! the structure and decides equivalence of such graphs. The
//! [`distance`] module estimates Carnot-Caratheodory distances.

pub mod distance;
pub mod expr;
pub mod graph;
pub mod locus;
pub mod model;
pub mod report;
pub mod tolerance;

pub use expr::{parse, Expr, ExprError, Var};
pub use graph::{EquivalenceWitness, LabelledGraph};
pub use locus::{SingularCurve, TangencyPoint};
pub use model::{ArsSpec, PointClass, SurfaceChart, VectorField};
pub use report::{analyze, AnalysisReport};
pub use tolerance::Tolerances;

/// A point or tangent vector in chart coordinates.
pub type Vec2 = nalgebra::Vector2<f64>;
