//! Radial tree geometries, their atomic-measure encodings, and the
//! decomposition of the tree Laplacian into halfline operators.

mod decompose;
mod geometry;
mod measure;

pub use decompose::{decompose_tree, DecompositionEntry, HalflineOperator, Multiplicity};
pub use geometry::{validate_geometry, Edge, GeometryKind, GeometrySpec, TreeGeometry};
pub use measure::{branching_from_weight, build_measure, weight_from_branching, Atom, AtomicMeasure};
pub(crate) use measure::jump_factor;
