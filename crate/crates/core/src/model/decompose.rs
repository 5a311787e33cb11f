use std::ops::Bound;

use serde::{Deserialize, Serialize};

use super::geometry::{is_integer, TreeGeometry};
use super::measure::{build_measure, AtomicMeasure};
use crate::error::{Error, Result};

/// Halfline operator `-u''` on `(origin, inf)` with a Dirichlet condition at
/// the origin and vertex jumps at the atoms of `measure`.
///
/// `measure` is stored relative to the origin, so its atoms lie in `(0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalflineOperator {
    pub generation: usize,
    pub origin: f64,
    pub measure: AtomicMeasure,
}

impl HalflineOperator {
    /// The measure in tree coordinates.
    pub fn absolute_measure(&self) -> AtomicMeasure {
        self.measure.shift(-self.origin)
    }
}

/// How often a generation operator appears in the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "value")]
pub enum Multiplicity {
    Exact(u128),
    /// Branchings are not all integers, so the count has no meaning.
    NonInteger,
    Overflow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionEntry {
    pub operator: HalflineOperator,
    pub multiplicity: Multiplicity,
}

/// Split the tree Laplacian into the generation operators `A_0, A_1, ...`.
///
/// Entry `k` acts on `(t_k, inf)` and carries the atoms `t_n` with `n > k`;
/// it occurs `b_1 ... b_{k-1} (b_k - 1)` times (once for `k = 0`). Every
/// operator sees at least `window` atoms of the geometry.
pub fn decompose_tree(
    geometry: &TreeGeometry,
    max_generation: usize,
    window: usize,
) -> Result<Vec<DecompositionEntry>> {
    if window == 0 {
        return Err(Error::Argument("window must contain at least one atom".into()));
    }
    let total = max_generation + window;
    let full = build_measure(geometry, total)?;
    let edges = geometry.edges(max_generation.max(1))?;

    let mut entries = Vec::with_capacity(max_generation + 1);
    let mut prefix: Option<u128> = Some(1);
    for k in 0..=max_generation {
        let origin = if k == 0 { 0.0 } else { full.atoms()[k - 1].position };
        let measure = full.restrict((Bound::Excluded(origin), Bound::Unbounded)).shift(origin);
        let multiplicity = if !geometry.is_integral() {
            Multiplicity::NonInteger
        } else if k == 0 {
            Multiplicity::Exact(1)
        } else {
            let b = edges[k - 1].branching.round() as u128;
            let m = prefix.and_then(|p| p.checked_mul(b - 1));
            prefix = prefix.and_then(|p| p.checked_mul(b));
            m.map_or(Multiplicity::Overflow, Multiplicity::Exact)
        };
        entries.push(DecompositionEntry {
            operator: HalflineOperator { generation: k, origin, measure },
            multiplicity,
        });
    }
    debug_assert!(edges.iter().all(|e| !geometry.is_integral() || is_integer(e.branching)));
    Ok(entries)
}
