//! Spectral reports for every generation operator of a radial tree.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{decompose_tree, GeometryKind, Multiplicity, TreeGeometry};
use crate::weyl::Tail;

use super::sigma::{sigma_ac_estimate, Classification, SigmaOptions, SpectralReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub generation: usize,
    pub origin: f64,
    pub multiplicity: Multiplicity,
    pub report: SpectralReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSpectrumReport {
    pub energies: Vec<f64>,
    pub generations: Vec<GenerationReport>,
    /// Ac-like where some generation is ac-like, singular-like where all are.
    pub union: Vec<Classification>,
}

impl TreeSpectrumReport {
    pub fn union_ac_fraction(&self) -> f64 {
        if self.union.is_empty() {
            return 0.0;
        }
        self.union.iter().filter(|c| **c == Classification::AcLike).count() as f64 / self.union.len() as f64
    }
}

/// Continuation beyond the first `count` edges of `geometry`.
///
/// Eventually periodic geometries continue exactly by their period (rotated
/// to the right phase), explicit ones are taken to end there, and
/// substitution sequences are left open.
pub fn tail_after(geometry: &TreeGeometry, count: usize) -> Tail {
    match geometry.kind() {
        GeometryKind::EventuallyPeriodic => {
            let (pre, period) = (geometry.preperiod().unwrap_or(&[]), geometry.period().unwrap_or(&[]));
            if count < pre.len() || period.is_empty() {
                return Tail::Unknown;
            }
            let phase = (count - pre.len()) % period.len();
            Tail::Periodic(period[phase..].iter().chain(&period[..phase]).copied().collect())
        }
        GeometryKind::Explicit => Tail::Free,
        GeometryKind::Substitution => Tail::Unknown,
    }
}

/// Run [`sigma_ac_estimate`] at `t = 0` for the generation operators
/// `A_0 .. A_max_generation`, each seeing at least `window` atoms. The tail
/// in `opts` is replaced by [`tail_after`].
pub fn tree_spectrum_report(
    geometry: &TreeGeometry,
    max_generation: usize,
    window: usize,
    energies: &[f64],
    ladder: &[f64],
    opts: &SigmaOptions,
) -> Result<TreeSpectrumReport> {
    let window = window.max(geometry.preperiod().map_or(0, |p| p.len()));
    let entries = decompose_tree(geometry, max_generation, window)?;
    let mut opts = opts.clone();
    opts.t = 0.0;
    opts.weyl.tail = tail_after(geometry, max_generation + window);
    let mut generations = Vec::with_capacity(entries.len());
    for entry in entries {
        let report = sigma_ac_estimate(&entry.operator.measure, energies, ladder, &opts)?;
        generations.push(GenerationReport {
            generation: entry.operator.generation,
            origin: entry.operator.origin,
            multiplicity: entry.multiplicity,
            report,
        });
    }
    let union = (0..energies.len())
        .map(|i| {
            let classes = generations.iter().map(|g| g.report.records[i].class);
            if classes.clone().any(|c| c == Classification::AcLike) {
                Classification::AcLike
            } else if classes.clone().all(|c| c == Classification::SingularLike) {
                Classification::SingularLike
            } else {
                Classification::Undecided
            }
        })
        .collect();
    Ok(TreeSpectrumReport { energies: energies.to_vec(), generations, union })
}
