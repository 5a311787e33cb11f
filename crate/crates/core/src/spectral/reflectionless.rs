//! Reflectionless probes `|m_+(E + iy, t) + conj m_-(E + iy, t)|`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AtomicMeasure, Edge};
use crate::weyl::{m_minus, m_plus, MOptions, Tail};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionlessDefect {
    pub t: f64,
    pub y: f64,
    pub energies: Vec<f64>,
    pub defects: Vec<f64>,
    pub m_plus: Vec<C64>,
    pub m_minus: Vec<C64>,
    /// Sum of the two disk radii per energy.
    pub error_bounds: Vec<f64>,
}

impl ReflectionlessDefect {
    pub fn max_defect(&self) -> f64 {
        self.defects.iter().copied().fold(0.0, f64::max)
    }
}

/// Options for the right and left halflines of a two-sided measure.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TwoSidedOptions {
    pub right: MOptions,
    pub left: MOptions,
}

/// A finite window of a whole-line periodic measure together with the exact
/// periodic closures on both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedPeriodic {
    pub measure: AtomicMeasure,
    /// Midpoint of the first gap right of the origin.
    pub t: f64,
    pub options: TwoSidedOptions,
}

/// `cells_per_side` periods on each side of the origin, which is a cell
/// boundary.
pub fn two_sided_periodic(period: &[Edge], cells_per_side: usize) -> Result<TwoSidedPeriodic> {
    if cells_per_side == 0 {
        return Err(Error::Argument("need at least one period per side".into()));
    }
    let p: f64 = period.iter().map(|e| e.length).sum();
    let measure = AtomicMeasure::periodic(period, -(cells_per_side as f64) * p, 2 * cells_per_side)?;
    let tail = Tail::Periodic(period.to_vec());
    let side = MOptions { tail, ..MOptions::default() };
    Ok(TwoSidedPeriodic {
        measure,
        t: period[0].length / 2.0,
        options: TwoSidedOptions { right: side.clone(), left: side },
    })
}

/// Defect `|m_+(E + iy, t) + conj m_-(E + iy, t)|` on `energies`.
pub fn reflectionless_defect(
    measure: &AtomicMeasure,
    t: f64,
    energies: &[f64],
    y: f64,
    opts: &TwoSidedOptions,
) -> Result<ReflectionlessDefect> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::Argument(format!("offset y = {y} must be positive")));
    }
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::Argument("energies must be finite".into()));
    }
    let rows = energies
        .par_iter()
        .map(|&e| {
            let z = C64::new(e, y);
            let p = m_plus(measure, t, z, &opts.right)?;
            let m = m_minus(measure, t, z, &opts.left)?;
            Ok((p.value, m.value, p.error_bound + m.error_bound))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReflectionlessDefect {
        t,
        y,
        energies: energies.to_vec(),
        defects: rows.iter().map(|(p, m, _)| (p + m.conj()).norm()).collect(),
        m_plus: rows.iter().map(|r| r.0).collect(),
        m_minus: rows.iter().map(|r| r.1).collect(),
        error_bounds: rows.iter().map(|r| r.2).collect(),
    })
}
