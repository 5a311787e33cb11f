//! One-period monodromy, band structure, and exact periodic m-functions.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Edge;
use crate::transfer::{free_unchecked, TransferMatrix};

/// Bisection stops once a bracket is this narrow.
pub const BAND_EDGE_TOL: f64 = 1e-10;

fn check_period(period: &[Edge]) -> Result<()> {
    if period.is_empty() {
        return Err(Error::Argument("empty period".into()));
    }
    for (i, e) in period.iter().enumerate() {
        if !(e.length > 0.0) || !e.length.is_finite() {
            return Err(Error::NonPositiveLength { index: i + 1, value: e.length });
        }
        if !(e.branching > 1.0) || !e.branching.is_finite() {
            return Err(Error::BranchingTooSmall { index: i + 1, value: e.branching });
        }
    }
    Ok(())
}

/// `J(b_k) T(l_k) ... J(b_1) T(l_1)` for the cells `(l_i, b_i)` of `period`.
pub fn monodromy(period: &[Edge], z: C64) -> Result<TransferMatrix> {
    check_period(period)?;
    let mut m = TransferMatrix::identity();
    for e in period {
        let s = e.branching.sqrt();
        let mut step = free_unchecked(z, e.length);
        step.a11 *= s;
        step.a12 *= s;
        step.a21 /= s;
        step.a22 /= s;
        m = step * m;
    }
    Ok(m)
}

/// `u'/u` of the Floquet solution of `mono`: the eigenvector whose
/// multiplier has modulus below one when `decaying`, above one otherwise.
pub fn floquet_ratio(mono: &TransferMatrix, decaying: bool) -> Result<C64> {
    let tr = mono.trace();
    let disc = (tr * tr - 4.0 * mono.det()).sqrt();
    let (r1, r2) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
    let big = if r1.norm() >= r2.norm() { r1 } else { r2 };
    if !(big.norm() > 1.0 + 1e-14) {
        return Err(Error::Degenerate(format!("Floquet multipliers lie on the unit circle (trace {tr})")));
    }
    // the product of the multipliers is det = 1
    let rho = if decaying { mono.det() / big } else { big };
    let TransferMatrix { a11, a12, a21, a22 } = *mono;
    let ratio = if a12.norm() >= (a22 - rho).norm() {
        (rho - a11) / a12
    } else {
        a21 / (rho - a22)
    };
    if !ratio.re.is_finite() || !ratio.im.is_finite() {
        return Err(Error::Degenerate("Floquet eigenvector has vanishing value".into()));
    }
    Ok(ratio)
}

/// `m_+(z)` at a cell boundary of the periodic measure with cells `period`.
pub fn m_periodic(period: &[Edge], z: C64) -> Result<C64> {
    if !(z.im > 0.0) {
        return Err(Error::Argument(format!("z = {z} must lie in the open upper half plane")));
    }
    let m = floquet_ratio(&monodromy(period, z)?, true)?;
    if !(m.im > 0.0) {
        return Err(Error::Degenerate(format!("periodic m-function {m} is not in the upper half plane")));
    }
    Ok(m)
}

/// Bands of a periodic measure inside an energy range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    pub period: Vec<Edge>,
    pub e_min: f64,
    pub e_max: f64,
    pub resolution: usize,
    /// Disjoint closed intervals in increasing order.
    pub bands: Vec<(f64, f64)>,
    /// Set when doubling the resolution changes the number of bands, so
    /// narrow bands or gaps may have been missed.
    pub under_resolved: bool,
}

impl BandStructure {
    /// Floquet discriminant `tr M(E)`.
    pub fn discriminant(&self, e: f64) -> f64 {
        discriminant(&self.period, e)
    }

    pub fn contains(&self, e: f64) -> bool {
        self.bands.iter().any(|&(a, b)| a <= e && e <= b)
    }

    pub fn total_length(&self) -> f64 {
        self.bands.iter().map(|(a, b)| b - a).sum()
    }
}

fn discriminant(period: &[Edge], e: f64) -> f64 {
    monodromy(period, C64::new(e, 0.0)).map(|m| m.trace().re).unwrap_or(f64::NAN)
}

fn band_indicator(period: &[Edge], e: f64) -> f64 {
    discriminant(period, e).abs() - 2.0
}

fn bisect(period: &[Edge], mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = band_indicator(period, lo) <= 0.0;
    while hi - lo > BAND_EDGE_TOL {
        let mid = 0.5 * (lo + hi);
        if (band_indicator(period, mid) <= 0.0) == f_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // the endpoint that lies in the band
    if f_lo {
        lo
    } else {
        hi
    }
}

fn scan(period: &[Edge], e_min: f64, e_max: f64, resolution: usize) -> Vec<(f64, f64)> {
    let grid: Vec<f64> = (0..=resolution)
        .map(|i| e_min + (e_max - e_min) * i as f64 / resolution as f64)
        .collect();
    let inside: Vec<bool> = grid.iter().map(|&e| band_indicator(period, e) <= 0.0).collect();
    let mut bands: Vec<(f64, f64)> = Vec::new();
    let mut open: Option<f64> = inside[0].then_some(grid[0]);
    for i in 1..grid.len() {
        match (inside[i - 1], inside[i]) {
            (false, true) => open = Some(bisect(period, grid[i - 1], grid[i])),
            (true, false) => {
                let end = bisect(period, grid[i - 1], grid[i]);
                bands.push((open.take().unwrap_or(grid[i - 1]), end));
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        bands.push((start, e_max));
    }
    // touching bands (closed gaps) merge
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(bands.len());
    for b in bands {
        match merged.last_mut() {
            Some(last) if b.0 - last.1 <= 2.0 * BAND_EDGE_TOL => last.1 = b.1,
            _ => merged.push(b),
        }
    }
    merged
}

/// Bands `{E : |tr M(E)| <= 2}` in `[e_min, e_max]`, bracketed on a grid of
/// `resolution` cells and refined by bisection.
pub fn floquet_bands(period: &[Edge], e_min: f64, e_max: f64, resolution: usize) -> Result<BandStructure> {
    check_period(period)?;
    if !(e_min < e_max) || !e_min.is_finite() || !e_max.is_finite() {
        return Err(Error::Argument(format!("energy range [{e_min}, {e_max}] is empty")));
    }
    if resolution == 0 {
        return Err(Error::Argument("resolution must be positive".into()));
    }
    let bands = scan(period, e_min, e_max, resolution);
    let finer = scan(period, e_min, e_max, resolution.saturating_mul(2));
    Ok(BandStructure {
        period: period.to_vec(),
        e_min,
        e_max,
        resolution,
        under_resolved: finer.len() != bands.len(),
        bands,
    })
}
