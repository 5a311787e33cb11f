//! Numerical support of the absolutely continuous spectrum from boundary
//! values `Im m_+(E + iy)` along a ladder of decreasing `y`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AtomicMeasure;
use crate::weyl::{m_plus, MOptions};

pub const DEFAULT_LADDER: [f64; 5] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    AcLike,
    SingularLike,
    Undecided,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::AcLike => "ac-like",
            Classification::SingularLike => "singular-like",
            Classification::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub eps_low: f64,
    pub eps_high: f64,
    /// Largest relative change of `Im m` between the last two rungs that
    /// still counts as stable.
    pub stability: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { eps_low: 1e-4, eps_high: 1e4, stability: 0.05 }
    }
}

/// `m_+(E + iy)` at one ladder rung.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub y: f64,
    pub m: C64,
    pub radius: f64,
    pub converged: bool,
}

impl Rung {
    /// The disk pins down `Im m` to ten percent.
    pub fn resolved(&self) -> bool {
        self.converged || self.radius <= 0.1 * self.m.im.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub energy: f64,
    pub rungs: Vec<Rung>,
    pub class: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub t: f64,
    pub ladder: Vec<f64>,
    pub thresholds: Thresholds,
    pub records: Vec<EnergyRecord>,
}

impl SpectralReport {
    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy).collect()
    }

    pub fn classes(&self) -> Vec<Classification> {
        self.records.iter().map(|r| r.class).collect()
    }

    /// Share of grid points classified ac-like.
    pub fn ac_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        let n = self.records.iter().filter(|r| r.class == Classification::AcLike).count();
        n as f64 / self.records.len() as f64
    }

    /// Whether every stored class follows from the stored rungs.
    pub fn is_consistent(&self) -> bool {
        self.records.iter().all(|r| classify(&r.rungs, &self.thresholds) == r.class)
    }
}

/// Classify one energy from its ladder.
///
/// Ac-like: the last two rungs are resolved, lie in `[eps_low, eps_high]`,
/// and differ by at most `stability` relative. Singular-like: the last rung
/// is certainly outside the range and the last (up to) three rungs move
/// monotonically towards the side it left through. Anything else is
/// undecided.
pub fn classify(rungs: &[Rung], th: &Thresholds) -> Classification {
    let n = rungs.len();
    if n < 2 {
        return Classification::Undecided;
    }
    let (a, b) = (&rungs[n - 2], &rungs[n - 1]);
    let (ia, ib) = (a.m.im, b.m.im);
    let in_range = |x: f64| th.eps_low <= x && x <= th.eps_high;
    if a.resolved() && b.resolved() && in_range(ia) && in_range(ib) && (ib - ia).abs() <= th.stability * ia.max(ib) {
        return Classification::AcLike;
    }
    let tail = &rungs[n.saturating_sub(3)..];
    let slack = |x: f64| 1e-9 * x.abs();
    let falling = tail.windows(2).all(|w| w[1].m.im <= w[0].m.im + slack(w[0].m.im));
    let rising = tail.windows(2).all(|w| w[1].m.im >= w[0].m.im - slack(w[0].m.im));
    if ib + b.radius < th.eps_low && falling {
        return Classification::SingularLike;
    }
    if ib - b.radius > th.eps_high && rising {
        return Classification::SingularLike;
    }
    Classification::Undecided
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaOptions {
    pub thresholds: Thresholds,
    /// Evaluation point of `m_+`.
    pub t: f64,
    /// Disk tolerance, tail, and truncation limit for every rung. Without an
    /// explicit limit each rung may reach `t + 1e4 gamma + 100 (1 + sqrt|E|) / y`.
    pub weyl: MOptions,
    pub allow_negative: bool,
}

impl Default for SigmaOptions {
    fn default() -> Self {
        Self { thresholds: Thresholds::default(), t: 0.0, weyl: MOptions::default(), allow_negative: false }
    }
}

pub(crate) fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.len() < 2 {
        return Err(Error::Argument("the y-ladder needs at least two rungs".into()));
    }
    if ladder.iter().any(|y| !(*y > 0.0) || !y.is_finite()) || ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Argument("the y-ladder must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// Truncation distance that lets disks shrink at `E + iy`: the radius decays
/// roughly like `exp(-y b / sqrt E)`.
pub fn default_reach(measure: &AtomicMeasure, e: f64, y: f64) -> f64 {
    1e4 * measure.separation() + 100.0 * (1.0 + e.abs().sqrt()) / y
}

fn record(measure: &AtomicMeasure, e: f64, ladder: &[f64], opts: &SigmaOptions) -> Result<EnergyRecord> {
    let mut rungs = Vec::with_capacity(ladder.len());
    for &y in ladder {
        let mut weyl = opts.weyl.clone();
        if weyl.b_limit.is_none() {
            weyl.b_limit = Some(opts.t + default_reach(measure, e, y));
        }
        let v = m_plus(measure, opts.t, C64::new(e, y), &weyl)?;
        rungs.push(Rung { y, m: v.value, radius: v.error_bound, converged: v.converged });
    }
    let class = classify(&rungs, &opts.thresholds);
    Ok(EnergyRecord { energy: e, rungs, class })
}

/// Classify every energy of `energies` by the boundary behaviour of
/// `Im m_+(E + iy)` over `ladder`. Energies are processed in parallel.
pub fn sigma_ac_estimate(
    measure: &AtomicMeasure,
    energies: &[f64],
    ladder: &[f64],
    opts: &SigmaOptions,
) -> Result<SpectralReport> {
    check_ladder(ladder)?;
    let th = &opts.thresholds;
    if !(0.0 < th.eps_low && th.eps_low < th.eps_high) || !(th.stability >= 0.0) {
        return Err(Error::Argument("thresholds need 0 < eps_low < eps_high and stability >= 0".into()));
    }
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::Argument("energies must be finite".into()));
    }
    if !opts.allow_negative && energies.iter().any(|&e| e < 0.0) {
        return Err(Error::Argument("negative energies need allow_negative".into()));
    }
    if measure.is_near_atom(opts.t) {
        return Err(Error::AtomEndpoint { position: opts.t });
    }
    let records = energies
        .par_iter()
        .map(|&e| record(measure, e, ladder, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralReport { t: opts.t, ladder: ladder.to_vec(), thresholds: *th, records })
}

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn energy_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Edge;
    use crate::spectral::floquet_bands;
    use crate::weyl::Tail;

    fn rung(y: f64, im: f64) -> Rung {
        Rung { y, m: C64::new(0.3, im), radius: 0.0, converged: true }
    }

    fn ladder(ims: &[f64]) -> Vec<Rung> {
        ims.iter().enumerate().map(|(i, &v)| rung(10f64.powi(-(i as i32) - 1), v)).collect()
    }

    #[test]
    fn classification_rules() {
        let th = Thresholds::default();
        assert_eq!(classify(&ladder(&[0.5, 0.41, 0.4, 0.4]), &th), Classification::AcLike);
        assert_eq!(classify(&ladder(&[1e-1, 1e-2, 1e-3, 1e-5]), &th), Classification::SingularLike);
        assert_eq!(classify(&ladder(&[1e2, 1e3, 1e4, 1e6]), &th), Classification::SingularLike);
        assert_eq!(classify(&ladder(&[1e-1, 1e-5, 1e-3, 1e-5]), &th), Classification::Undecided);
        assert_eq!(classify(&ladder(&[0.5, 0.1, 0.4]), &th), Classification::Undecided);
        assert_eq!(classify(&ladder(&[0.5]), &th), Classification::Undecided);
        let mut loose = ladder(&[0.5, 0.4, 0.4]);
        loose[2].converged = false;
        loose[2].radius = 0.2;
        assert_eq!(classify(&loose, &th), Classification::Undecided);
    }

    #[test]
    fn ladder_validation() {
        let m = AtomicMeasure::free();
        let o = SigmaOptions::default();
        assert!(sigma_ac_estimate(&m, &[1.0], &[1e-2, 1e-1], &o).is_err());
        assert!(sigma_ac_estimate(&m, &[1.0], &[1e-2], &o).is_err());
        assert!(sigma_ac_estimate(&m, &[-1.0], &DEFAULT_LADDER, &o).is_err());
        let neg = SigmaOptions { allow_negative: true, ..o };
        let r = sigma_ac_estimate(&m, &[-1.0], &DEFAULT_LADDER, &neg).unwrap();
        assert_eq!(r.records[0].class, Classification::SingularLike);
    }

    #[test]
    fn free_measure_is_ac() {
        let grid = energy_grid(0.1, 10.0, 60);
        let r = sigma_ac_estimate(&AtomicMeasure::free(), &grid, &DEFAULT_LADDER, &SigmaOptions::default()).unwrap();
        assert_eq!(r.ac_fraction(), 1.0);
        for rec in &r.records {
            let last = rec.rungs.last().unwrap();
            assert!((last.m.im - rec.energy.sqrt()).abs() < 1e-3);
        }
        assert!(r.is_consistent());
    }

    #[test]
    fn periodic_measure_follows_bands() {
        let period = [Edge::new(1.0, 4.0)];
        let m = AtomicMeasure::periodic(&period, 0.0, 4).unwrap();
        let opts = SigmaOptions {
            weyl: MOptions { tail: Tail::Periodic(period.to_vec()), ..MOptions::default() },
            ..SigmaOptions::default()
        };
        let grid = energy_grid(0.0, 7.0, 141);
        let h = grid[1] - grid[0];
        let r = sigma_ac_estimate(&m, &grid, &DEFAULT_LADDER, &opts).unwrap();
        let bands = floquet_bands(&period, 0.0, 7.0, 700).unwrap();
        for rec in &r.records {
            let ac = rec.class == Classification::AcLike;
            if ac != bands.contains(rec.energy) {
                let d = bands.bands.iter().flat_map(|&(a, b)| [a, b]).map(|x| (x - rec.energy).abs()).fold(f64::INFINITY, f64::min);
                assert!(d <= 2.0 * h, "E = {} misclassified as {:?}", rec.energy, rec.class);
            }
        }
    }
}
