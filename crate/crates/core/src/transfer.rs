//! Transfer matrices for `-u'' = z u` between atoms and across vertex jumps.
//!
//! A [`BoundaryState`] holds `(u, u')` at a point; at an atom it is the
//! right-sided limit. Free gaps act by
//! `[[cos(k l), sin(k l) / k], [-z sin(k l) / k, cos(k l)]]` with `k^2 = z`,
//! vertex jumps by `diag(sqrt(b), 1 / sqrt(b))`. All matrices have unit
//! determinant.

use std::ops::Mul;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{jump_factor, AtomicMeasure};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryState {
    pub u: C64,
    pub du: C64,
}

impl BoundaryState {
    pub fn new(u: C64, du: C64) -> Self {
        Self { u, du }
    }

    /// Neumann data `(1, 0)`.
    pub fn neumann() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    /// Dirichlet data `(0, 1)`.
    pub fn dirichlet() -> Self {
        Self::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.u.conj(), self.du.conj())
    }

    pub fn norm(&self) -> f64 {
        self.u.norm().hypot(self.du.norm())
    }
}

/// `W(u, v) = u' v - u v'`.
pub fn wronskian(s1: BoundaryState, s2: BoundaryState) -> C64 {
    s1.du * s2.u - s1.u * s2.du
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub a11: C64,
    pub a12: C64,
    pub a21: C64,
    pub a22: C64,
}

impl TransferMatrix {
    pub fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn identity() -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        Self::new(o, z, z, o)
    }

    pub fn det(&self) -> C64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> C64 {
        self.a11 + self.a22
    }

    /// Inverse of a unit-determinant matrix (the adjugate).
    pub fn inverse_unimodular(&self) -> Self {
        Self::new(self.a22, -self.a12, -self.a21, self.a11)
    }

    /// The two columns as states: images of Neumann and Dirichlet data.
    pub fn columns(&self) -> (BoundaryState, BoundaryState) {
        (BoundaryState::new(self.a11, self.a21), BoundaryState::new(self.a12, self.a22))
    }

    pub fn max_abs(&self) -> f64 {
        self.a11.norm().max(self.a12.norm()).max(self.a21.norm()).max(self.a22.norm())
    }

    /// Multiply the first row by `s` and the second by `1 / s`.
    #[inline]
    fn scale_rows(&mut self, s: f64) {
        let r = 1.0 / s;
        self.a11 *= s;
        self.a12 *= s;
        self.a21 *= r;
        self.a22 *= r;
    }

    #[inline]
    fn scale(&mut self, f: f64) {
        self.a11 *= f;
        self.a12 *= f;
        self.a21 *= f;
        self.a22 *= f;
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    #[inline]
    fn mul(self, o: TransferMatrix) -> TransferMatrix {
        TransferMatrix::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

impl Mul<BoundaryState> for TransferMatrix {
    type Output = BoundaryState;

    #[inline]
    fn mul(self, s: BoundaryState) -> BoundaryState {
        BoundaryState::new(self.a11 * s.u + self.a12 * s.du, self.a21 * s.u + self.a22 * s.du)
    }
}

/// Below this value of `|z| l^2` the propagator entries come from their
/// Taylor series.
const SERIES_THRESHOLD: f64 = 1e-4;

/// Free flow of `-u'' = z u` over a gap of length `len`.
pub fn free_propagator(z: C64, len: f64) -> Result<TransferMatrix> {
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::Argument(format!("gap length {len} must be positive")));
    }
    Ok(free_unchecked(z, len))
}

/// [`free_propagator`] for any real `len`; negative lengths give the inverse flow.
pub(crate) fn free_unchecked(z: C64, len: f64) -> TransferMatrix {
    let w = z * (len * len);
    let (c, s) = if w.norm() < SERIES_THRESHOLD {
        // cos(k l) and sin(k l)/k are entire in z
        let c = 1.0 - w / 2.0 + w * w / 24.0 - w * w * w / 720.0 + w * w * w * w / 40320.0;
        let s = (1.0 - w / 6.0 + w * w / 120.0 - w * w * w / 5040.0 + w * w * w * w / 362880.0) * len;
        (c, s)
    } else {
        let k = z.sqrt();
        let kl = k * len;
        (kl.cos(), kl.sin() / k)
    };
    TransferMatrix::new(c, s, -z * s, c)
}

/// Jump `diag(sqrt(b), 1 / sqrt(b))` at a vertex of branching `b`.
pub fn vertex_jump(b: f64) -> Result<TransferMatrix> {
    if !(b > 1.0) || !b.is_finite() {
        return Err(Error::Argument(format!("branching {b} must exceed 1")));
    }
    let mut m = TransferMatrix::identity();
    m.scale_rows(b.sqrt());
    Ok(m)
}

fn check_endpoint(measure: &AtomicMeasure, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::Argument(format!("endpoint {x} is not finite")));
    }
    if measure.is_near_atom(x) {
        return Err(Error::AtomEndpoint { position: x });
    }
    Ok(())
}

/// Transfer matrix of the flow from `from` to `to` (`from < to`), applying
/// free propagators over gaps and jumps at the atoms in between, in order of
/// increasing position.
#[allow(clippy::needless_range_loop)]
pub fn transfer_matrix(measure: &AtomicMeasure, from: f64, to: f64, z: C64) -> Result<TransferMatrix> {
    if !(from < to) {
        return Err(Error::Argument(format!("propagation needs from < to, got {from} >= {to}")));
    }
    check_endpoint(measure, from)?;
    check_endpoint(measure, to)?;
    let mut cache = PropagatorCache::new(z);
    let (lo, hi) = (measure.upper_index(from), measure.lower_index(to));
    let atoms = measure.atoms();
    let mut m = TransferMatrix::identity();
    let mut cursor = from;
    for i in lo..hi {
        let gap = if i == lo { atoms[i].position - cursor } else { measure.spacing(i - 1) };
        m = cache.free(gap) * m;
        m.scale_rows(jump_factor(atoms[i].weight));
        cursor = atoms[i].position;
    }
    Ok(cache.free(to - cursor) * m)
}

/// Propagate `state` from `from` to `to` (`from < to`).
pub fn propagate(
    measure: &AtomicMeasure,
    from: f64,
    to: f64,
    z: C64,
    state: BoundaryState,
) -> Result<BoundaryState> {
    Ok(transfer_matrix(measure, from, to, z)? * state)
}

/// Propagate `state` backwards from `from` to `to` (`to < from`).
pub fn propagate_reverse(
    measure: &AtomicMeasure,
    from: f64,
    to: f64,
    z: C64,
    state: BoundaryState,
) -> Result<BoundaryState> {
    Ok(transfer_matrix(measure, to, from, z)?.inverse_unimodular() * state)
}

/// Neumann and Dirichlet solutions normalized at `t`, evaluated at `b`.
///
/// Works in both directions; `b < t` propagates to the left.
pub fn fundamental_pair(
    measure: &AtomicMeasure,
    t: f64,
    b: f64,
    z: C64,
) -> Result<(BoundaryState, BoundaryState)> {
    let m = if t < b {
        transfer_matrix(measure, t, b, z)?
    } else if b < t {
        transfer_matrix(measure, b, t, z)?.inverse_unimodular()
    } else {
        return Err(Error::Argument("fundamental pair needs t != b".into()));
    };
    Ok(m.columns())
}

/// Small per-`z` memo of free propagators keyed by the exact gap length.
#[derive(Debug, Clone)]
pub(crate) struct PropagatorCache {
    z: C64,
    entries: Vec<(u64, TransferMatrix)>,
}

const CACHE_SLOTS: usize = 32;

impl PropagatorCache {
    pub(crate) fn new(z: C64) -> Self {
        Self { z, entries: Vec::with_capacity(CACHE_SLOTS) }
    }

    #[inline]
    pub(crate) fn free(&mut self, len: f64) -> TransferMatrix {
        let key = len.to_bits();
        if let Some((_, m)) = self.entries.iter().find(|(k, _)| *k == key) {
            return *m;
        }
        let m = free_unchecked(self.z, len);
        if self.entries.len() < CACHE_SLOTS {
            self.entries.push((key, m));
        }
        m
    }
}

/// Largest growth exponent `|Im k| l` allowed in one free step before the
/// step is split; keeps `cos(k l)` far from overflow.
const MAX_STEP_GROWTH: f64 = 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Right,
    Left,
}

/// The matrix `[[u_N, u_D], [u_N', u_D']]` stored as `matrix * 2^exp2`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScaledFundamental {
    pub(crate) matrix: TransferMatrix,
    pub(crate) exp2: i32,
}

impl ScaledFundamental {
    fn renormalize(&mut self) {
        let m = self.matrix.max_abs();
        if m > 1e100 || (m < 1e-100 && m > 0.0) {
            let e = m.log2().round() as i32;
            self.matrix.scale(2f64.powi(-e));
            self.exp2 += e;
        }
    }
}

/// Incremental flow of the fundamental pair normalized at a base point,
/// walking atom by atom in one direction.
///
/// Products accumulate in order of increasing distance from the base point;
/// the matrix is rescaled by powers of two to stay representable.
#[derive(Debug, Clone)]
pub(crate) struct FundamentalWalk<'a> {
    measure: &'a AtomicMeasure,
    z: C64,
    dir: Direction,
    cache: PropagatorCache,
    cursor: f64,
    next: Option<usize>,
    started: bool,
    fund: ScaledFundamental,
}

impl<'a> FundamentalWalk<'a> {
    pub(crate) fn new(measure: &'a AtomicMeasure, base: f64, z: C64, dir: Direction) -> Self {
        let next = match dir {
            Direction::Right => Some(measure.upper_index(base)).filter(|&i| i < measure.len()),
            Direction::Left => measure.lower_index(base).checked_sub(1),
        };
        Self {
            measure,
            z,
            dir,
            cache: PropagatorCache::new(z),
            cursor: base,
            next,
            started: false,
            fund: ScaledFundamental { matrix: TransferMatrix::identity(), exp2: 0 },
        }
    }

    pub(crate) fn cursor(&self) -> f64 {
        self.cursor
    }

    /// Index of the next atom ahead of the cursor.
    pub(crate) fn next_atom(&self) -> Option<usize> {
        self.next
    }

    /// Distance from the cursor to the next atom.
    pub(crate) fn distance_to_next(&self) -> Option<f64> {
        let i = self.next?;
        let atoms = self.measure.atoms();
        Some(if self.started {
            // interior gaps come from the stored spacings
            match self.dir {
                Direction::Right => self.measure.spacing(i - 1),
                Direction::Left => self.measure.spacing(i),
            }
        } else {
            (atoms[i].position - self.cursor).abs()
        })
    }

    #[inline]
    fn step_matrix(&mut self, dist: f64) -> TransferMatrix {
        let m = self.cache.free(dist);
        match self.dir {
            Direction::Right => m,
            Direction::Left => m.inverse_unimodular(),
        }
    }

    fn apply_free(&mut self, fund: &mut ScaledFundamental, dist: f64) {
        let growth = self.z.sqrt().im.abs() * dist;
        if growth <= MAX_STEP_GROWTH {
            fund.matrix = self.step_matrix(dist) * fund.matrix;
        } else {
            let pieces = (growth / MAX_STEP_GROWTH).ceil();
            let step = dist / pieces;
            for _ in 0..pieces as usize {
                fund.matrix = self.step_matrix(step) * fund.matrix;
                fund.renormalize();
            }
        }
        fund.renormalize();
    }

    /// Move the cursor through the next atom. Returns the atom index, or
    /// `None` when no atoms remain in this direction.
    pub(crate) fn cross_next(&mut self) -> Option<usize> {
        let i = self.next?;
        let dist = self.distance_to_next()?;
        let mut fund = self.fund;
        self.apply_free(&mut fund, dist);
        let s = jump_factor(self.measure.atoms()[i].weight);
        fund.matrix.scale_rows(match self.dir {
            Direction::Right => s,
            Direction::Left => 1.0 / s,
        });
        self.fund = fund;
        self.cursor = self.measure.atoms()[i].position;
        self.started = true;
        self.next = match self.dir {
            Direction::Right => Some(i + 1).filter(|&j| j < self.measure.len()),
            Direction::Left => i.checked_sub(1),
        };
        Some(i)
    }

    /// Move the cursor a distance `dist` ahead through atom-free space.
    pub(crate) fn advance_free(&mut self, dist: f64) {
        debug_assert!(self.distance_to_next().is_none_or(|d| dist < d));
        let mut fund = self.fund;
        self.apply_free(&mut fund, dist);
        self.fund = fund;
        self.cursor += match self.dir {
            Direction::Right => dist,
            Direction::Left => -dist,
        };
        self.started = false;
    }

    /// Fundamental matrix at distance `dist` ahead of the cursor, without
    /// moving. The caller keeps `dist` below the distance to the next atom.
    pub(crate) fn peek(&mut self, dist: f64) -> ScaledFundamental {
        let mut fund = self.fund;
        if dist > 0.0 {
            self.apply_free(&mut fund, dist);
        }
        fund
    }
}
