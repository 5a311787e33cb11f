//! Weyl disks and halfline m-functions.
//!
//! Fix `t` off the support of the measure and let `u_N`, `u_D` be the
//! solutions with Neumann and Dirichlet data at `t`. For a truncation point
//! `b`, the numbers `m` for which `u_N + m u_D` satisfies some real boundary
//! condition at `b` fill a circle with
//!
//! ```text
//! center = -W(u_N, conj u_D)(b) / W(u_D, conj u_D)(b)
//! radius =  1 / |W(u_D, conj u_D)(b)|
//! ```
//!
//! The disks are nested and shrink to the point `m_+(z, t)` as `b -> inf`
//! (limit point case). The final radius is therefore a bound on the distance
//! between the returned center and `m_+`, up to floating-point error.
//! To the left the same construction yields `-m_-(z, t)`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AtomicMeasure, Edge};
use crate::spectral::floquet_ratio;
use crate::spectral::monodromy;
use crate::transfer::{wronskian, Direction, FundamentalWalk, ScaledFundamental};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylDisk {
    pub center: C64,
    pub radius: f64,
    /// Truncation point `b` the disk belongs to.
    pub truncation: f64,
}

impl WeylDisk {
    /// `|c' - c| + r' <= r (1 + rel)`: whether `inner` lies inside `self`.
    pub fn contains(&self, inner: &WeylDisk, rel: f64) -> bool {
        (inner.center - self.center).norm() + inner.radius <= self.radius * (1.0 + rel)
    }
}

/// How an m-function value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Closure {
    /// Center of the last Weyl disk.
    Disk,
    /// Exact continuation by the decaying Floquet solution of a periodic tail.
    PeriodicTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MValue {
    pub value: C64,
    /// Radius of the last disk; zero for an exact periodic closure.
    pub error_bound: f64,
    pub truncation: f64,
    pub converged: bool,
    pub closure: Closure,
    /// Atoms crossed before the value was fixed.
    pub atoms_used: usize,
}

/// What lies beyond the materialized atoms.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Tail {
    /// Nothing: the measure is exactly the given finite one.
    #[default]
    Free,
    /// The window continues by whole periods of these cells. To the right
    /// they start at the last atom; to the left they end one cell before the
    /// first atom (the first cell's gap leads into the first atom).
    Periodic(Vec<Edge>),
    /// Unknown continuation: stop at the last midgap of the window.
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MOptions {
    pub tol: f64,
    /// Farthest truncation point (to the left for `m_minus`); defaults to
    /// `t +- 1e4 * gamma`.
    pub b_limit: Option<f64>,
    pub tail: Tail,
}

impl Default for MOptions {
    fn default() -> Self {
        Self { tol: 1e-8, b_limit: None, tail: Tail::Free }
    }
}

impl MOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

fn check_z(z: C64) -> Result<()> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Argument(format!("z = {z} must lie in the open upper half plane")));
    }
    Ok(())
}

fn check_point(measure: &AtomicMeasure, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::Argument(format!("point {x} is not finite")));
    }
    if measure.is_near_atom(x) {
        return Err(Error::AtomEndpoint { position: x });
    }
    Ok(())
}

/// Disk of the Robin family at `b`, from the scaled fundamental matrix there.
fn disk_from(fund: &ScaledFundamental, b: f64, dir: Direction) -> Result<WeylDisk> {
    let (un, ud) = fund.matrix.columns();
    let wdd = wronskian(ud, ud.conj());
    let wnd = wronskian(un, ud.conj());
    let log2_wdd = wdd.norm().log2() + 2.0 * fund.exp2 as f64;
    if !(log2_wdd > (1e-300f64).log2()) || !wnd.norm().is_finite() {
        return Err(Error::Degenerate(format!("W(u_D, conj u_D) vanishes at b = {b}")));
    }
    // dividing by |wdd| first keeps the complex quotient from squaring a tiny modulus
    let scale = wdd.norm();
    let center = -(wnd / scale) / (wdd / scale);
    if !(center.re.is_finite() && center.im.is_finite()) {
        return Err(Error::Degenerate(format!("disk center is not finite at b = {b}")));
    }
    let radius = (-log2_wdd).exp2();
    Ok(WeylDisk {
        center: match dir {
            Direction::Right => center,
            Direction::Left => -center,
        },
        radius,
        truncation: b,
    })
}

fn walk_to(measure: &AtomicMeasure, t: f64, b: f64, z: C64) -> Result<(Direction, ScaledFundamental)> {
    check_z(z)?;
    check_point(measure, t)?;
    check_point(measure, b)?;
    let dir = if b > t {
        Direction::Right
    } else if b < t {
        Direction::Left
    } else {
        return Err(Error::Argument("truncation point must differ from t".into()));
    };
    let mut walk = FundamentalWalk::new(measure, t, z, dir);
    let ahead = |x: f64| match dir {
        Direction::Right => x < b,
        Direction::Left => x > b,
    };
    while let Some(i) = walk.next_atom() {
        if !ahead(measure.atoms()[i].position) {
            break;
        }
        walk.cross_next();
    }
    let rest = (b - walk.cursor()).abs();
    Ok((dir, walk.peek(rest)))
}

/// Weyl disk at truncation `b > t`.
pub fn weyl_disk(measure: &AtomicMeasure, t: f64, b: f64, z: C64) -> Result<WeylDisk> {
    if !(b > t) {
        return Err(Error::Argument(format!("truncation {b} must exceed t = {t}")));
    }
    let (dir, fund) = walk_to(measure, t, b, z)?;
    disk_from(&fund, b, dir)
}

/// Disk for `m_-(z, t)` at truncation `b < t`.
pub fn weyl_disk_left(measure: &AtomicMeasure, t: f64, b: f64, z: C64) -> Result<WeylDisk> {
    if !(b < t) {
        return Err(Error::Argument(format!("truncation {b} must lie left of t = {t}")));
    }
    let (dir, fund) = walk_to(measure, t, b, z)?;
    disk_from(&fund, b, dir)
}

/// The point `m(z, t, b)` for the Robin condition
/// `cos(beta) u(b) + sin(beta) u'(b) = 0`; it lies on the boundary of
/// [`weyl_disk`].
pub fn robin_m_point(measure: &AtomicMeasure, t: f64, b: f64, z: C64, beta: f64) -> Result<C64> {
    if !(b > t) {
        return Err(Error::Argument(format!("truncation {b} must exceed t = {t}")));
    }
    let (_, fund) = walk_to(measure, t, b, z)?;
    let (un, ud) = fund.matrix.columns();
    let (cb, sb) = (beta.cos(), beta.sin());
    let num = un.u * cb + un.du * sb;
    let den = ud.u * cb + ud.du * sb;
    if den.norm() <= 1e-14 * ud.norm() {
        return Err(Error::Tangential);
    }
    Ok(-num / den)
}

/// Relative radius below which a disk is treated as a point: centers carry
/// rounding errors of roughly this size, so further disks add no information.
pub const DISK_RESOLUTION: f64 = 1e-10;

fn resolved(disk: &WeylDisk) -> bool {
    disk.radius <= DISK_RESOLUTION * disk.center.norm()
}

/// Weyl disks at the first `max_disks` midgap points to the right of `t`.
///
/// Past the last atom the points continue at distances `gamma * 2^j` from it.
/// The sequence ends early with the first disk whose radius is below
/// [`DISK_RESOLUTION`] relative to its center.
pub fn weyl_disks(measure: &AtomicMeasure, t: f64, z: C64, max_disks: usize) -> Result<Vec<WeylDisk>> {
    check_z(z)?;
    check_point(measure, t)?;
    let mut walk = FundamentalWalk::new(measure, t, z, Direction::Right);
    let mut disks = Vec::with_capacity(max_disks);
    while disks.len() < max_disks && walk.cross_next().is_some() {
        if let Some(d) = walk.distance_to_next() {
            let b = walk.cursor() + d / 2.0;
            let disk = disk_from(&walk.peek(d / 2.0), b, Direction::Right)?;
            disks.push(disk);
            if resolved(&disk) {
                return Ok(disks);
            }
        }
    }
    let gamma = measure.separation();
    let mut done = 0.0;
    let mut len = gamma;
    while disks.len() < max_disks {
        walk.advance_free(len - done);
        done = len;
        let Ok(disk) = disk_from(&walk.peek(0.0), walk.cursor(), Direction::Right) else {
            break;
        };
        disks.push(disk);
        if resolved(&disk) {
            break;
        }
        len *= 2.0;
    }
    Ok(disks)
}

/// `m_+(z, t)` to absolute accuracy `tol` by nested Weyl disks.
///
/// Disks are evaluated after crossing 1, 2, 4, ... atoms, at the midpoint of
/// the following gap. The result reports non-convergence instead of failing
/// when the limit is reached first; its disk still encloses `m_+`.
pub fn m_plus(measure: &AtomicMeasure, t: f64, z: C64, opts: &MOptions) -> Result<MValue> {
    m_directed(measure, t, z, opts, Direction::Right)
}

/// `m_-(z, t) = -u_-'(t) / u_-(t)` for the solution `u_-` that is square
/// integrable at `-inf`, by nested disks to the left of `t`.
pub fn m_minus(measure: &AtomicMeasure, t: f64, z: C64, opts: &MOptions) -> Result<MValue> {
    m_directed(measure, t, z, opts, Direction::Left)
}

fn m_directed(measure: &AtomicMeasure, t: f64, z: C64, opts: &MOptions, dir: Direction) -> Result<MValue> {
    check_z(z)?;
    check_point(measure, t)?;
    if !(opts.tol > 0.0) {
        return Err(Error::Argument(format!("tolerance {} must be positive", opts.tol)));
    }
    let sign = match dir {
        Direction::Right => 1.0,
        Direction::Left => -1.0,
    };
    let gamma = measure.separation();
    // distance from t the truncation may reach
    let reach = match opts.b_limit {
        Some(b) => (b - t) * sign,
        None => 1e4 * gamma,
    };
    if !(reach > 0.0) {
        return Err(Error::Argument(format!("truncation limit must lie beyond t = {t}")));
    }

    let mut walk = FundamentalWalk::new(measure, t, z, dir);
    let mut last: Option<WeylDisk> = None;
    let mut crossed = 0usize;
    let mut next_eval = 1usize;
    let finish = |disk: WeylDisk, converged: bool, crossed: usize| MValue {
        value: disk.center,
        error_bound: disk.radius,
        truncation: disk.truncation,
        converged,
        closure: Closure::Disk,
        atoms_used: crossed,
    };

    while walk.next_atom().is_some() {
        let before_last = {
            let i = walk.next_atom().unwrap_or(0);
            match dir {
                Direction::Right => i + 2 == measure.len(),
                Direction::Left => i == 1,
            }
        };
        walk.cross_next();
        crossed += 1;
        let Some(d) = walk.distance_to_next() else { break };
        let b = walk.cursor() + sign * d / 2.0;
        if (b - t) * sign > reach {
            return last
                .map(|disk| finish(disk, false, crossed))
                .ok_or_else(|| Error::Argument("truncation limit is closer than the first midgap".into()));
        }
        let wanted = crossed == next_eval || (before_last && opts.tail == Tail::Unknown);
        if wanted {
            let disk = disk_from(&walk.peek(d / 2.0), b, dir)?;
            last = Some(disk);
            if crossed == next_eval {
                next_eval = next_eval.saturating_mul(2);
            }
            if disk.radius < opts.tol {
                return Ok(finish(disk, true, crossed));
            }
        }
    }

    match &opts.tail {
        Tail::Unknown => last
            .map(|disk| finish(disk, false, crossed))
            .ok_or_else(|| Error::Argument("window holds no midgap beyond t".into())),
        Tail::Periodic(cells) => {
            if measure.is_empty() {
                return Err(Error::Argument("periodic closure needs at least one atom".into()));
            }
            let fund = match dir {
                Direction::Right => walk.peek(0.0),
                Direction::Left => {
                    let first = cells
                        .first()
                        .ok_or_else(|| Error::Argument("empty periodic tail".into()))?;
                    walk.peek(first.length)
                }
            };
            let mono = monodromy(cells, z)?;
            let ratio = floquet_ratio(&mono, dir == Direction::Right)?;
            let (un, ud) = fund.matrix.columns();
            let den = ud.du - ratio * ud.u;
            if den.norm() == 0.0 {
                return Err(Error::Degenerate("periodic closure is tangential".into()));
            }
            let m = -(un.du - ratio * un.u) / den;
            Ok(MValue {
                value: m * sign,
                error_bound: 0.0,
                truncation: walk.cursor(),
                converged: true,
                closure: Closure::PeriodicTail,
                atoms_used: crossed,
            })
        }
        Tail::Free => {
            let mut done = 0.0;
            let mut len = gamma;
            loop {
                let b = walk.cursor() + sign * (len - done);
                if (b - t) * sign > reach {
                    return last
                        .map(|disk| finish(disk, false, crossed))
                        .ok_or_else(|| Error::Argument("truncation limit is closer than the first evaluation point".into()));
                }
                walk.advance_free(len - done);
                done = len;
                let disk = disk_from(&walk.peek(0.0), walk.cursor(), dir)?;
                last = Some(disk);
                if disk.radius < opts.tol {
                    return Ok(finish(disk, true, crossed));
                }
                len *= 2.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{weight_from_branching, Atom};
    use crate::transfer::{free_propagator, TransferMatrix};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn isqrt(z: C64) -> C64 {
        c(0.0, 1.0) * z.sqrt()
    }

    /// atoms at k + 0.5 so integers are midgaps
    fn half_integer_measure(n: usize) -> AtomicMeasure {
        let ws = [3.0, 5.828, 2.0, 4.0];
        AtomicMeasure::new((0..n).map(|k| Atom::new(k as f64 + 0.5, ws[k % 4])).collect()).unwrap()
    }

    fn z_grid() -> Vec<C64> {
        let mut g = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                g.push(c(0.5 + 4.5 * i as f64 / 4.0, 0.1 + 1.9 * j as f64 / 4.0));
            }
        }
        g
    }

    #[test]
    fn free_disk_shrinks_to_isqrt() {
        let target = c(-0.5f64.sqrt(), 0.5f64.sqrt());
        let free = AtomicMeasure::free();
        let mut prev = f64::INFINITY;
        for b in [1.0, 4.0, 16.0] {
            let d = weyl_disk(&free, 0.0, b, c(0.0, 1.0)).unwrap();
            assert!((d.center - target).norm() <= d.radius + 1e-12);
            assert!(d.radius < prev);
            prev = d.radius;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn radii_decrease_and_nest() {
        let m = half_integer_measure(40);
        let z = c(0.0, 1.0);
        let disks: Vec<WeylDisk> = [1.0, 5.0, 25.0].iter().map(|&b| weyl_disk(&m, 0.0, b, z).unwrap()).collect();
        assert!(disks[0].radius > disks[1].radius && disks[1].radius > disks[2].radius);
        assert!(disks[0].contains(&disks[1], 1e-10));
        assert!(disks[1].contains(&disks[2], 1e-10));
        assert!(disks[2].center.im > 0.0);
    }

    #[test]
    fn disk_errors() {
        let m = half_integer_measure(4);
        assert!(matches!(weyl_disk(&m, 0.0, 1.5, c(0.0, 1.0)), Err(Error::AtomEndpoint { .. })));
        assert!(weyl_disk(&m, 0.0, 1.0, c(1.0, 0.0)).is_err());
        assert!(weyl_disk(&m, 1.0, 0.2, c(0.0, 1.0)).is_err());
    }

    #[test]
    fn robin_points_lie_on_circle() {
        for m in [AtomicMeasure::free(), half_integer_measure(10)] {
            let z = c(0.0, 1.0);
            let disk = weyl_disk(&m, 0.0, 3.0, z).unwrap();
            let p = robin_m_point(&m, 0.0, 3.0, z, PI / 3.0).unwrap();
            assert!(((p - disk.center).norm() - disk.radius).abs() <= 1e-9 * disk.radius);
            let q = robin_m_point(&m, 0.0, 3.0, z, 1.2).unwrap();
            assert!((p - q).norm() > 1e-6 * disk.radius);
        }
    }

    #[test]
    fn neumann_truncation_point() {
        let m = half_integer_measure(10);
        let z = c(2.0, 0.5);
        let p = robin_m_point(&m, 0.0, 3.0, z, PI / 2.0).unwrap();
        let (un, ud) = crate::transfer::fundamental_pair(&m, 0.0, 3.0, z).unwrap();
        assert!((p - (-un.du / ud.du)).norm() < 1e-12 * p.norm());
    }

    #[test]
    fn free_m_plus_is_isqrt() {
        let z = c(0.0, 1.0);
        let v = m_plus(&AtomicMeasure::free(), 0.0, z, &MOptions::default()).unwrap();
        assert!(v.converged && v.error_bound < 1e-8);
        assert!((v.value - isqrt(z)).norm() < 1e-8);
    }

    #[test]
    fn free_m_plus_near_real_axis() {
        let z = c(1.0, 1e-3);
        let opts = MOptions { b_limit: Some(1e6), ..MOptions::default() };
        let v = m_plus(&AtomicMeasure::free(), 0.0, z, &opts).unwrap();
        assert!(v.converged);
        assert!((v.value.im - 1.0).abs() < 1e-3);
        assert!((v.value - isqrt(z)).norm() <= v.error_bound + 1e-10);
        // with the default limit the disk still encloses the answer
        let short = m_plus(&AtomicMeasure::free(), 0.0, z, &MOptions::default()).unwrap();
        assert!((short.value - isqrt(z)).norm() <= short.error_bound + 1e-10);
    }

    #[test]
    fn m_minus_free_and_herglotz() {
        let z = c(0.7, 0.4);
        let v = m_minus(&AtomicMeasure::free(), 0.0, z, &MOptions::default()).unwrap();
        assert!((v.value - isqrt(z)).norm() < 1e-8);
        let m = half_integer_measure(300).shift(150.0);
        for z in z_grid() {
            let v = m_minus(&m, 0.0, z, &MOptions::default()).unwrap();
            assert!(v.value.im > -v.error_bound, "{z}: {v:?}");
        }
    }

    /// m_+ of the mirror image x -> -x. Mirroring turns the jump
    /// diag(sqrt b, 1/sqrt b) into diag(1/sqrt b, sqrt b), so the oracle
    /// applies that matrix directly with the plain propagator product.
    fn mirrored_m_plus(atoms: &[(f64, f64)], t: f64, b: f64, z: C64) -> C64 {
        let mut mirrored: Vec<(f64, f64)> = atoms.iter().map(|&(p, s)| (-p, s)).collect();
        mirrored.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let (t, b) = (-t, -b);
        let mut m = TransferMatrix::identity();
        let mut x = t;
        for &(p, s) in mirrored.iter().filter(|a| a.0 > t && a.0 < b) {
            m = free_propagator(z, p - x).unwrap() * m;
            let j = TransferMatrix::new(c(1.0 / s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0));
            m = j * m;
            x = p;
        }
        m = free_propagator(z, b - x).unwrap() * m;
        let (un, ud) = m.columns();
        -wronskian(un, ud.conj()) / wronskian(ud, ud.conj())
    }

    #[test]
    fn m_minus_matches_mirrored_oracle() {
        let atoms = [(-0.8, 2.0f64), (-2.1, 4.0), (-2.9, 9.0)];
        let measure = AtomicMeasure::new(
            atoms
                .iter()
                .rev()
                .map(|&(p, b)| Atom::new(p, weight_from_branching(b).unwrap()))
                .collect(),
        )
        .unwrap();
        let with_sqrt: Vec<(f64, f64)> = atoms.iter().map(|&(p, b)| (p, b.sqrt())).collect();
        let z = c(0.0, 1.0);
        let got = m_minus(&measure, 0.0, z, &MOptions::default()).unwrap();
        let oracle = mirrored_m_plus(&with_sqrt, 0.0, -40.0, z);
        assert!((got.value - oracle).norm() < 1e-8, "{} vs {}", got.value, oracle);
        // and the plain mirror (same weights) is a different operator
        let plain = AtomicMeasure::new(
            atoms.iter().map(|&(p, b)| Atom::new(-p, weight_from_branching(b).unwrap())).collect(),
        )
        .unwrap();
        let naive = m_plus(&plain, 0.0, z, &MOptions::default()).unwrap();
        assert!((naive.value - got.value).norm() > 1e-3);
    }

    #[test]
    fn nesting_on_grid() {
        let m = half_integer_measure(60);
        for z in z_grid() {
            let disks = weyl_disks(&m, 0.0, z, 80).unwrap();
            for w in disks.windows(2) {
                assert!(w[0].contains(&w[1], 1e-8), "{z}: {:?} then {:?}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn disks_stay_finite_under_strong_growth() {
        let m = AtomicMeasure::new((0..200).map(|k| Atom::new(k as f64 + 0.5, 1.1)).collect()).unwrap();
        let disks = weyl_disks(&m, 0.0, c(4.0, 2.0), 300).unwrap();
        assert!(disks.iter().all(|d| d.center.re.is_finite() && d.center.im.is_finite()));
        let last = disks.last().unwrap();
        assert!(disks.len() < 200 && last.radius <= DISK_RESOLUTION * last.center.norm());
        let deep = weyl_disk(&m, 0.0, 180.0, c(4.0, 2.0)).unwrap();
        assert!((deep.center - last.center).norm() < 1e-8 && deep.radius < 1e-100);
    }

    #[test]
    fn limit_point_radius() {
        let m = half_integer_measure(200);
        let disks = weyl_disks(&m, 0.0, c(0.0, 1.0), 199).unwrap();
        assert!(disks.windows(2).all(|w| w[1].radius <= w[0].radius));
        assert!(disks.last().unwrap().radius < 1e-6);
    }

    #[test]
    fn enclosure_survives_longer_truncation() {
        let m = half_integer_measure(5000);
        for z in [c(1.0, 0.1), c(3.0, 0.2), c(0.5, 0.5)] {
            let short = m_plus(&m, 0.0, z, &MOptions { tol: 1e-12, b_limit: Some(6.0), tail: Tail::Free }).unwrap();
            assert!(!short.converged);
            let long = m_plus(&m, 0.0, z, &MOptions { tol: 1e-12, b_limit: Some(12.0), tail: Tail::Free }).unwrap();
            assert!((long.value - short.value).norm() <= short.error_bound * (1.0 + 1e-8));
        }
    }

    #[test]
    fn vague_limit_continuity() {
        // measures that agree with the limit on growing windows
        let limit = half_integer_measure(4000);
        for z in z_grid() {
            let target = m_plus(&limit, 0.0, z, &MOptions::with_tol(1e-10)).unwrap();
            let mut errs = Vec::new();
            for r in [20usize, 200, 2000] {
                let mut atoms = limit.atoms()[..r].to_vec();
                atoms.extend(limit.atoms()[r..].iter().map(|a| Atom::new(a.position + 0.25, 9.0)));
                let mn = AtomicMeasure::new(atoms).unwrap();
                let v = m_plus(&mn, 0.0, z, &MOptions::with_tol(1e-10)).unwrap();
                errs.push((v.value - target.value).norm());
            }
            assert!(errs[2] < 1e-6, "{z}: {errs:?}");
            assert!(errs[2] <= errs[0] + 1e-12);
        }
    }

    #[test]
    fn unknown_tail_stops_at_window() {
        let m = half_integer_measure(8);
        let opts = MOptions { tol: 1e-30, b_limit: None, tail: Tail::Unknown };
        let v = m_plus(&m, 0.0, c(1.0, 0.1), &opts).unwrap();
        assert!(!v.converged);
        assert_eq!(v.truncation, 7.0);
        assert!(m_plus(&half_integer_measure(1), 0.0, c(1.0, 0.1), &opts).is_err());
    }

    #[test]
    fn argument_errors() {
        let m = half_integer_measure(8);
        assert!(m_plus(&m, 0.5, c(1.0, 1.0), &MOptions::default()).is_err());
        assert!(m_plus(&m, 0.0, c(1.0, -1.0), &MOptions::default()).is_err());
        assert!(m_plus(&m, 0.0, c(1.0, 1.0), &MOptions::with_tol(0.0)).is_err());
    }
}
