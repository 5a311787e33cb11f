use std::ops::{Bound, RangeBounds};

use serde::{Deserialize, Serialize};

use super::geometry::{Edge, TreeGeometry};
use crate::error::{Error, Result};

/// Weight `(sqrt(b) + 1) / (sqrt(b) - 1)` attached to a vertex of branching `b`.
pub fn weight_from_branching(b: f64) -> Result<f64> {
    if !(b > 1.0) || !b.is_finite() {
        return Err(Error::Argument(format!("branching {b} must be a finite number > 1")));
    }
    let s = b.sqrt();
    Ok((s + 1.0) / (s - 1.0))
}

/// Inverse of [`weight_from_branching`]: `((beta + 1) / (beta - 1))^2`.
pub fn branching_from_weight(beta: f64) -> Result<f64> {
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::Argument(format!("weight {beta} must be a finite number > 1")));
    }
    let s = (beta + 1.0) / (beta - 1.0);
    Ok(s * s)
}

/// `sqrt(b)` recovered from a weight without going through `b`.
#[inline]
pub(crate) fn jump_factor(weight: f64) -> f64 {
    (weight + 1.0) / (weight - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: f64,
    pub weight: f64,
}

impl Atom {
    pub fn new(position: f64, weight: f64) -> Self {
        Self { position, weight }
    }
}

/// A finite atomic measure `sum_n beta_n delta_{t_n}` with separated atoms.
///
/// Besides the atoms the measure keeps the spacing between consecutive atoms
/// as it was generated. Measures built from a geometry therefore reproduce the
/// edge lengths exactly even far from the origin, where differences of
/// accumulated positions would carry rounding noise.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
    spacings: Vec<f64>,
    separation: f64,
    loc_bound: f64,
}

impl AtomicMeasure {
    /// The zero measure (free halfline or line).
    pub fn free() -> Self {
        Self { atoms: Vec::new(), spacings: Vec::new(), separation: 1.0, loc_bound: 0.0 }
    }

    /// Build a measure from atoms in increasing order.
    ///
    /// The separation is the smallest gap, or 1 when there are fewer than two
    /// atoms.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            if !a.position.is_finite() {
                return Err(Error::Measure(format!("atom {i} has non-finite position")));
            }
            if !(a.weight > 1.0) || !a.weight.is_finite() {
                return Err(Error::Measure(format!("atom {i} has weight {} (must exceed 1)", a.weight)));
            }
        }
        let spacings: Vec<f64> = atoms.windows(2).map(|w| w[1].position - w[0].position).collect();
        if let Some(i) = spacings.iter().position(|&g| !(g > 0.0)) {
            return Err(Error::Measure(format!("atom positions not strictly increasing at index {}", i + 1)));
        }
        let separation = spacings.iter().copied().fold(f64::INFINITY, f64::min);
        let separation = if separation.is_finite() { separation } else { 1.0 };
        Ok(Self::assemble(atoms, spacings, separation))
    }

    /// Build from the first atom position, the spacings, and one weight per atom.
    pub fn from_spacings(first: f64, spacings: &[f64], weights: &[f64]) -> Result<Self> {
        if weights.len() != spacings.len() + 1 && !(weights.is_empty() && spacings.is_empty()) {
            return Err(Error::Measure("need exactly one more weight than spacings".into()));
        }
        if let Some(g) = spacings.iter().find(|&&g| !(g > 0.0) || !g.is_finite()) {
            return Err(Error::Measure(format!("spacing {g} is not positive")));
        }
        if let Some(w) = weights.iter().find(|&&w| !(w > 1.0) || !w.is_finite()) {
            return Err(Error::Measure(format!("weight {w} must exceed 1")));
        }
        let mut sum = CompensatedSum::new(first);
        let mut atoms = Vec::with_capacity(weights.len());
        for (i, &w) in weights.iter().enumerate() {
            if i > 0 {
                sum.add(spacings[i - 1]);
            }
            atoms.push(Atom::new(sum.value(), w));
        }
        let separation = spacings.iter().copied().fold(f64::INFINITY, f64::min);
        let separation = if separation.is_finite() { separation } else { 1.0 };
        Ok(Self::assemble(atoms, spacings.to_vec(), separation))
    }

    /// A window of the periodic measure whose cells are `period`, with
    /// `cells` full periods starting at `start` (the first atom sits at
    /// `start + period[0].length`).
    pub fn periodic(period: &[Edge], start: f64, cells: usize) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Argument("empty period".into()));
        }
        let n = period.len() * cells;
        let mut spacings = Vec::with_capacity(n.saturating_sub(1));
        let mut weights = Vec::with_capacity(n);
        for (i, e) in period.iter().cycle().take(n).enumerate() {
            if i > 0 {
                spacings.push(e.length);
            }
            weights.push(super::weight_from_branching(e.branching)?);
        }
        if n == 0 {
            return Ok(Self::free());
        }
        let mut m = Self::from_spacings(start + period[0].length, &spacings, &weights)?;
        let gamma = period.iter().map(|e| e.length).fold(f64::INFINITY, f64::min);
        m.separation = gamma;
        Ok(m)
    }

    fn assemble(atoms: Vec<Atom>, spacings: Vec<f64>, separation: f64) -> Self {
        let mut m = Self { atoms, spacings, separation, loc_bound: 0.0 };
        m.loc_bound = m.norm_loc();
        m
    }

    /// Replace the recorded separation by a smaller lower bound.
    pub fn with_separation(mut self, gamma: f64) -> Result<Self> {
        let min_gap = self.spacings.iter().copied().fold(f64::INFINITY, f64::min);
        if !(gamma > 0.0) || gamma > min_gap {
            return Err(Error::Measure(format!("separation {gamma} must lie in (0, {min_gap}]")));
        }
        self.separation = gamma;
        Ok(self)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Lower bound `gamma` on the gaps between atoms.
    pub fn separation(&self) -> f64 {
        self.separation
    }

    /// Cached upper bound for [`norm_loc`](Self::norm_loc).
    pub fn loc_bound(&self) -> f64 {
        self.loc_bound
    }

    /// Spacing between atom `i` and atom `i + 1`.
    #[inline]
    pub fn spacing(&self, i: usize) -> f64 {
        self.spacings[i]
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn first_position(&self) -> Option<f64> {
        self.atoms.first().map(|a| a.position)
    }

    pub fn last_position(&self) -> Option<f64> {
        self.atoms.last().map(|a| a.position)
    }

    /// Index of the first atom with position `>= x`.
    #[inline]
    pub fn lower_index(&self, x: f64) -> usize {
        self.atoms.partition_point(|a| a.position < x)
    }

    /// Index of the first atom with position `> x`.
    #[inline]
    pub fn upper_index(&self, x: f64) -> usize {
        self.atoms.partition_point(|a| a.position <= x)
    }

    /// Whether `x` lies within `1e-12 * max(1, |x|)` of an atom.
    pub fn is_near_atom(&self, x: f64) -> bool {
        let tol = 1e-12 * x.abs().max(1.0);
        let i = self.lower_index(x - tol);
        self.atoms.get(i).is_some_and(|a| a.position <= x + tol)
    }

    /// Membership in the halfline class: every atom at position `>= gamma`.
    pub fn is_halfline(&self) -> bool {
        self.first_position().is_none_or(|p| p >= self.separation)
    }

    /// `sup_x mu([x, x + 1])` over closed unit windows.
    ///
    /// The supremum is attained at a window whose left end is an atom, so a
    /// two-pointer sweep over atom-anchored windows is exact.
    pub fn norm_loc(&self) -> f64 {
        let mut best = 0.0f64;
        let mut sum = 0.0;
        let mut hi = 0;
        for (lo, a) in self.atoms.iter().enumerate() {
            while hi < self.atoms.len() && self.atoms[hi].position <= a.position + 1.0 {
                sum += self.atoms[hi].weight;
                hi += 1;
            }
            best = best.max(sum);
            sum -= self.atoms[lo].weight;
        }
        best
    }

    /// The translate `S_x mu = mu(. + x)`: every atom moves from `t` to `t - x`.
    pub fn shift(&self, x: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|a| Atom::new(a.position - x, a.weight)).collect(),
            spacings: self.spacings.clone(),
            separation: self.separation,
            loc_bound: self.loc_bound,
        }
    }

    /// Restriction to a set of positions; separation and loc bound carry over.
    pub fn restrict<R: RangeBounds<f64>>(&self, range: R) -> Self {
        let lo = match range.start_bound() {
            Bound::Included(&x) => self.lower_index(x),
            Bound::Excluded(&x) => self.upper_index(x),
            Bound::Unbounded => 0,
        };
        let hi = match range.end_bound() {
            Bound::Included(&x) => self.upper_index(x),
            Bound::Excluded(&x) => self.lower_index(x),
            Bound::Unbounded => self.atoms.len(),
        };
        let hi = hi.max(lo);
        Self {
            atoms: self.atoms[lo..hi].to_vec(),
            spacings: if hi > lo { self.spacings[lo..hi - 1].to_vec() } else { Vec::new() },
            separation: self.separation,
            loc_bound: self.loc_bound,
        }
    }
}

/// Build the measure of the first `count` vertices of `geometry`.
pub fn build_measure(geometry: &TreeGeometry, count: usize) -> Result<AtomicMeasure> {
    if count == 0 {
        return Err(Error::Argument("atom count must be at least 1".into()));
    }
    let edges = geometry.edges(count)?;
    let spacings: Vec<f64> = edges[1..].iter().map(|e| e.length).collect();
    let weights = edges
        .iter()
        .map(|e| weight_from_branching(e.branching))
        .collect::<Result<Vec<_>>>()?;
    let mut m = AtomicMeasure::from_spacings(edges[0].length, &spacings, &weights)?;
    m.separation = geometry.gamma();
    Ok(m)
}

/// Neumaier summation for atom positions.
#[derive(Debug, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn new(x: f64) -> Self {
        Self { sum: x, carry: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}
