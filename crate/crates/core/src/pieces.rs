//! Pieces of measures, concatenation, decomposition properties, and eventual
//! periodicity of symbol sequences.
//!
//! A piece is a measure supported on a half-open interval `[start,
//! start + length)`. Atom positions are compared with an absolute tolerance
//! because they come out of floating-point sums; weights come from a finite
//! alphabet and are compared exactly.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Atom, AtomicMeasure};

/// Absolute tolerance for atom positions.
pub const POSITION_TOL: f64 = 1e-9;

/// Default node budget of the tiling search.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    #[serde(default)]
    pub start: f64,
    pub length: f64,
    /// `(offset from start, weight)` with offsets in `[0, length)`.
    pub atoms: Vec<(f64, f64)>,
}

impl Piece {
    pub fn new(start: f64, length: f64, mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() || !start.is_finite() {
            return Err(Error::Argument(format!("piece length {length} must be positive and finite")));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(o, w) in &atoms {
            if !(0.0..length).contains(&o) {
                return Err(Error::Argument(format!("atom offset {o} outside [0, {length})")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Argument(format!("atom weight {w} must be positive")));
            }
        }
        Ok(Self { start, length, atoms })
    }

    /// `1_{[x, x + length)} mu`, translated to offsets. The window is shifted
    /// left by [`POSITION_TOL`] so rounding cannot move an atom across it.
    pub fn extract(measure: &AtomicMeasure, x: f64, length: f64) -> Result<Self> {
        let atoms = window(measure, x, length).iter().map(|a| ((a.position - x).max(0.0), a.weight)).collect();
        Self::new(x, length, atoms)
    }

    /// The same piece with `start = 0`.
    pub fn normalized(&self) -> Self {
        Self { start: 0.0, ..self.clone() }
    }

    pub fn to_measure(&self) -> Result<AtomicMeasure> {
        AtomicMeasure::new(self.atoms.iter().map(|&(o, w)| Atom::new(self.start + o, w)).collect())
    }

    /// Equality up to translation of the interval.
    pub fn same_shape(&self, other: &Piece) -> bool {
        self.length == other.length && same_atoms(&self.atoms, &other.atoms)
    }
}

fn window(measure: &AtomicMeasure, x: f64, length: f64) -> &[Atom] {
    let lo = measure.lower_index(x - POSITION_TOL);
    let hi = measure.lower_index(x + length - POSITION_TOL);
    &measure.atoms()[lo..hi.max(lo)]
}

fn same_atoms(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(p, q)| (p.0 - q.0).abs() <= POSITION_TOL && p.1 == q.1)
}

/// `p_1 | p_2 | ...`: the interval starts at `p_1.start` and piece `j` is
/// moved to start where piece `j - 1` ends.
pub fn concatenate(pieces: &[Piece]) -> Result<Piece> {
    let first = pieces.first().ok_or(Error::EmptyPieces)?;
    let mut atoms = Vec::with_capacity(pieces.iter().map(|p| p.atoms.len()).sum());
    let mut offset = 0.0;
    for p in pieces {
        atoms.extend(p.atoms.iter().map(|&(o, w)| (offset + o, w)));
        offset += p.length;
    }
    Ok(Piece { start: first.start, length: offset, atoms })
}

/// Whether `1_{x + I} mu` is a translate of the piece.
pub fn occurs(piece: &Piece, measure: &AtomicMeasure, x: f64) -> bool {
    let w = window(measure, x, piece.length);
    w.len() == piece.atoms.len()
        && w.iter()
            .zip(&piece.atoms)
            .all(|(a, &(o, wt))| (a.position - x - o).abs() <= POSITION_TOL && a.weight == wt)
}

/// Finite set of local pieces, all starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Piece>", into = "Vec<Piece>")]
pub struct PieceAlphabet {
    pieces: Vec<Piece>,
}

impl TryFrom<Vec<Piece>> for PieceAlphabet {
    type Error = Error;
    fn try_from(pieces: Vec<Piece>) -> Result<Self> {
        Self::new(pieces)
    }
}

impl From<PieceAlphabet> for Vec<Piece> {
    fn from(a: PieceAlphabet) -> Self {
        a.pieces
    }
}

impl PieceAlphabet {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::EmptyPieces);
        }
        let pieces: Vec<Piece> = pieces
            .into_iter()
            .map(|p| Piece::new(0.0, p.length, p.atoms))
            .collect::<Result<_>>()?;
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn min_length(&self) -> f64 {
        self.pieces.iter().map(|p| p.length).fold(f64::INFINITY, f64::min)
    }

    pub fn max_length(&self) -> f64 {
        self.pieces.iter().map(|p| p.length).fold(0.0, f64::max)
    }

    /// Whether every piece is one atom at offset 0.
    pub fn is_single_atom(&self) -> bool {
        self.pieces.iter().all(|p| p.atoms.len() == 1 && p.atoms[0].0 == 0.0)
    }
}

/// A tiling of `[base, end)` by alphabet pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub base: f64,
    pub indices: Vec<usize>,
    /// Breakpoints `x_0 = base, x_1, ...`, one more than `indices`.
    pub grid: Vec<f64>,
}

impl Decomposition {
    pub fn end(&self) -> f64 {
        *self.grid.last().unwrap_or(&self.base)
    }

    /// Concatenate the referenced pieces starting at `base`.
    pub fn reconstruct(&self, alphabet: &PieceAlphabet) -> Result<Piece> {
        let pieces: Vec<Piece> = self.indices.iter().map(|&i| alphabet.pieces[i].clone()).collect();
        let mut p = concatenate(&pieces)?;
        p.start = self.base;
        Ok(p)
    }
}

/// Decompose the atoms of a measure window into single-atom pieces: atom
/// `i` with the gap to atom `i + 1`. The last atom only closes the window.
pub fn single_atom_decomposition(measure: &AtomicMeasure) -> Result<(PieceAlphabet, Decomposition)> {
    if measure.len() < 2 {
        return Err(Error::Argument("need at least two atoms".into()));
    }
    let mut pieces: Vec<Piece> = Vec::new();
    let mut indices = Vec::with_capacity(measure.len() - 1);
    for (i, a) in measure.atoms()[..measure.len() - 1].iter().enumerate() {
        let p = Piece::new(0.0, measure.spacing(i), vec![(0.0, a.weight)])?;
        let k = match pieces.iter().position(|q| q.length == p.length && q.atoms == p.atoms) {
            Some(k) => k,
            None => {
                pieces.push(p);
                pieces.len() - 1
            }
        };
        indices.push(k);
    }
    let grid = measure.atoms().iter().map(|a| a.position).collect();
    let base = measure.atoms()[0].position;
    Ok((PieceAlphabet::new(pieces)?, Decomposition { base, indices, grid }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdpOptions {
    /// Right end of the tiled window; defaults to the last atom.
    pub end: Option<f64>,
    pub budget: usize,
}

impl Default for FdpOptions {
    fn default() -> Self {
        Self { end: None, budget: DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum FdpOutcome {
    Tiled(Decomposition),
    /// No tiling exists; `position` is the farthest point any partial tiling
    /// reached.
    Failed { position: f64 },
}

/// Tile `[x0, end)` left to right by alphabet pieces that occur in
/// `measure`, trying pieces in index order with backtracking. The first
/// tiling found is the lexicographically smallest index sequence.
pub fn check_fdp(measure: &AtomicMeasure, alphabet: &PieceAlphabet, x0: f64, opts: &FdpOptions) -> Result<FdpOutcome> {
    let end = match opts.end {
        Some(e) => e,
        None => measure
            .last_position()
            .ok_or_else(|| Error::Argument("window holds no atoms".into()))?,
    };
    if !(end > x0) {
        return Err(Error::Argument(format!("window end {end} must exceed base point {x0}")));
    }
    // stack of (position, next alphabet index to try)
    let mut grid = vec![x0];
    let mut indices: Vec<usize> = Vec::new();
    let mut next_try = vec![0usize];
    let mut nodes = 0usize;
    let mut farthest = x0;
    loop {
        let x = *grid.last().unwrap_or(&x0);
        if (x - end).abs() <= POSITION_TOL {
            return Ok(FdpOutcome::Tiled(Decomposition { base: x0, indices, grid }));
        }
        let depth = next_try.len() - 1;
        let start = next_try[depth];
        let found = (start..alphabet.len()).find(|&i| {
            let p = &alphabet.pieces[i];
            x + p.length <= end + POSITION_TOL && occurs(p, measure, x)
        });
        match found {
            Some(i) => {
                nodes += 1;
                if nodes > opts.budget {
                    return Err(Error::BudgetExceeded { budget: opts.budget });
                }
                next_try[depth] = i + 1;
                indices.push(i);
                let nx = x + alphabet.pieces[i].length;
                farthest = farthest.max(nx);
                grid.push(nx);
                next_try.push(0);
            }
            None => {
                if indices.is_empty() {
                    return Ok(FdpOutcome::Failed { position: farthest });
                }
                next_try.pop();
                grid.pop();
                indices.pop();
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SfdpWitness {
    /// Breakpoint indices into the decomposition grid.
    pub first: usize,
    pub second: usize,
    pub first_piece: usize,
    pub second_piece: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfdpReport {
    pub holds: bool,
    pub witness: Option<SfdpWitness>,
    /// Number of breakpoints with context of length `ell` on both sides.
    pub positions_checked: usize,
    /// The verdict only covers pairs inside this window.
    pub verified_window: (f64, f64),
}

/// Check the simple decomposition property with one constant `ell` for the
/// common first part and the compared prefix, over all breakpoint pairs of
/// the finite decomposition.
pub fn check_sfdp(
    decomposition: &Decomposition,
    alphabet: &PieceAlphabet,
    ell: f64,
    measure: &AtomicMeasure,
) -> Result<SfdpReport> {
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(Error::Argument(format!("ell = {ell} must be positive")));
    }
    if decomposition.indices.iter().any(|&i| i >= alphabet.len()) {
        return Err(Error::Argument("decomposition refers to a missing piece".into()));
    }
    let grid = &decomposition.grid;
    let end = decomposition.end();
    // representatives: preceding block -> [(prefix piece, next index, breakpoint)]
    let mut seen: HashMap<Vec<usize>, Vec<(Piece, usize, usize)>> = HashMap::new();
    let mut checked = 0usize;
    for k in 1..decomposition.indices.len() {
        let x = grid[k];
        if x - decomposition.base < ell - POSITION_TOL || end - x < ell - POSITION_TOL {
            continue;
        }
        // shortest block ending at breakpoint k with length >= ell
        let mut j = k;
        while j > 0 && grid[k] - grid[j] < ell - POSITION_TOL {
            j -= 1;
        }
        let block = decomposition.indices[j..k].to_vec();
        let prefix = Piece::extract(measure, x, ell)?;
        let next = decomposition.indices[k];
        checked += 1;
        let reps = seen.entry(block).or_default();
        match reps.iter().find(|(p, _, _)| p.same_shape(&prefix)) {
            Some(&(_, other, at)) if other != next => {
                return Ok(SfdpReport {
                    holds: false,
                    witness: Some(SfdpWitness { first: at, second: k, first_piece: other, second_piece: next }),
                    positions_checked: checked,
                    verified_window: (decomposition.base, end),
                });
            }
            Some(_) => {}
            None => reps.push((prefix, next, k)),
        }
    }
    Ok(SfdpReport { holds: true, witness: None, positions_checked: checked, verified_window: (decomposition.base, end) })
}

/// Generator-level certificate for single-atom alphabets: the `ell`-prefix
/// of any continuation shows the atom weight and, when the gap is shorter
/// than `ell`, the gap. The property therefore holds for every
/// decomposition over the alphabet iff those visible data determine the
/// piece. Returns `None` when the alphabet is not single-atom.
pub fn certify_sfdp_single_atom(alphabet: &PieceAlphabet, ell: f64) -> Result<Option<bool>> {
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(Error::Argument(format!("ell = {ell} must be positive")));
    }
    if !alphabet.is_single_atom() {
        return Ok(None);
    }
    let mut keys: Vec<(u64, Option<u64>)> = alphabet
        .pieces
        .iter()
        .map(|p| (p.atoms[0].1.to_bits(), (p.length < ell).then_some(p.length.to_bits())))
        .collect();
    let n = keys.len();
    keys.sort_unstable();
    keys.dedup();
    Ok(Some(keys.len() == n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicityCandidate {
    pub period: usize,
    /// Smallest preperiod that works with this period.
    pub preperiod: usize,
    /// Largest preperiod allowed by `p + 2q <= n`.
    pub max_preperiod: usize,
    pub verified_window: usize,
}

/// All `(p, q)` with `p + 2q <= n` and `s[i + q] == s[i]` for `p <= i < n - q`,
/// grouped by period: for period `q` they are exactly the `p` in
/// `preperiod ..= max_preperiod`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicityReport {
    pub length: usize,
    /// Sorted by period.
    pub candidates: Vec<PeriodicityCandidate>,
}

impl PeriodicityReport {
    /// Smallest period, with its smallest preperiod.
    pub fn minimal(&self) -> Option<(usize, usize)> {
        self.candidates.first().map(|c| (c.preperiod, c.period))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.candidates.iter().flat_map(|c| (c.preperiod..=c.max_preperiod).map(move |p| (p, c.period)))
    }

    pub fn is_periodic_on_window(&self) -> bool {
        !self.candidates.is_empty()
    }
}

/// `z[k]` = length of the longest common prefix of `s` and `s[k..]`.
fn z_function<T: PartialEq>(s: &[T]) -> Vec<usize> {
    let n = s.len();
    let mut z = vec![0; n];
    if n == 0 {
        return z;
    }
    z[0] = n;
    let (mut l, mut r) = (0, 0);
    for i in 1..n {
        if i < r {
            z[i] = (r - i).min(z[i - l]);
        }
        while i + z[i] < n && s[z[i]] == s[i + z[i]] {
            z[i] += 1;
        }
        if i + z[i] > r {
            l = i;
            r = i + z[i];
        }
    }
    z
}

/// Eventual periodicity of a finite symbol window; the answer says nothing
/// about the sequence beyond the window.
#[allow(clippy::needless_range_loop)]
pub fn detect_eventual_periodicity<T: PartialEq>(symbols: &[T]) -> PeriodicityReport {
    let n = symbols.len();
    let mut candidates = Vec::new();
    if n >= 2 {
        let reversed: Vec<&T> = symbols.iter().rev().collect();
        let z = z_function(&reversed);
        for q in 1..=n / 2 {
            // agreement s[i + q] == s[i] holds for the last z[q] indices i
            let preperiod = n - q - z[q].min(n - q);
            if preperiod + 2 * q <= n {
                candidates.push(PeriodicityCandidate { period: q, preperiod, max_preperiod: n - 2 * q, verified_window: n });
            }
        }
    }
    PeriodicityReport { length: n, candidates }
}
