use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One generation of a radial tree: the edge leading to a vertex and the
/// branching number of that vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub length: f64,
    pub branching: f64,
}

impl Edge {
    pub fn new(length: f64, branching: f64) -> Self {
        Self { length, branching }
    }

    fn check(&self, index: usize) -> Result<()> {
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::NonPositiveLength { index, value: self.length });
        }
        if !(self.branching > 1.0) || !self.branching.is_finite() {
            return Err(Error::BranchingTooSmall { index, value: self.branching });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryKind {
    Explicit,
    EventuallyPeriodic,
    Substitution,
}

/// Serialized geometry description, as read from a config file.
///
/// ```json
/// {"kind": "eventually-periodic", "edges": [{"length": 1.0, "branching": 2}],
///  "preperiod": 0, "period": 1}
/// ```
///
/// Substitution geometries name their symbols in `alphabet` (single
/// characters), map each symbol to its image word in `rules`, start the
/// expansion at `start`, and optionally fix the number of substitution steps
/// with `depth`. Without `depth` the fixed point of the substitution that
/// begins with `start` is expanded as far as needed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub kind: GeometryKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preperiod: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<BTreeMap<String, Edge>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rules: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
}

impl GeometrySpec {
    pub fn explicit(edges: Vec<Edge>) -> Self {
        Self {
            kind: GeometryKind::Explicit,
            edges,
            preperiod: None,
            period: None,
            alphabet: None,
            rules: None,
            start: None,
            depth: None,
        }
    }

    pub fn eventually_periodic(preperiod: Vec<Edge>, period: Vec<Edge>) -> Self {
        let (p, q) = (preperiod.len(), period.len());
        let mut edges = preperiod;
        edges.extend(period);
        Self {
            kind: GeometryKind::EventuallyPeriodic,
            edges,
            preperiod: Some(p),
            period: Some(q),
            ..Self::explicit(Vec::new())
        }
    }

    pub fn substitution(
        alphabet: BTreeMap<char, Edge>,
        rules: BTreeMap<char, String>,
        start: char,
        depth: Option<u32>,
    ) -> Self {
        Self {
            kind: GeometryKind::Substitution,
            alphabet: Some(alphabet.into_iter().map(|(c, e)| (c.to_string(), e)).collect()),
            rules: Some(rules.into_iter().map(|(c, w)| (c.to_string(), w)).collect()),
            start: Some(start.to_string()),
            depth,
            ..Self::explicit(Vec::new())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Generator {
    Explicit(Vec<Edge>),
    EventuallyPeriodic {
        preperiod: Vec<Edge>,
        period: Vec<Edge>,
    },
    Substitution {
        symbols: Vec<Edge>,
        rules: Vec<Vec<usize>>,
        start: usize,
        depth: Option<u32>,
    },
}

/// A validated radial tree profile `(t_n, b_n)`.
///
/// Edge `n` (1-based) has length `t_n - t_{n-1}` and ends in a vertex of
/// branching `b_n`; the root sits at `t_0 = 0` with `b_0 = 1`. Generators are
/// expanded on demand, so eventually periodic and substitution geometries
/// describe infinite trees.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeGeometry {
    spec: GeometrySpec,
    generator: Generator,
    gamma: f64,
    min_branching: f64,
    integral: bool,
}

/// Largest number of substitution steps tried when no depth is given.
const MAX_SUBSTITUTION_STEPS: usize = 256;

/// Validate a raw geometry description.
pub fn validate_geometry(spec: &GeometrySpec) -> Result<TreeGeometry> {
    let generator = match spec.kind {
        GeometryKind::Explicit => {
            if spec.edges.is_empty() {
                return Err(Error::EmptyEdges);
            }
            Generator::Explicit(spec.edges.clone())
        }
        GeometryKind::EventuallyPeriodic => {
            let period = spec.period.unwrap_or(spec.edges.len().saturating_sub(spec.preperiod.unwrap_or(0)));
            let preperiod = spec.preperiod.unwrap_or(spec.edges.len().saturating_sub(period));
            if spec.edges.is_empty() {
                return Err(Error::EmptyEdges);
            }
            if period == 0 {
                return Err(Error::Generator("period must contain at least one edge".into()));
            }
            if preperiod + period != spec.edges.len() {
                return Err(Error::Generator(format!(
                    "preperiod ({preperiod}) + period ({period}) must equal the number of edges ({})",
                    spec.edges.len()
                )));
            }
            Generator::EventuallyPeriodic {
                preperiod: spec.edges[..preperiod].to_vec(),
                period: spec.edges[preperiod..].to_vec(),
            }
        }
        GeometryKind::Substitution => substitution_generator(spec)?,
    };

    let edges: Vec<&Edge> = match &generator {
        Generator::Explicit(e) => e.iter().collect(),
        Generator::EventuallyPeriodic { preperiod, period } => preperiod.iter().chain(period).collect(),
        Generator::Substitution { symbols, .. } => symbols.iter().collect(),
    };
    for (i, e) in edges.iter().enumerate() {
        e.check(i + 1)?;
    }
    let gamma = edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min);
    let min_branching = edges.iter().map(|e| e.branching).fold(f64::INFINITY, f64::min);
    let integral = edges.iter().all(|e| is_integer(e.branching));

    let mut spec = spec.clone();
    if spec.kind == GeometryKind::EventuallyPeriodic {
        if let Generator::EventuallyPeriodic { preperiod, period } = &generator {
            spec.preperiod = Some(preperiod.len());
            spec.period = Some(period.len());
        }
    }
    Ok(TreeGeometry { spec, generator, gamma, min_branching, integral })
}

fn substitution_generator(spec: &GeometrySpec) -> Result<Generator> {
    let alphabet = spec
        .alphabet
        .as_ref()
        .filter(|a| !a.is_empty())
        .ok_or_else(|| Error::Generator("substitution geometry needs a nonempty alphabet".into()))?;
    let rules = spec
        .rules
        .as_ref()
        .ok_or_else(|| Error::Generator("substitution geometry needs rules".into()))?;
    let keys: Vec<char> = alphabet
        .keys()
        .map(|k| single_char(k))
        .collect::<Result<_>>()?;
    let lookup = |c: char| {
        keys.iter()
            .position(|&k| k == c)
            .ok_or_else(|| Error::Generator(format!("symbol '{c}' is not in the alphabet")))
    };
    let mut images = vec![Vec::new(); keys.len()];
    for (sym, image) in rules {
        let i = lookup(single_char(sym)?)?;
        if image.is_empty() {
            return Err(Error::Generator(format!("rule for '{sym}' has an empty image")));
        }
        images[i] = image.chars().map(lookup).collect::<Result<_>>()?;
    }
    if let Some(i) = images.iter().position(Vec::is_empty) {
        return Err(Error::Generator(format!("no rule for symbol '{}'", keys[i])));
    }
    let start = lookup(single_char(
        spec.start
            .as_deref()
            .ok_or_else(|| Error::Generator("substitution geometry needs a start symbol".into()))?,
    )?)?;
    if spec.depth.is_none() && images[start][0] != start {
        return Err(Error::Generator(
            "the image of the start symbol does not begin with it; specify an expansion depth".into(),
        ));
    }
    Ok(Generator::Substitution {
        symbols: alphabet.values().copied().collect(),
        rules: images,
        start,
        depth: spec.depth,
    })
}

fn single_char(s: &str) -> Result<char> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(Error::Generator(format!("symbol '{s}' must be a single character"))),
    }
}

pub(crate) fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() <= 1e-12 * x.abs().max(1.0)
}

impl TreeGeometry {
    pub fn spec(&self) -> &GeometrySpec {
        &self.spec
    }

    pub fn kind(&self) -> GeometryKind {
        self.spec.kind
    }

    /// Lower bound `gamma` on the edge lengths.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn min_branching(&self) -> f64 {
        self.min_branching
    }

    /// Whether every branching number is an integer.
    pub fn is_integral(&self) -> bool {
        self.integral
    }

    /// Number of edges the geometry can produce, `None` when unbounded.
    pub fn max_edges(&self) -> Option<usize> {
        match &self.generator {
            Generator::Explicit(e) => Some(e.len()),
            Generator::EventuallyPeriodic { .. } => None,
            Generator::Substitution { depth: None, .. } => None,
            Generator::Substitution { rules, start, depth: Some(d), .. } => {
                let mut lens = vec![1usize; rules.len()];
                for _ in 0..*d {
                    lens = rules
                        .iter()
                        .map(|img| img.iter().fold(0usize, |acc, &s| acc.saturating_add(lens[s])))
                        .collect();
                }
                Some(lens[*start])
            }
        }
    }

    /// The repeating cells of an eventually periodic geometry.
    pub fn period(&self) -> Option<&[Edge]> {
        match &self.generator {
            Generator::EventuallyPeriodic { period, .. } => Some(period),
            _ => None,
        }
    }

    pub fn preperiod(&self) -> Option<&[Edge]> {
        match &self.generator {
            Generator::EventuallyPeriodic { preperiod, .. } => Some(preperiod),
            _ => None,
        }
    }

    /// Symbol indices of the first `count` edges.
    ///
    /// For substitution geometries these are alphabet indices; otherwise
    /// equal edges share an index, numbered in order of first appearance.
    pub fn symbols(&self, count: usize) -> Result<Vec<usize>> {
        match &self.generator {
            Generator::Substitution { rules, start, depth, .. } => expand_word(rules, *start, *depth, count),
            _ => {
                let edges = self.edges(count)?;
                let mut distinct: Vec<Edge> = Vec::new();
                Ok(edges
                    .iter()
                    .map(|e| match distinct.iter().position(|d| d == e) {
                        Some(i) => i,
                        None => {
                            distinct.push(*e);
                            distinct.len() - 1
                        }
                    })
                    .collect())
            }
        }
    }

    /// The first `count` edges, expanding generators as needed.
    pub fn edges(&self, count: usize) -> Result<Vec<Edge>> {
        match &self.generator {
            Generator::Explicit(e) => {
                if count > e.len() {
                    return Err(Error::Argument(format!(
                        "explicit geometry has {} edges, {count} requested",
                        e.len()
                    )));
                }
                Ok(e[..count].to_vec())
            }
            Generator::EventuallyPeriodic { preperiod, period } => Ok(preperiod
                .iter()
                .chain(period.iter().cycle())
                .take(count)
                .copied()
                .collect()),
            Generator::Substitution { symbols, rules, start, depth } => Ok(expand_word(rules, *start, *depth, count)?
                .into_iter()
                .map(|s| symbols[s])
                .collect()),
        }
    }
}

/// Prefix of length `count` of `sigma^depth(start)`, or of the fixed point
/// beginning with `start` when no depth is given.
fn expand_word(rules: &[Vec<usize>], start: usize, depth: Option<u32>, count: usize) -> Result<Vec<usize>> {
    let mut word = vec![start];
    let mut steps = 0usize;
    loop {
        match depth {
            Some(d) if steps == d as usize => break,
            None if word.len() >= count => break,
            None if steps >= MAX_SUBSTITUTION_STEPS => {
                return Err(Error::Generator(format!(
                    "substitution does not reach {count} symbols within {MAX_SUBSTITUTION_STEPS} steps"
                )))
            }
            _ => {}
        }
        let mut next = Vec::with_capacity(count.min(word.len().saturating_mul(4)));
        'outer: for &s in &word {
            for &t in &rules[s] {
                if next.len() == count {
                    break 'outer;
                }
                next.push(t);
            }
        }
        word = next;
        steps += 1;
    }
    if word.len() < count {
        return Err(Error::Argument(format!(
            "substitution word of depth {} has {} symbols, {count} requested",
            steps,
            word.len()
        )));
    }
    word.truncate(count);
    Ok(word)
}
