use std::str::FromStr;

use serde::Serialize;
use treespec::model::{build_measure, decompose_tree, AtomicMeasure, GeometryKind, Multiplicity, TreeGeometry};
use treespec::pieces::{
    certify_sfdp_single_atom, check_sfdp, detect_eventual_periodicity, single_atom_decomposition, PeriodicityCandidate,
    SfdpWitness,
};
use treespec::spectral::{
    default_reach, energy_grid, floquet_bands, reflectionless_defect, sigma_ac_estimate, tail_after, tree_spectrum_report,
    two_sided_periodic, SigmaOptions, SpectralReport, Thresholds, DEFAULT_LADDER,
};
use treespec::weyl::{m_plus, MOptions, Tail};
use treespec::Complex64;

use crate::config::{geometry, load_config, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{csv_string, fmt_f64, to_json, Envelope, Format, Sink, SCHEMA};
use crate::{Common, Params};

fn setup(common: &Common) -> CliResult<(RunConfig, Sink)> {
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let config = load_config(&common.config)?;
    Ok((config, Sink { format: common.format, path: common.output.clone() }))
}

fn pick<T: Clone>(flag: &Option<T>, config: &Option<T>, default: T) -> T {
    flag.clone().or_else(|| config.clone()).unwrap_or(default)
}

fn envelope<'a, T: Serialize>(command: &'a str, config: &RunConfig, result: &'a T) -> CliResult<String> {
    to_json(&Envelope { schema: SCHEMA, command, seed: config.seed, result })
}

/// Plain shortest round-trip rendering for CSV cells.
fn cell(v: f64) -> String {
    v.to_string()
}

fn default_window(g: &TreeGeometry) -> usize {
    match g.kind() {
        GeometryKind::EventuallyPeriodic => {
            let pre = g.preperiod().map_or(0, <[_]>::len);
            let q = g.period().map_or(1, <[_]>::len);
            (pre + 8 * q).max(16)
        }
        GeometryKind::Substitution => g.max_edges().map_or(1 << 16, |m| m.min(1 << 16)),
        GeometryKind::Explicit => g.max_edges().unwrap_or(1),
    }
}

fn window(g: &TreeGeometry, params: &Params, config: &RunConfig) -> CliResult<usize> {
    let w = pick(&params.window, &config.analysis.window, default_window(g));
    if w == 0 {
        return Err(CliError::Validation("window must hold at least one atom".into()));
    }
    Ok(w)
}

/// The halfline measure `A_0` with its continuation.
fn halfline(config: &RunConfig, params: &Params) -> CliResult<(AtomicMeasure, Tail)> {
    if let Some(spec) = &config.measure {
        return Ok((spec.build()?, Tail::Free));
    }
    let g = geometry(config)?;
    let n = window(&g, params, config)?;
    Ok((build_measure(&g, n)?, tail_after(&g, n)))
}

fn energies(params: &Params, config: &RunConfig, range: (f64, f64), points: usize) -> CliResult<Vec<f64>> {
    let a = &config.analysis;
    let lo = pick(&params.e_min, &a.e_min, range.0);
    let hi = pick(&params.e_max, &a.e_max, range.1);
    let n = pick(&params.grid, &a.grid, points);
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() || n == 0 {
        return Err(CliError::Validation(format!("invalid energy grid [{lo}, {hi}] with {n} points")));
    }
    Ok(energy_grid(lo, hi, n))
}

#[derive(Serialize)]
struct ValidateReport {
    kind: &'static str,
    window: usize,
    gamma: f64,
    min_branching: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    integral: Option<bool>,
    norm_loc: f64,
}

pub fn validate(common: &Common, emit_normalized: bool) -> CliResult<()> {
    let (config, sink) = setup(common)?;
    let report = if let Some(spec) = &config.measure {
        let mu = spec.build()?;
        let min_b = spec.atoms.iter().map(|a| a.branching).fold(f64::INFINITY, f64::min);
        ValidateReport {
            kind: "measure",
            window: mu.len(),
            gamma: mu.separation(),
            min_branching: min_b,
            integral: None,
            norm_loc: mu.norm_loc(),
        }
    } else {
        let g = geometry(&config)?;
        if emit_normalized {
            let json_sink = Sink { format: Format::Json, path: sink.path.clone() };
            json_sink.write(|| to_json(g.spec()), || Ok(String::new()))?;
            sink.summary("geometry is valid");
            return Ok(());
        }
        let n = g.max_edges().map_or(1000, |m| m.min(1000));
        let mu = build_measure(&g, n)?;
        ValidateReport {
            kind: match g.kind() {
                GeometryKind::Explicit => "explicit",
                GeometryKind::EventuallyPeriodic => "eventually-periodic",
                GeometryKind::Substitution => "substitution",
            },
            window: n,
            gamma: g.gamma(),
            min_branching: g.min_branching(),
            integral: Some(g.is_integral()),
            norm_loc: mu.norm_loc(),
        }
    };
    sink.write(
        || envelope("validate", &config, &report),
        || {
            let mut rows = vec![
                vec!["kind".into(), report.kind.into()],
                vec!["window".into(), report.window.to_string()],
                vec!["gamma".into(), cell(report.gamma)],
                vec!["min_branching".into(), cell(report.min_branching)],
                vec!["norm_loc".into(), cell(report.norm_loc)],
            ];
            if let Some(i) = report.integral {
                rows.push(vec!["integral".into(), i.to_string()]);
            }
            csv_string(&["key", "value"], &rows)
        },
    )?;
    sink.summary(&format!(
        "valid {}: gamma = {}, min branching = {}, |mu|_loc = {} over {} atoms",
        report.kind, report.gamma, report.min_branching, report.norm_loc, report.window
    ));
    Ok(())
}

fn period_of(config: &RunConfig) -> CliResult<Vec<treespec::model::Edge>> {
    let g = geometry(config)?;
    g.period()
        .map(<[_]>::to_vec)
        .ok_or_else(|| CliError::Validation("this command needs an eventually periodic geometry".into()))
}

pub fn bands(common: &Common, params: &Params) -> CliResult<()> {
    let (config, sink) = setup(common)?;
    let period = period_of(&config)?;
    let a = &config.analysis;
    let lo = pick(&params.e_min, &a.e_min, 0.0);
    let hi = pick(&params.e_max, &a.e_max, 20.0);
    let resolution = pick(&params.grid, &a.grid, 2000);
    let bs = floquet_bands(&period, lo, hi, resolution)?;
    sink.write(
        || envelope("bands", &config, &bs),
        || {
            let rows: Vec<Vec<String>> = bs
                .bands
                .iter()
                .enumerate()
                .map(|(i, &(l, h))| vec![i.to_string(), cell(l), cell(h)])
                .collect();
            csv_string(&["band", "e_lo", "e_hi"], &rows)
        },
    )?;
    let mut line = format!("{} band(s) in [{lo}, {hi}]", bs.bands.len());
    if bs.under_resolved {
        line.push_str("; warning: grid may be too coarse to bracket every edge");
    }
    sink.summary(&line);
    Ok(())
}

fn sigma_options(params: &Params, config: &RunConfig, tail: Tail) -> CliResult<(Vec<f64>, SigmaOptions)> {
    let a = &config.analysis;
    let ladder = pick(&params.y_ladder, &a.y_ladder, DEFAULT_LADDER.to_vec());
    let d = Thresholds::default();
    let thresholds = Thresholds {
        eps_low: a.eps_low.unwrap_or(d.eps_low),
        eps_high: a.eps_high.unwrap_or(d.eps_high),
        stability: a.stability.unwrap_or(d.stability),
    };
    let weyl = MOptions { tol: pick(&params.tol, &a.tol, 1e-8), b_limit: None, tail };
    Ok((
        ladder,
        SigmaOptions { thresholds, t: a.t.unwrap_or(0.0), weyl, allow_negative: a.allow_negative.unwrap_or(false) },
    ))
}

const SIGMA_HEADER: [&str; 6] = ["E", "y", "re_m", "im_m", "radius", "class"];

fn sigma_rows(report: &SpectralReport, generation: Option<usize>) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for rec in &report.records {
        for r in &rec.rungs {
            let mut row = vec![cell(rec.energy), cell(r.y), cell(r.m.re), cell(r.m.im), cell(r.radius), rec.class.as_str().into()];
            if let Some(g) = generation {
                row.push(g.to_string());
            }
            rows.push(row);
        }
    }
    rows
}

pub fn sigma_ac(common: &Common, params: &Params) -> CliResult<()> {
    let (config, sink) = setup(common)?;
    let grid = energies(params, &config, (0.0, 10.0), 500)?;
    let generations = params.generations.or(config.analysis.generations);
    if let Some(k) = generations {
        let g = geometry(&config)?;
        let n = window(&g, params, &config)?;
        let (ladder, opts) = sigma_options(params, &config, Tail::Free)?;
        let report = tree_spectrum_report(&g, k, n, &grid, &ladder, &opts)?;
        sink.write(
            || envelope("sigma-ac", &config, &report),
            || {
                let mut header = SIGMA_HEADER.to_vec();
                header.push("generation");
                let rows: Vec<Vec<String>> =
                    report.generations.iter().flat_map(|gr| sigma_rows(&gr.report, Some(gr.generation))).collect();
                csv_string(&header, &rows)
            },
        )?;
        sink.summary(&format!(
            "union ac-like fraction {:.4} over {} energies and {} generation(s)",
            report.union_ac_fraction(),
            grid.len(),
            report.generations.len()
        ));
        return Ok(());
    }
    let (measure, tail) = halfline(&config, params)?;
    let (ladder, opts) = sigma_options(params, &config, tail)?;
    let report = sigma_ac_estimate(&measure, &grid, &ladder, &opts)?;
    sink.write(|| envelope("sigma-ac", &config, &report), || csv_string(&SIGMA_HEADER, &sigma_rows(&report, None)))?;
    let undecided = report.records.iter().filter(|r| r.class == treespec::spectral::Classification::Undecided).count();
    sink.summary(&format!(
        "ac-like fraction {:.4} over {} energies ({} undecided)",
        report.ac_fraction(),
        grid.len(),
        undecided
    ));
    Ok(())
}

pub fn parse_z(text: &str) -> CliResult<Complex64> {
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    Complex64::from_str(&cleaned).map_err(|_| CliError::Parse(format!("cannot parse spectral parameter '{text}'")))
}

#[derive(Serialize)]
struct MReport {
    z: Complex64,
    t: f64,
    m: treespec::weyl::MValue,
}

pub fn m(common: &Common, params: &Params, z: Option<&str>) -> CliResult<()> {
    let (config, sink) = setup(common)?;
    let z_text = z
        .map(str::to_string)
        .or_else(|| config.analysis.z.clone())
        .ok_or_else(|| CliError::Validation("missing spectral parameter (--z)".into()))?;
    let z = parse_z(&z_text)?;
    let (measure, tail) = halfline(&config, params)?;
    let t = config.analysis.t.unwrap_or(0.0);
    let reach = default_reach(&measure, z.re, z.im);
    let opts = MOptions { tol: pick(&params.tol, &config.analysis.tol, 1e-8), b_limit: Some(t + reach), tail };
    let v = m_plus(&measure, t, z, &opts)?;
    let report = MReport { z, t, m: v };
    sink.write(
        || envelope("m", &config, &report),
        || {
            csv_string(
                &["re_z", "im_z", "re_m", "im_m", "radius", "truncation", "converged"],
                &[vec![
                    cell(z.re),
                    cell(z.im),
                    cell(v.value.re),
                    cell(v.value.im),
                    cell(v.error_bound),
                    cell(v.truncation),
                    v.converged.to_string(),
                ]],
            )
        },
    )?;
    sink.summary(&format!(
        "m_+({}) = {} + {}i, error bound {}",
        z_text,
        fmt_f64(v.value.re),
        fmt_f64(v.value.im),
        fmt_f64(v.error_bound)
    ));
    if !v.converged {
        return Err(CliError::NonConvergence(format!(
            "disk radius {} still above tolerance {} at truncation {}",
            v.error_bound, opts.tol, v.truncation
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct DecomposeEntry {
    generation: usize,
    origin: f64,
    multiplicity: Multiplicity,
    /// `[position relative to origin, weight]`.
    atoms: Vec<[f64; 2]>,
}

pub fn decompose(common: &Common, params: &Params) -> CliResult<()> {
    let (config, sink) = setup(common)?;
    let g = geometry(&config)?;
    let k = pick(&params.generations, &config.analysis.generations, 3);
    let w = pick(&params.window, &config.analysis.window, 16);
    let entries: Vec<DecomposeEntry> = decompose_tree(&g, k, w)?
        .into_iter()
        .map(|e| DecomposeEntry {
            generation: e.operator.generation,
            origin: e.operator.origin,
            multiplicity: e.multiplicity,
            atoms: e.operator.measure.atoms().iter().map(|a| [a.position, a.weight]).collect(),
        })
        .collect();
    sink.write(
        || envelope("decompose", &config, &entries),
        || {
            let rows: Vec<Vec<String>> = entries
                .iter()
                .map(|e| {
                    let mult = match e.multiplicity {
                        Multiplicity::Exact(m) => m.to_string(),
                        Multiplicity::NonInteger => "non-integer".into(),
                        Multiplicity::Overflow => "overflow".into(),
                    };
                    vec![e.generation.to_string(), cell(e.origin), mult, e.atoms.len().to_string()]
                })
                .collect();
            csv_string(&["generation", "origin", "multiplicity", "atoms"], &rows)
        },
    )?;
    sink.summary(&format!("{} generation operator(s), {} atoms each at least", entries.len(), w));
    Ok(())
}

#[derive(Serialize)]
struct SfdpSummary {
    ell: f64,
    holds_on_window: bool,
    witness: Option<SfdpWitness>,
    positions_checked: usize,
    /// Generator-level certificate; absent unless every piece is one atom.
    certified: Option<bool>,
    pieces: usize,
}

#[derive(Serialize)]
struct PeriodicityOutput {
    /// Smallest period found on the window and its smallest preperiod.
    preperiod: Option<usize>,
    period: Option<usize>,
    verified_window: usize,
    candidates: Vec<PeriodicityCandidate>,
    sfdp: Option<SfdpSummary>,
}

pub fn periodicity(common: &Common, params: &Params) -> CliResult<()> {
    let (config, sink) = setup(common)?;
    let g = geometry(&config)?;
    let n = pick(&params.window, &config.analysis.window, g.max_edges().map_or(1000, |m| m.min(1000)));
    let symbols = g.symbols(n)?;
    let report = detect_eventual_periodicity(&symbols);
    let minimal = report.minimal();

    let measure = build_measure(&g, n)?;
    let sfdp = match single_atom_decomposition(&measure) {
        Ok((alphabet, decomposition)) => {
            let ell = pick(&params.ell, &config.analysis.ell, 2.0 * alphabet.max_length());
            let check = check_sfdp(&decomposition, &alphabet, ell, &measure)?;
            Some(SfdpSummary {
                ell,
                holds_on_window: check.holds,
                witness: check.witness,
                positions_checked: check.positions_checked,
                certified: certify_sfdp_single_atom(&alphabet, ell)?,
                pieces: alphabet.len(),
            })
        }
        Err(_) => None,
    };
    let out = PeriodicityOutput {
        preperiod: minimal.map(|m| m.0),
        period: minimal.map(|m| m.1),
        verified_window: n,
        candidates: report.candidates.clone(),
        sfdp,
    };
    sink.write(
        || envelope("periodicity", &config, &out),
        || {
            let rows: Vec<Vec<String>> = out
                .candidates
                .iter()
                .map(|c| {
                    vec![c.period.to_string(), c.preperiod.to_string(), c.max_preperiod.to_string(), c.verified_window.to_string()]
                })
                .collect();
            csv_string(&["period", "preperiod", "max_preperiod", "verified_window"], &rows)
        },
    )?;
    sink.summary(&match minimal {
        Some((p, q)) => format!("periodic on the first {n} edges: preperiod {p}, period {q}"),
        None => format!("no period q with preperiod p and p + 2q <= {n} on the first {n} edges"),
    });
    Ok(())
}

pub fn reflectionless(common: &Common, params: &Params) -> CliResult<()> {
    let (config, sink) = setup(common)?;
    let period = period_of(&config)?;
    let grid = energies(params, &config, (0.0, 10.0), 200)?;
    let y = config.analysis.y.unwrap_or(1e-6);
    let cells = config.analysis.cells.unwrap_or(4);
    let mut line = two_sided_periodic(&period, cells)?;
    if let Some(tol) = params.tol.or(config.analysis.tol) {
        line.options.right.tol = tol;
        line.options.left.tol = tol;
    }
    let report = reflectionless_defect(&line.measure, line.t, &grid, y, &line.options)?;
    sink.write(
        || envelope("reflectionless", &config, &report),
        || {
            let rows: Vec<Vec<String>> = (0..report.energies.len())
                .map(|i| {
                    vec![
                        cell(report.energies[i]),
                        cell(report.defects[i]),
                        cell(report.m_plus[i].re),
                        cell(report.m_plus[i].im),
                        cell(report.m_minus[i].re),
                        cell(report.m_minus[i].im),
                        cell(report.error_bounds[i]),
                    ]
                })
                .collect();
            csv_string(&["E", "defect", "re_m_plus", "im_m_plus", "re_m_minus", "im_m_minus", "radius"], &rows)
        },
    )?;
    sink.summary(&format!("max defect {} over {} energies at y = {y}", report.max_defect(), grid.len()));
    Ok(())
}
