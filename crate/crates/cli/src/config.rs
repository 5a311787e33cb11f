use std::path::Path;

use serde::{Deserialize, Serialize};
use treespec::model::{validate_geometry, weight_from_branching, Atom, AtomicMeasure, GeometrySpec, TreeGeometry};

use crate::error::{CliError, CliResult};

/// Command parameters that may come from the config file; flags override them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analysis {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_ladder: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_high: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generations: Option<usize>,
    /// Number of atoms materialized for the measure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Imaginary offset for reflectionless probes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    /// Periods per side of the two-sided periodic measure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allow_negative: Option<bool>,
}

/// A halfline measure given atom by atom; no atoms means the free halfline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub atoms: Vec<AtomSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub position: f64,
    pub branching: f64,
}

impl MeasureSpec {
    pub fn build(&self) -> CliResult<AtomicMeasure> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Ok(Atom::new(a.position, weight_from_branching(a.branching)?)))
            .collect::<treespec::Result<Vec<_>>>()?;
        Ok(AtomicMeasure::new(atoms)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default)]
    pub analysis: Analysis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    fn bare(geometry: GeometrySpec) -> Self {
        Self { geometry: Some(geometry), measure: None, analysis: Analysis::default(), seed: None }
    }
}

/// Parse a config as JSON, or TOML when the path ends in `.toml`. A bare
/// geometry object is accepted in place of a full run config.
pub fn parse_config(text: &str, toml_syntax: bool) -> CliResult<RunConfig> {
    // a document with a top-level "kind" is a bare geometry
    if toml_syntax {
        let value: toml::Value = toml::from_str(text).map_err(|e| CliError::Parse(format!("TOML: {e}")))?;
        let bare = value.get("kind").is_some();
        return if bare {
            value.try_into::<GeometrySpec>().map(RunConfig::bare)
        } else {
            value.try_into::<RunConfig>()
        }
        .map_err(|e| CliError::Parse(format!("TOML: {e}")))
        .and_then(check_source);
    }
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("JSON: {e}")))?;
    let bare = value.get("kind").is_some();
    if bare {
        serde_json::from_str::<GeometrySpec>(text).map(RunConfig::bare)
    } else {
        serde_json::from_str::<RunConfig>(text)
    }
    .map_err(|e| CliError::Parse(format!("JSON: {e}")))
    .and_then(check_source)
}

fn check_source(config: RunConfig) -> CliResult<RunConfig> {
    match (&config.geometry, &config.measure) {
        (None, None) => Err(CliError::Parse("config needs a geometry or a measure".into())),
        (Some(_), Some(_)) => Err(CliError::Parse("config may hold a geometry or a measure, not both".into())),
        _ => Ok(config),
    }
}

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let toml_syntax = path.extension().is_some_and(|x| x.eq_ignore_ascii_case("toml"));
    parse_config(&text, toml_syntax)
}

pub fn geometry(config: &RunConfig) -> CliResult<TreeGeometry> {
    let spec = config
        .geometry
        .as_ref()
        .ok_or_else(|| CliError::Validation("this command needs a geometry in the config".into()))?;
    Ok(validate_geometry(spec)?)
}
