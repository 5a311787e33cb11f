//! `treespec` command-line front end.
//!
//! Exit codes: 0 ok, 1 I/O or parse error, 2 validation error, 3 numerical
//! non-convergence (the report is still written), 4 internal error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::CliError;
use crate::output::{Format, SCHEMA};

#[derive(Parser)]
#[command(name = "treespec", version, about = "Spectral analysis of radial metric trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Run config (JSON, or TOML with a .toml extension).
    #[arg(long)]
    pub config: PathBuf,
    /// Report path; with --format both the extension is replaced by .json and .csv.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Worker threads for energy sweeps (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Overrides for the `analysis` block of the config.
#[derive(Args, Debug, Clone, Default)]
pub struct Params {
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub e_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub e_max: Option<f64>,
    /// Comma-separated, strictly decreasing.
    #[arg(long, value_delimiter = ',')]
    pub y_ladder: Option<Vec<f64>>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub ell: Option<f64>,
    /// Atoms materialized from the geometry.
    #[arg(long)]
    pub window: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a geometry and print its basic constants.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Print the normalized geometry instead of the report.
        #[arg(long)]
        emit_normalized: bool,
    },
    /// Floquet bands of the periodic part of a geometry.
    Bands {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: Params,
    },
    /// Classify energies by the boundary values of Im m_+.
    SigmaAc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: Params,
    },
    /// Evaluate m_+ at one spectral parameter.
    M {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: Params,
        /// Spectral parameter such as 1.0+0.001i.
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
    },
    /// Split the tree into generation operators.
    Decompose {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: Params,
    },
    /// Eventual periodicity and decomposition properties of the edge sequence.
    Periodicity {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: Params,
    },
    /// Reflectionless defect of the two-sided periodic measure.
    Reflectionless {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: Params,
    },
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    schema: &'static str,
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: i32,
    class: &'a str,
    message: String,
}

fn report_error(e: &CliError) {
    let doc = ErrorDoc { schema: SCHEMA, error: ErrorBody { code: e.code(), class: e.class(), message: e.to_string() } };
    match serde_json::to_string(&doc) {
        Ok(s) => eprintln!("{s}"),
        Err(_) => eprintln!("{e}"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            report_error(&CliError::Parse(e.kind().to_string()));
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Validate { common, emit_normalized } => commands::validate(&common, emit_normalized),
        Command::Bands { common, params } => commands::bands(&common, &params),
        Command::SigmaAc { common, params } => commands::sigma_ac(&common, &params),
        Command::M { common, params, z } => commands::m(&common, &params, z.as_deref()),
        Command::Decompose { common, params } => commands::decompose(&common, &params),
        Command::Periodicity { common, params } => commands::periodicity(&common, &params),
        Command::Reflectionless { common, params } => commands::reflectionless(&common, &params),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(&e);
            ExitCode::from(e.code() as u8)
        }
    }
}
