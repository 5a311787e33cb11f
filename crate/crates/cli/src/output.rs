use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::{CliError, CliResult};

pub const SCHEMA: &str = "treespec/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

/// Compact JSON with every float printed to 17 significant digits, so equal
/// reports are byte-identical and parse back to the same bits.
struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", fmt_f64(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser).map_err(|e| CliError::Internal(format!("serializing report: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::Internal(e.to_string()))
}

/// Top-level JSON document.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: &'static str,
    pub command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub result: &'a T,
}

pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let map = |e: csv::Error| CliError::Internal(format!("writing CSV: {e}"));
    w.write_record(header).map_err(map)?;
    for r in rows {
        w.write_record(r).map_err(map)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

pub struct Sink {
    pub format: Format,
    pub path: Option<PathBuf>,
}

impl Sink {
    fn target(&self, ext: &str) -> Option<PathBuf> {
        self.path.as_ref().map(|p| match self.format {
            Format::Both => p.with_extension(ext),
            _ => p.clone(),
        })
    }

    fn emit(&self, ext: &str, text: &str) -> CliResult<()> {
        match self.target(ext) {
            Some(p) => write_file(&p, text),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }

    /// Write the JSON and/or CSV renderings the format asks for.
    pub fn write(&self, json: impl FnOnce() -> CliResult<String>, csv: impl FnOnce() -> CliResult<String>) -> CliResult<()> {
        if matches!(self.format, Format::Json | Format::Both) {
            self.emit("json", &json()?)?;
        }
        if matches!(self.format, Format::Csv | Format::Both) {
            self.emit("csv", &csv()?)?;
        }
        Ok(())
    }

    /// One-line summary: to stdout when reports go to files, else stderr.
    pub fn summary(&self, line: &str) {
        if self.path.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
