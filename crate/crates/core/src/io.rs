//! Result tables on disk: CSV and JSON.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so parsing a
//! file back reproduces every value bit for bit. Missing standard errors are
//! `NaN` in CSV and `null` in JSON.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::{CurveRow, CurveTable};

pub const CSV_HEADER: [&str; 9] = [
    "scenario", "strategy", "x_name", "x_value", "metric", "value", "stderr", "trials", "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

fn float(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn json_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Domain(format!("csv: {other:?}")),
    }
}

/// Write a table to any sink.
pub fn emit_results<W: Write>(table: &CurveTable, format: Format, out: W) -> Result<()> {
    if table.is_empty() {
        return Err(Error::Domain("refusing to emit an empty table".into()));
    }
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
            w.write_record(CSV_HEADER).map_err(csv_error)?;
            for r in &table.rows {
                w.write_record([
                    r.scenario.clone(),
                    r.strategy.clone(),
                    r.x_name.clone(),
                    float(r.x_value),
                    r.metric.clone(),
                    float(r.value),
                    float(r.stderr),
                    r.trials.to_string(),
                    r.seed.to_string(),
                ])
                .map_err(csv_error)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut w = BufWriter::new(out);
            let s = |v: &str| serde_json::to_string(v).expect("strings always serialize");
            writeln!(w, "[")?;
            for (i, r) in table.rows.iter().enumerate() {
                let sep = if i + 1 < table.rows.len() { "," } else { "" };
                writeln!(
                    w,
                    "  {{\"scenario\": {}, \"strategy\": {}, \"x_name\": {}, \"x_value\": {}, \"metric\": {}, \"value\": {}, \"stderr\": {}, \"trials\": {}, \"seed\": {}}}{sep}",
                    s(&r.scenario),
                    s(&r.strategy),
                    s(&r.x_name),
                    json_float(r.x_value),
                    s(&r.metric),
                    json_float(r.value),
                    json_float(r.stderr),
                    r.trials,
                    r.seed,
                )?;
            }
            writeln!(w, "]")?;
            w.flush()?;
        }
    }
    Ok(())
}

pub fn write_results(table: &CurveTable, format: Format, path: &Path) -> Result<()> {
    emit_results(table, format, File::create(path)?)
}

pub fn to_string(table: &CurveTable, format: Format) -> Result<String> {
    let mut buf = Vec::new();
    emit_results(table, format, &mut buf)?;
    Ok(String::from_utf8(buf).expect("emitted tables are UTF-8"))
}

pub fn parse_csv(text: &str) -> Result<CurveTable> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Domain(format!("unexpected CSV header {header:?}")));
    }
    let rows = reader
        .deserialize::<CurveRow>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(csv_error)?;
    Ok(CurveTable { rows })
}

#[derive(serde::Deserialize)]
struct JsonRow {
    scenario: String,
    strategy: String,
    x_name: String,
    x_value: f64,
    metric: String,
    value: Option<f64>,
    stderr: Option<f64>,
    trials: usize,
    seed: u64,
}

pub fn parse_json(text: &str) -> Result<CurveTable> {
    let rows: Vec<JsonRow> =
        serde_json::from_str(text).map_err(|e| Error::Domain(format!("json: {e}")))?;
    Ok(CurveTable {
        rows: rows
            .into_iter()
            .map(|r| CurveRow {
                scenario: r.scenario,
                strategy: r.strategy,
                x_name: r.x_name,
                x_value: r.x_value,
                metric: r.metric,
                value: r.value.unwrap_or(f64::NAN),
                stderr: r.stderr.unwrap_or(f64::NAN),
                trials: r.trials,
                seed: r.seed,
            })
            .collect(),
    })
}
