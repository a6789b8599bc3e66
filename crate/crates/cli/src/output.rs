//! Deterministic output files.
//!
//! CSV files start with `#` comment lines carrying the tool version, config
//! hash and seed, then a header row. Floats are written with 17 significant
//! digits so every value round-trips. JSON files carry the same block under
//! `"header"`.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::CliError;

pub const TOOL: &str = "wedge-spectral";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub config_sha256: String,
    pub seed: u64,
}

impl Header {
    fn comment_lines(&self) -> String {
        format!("# {TOOL} {VERSION}\n# config_sha256 {}\n# seed {}\n", self.config_sha256, self.seed)
    }

    pub fn to_json(&self) -> Value {
        json!({ "tool": TOOL, "version": VERSION, "config_sha256": self.config_sha256, "seed": self.seed })
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u8> for Cell {
    fn from(v: u8) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Float(v.unwrap_or(f64::NAN))
    }
}

/// 17 significant digits in scientific notation; `NaN`, `inf`, `-inf` otherwise.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    fn render(&self, header: &Header) -> Result<Vec<u8>, CliError> {
        let mut buf = header.comment_lines().into_bytes();
        {
            let mut writer = csv::Writer::from_writer(&mut buf);
            writer.write_record(&self.columns).map_err(csv_error)?;
            for row in &self.rows {
                writer.write_record(row.iter().map(Cell::render)).map_err(csv_error)?;
            }
            writer.flush()?;
        }
        Ok(buf)
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

/// A rendered file waiting to be written.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn csv(name: &str, table: &Table, header: &Header) -> Result<Self, CliError> {
        Ok(Self { name: name.to_string(), bytes: table.render(header)? })
    }

    /// Pretty JSON with the header block inserted first.
    pub fn json(name: &str, body: Value, header: &Header) -> Self {
        let mut map = serde_json::Map::new();
        map.insert("header".into(), header.to_json());
        match body {
            Value::Object(fields) => map.extend(fields),
            other => {
                map.insert("body".into(), other);
            }
        }
        let mut bytes = serde_json::to_vec_pretty(&Value::Object(map)).expect("JSON values serialize");
        bytes.push(b'\n');
        Self { name: name.to_string(), bytes }
    }
}

/// Write every artifact into `dir` via a temporary file and an atomic rename.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for artifact in artifacts {
        let mut tmp = tempfile::Builder::new().prefix(".wedge-spectral-").tempfile_in(dir)?;
        tmp.write_all(&artifact.bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(dir.join(&artifact.name)).map_err(|e| CliError::Io(e.error))?;
        log::info!("wrote {}", dir.join(&artifact.name).display());
    }
    Ok(())
}

/// Non-finite floats become strings so the JSON stays lossless.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(format_float(v))
    }
}

/// Inverse of [`num`].
pub fn read_num(v: &Value) -> Option<f64> {
    v.as_f64().or_else(|| v.as_str().and_then(|s| s.parse().ok()))
}

pub fn nums(vs: &[f64]) -> Value {
    Value::Array(vs.iter().map(|&v| num(v)).collect())
}

/// Read back the data rows of a CSV written by [`Table`], skipping comments.
pub fn read_table(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>), csv::Error> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let columns = reader.headers()?.iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<Result<_, _>>()?;
    Ok((columns, rows))
}
