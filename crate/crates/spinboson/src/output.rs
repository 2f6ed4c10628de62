//! CSV and JSONL tables with a commented header block.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
    /// Missing value: an empty CSV field, `null` in JSON.
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::F)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::U(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_owned())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::S(if v { "true" } else { "false" }.to_owned())
    }
}

/// Shortest round-trip form, with an exponent outside `[1e-5, 1e16)`.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::F(v) => format_f64(*v),
            Cell::U(v) => v.to_string(),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::F(v) => serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Cell::U(v) => (*v).into(),
            Cell::S(s) => s.clone().into(),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

/// Ordered `key = value` pairs written above the data.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Header(pub Vec<(String, String)>);

impl Header {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_owned(), value.to_string()));
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Entry in the run manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub rows: usize,
    pub sha256: String,
}

/// Writes `<dir>/<stem>.<ext>` and returns its manifest entry.
pub fn write_table(dir: &Path, stem: &str, header: &Header, table: &Table, format: Format) -> Result<FileEntry> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    let bytes = render(header, table, format).map_err(|source| Error::Write {
        path: path.clone(),
        source,
    })?;
    write_bytes(&path, &bytes)?;
    Ok(FileEntry {
        path: format!("{stem}.{}", format.extension()),
        rows: table.rows.len(),
        sha256: hex_digest(&bytes),
    })
}

pub fn render(header: &Header, table: &Table, format: Format) -> std::io::Result<Vec<u8>> {
    let mut out = Vec::new();
    match format {
        Format::Csv => {
            for (k, v) in &header.0 {
                writeln!(out, "# {k} = {v}")?;
            }
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::text))?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let head: serde_json::Map<String, serde_json::Value> =
                header.0.iter().map(|(k, v)| (k.clone(), v.clone().into())).collect();
            serde_json::to_writer(&mut out, &serde_json::json!({ "header": head }))?;
            out.push(b'\n');
            for row in &table.rows {
                let obj: serde_json::Map<String, serde_json::Value> = table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| ((*c).to_owned(), v.json()))
                    .collect();
                serde_json::to_writer(&mut out, &obj)?;
                out.push(b'\n');
            }
        }
    }
    Ok(out)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let wrap = |source| Error::Write {
        path: path.to_owned(),
        source,
    };
    let mut f = BufWriter::new(File::create(path).map_err(wrap)?);
    f.write_all(bytes).map_err(wrap)?;
    f.flush().map_err(wrap)
}

pub fn create_dir(path: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(path).map_err(|source| Error::Write {
        path: path.to_owned(),
        source,
    })?;
    Ok(path.to_owned())
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
