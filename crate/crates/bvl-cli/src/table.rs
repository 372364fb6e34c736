//! Result tables: a CSV body plus a JSON sidecar with provenance metadata.
//!
//! Floats are written in their shortest round-trip decimal form, so a table
//! read back from disk compares equal to the one that was written and reruns
//! of the same configuration give byte-identical CSV bodies.

use crate::error::{CliError, CliResult};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

/// Name and unit of one column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    /// Column with a unit label.
    pub fn new(name: &str, unit: &str) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

/// One table entry.
#[derive(Debug, Clone)]
pub enum Cell {
    Number(f64),
    Integer(i64),
    Text(String),
    Empty,
}

impl PartialEq for Cell {
    /// Numbers compare by bit pattern so that NaN entries round-trip too.
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Cell::Number(a), Cell::Number(b)) => a.to_bits() == b.to_bits(),
            (Cell::Integer(a), Cell::Integer(b)) => a == b,
            (Cell::Text(a), Cell::Text(b)) => a == b,
            (Cell::Empty, Cell::Empty) => true,
            _ => false,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Number(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Integer(n as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl Cell {
    /// CSV text of the entry; floats use the shortest round-trip form.
    pub fn render(&self) -> String {
        match self {
            Cell::Number(x) => format!("{x:?}"),
            Cell::Integer(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    /// Inverse of [`Cell::render`].
    ///
    /// Rendered floats always carry a '.', an exponent, "inf" or "NaN", so a
    /// bare integer literal is unambiguous.
    pub fn parse(s: &str) -> Self {
        if s.is_empty() {
            Cell::Empty
        } else if let Ok(n) = s.parse::<i64>() {
            Cell::Integer(n)
        } else if let Ok(x) = s.parse::<f64>() {
            Cell::Number(x)
        } else {
            Cell::Text(s.into())
        }
    }

    /// Numeric value of a number or integer entry.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Number(x) => Some(*x),
            Cell::Integer(n) => Some(*n as f64),
            _ => None,
        }
    }
}

/// Provenance written to the sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub experiment: String,
    /// SHA-256 of the canonical configuration JSON.
    pub config_hash: String,
    pub code_version: String,
    pub wall_time_seconds: f64,
    /// Seconds since the Unix epoch when the run finished.
    pub finished_unix: u64,
    pub defaults_applied: Vec<String>,
    /// Effective configuration.
    pub config: serde_json::Value,
    /// Experiment-specific report (fit results, residual summaries).
    pub report: Option<serde_json::Value>,
}

/// A typed table with schema and metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: Metadata,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    metadata: Metadata,
    columns: Vec<Column>,
    row_count: usize,
}

/// Paths written by [`ResultTable::write`].
#[derive(Debug, Clone, PartialEq)]
pub struct WrittenFiles {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
}

impl ResultTable {
    /// Empty table with the given schema.
    pub fn new(columns: Vec<Column>, metadata: Metadata) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            metadata,
        }
    }

    /// Appends a row after checking its width against the schema.
    pub fn push_row(&mut self, row: Vec<Cell>) -> CliResult<()> {
        if row.len() != self.columns.len() {
            return Err(CliError::Format(format!(
                "row has {} entries but the schema has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Index of a column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// CSV body: the header line followed by one line per row.
    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Format(e.to_string());
        w.write_record(self.columns.iter().map(|c| c.name.as_str())).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Format(e.to_string()))
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path, stem: &str) -> CliResult<WrittenFiles> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let sidecar_path = dir.join(format!("{stem}.json"));
        fs::write(&csv_path, self.to_csv()?).map_err(|e| CliError::io(format!("writing {}", csv_path.display()), e))?;
        let sidecar = Sidecar {
            metadata: self.metadata.clone(),
            columns: self.columns.clone(),
            row_count: self.rows.len(),
        };
        let text = serde_json::to_string_pretty(&sidecar).map_err(|e| CliError::Format(e.to_string()))?;
        fs::write(&sidecar_path, text + "\n")
            .map_err(|e| CliError::io(format!("writing {}", sidecar_path.display()), e))?;
        Ok(WrittenFiles {
            csv: csv_path,
            sidecar: sidecar_path,
        })
    }

    /// Reads a table back from its CSV body and sidecar.
    pub fn read(csv_path: &Path, sidecar_path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(sidecar_path)
            .map_err(|e| CliError::io(format!("reading {}", sidecar_path.display()), e))?;
        let sidecar: Sidecar = serde_json::from_str(&text).map_err(|e| CliError::Format(e.to_string()))?;
        let mut reader = csv::Reader::from_path(csv_path).map_err(|e| CliError::Format(e.to_string()))?;
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| CliError::Format(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let names: Vec<String> = sidecar.columns.iter().map(|c| c.name.clone()).collect();
        if header != names {
            return Err(CliError::Format(format!("CSV header {header:?} does not match sidecar schema {names:?}")));
        }
        let mut table = ResultTable::new(sidecar.columns, sidecar.metadata);
        for record in reader.records() {
            let record = record.map_err(|e| CliError::Format(e.to_string()))?;
            table.push_row(record.iter().map(Cell::parse).collect())?;
        }
        if table.rows.len() != sidecar.row_count {
            return Err(CliError::Format(format!(
                "sidecar promises {} rows, CSV has {}",
                sidecar.row_count,
                table.rows.len()
            )));
        }
        Ok(table)
    }
}
