//! Tabular results and their CSV / JSON serialisation.
//!
//! Floats are written with 17 significant digits in scientific notation so
//! that reruns are byte-identical and values round-trip exactly. Undefined
//! values become empty CSV fields and JSON `null`.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

/// Bumped whenever a column layout or metadata key changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Undefined,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Undefined, Cell::Float)
    }

    fn csv_field(&self) -> String {
        match self {
            Cell::Float(v) if v.is_finite() => format_float(*v),
            Cell::Float(_) | Cell::Undefined => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => u8::from(*b).to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json_value(&self) -> String {
        match self {
            Cell::Float(v) if v.is_finite() => format_float(*v),
            Cell::Float(_) | Cell::Undefined => "null".into(),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => serde_json::to_string(s).expect("string serialisation"),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::opt(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// `v` with 17 significant digits, e.g. `-1.5707963267948966e0`.
pub fn format_float(v: f64) -> String {
    // Normalise −0 so equal results print identically.
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
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
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }
}

/// A command's result: metadata plus a data table.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub metadata: Value,
    pub table: Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::csv_field))?;
    }
    w.flush()
}

/// `{"metadata": …, "columns": […], "data": [{…}, …]}`; keys of each data
/// object follow the column order.
pub fn write_json<W: Write>(report: &Report, mut out: W) -> std::io::Result<()> {
    let meta = serde_json::to_string_pretty(&report.metadata)?.replace('\n', "\n  ");
    let cols = serde_json::to_string(&report.table.columns)?;
    writeln!(out, "{{")?;
    writeln!(out, "  \"metadata\": {meta},")?;
    writeln!(out, "  \"columns\": {cols},")?;
    write!(out, "  \"data\": [")?;
    for (i, row) in report.table.rows.iter().enumerate() {
        let fields: Vec<String> = report
            .table
            .columns
            .iter()
            .zip(row)
            .map(|(c, v)| format!("{}: {}", serde_json::to_string(c).expect("column name"), v.json_value()))
            .collect();
        let sep = if i == 0 { "\n" } else { ",\n" };
        write!(out, "{sep}    {{{}}}", fields.join(", "))?;
    }
    if report.table.rows.is_empty() {
        writeln!(out, "]")?;
    } else {
        writeln!(out, "\n  ]")?;
    }
    writeln!(out, "}}")
}

pub fn write_report<W: Write>(report: &Report, format: Format, out: W) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(&report.table, out),
        Format::Json => write_json(report, out),
    }
}
