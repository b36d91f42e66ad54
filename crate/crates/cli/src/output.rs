//! Tabular output in CSV or JSON.
//!
//! Reals are written with 12 significant digits. Every document starts with
//! the fully resolved configuration that produced it.

use std::fmt::Write as _;

use anyhow::Result;
use clap::ValueEnum;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    Num(f64),
    Text(String),
    Missing,
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v.into())
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format_sig(*x),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(*i as i64),
            Cell::Num(x) if x.is_finite() => format_sig(*x).parse::<f64>().map_or(Value::Null, |v| json!(v)),
            Cell::Num(_) | Cell::Missing => Value::Null,
            Cell::Text(s) => json!(s),
        }
    }
}

/// `%.12g`-style rendering.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..DIGITS).contains(&exp) {
        let s = format!("{:.*e}", (DIGITS - 1) as usize, x);
        let (mantissa, e) = s.split_once('e').expect("exponent marker");
        return format!("{}e{}", trim_fraction(mantissa), e);
    }
    let decimals = (DIGITS - 1 - exp).max(0) as usize;
    trim_fraction(&format!("{x:.decimals$}")).to_owned()
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: Vec<&'static str>) -> Self {
        Self { name: name.to_owned(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub command: &'static str,
    pub config: Value,
    pub tables: Vec<Table>,
}

impl Document {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(serde_json::to_string_pretty(&self.to_json())? + "\n"),
        }
    }

    fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        writeln!(out, "# command: {}", self.command)?;
        writeln!(out, "# config: {}", serde_json::to_string(&self.config)?)?;
        for (i, table) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            writeln!(out, "# table: {}", table.name)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::to_csv))?;
            }
            out.push_str(&String::from_utf8(w.into_inner()?)?);
        }
        Ok(out)
    }

    fn to_json(&self) -> Value {
        let tables: serde_json::Map<String, Value> = self
            .tables
            .iter()
            .map(|t| {
                let rows: Vec<Value> = t.rows.iter().map(|r| Value::Array(r.iter().map(Cell::to_json).collect())).collect();
                (t.name.clone(), json!({ "columns": t.columns, "rows": rows }))
            })
            .collect();
        json!({ "command": self.command, "config": self.config, "tables": tables })
    }
}
