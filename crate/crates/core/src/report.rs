//! Tabular reports and their CSV / JSON encodings.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{LabError, Result};

/// One table cell. Non-finite numbers are stored as `Null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Null,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        if v.is_finite() {
            Cell::Num(v)
        } else {
            Cell::Null
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub subcommand: String,
    pub seed: Option<u64>,
    /// Taken from `SOURCE_DATE_EPOCH` when set, otherwise absent, so that
    /// repeated runs produce identical bytes.
    pub timestamp: Option<u64>,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub meta: Meta,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Map<String, Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn source_date_epoch() -> Option<u64> {
    std::env::var("SOURCE_DATE_EPOCH").ok()?.trim().parse().ok()
}

impl Report {
    pub fn new(subcommand: &str, seed: Option<u64>, columns: &[&str]) -> Self {
        Self {
            meta: Meta {
                version: env!("CARGO_PKG_VERSION").to_string(),
                subcommand: subcommand.to_string(),
                seed,
                timestamp: source_date_epoch(),
                columns: columns.iter().map(|c| c.to_string()).collect(),
            },
            rows: Vec::new(),
            summary: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.meta.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    /// Like [`Report::set`] for floats; non-finite values become `null`.
    pub fn set_f64(&mut self, key: &str, value: f64) {
        let v = serde_json::Number::from_f64(value).map_or(Value::Null, Value::Number);
        self.summary.insert(key.to_string(), v);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let k = self.meta.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k].clone()).collect())
    }

    pub fn to_json_value(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .meta
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.clone(), serde_json::to_value(v).expect("cells serialize")))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut top = Map::new();
        top.insert(
            "meta".into(),
            serde_json::to_value(&self.meta).expect("meta serializes"),
        );
        top.insert("rows".into(), Value::Array(rows));
        top.insert("summary".into(), Value::Object(self.summary.clone()));
        Value::Object(top)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let bad = |m: &str| LabError::param(format!("malformed report: {m}"));
        let meta: Meta =
            serde_json::from_value(v.get("meta").cloned().ok_or_else(|| bad("meta"))?)?;
        let rows_v = v
            .get("rows")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("rows"))?;
        let mut rows = Vec::with_capacity(rows_v.len());
        for r in rows_v {
            let obj = r.as_object().ok_or_else(|| bad("row is not an object"))?;
            let row = meta
                .columns
                .iter()
                .map(|c| {
                    let cell = obj.get(c).cloned().ok_or_else(|| bad("missing column"))?;
                    Ok(serde_json::from_value(cell)?)
                })
                .collect::<Result<Vec<Cell>>>()?;
            rows.push(row);
        }
        let summary = v
            .get("summary")
            .and_then(Value::as_object)
            .cloned()
            .ok_or_else(|| bad("summary"))?;
        Ok(Self {
            meta,
            rows,
            summary,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let header: Vec<String> = self.meta.columns.iter().map(|c| csv_text(c)).collect();
        s.push_str(&header.join(","));
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(csv_cell).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn emit(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Writes the encoded report to `out`, or to stdout when `out` is `None`.
    pub fn write(&self, format: Format, out: Option<&Path>) -> Result<()> {
        let text = self.emit(format);
        match out {
            Some(path) => std::fs::write(path, text)?,
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()?;
            }
        }
        Ok(())
    }
}

/// Plain decimal for `1e-4 <= |v| < 1e6`, scientific notation otherwise.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if (1e-4..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        let mut out = String::from("\"");
        for ch in s.chars() {
            if ch == '"' {
                out.push('"');
            }
            out.push(ch);
        }
        out.push('"');
        out
    } else {
        s.to_string()
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Int(v) => {
            let mut s = String::new();
            write!(s, "{v}").expect("string write");
            s
        }
        Cell::Num(v) => format_number(*v),
        Cell::Text(t) => csv_text(t),
        Cell::Null => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("demo", Some(42), &["name", "value", "count"]);
        r.push(vec!["a".into(), 0.1f64.into(), 3usize.into()]);
        r.push(vec!["b,c".into(), 1.234e-7f64.into(), 0usize.into()]);
        r.push(vec!["d".into(), 2.5e8f64.into(), 1usize.into()]);
        r.set_f64("slope", -2.000000000001);
        r
    }

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(1e-4), "0.0001");
        assert_eq!(format_number(1.5e-5), "1.5e-5");
        assert_eq!(format_number(-2.5e6), "-2.5e6");
        assert_eq!(format_number(0.0), "0e0");
        assert_eq!(format_number(999999.5), "999999.5");
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "name,value,count");
        assert_eq!(lines[1], "a,0.1,3");
        assert_eq!(lines[2], "\"b,c\",1.234e-7,0");
        assert_eq!(lines[3], "d,2.5e8,1");
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = Report::new("demo", None, &["x", "y"]);
        assert_eq!(r.to_csv(), "x,y\n");
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let mut r = sample();
        r.push(vec!["e".into(), (0.1f64 + 0.2).into(), 7usize.into()]);
        r.push(vec!["f".into(), 2.0f64.into(), 7usize.into()]);
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        for (a, b) in r.rows.iter().zip(&back.rows) {
            for (x, y) in a.iter().zip(b) {
                if let (Cell::Num(x), Cell::Num(y)) = (x, y) {
                    assert_eq!(x.to_bits(), y.to_bits());
                }
            }
        }
    }

    #[test]
    fn non_finite_becomes_null() {
        assert_eq!(Cell::from(f64::NAN), Cell::Null);
        let mut r = Report::new("demo", None, &["v"]);
        r.set_f64("x", f64::INFINITY);
        assert_eq!(r.summary["x"], Value::Null);
    }
}
