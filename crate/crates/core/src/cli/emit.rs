//! CSV/JSON table output.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
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

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Rows under a fixed header. A column named `flag`, if present, receives
/// `inf` (or `nan`) in JSON output when a numeric cell of that row is not
/// finite and the row carries no flag of its own.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width differs from header");
        self.rows.push(row);
    }
}

/// `v` rounded to 9 significant digits.
pub fn round_sig9(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.8e}").parse().unwrap_or(v)
}

/// 9 significant digits, shortest form; `inf`, `-inf`, `nan` for non-finite.
pub fn format_num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    let r = round_sig9(v);
    let a = r.abs();
    if r != 0.0 && !(1e-4..1e9).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_csv(t: &Table, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{}", t.header.join(","))?;
    for row in &t.rows {
        let fields: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(v) => format_num(*v),
                Cell::Int(i) => i.to_string(),
                Cell::Text(s) => csv_field(s),
            })
            .collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn to_json(t: &Table) -> Value {
    let flag_col = t.header.iter().position(|h| *h == "flag");
    let rows = t
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            let mut nonfinite: Option<&'static str> = None;
            for (h, c) in t.header.iter().zip(row) {
                let v = match c {
                    Cell::Num(x) if x.is_finite() => Number::from_f64(round_sig9(*x))
                        .map(Value::Number)
                        .unwrap_or(Value::Null),
                    Cell::Num(x) => {
                        nonfinite.get_or_insert(if x.is_nan() { "nan" } else { "inf" });
                        Value::Null
                    }
                    Cell::Int(i) => Value::from(*i),
                    Cell::Text(s) => Value::from(s.as_str()),
                };
                m.insert((*h).to_string(), v);
            }
            if let (Some(i), Some(tag)) = (flag_col, nonfinite) {
                let h = t.header[i];
                if m.get(h).and_then(Value::as_str).is_some_and(str::is_empty) {
                    m.insert(h.to_string(), Value::from(tag));
                }
            }
            Value::Object(m)
        })
        .collect();
    Value::Array(rows)
}

pub fn emit_table(t: &Table, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(t, out),
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &to_json(t))?;
            writeln!(out)
        }
    }
}
