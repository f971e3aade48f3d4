//! CSV and JSON emission.
//!
//! CSV numbers carry nine significant digits; JSON numbers are written with
//! the shortest representation that parses back to the same `f64`. JSON has
//! no infinities, so they are written as the strings `"inf"` and `"-inf"`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

/// One scalar in a record or table row.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Missing,
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Num(x)
    }
}
impl From<Option<f64>> for Field {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Field::Missing, Field::Num)
    }
}
impl From<bool> for Field {
    fn from(b: bool) -> Self {
        Field::Bool(b)
    }
}
impl From<usize> for Field {
    fn from(n: usize) -> Self {
        Field::Int(n as u64)
    }
}
impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Text(s.to_string())
    }
}
impl From<String> for Field {
    fn from(s: String) -> Self {
        Field::Text(s)
    }
}

pub fn csv_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Num(x) => csv_number(*x),
            Field::Int(n) => n.to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Field::Text(s) => s.clone(),
            Field::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Field::Num(x) if x.is_finite() => Value::from(*x),
            Field::Num(x) if x.is_nan() => Value::Null,
            Field::Num(x) => Value::from(if *x > 0.0 { "inf" } else { "-inf" }),
            Field::Int(n) => Value::from(*n),
            Field::Bool(b) => Value::from(*b),
            Field::Text(s) => Value::from(s.as_str()),
            Field::Missing => Value::Null,
        }
    }
}

/// Ordered key-value pairs.
pub type Record = Vec<(&'static str, Field)>;

pub fn record_json(record: &Record) -> Value {
    Value::Object(
        record
            .iter()
            .map(|(k, v)| (k.to_string(), v.json()))
            .collect::<Map<_, _>>(),
    )
}

/// Header line plus one line per row.
pub fn table_csv(header: &[&str], rows: &[Vec<Field>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(Field::csv).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn record_csv(record: &Record) -> String {
    let header: Vec<&str> = record.iter().map(|(k, _)| *k).collect();
    table_csv(&header, &[record.iter().map(|(_, v)| v.clone()).collect()])
}

/// Array of objects keyed by `header`.
pub fn table_json(header: &[&str], rows: &[Vec<Field>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|row| {
                Value::Object(
                    header
                        .iter()
                        .zip(row)
                        .map(|(k, v)| (k.to_string(), v.json()))
                        .collect::<Map<_, _>>(),
                )
            })
            .collect(),
    )
}

pub fn json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialise");
    s.push('\n');
    s
}

/// Where a command's primary artifact goes.
#[derive(Debug, Clone)]
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn write(&self, text: &str) -> io::Result<()> {
        match self {
            Sink::Stdout => io::stdout().lock().write_all(text.as_bytes()),
            Sink::File(path) => write_file(path, text),
        }
    }

    pub fn is_stdout(&self) -> bool {
        matches!(self, Sink::Stdout)
    }

    /// Sibling file `<stem>_<suffix>.<ext>` next to a file sink.
    pub fn sibling(&self, suffix: &str) -> Option<PathBuf> {
        let Sink::File(path) = self else { return None };
        let stem = path.file_stem()?.to_string_lossy();
        let name = match path.extension() {
            Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
            None => format!("{stem}_{suffix}"),
        };
        Some(path.with_file_name(name))
    }
}

pub fn write_file(path: &Path, text: &str) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)
}
