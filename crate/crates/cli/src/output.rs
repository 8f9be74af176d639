//! Deterministic CSV and JSON writers with a resolved-parameter header.

use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(x) => float(*x),
            Cell::I(i) => i.to_string(),
            Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(x) if x.is_finite() => json!(x),
            Cell::F(x) => json!(float(*x)),
            Cell::I(i) => json!(i),
            Cell::S(s) => json!(s),
            Cell::B(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::I(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::B(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::S(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::S(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(o: Option<T>) -> Self {
        o.map_or(Cell::Empty, Into::into)
    }
}

/// 17 significant digits; `inf`, `-inf`, `nan` spelled out.
pub fn float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// One command's complete output.
pub struct Report {
    pub command: &'static str,
    pub params: BTreeMap<&'static str, String>,
    pub summary: BTreeMap<&'static str, Value>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra structured payload, emitted only in JSON.
    pub extra: Option<Value>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            params: BTreeMap::new(),
            summary: BTreeMap::new(),
            columns: Vec::new(),
            rows: Vec::new(),
            extra: None,
        }
    }

    pub fn param(&mut self, key: &'static str, value: impl ToString) -> &mut Self {
        self.params.insert(key, value.to_string());
        self
    }

    pub fn summary(&mut self, key: &'static str, value: Value) -> &mut Self {
        self.summary.insert(key, value);
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    fn csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# bosecool {}\n", self.command));
        out.push_str(&format!("# schema_version={SCHEMA_VERSION}\n"));
        out.push_str(&format!("# code_version={CODE_VERSION}\n"));
        for (k, v) in &self.params {
            out.push_str(&format!("# param {k}={v}\n"));
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("# summary {k}={v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let m: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                Value::Object(m)
            })
            .collect();
        let mut doc = json!({
            "command": self.command,
            "schema_version": SCHEMA_VERSION,
            "code_version": CODE_VERSION,
            "params": self.params,
            "summary": self.summary,
            "rows": rows,
        });
        if let Some(extra) = &self.extra {
            doc["result"] = extra.clone();
        }
        let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
        s.push('\n');
        s
    }
}

pub fn write(report: &Report, format: Format, out: Option<&Path>) -> anyhow::Result<()> {
    let text = report.render(format);
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_full_precision() {
        let x = 0.1 + 0.2;
        assert_eq!(float(x).parse::<f64>().unwrap(), x);
        assert_eq!(float(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_quotes_commas() {
        assert_eq!(Cell::S("a,b".into()).csv(), "\"a,b\"");
    }

    #[test]
    fn header_is_sorted() {
        let mut r = Report::new("x");
        r.param("zeta", 1).param("alpha", 2);
        let csv = r.render(Format::Csv);
        let a = csv.find("alpha").unwrap();
        let z = csv.find("zeta").unwrap();
        assert!(a < z);
    }
}
