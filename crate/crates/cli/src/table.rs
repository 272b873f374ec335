//! Tabular outputs with a versioned schema comment line.

use std::fmt::Write as _;

use serde::Serialize;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    /// Floats use 17 significant digits so the text round-trips.
    pub fn render(&self) -> String {
        match self {
            Cell::Float(v) => float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

pub fn float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
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
impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
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
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem and schema name.
    pub name: String,
    pub schema_version: u32,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra comment line after the schema line, e.g. grid sizes.
    pub meta: String,
}

#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::table::Cell::from($x)),*] };
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Table { name: name.into(), schema_version: 1, columns: columns.to_vec(), rows: Vec::new(), meta: String::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut head = String::new();
        let _ = writeln!(
            head,
            "# schema: kinfront/{}/v{}; artifact: kinfront {}",
            self.name, self.schema_version, ARTIFACT_VERSION
        );
        if !self.meta.is_empty() {
            let _ = writeln!(head, "# {}", self.meta);
        }
        let mut w = csv::Writer::from_writer(head.into_bytes());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Rows as JSON objects keyed by column.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.to_string(), cell_json(v)))
                    .collect::<serde_json::Map<_, _>>();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::json!({
            "schema": format!("kinfront/{}/v{}", self.name, self.schema_version),
            "artifact_version": ARTIFACT_VERSION,
            "meta": self.meta,
            "rows": rows,
        })
    }
}

fn cell_json(c: &Cell) -> serde_json::Value {
    match c {
        // JSON has no infinities; keep them as strings.
        Cell::Float(v) if !v.is_finite() => serde_json::Value::String(float(*v)),
        Cell::Float(v) => serde_json::json!(v),
        Cell::Int(v) => serde_json::json!(v),
        Cell::Bool(v) => serde_json::json!(v),
        Cell::Text(s) => serde_json::json!(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(float(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_has_schema_line() {
        let mut t = Table::new("speed", &["n", "c"]);
        t.push(row![1u32, 0.5]);
        let s = t.to_csv().unwrap();
        let mut lines = s.lines();
        assert!(lines.next().unwrap().starts_with("# schema: kinfront/speed/v1"));
        assert_eq!(lines.next().unwrap(), "n,c");
        assert_eq!(lines.next().unwrap(), "1,5.0000000000000000e-1");
    }
}
