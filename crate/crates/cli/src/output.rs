//! CSV and JSON rendering of result tables.
//!
//! Numbers use the shortest representation that round-trips, switching to
//! exponent form outside `[1e-5, 1e16)`. `+∞` is `inf`; missing values are an
//! empty cell (JSON `null`) explained by the `flags` column.

use serde_json::{json, Map, Value};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Inf,
    Empty,
    Bool(bool),
    Text(String),
    Flags(Vec<&'static str>),
}

pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_f64(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Inf => "inf".into(),
            Cell::Empty => String::new(),
            Cell::Bool(b) => if *b { "1" } else { "0" }.into(),
            Cell::Text(s) => s.clone(),
            Cell::Flags(f) => f.join(";"),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => {
                serde_json::Number::from_f64(*x).map_or_else(|| Value::String(format_f64(*x)), Value::Number)
            }
            Cell::Int(n) => json!(n),
            Cell::Inf => json!("inf"),
            Cell::Empty => Value::Null,
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
            Cell::Flags(f) => json!(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Self { command, columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, config: &RunConfig) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let map: Map<String, Value> =
                    self.columns.iter().zip(row).map(|(k, c)| (k.to_string(), c.json())).collect();
                Value::Object(map)
            })
            .collect();
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": config.to_json(),
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
        s.push('\n');
        s
    }
}
