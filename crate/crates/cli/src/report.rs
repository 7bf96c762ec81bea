//! Structured reports and their text and machine renderings.
//!
//! Text output prints every real number with six decimals (ties to even,
//! no negative zero) and pads table columns to a common width. Machine
//! output is JSON with sorted keys and numbers rounded to ten decimals.

use std::fmt::Write as _;

use histories_core::C64;
use serde_json::{json, Map, Value as Json};

/// Decimal places in text output.
pub const TEXT_DECIMALS: usize = 6;
/// Decimal places kept in machine output.
pub const MACHINE_DECIMALS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Complex(C64),
    Bool(bool),
    Text(String),
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<C64> for Value {
    fn from(v: C64) -> Self {
        Value::Complex(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(name: &str, columns: impl IntoIterator<Item = S>) -> Self {
        Self { name: name.to_string(), columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// The outcome of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub index: usize,
    pub kind: String,
    pub inputs: Vec<(String, String)>,
    /// `OK`, or a verdict such as `MEANINGLESS` or `INCONSISTENT`.
    pub status: String,
    pub fields: Vec<(String, Value)>,
    pub tables: Vec<Table>,
}

impl Section {
    pub fn new(index: usize, kind: &str, inputs: Vec<(String, String)>) -> Self {
        Self { index, kind: kind.to_string(), inputs, status: "OK".to_string(), fields: Vec::new(), tables: Vec::new() }
    }

    pub fn status(&mut self, status: &str) -> &mut Self {
        self.status = status.to_string();
        self
    }

    pub fn field(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    pub fn table(&mut self, table: Table) -> &mut Self {
        self.tables.push(table);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub generator: String,
    pub schema: u32,
    pub dimension: usize,
    pub tolerance_profile: String,
    pub warnings: Vec<String>,
    pub sections: Vec<Section>,
}

pub fn render_report(r: &Report, format: Format) -> Vec<u8> {
    match format {
        Format::Text => render_text(r).into_bytes(),
        Format::Machine => {
            let mut s = serde_json::to_string_pretty(&to_json(r)).expect("report serializes");
            s.push('\n');
            s.into_bytes()
        }
    }
}

/// `x` with `decimals` places, ties to even, never `-0`.
pub fn format_real(x: f64, decimals: usize) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    let s = format!("{x:.decimals$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

fn format_complex(z: C64) -> String {
    let re = format_real(z.re, TEXT_DECIMALS);
    let im = format_real(z.im, TEXT_DECIMALS);
    match im.strip_prefix('-') {
        Some(mag) => format!("{re}-{mag}i"),
        None => format!("{re}+{im}i"),
    }
}

fn text_value(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Real(x) => format_real(*x, TEXT_DECIMALS),
        Value::Complex(z) => format_complex(*z),
        Value::Bool(b) => if *b { "yes" } else { "no" }.to_string(),
        Value::Text(s) => s.clone(),
    }
}

fn render_text(r: &Report) -> String {
    let mut out = String::new();
    writeln!(out, "histories report").unwrap();
    writeln!(out, "generator: {}", r.generator).unwrap();
    writeln!(out, "schema: {}", r.schema).unwrap();
    writeln!(out, "dimension: {}", r.dimension).unwrap();
    writeln!(out, "tolerance profile: {}", r.tolerance_profile).unwrap();
    writeln!(out, "commands: {}", r.sections.len()).unwrap();
    for w in &r.warnings {
        writeln!(out, "warning: {w}").unwrap();
    }
    for s in &r.sections {
        writeln!(out).unwrap();
        writeln!(out, "[{}] {}", s.index, s.kind).unwrap();
        for (k, v) in &s.inputs {
            writeln!(out, "  {k}: {v}").unwrap();
        }
        writeln!(out, "  status: {}", s.status).unwrap();
        for (k, v) in &s.fields {
            writeln!(out, "  {}: {}", k.replace('_', " "), text_value(v)).unwrap();
        }
        for t in &s.tables {
            writeln!(out).unwrap();
            writeln!(out, "  {}", t.name.replace('_', " ")).unwrap();
            render_table(&mut out, t);
        }
    }
    out
}

fn render_table(out: &mut String, t: &Table) {
    let cells: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(text_value).collect()).collect();
    let widths: Vec<usize> = (0..t.columns.len())
        .map(|j| cells.iter().map(|r| r[j].chars().count()).chain([t.columns[j].chars().count()]).max().unwrap_or(0))
        .collect();
    let line = |out: &mut String, row: &[String]| {
        let mut s = String::from("   ");
        for (j, cell) in row.iter().enumerate() {
            let pad = widths[j] - cell.chars().count();
            s.push(' ');
            // numbers right-aligned, everything else left-aligned
            let numeric = cell.starts_with(|c: char| c.is_ascii_digit() || c == '-');
            if numeric {
                s.extend(std::iter::repeat_n(' ', pad));
                s.push_str(cell);
            } else {
                s.push_str(cell);
                s.extend(std::iter::repeat_n(' ', pad));
            }
            s.push(' ');
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(out, &t.columns);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(out, &rule);
    for r in &cells {
        line(out, r);
    }
}

fn round_machine(x: f64) -> Json {
    if !x.is_finite() {
        return Json::Null;
    }
    let rounded: f64 = format_real(x, MACHINE_DECIMALS).parse().expect("formatted float parses");
    json!(if rounded == 0.0 { 0.0 } else { rounded })
}

fn machine_value(v: &Value) -> Json {
    match v {
        Value::Int(i) => json!(i),
        Value::Real(x) => round_machine(*x),
        Value::Complex(z) => json!([round_machine(z.re), round_machine(z.im)]),
        Value::Bool(b) => json!(b),
        Value::Text(s) => json!(s),
    }
}

fn to_json(r: &Report) -> Json {
    let sections: Vec<Json> = r
        .sections
        .iter()
        .map(|s| {
            let inputs: Map<String, Json> = s.inputs.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            let fields: Map<String, Json> = s.fields.iter().map(|(k, v)| (k.clone(), machine_value(v))).collect();
            let tables: Map<String, Json> = s
                .tables
                .iter()
                .map(|t| {
                    let rows: Vec<Json> =
                        t.rows.iter().map(|row| Json::Array(row.iter().map(machine_value).collect())).collect();
                    (t.name.clone(), json!({ "columns": t.columns, "rows": rows }))
                })
                .collect();
            json!({
                "index": s.index,
                "kind": s.kind,
                "inputs": inputs,
                "status": s.status,
                "fields": fields,
                "tables": tables,
            })
        })
        .collect();
    json!({
        "generator": r.generator,
        "schema": r.schema,
        "dimension": r.dimension,
        "tolerance_profile": r.tolerance_profile,
        "warnings": r.warnings,
        "sections": sections,
    })
}
