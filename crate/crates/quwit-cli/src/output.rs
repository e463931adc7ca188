//! Rendering helpers shared by the subcommands: 4-decimal tables, CSV
//! rows, and JSON documents with complex values as [re, im] pairs.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use quwit::linalg::ComplexMatrix;
use serde_json::Value;

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

pub fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

pub fn fmt_c4(z: Complex64) -> String {
    format!("{:+.4}{:+.4}i", z.re, z.im)
}

pub fn cnum(z: Complex64) -> Value {
    serde_json::json!([z.re, z.im])
}

pub fn cmatrix(m: &ComplexMatrix) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|r| Value::Array((0..m.cols()).map(|c| cnum(m.get(r, c))).collect()))
        .collect();
    Value::Array(rows)
}

pub fn csv_row(fields: &[String]) -> String {
    let mut line = fields.join(",");
    line.push('\n');
    line
}

pub fn render_json(doc: &Value) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("serializable document");
    text.push('\n');
    text
}

/// Writes to the file when a path is given, otherwise to stdout.
pub fn deliver(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
