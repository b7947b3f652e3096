use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Map, Value};

use crate::commands::Failure;
use crate::Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// What a subcommand produced.
pub struct Outcome {
    pub params: Value,
    pub result: Value,
    /// Tabular form, when the result has one.
    pub csv: Option<Vec<u8>>,
    /// Replaces the generic text rendering.
    pub text: Option<String>,
    /// False only for a failed self-test; the exit status is then 3.
    pub passed: bool,
}

impl Outcome {
    pub fn new(params: Value, result: Value) -> Self {
        Self {
            params,
            result,
            csv: None,
            text: None,
            passed: true,
        }
    }

    pub fn with_csv(mut self, csv: Vec<u8>) -> Self {
        self.csv = Some(csv);
        self
    }
}

pub fn selftest(name: &str) -> Result<Outcome, Failure> {
    let report = nctorus_core::selftest::run(name)?;
    let mut text = String::new();
    for c in &report.checks {
        text.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    let passed = report.passed;
    let mut o = Outcome::new(json!({ "selftest": true }), serde_json::to_value(&report).map_err(Failure::output)?);
    o.text = Some(text);
    o.passed = passed;
    Ok(o)
}

fn render_text(value: &Value) -> String {
    let mut s = String::new();
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                match v {
                    Value::String(t) => s.push_str(&format!("{k}: {t}\n")),
                    other => s.push_str(&format!("{k}: {other}\n")),
                }
            }
        }
        other => s.push_str(&format!("{other}\n")),
    }
    s
}

fn render(name: &str, o: &Outcome, format: Format) -> Result<Vec<u8>, Failure> {
    match format {
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("schema".into(), json!(crate::SCHEMA));
            doc.insert("command".into(), json!(name));
            doc.insert("params".into(), o.params.clone());
            doc.insert("result".into(), o.result.clone());
            let mut bytes = serde_json::to_vec_pretty(&Value::Object(doc)).map_err(Failure::output)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => o.csv.clone().ok_or_else(|| Failure {
            status: Status::Validation,
            message: format!("{name} has no csv form; use --format json or text"),
        }),
        Format::Text => Ok(o.text.clone().unwrap_or_else(|| render_text(&o.result)).into_bytes()),
    }
}

pub fn emit(name: &str, o: &Outcome, format: Format, path: Option<&Path>) -> Result<(), Failure> {
    let bytes = render(name, o, format)?;
    match path {
        Some(p) => fs::write(p, &bytes).map_err(Failure::output),
        None => std::io::stdout().lock().write_all(&bytes).map_err(Failure::output),
    }
}
