//! JSON and CSV rendering of command payloads.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

pub fn render<T: Serialize>(payload: &T, format: OutputFormat) -> String {
    let value = serde_json::to_value(payload).expect("payloads serialize");
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&value).expect("valid json");
            s.push('\n');
            s
        }
        OutputFormat::Csv => to_csv(&value),
    }
}

/// One header line and one row per record. Nested objects flatten to
/// dotted column names; a top-level `rows` array (if present) becomes the
/// record list, otherwise the payload itself is the single record.
pub fn to_csv(value: &Value) -> String {
    let records: Vec<&Value> = match value.get("rows") {
        Some(Value::Array(rows)) => rows.iter().collect(),
        _ => vec![value],
    };
    let flat: Vec<Vec<(String, String)>> = records
        .iter()
        .map(|r| {
            let mut cols = Vec::new();
            flatten("", r, &mut cols);
            cols
        })
        .collect();
    let header: Vec<String> = flat
        .first()
        .map(|cols| cols.iter().map(|(k, _)| k.clone()).collect())
        .unwrap_or_default();
    let mut out = header.join(",");
    out.push('\n');
    for cols in &flat {
        let row: Vec<String> = header
            .iter()
            .map(|h| {
                cols.iter()
                    .find(|(k, _)| k == h)
                    .map(|(_, v)| v.clone())
                    .unwrap_or_default()
            })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        // arrays are not tabular; skip them
        Value::Array(_) => {}
        Value::String(s) => out.push((prefix.to_string(), quote(s))),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
