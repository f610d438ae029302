use serde_json::{Map, Value};

use crate::config::Format;
use crate::CliError;

/// A command result: the canonical JSON document and, for tabular results, the rows of its
/// CSV projection.
pub struct Output {
    pub json: Value,
    pub records: Option<Vec<Value>>,
}

impl Output {
    pub fn single(json: Value) -> Self {
        Output { json, records: None }
    }

    /// Puts `records` under the `records` key of `meta`; CSV rows repeat the scalar fields of `meta`.
    pub fn table(mut meta: Map<String, Value>, records: Vec<Value>) -> Self {
        let common: Map<String, Value> = meta.iter().filter(|(_, v)| !v.is_object() && !v.is_array()).map(|(k, v)| (k.clone(), v.clone())).collect();
        let rows = records
            .iter()
            .map(|r| {
                let mut row = common.clone();
                if let Value::Object(m) = r {
                    row.extend(m.clone());
                }
                Value::Object(row)
            })
            .collect();
        meta.insert("records".into(), Value::Array(records));
        Output { json: Value::Object(meta), records: Some(rows) }
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).map_err(|e| CliError::Failure(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => {
                let rows = match &self.records {
                    Some(r) => r.clone(),
                    None => vec![self.json.clone()],
                };
                to_csv(&rows)
            }
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&key(k), x, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(&key(&i.to_string()), x, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn to_csv(rows: &[Value]) -> Result<String, CliError> {
    let flat: Vec<Vec<(String, String)>> = rows
        .iter()
        .map(|r| {
            let mut f = Vec::new();
            flatten("", r, &mut f);
            f
        })
        .collect();
    let mut header: Vec<String> = Vec::new();
    for (k, _) in flat.iter().flatten() {
        if !header.contains(k) {
            header.push(k.clone());
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Failure(e.to_string());
    w.write_record(&header).map_err(err)?;
    for row in &flat {
        let line: Vec<&str> = header.iter().map(|h| row.iter().find(|(k, _)| k == h).map_or("", |(_, v)| v.as_str())).collect();
        w.write_record(&line).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Failure(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Failure(e.to_string()))
}
