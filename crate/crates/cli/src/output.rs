//! File writers shared by the commands.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::CliError;

/// Copy of `v` with every object's keys in sorted order.
pub fn sorted(v: &Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            let mut out = Map::new();
            for k in keys {
                out.insert(k.clone(), sorted(&m[k]));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.iter().map(sorted).collect()),
        other => other.clone(),
    }
}

pub fn canonical_string(v: &Value, pretty: bool) -> String {
    let v = sorted(v);
    if pretty {
        serde_json::to_string_pretty(&v).expect("json value serializes")
    } else {
        serde_json::to_string(&v).expect("json value serializes")
    }
}

pub fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    let mut text = canonical_string(v, true);
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub fn create_file(path: &Path) -> Result<fs::File, CliError> {
    fs::File::create(path).map_err(|e| CliError::io(path, e))
}

/// File name for a channel label; anything outside `[A-Za-z0-9._-]` becomes `_`.
pub fn channel_file(dir: &Path, label: &str, ext: &str) -> PathBuf {
    let safe: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect();
    dir.join(format!("{safe}.{ext}"))
}

/// Plain numeric CSV writer; `None` cells are left empty.
pub fn write_table(
    path: &Path,
    header: &[&str],
    rows: &[Vec<Option<f64>>],
) -> Result<(), CliError> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| c.map(|v| v.to_string()).unwrap_or_default())
            .collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
