//! Turning a config file plus `--key value` flags into a configuration.
//!
//! Flags mirror config keys one to one (`--d-list` is `d_list`) and win over
//! the file. Values are read as JSON when they parse as JSON and as strings
//! otherwise; list keys also accept comma-separated values (`--d-list 2,32`).

use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use crate::config::{RawConfig, SimulationConfig};
use crate::error::{Result, SimError};

fn parse_value(key: &str, raw: &str) -> Result<Value> {
    let is_list = key.ends_with("_list") || key.ends_with("_grid");
    if is_list && !raw.trim_start().starts_with('[') {
        let items = raw
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                serde_json::from_str(s.trim())
                    .map_err(|_| SimError::config(format!("--{key}: `{s}` is not a number")))
            })
            .collect::<Result<Vec<Value>>>()?;
        return Ok(Value::Array(items));
    }
    Ok(serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string())))
}

/// Merges `--key value` pairs into `doc`.
pub fn apply_overrides(doc: &mut Map<String, Value>, args: &[String]) -> Result<()> {
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let key = flag
            .strip_prefix("--")
            .ok_or_else(|| {
                SimError::config(format!("expected a `--key value` flag, found `{flag}`"))
            })?
            .replace('-', "_");
        let raw = it
            .next()
            .ok_or_else(|| SimError::config(format!("flag --{key} is missing its value")))?;
        let value = parse_value(&key, raw)?;
        doc.insert(key, value);
    }
    Ok(())
}

/// Reads the optional config file, applies flags and an optional forced
/// sweep, then validates.
pub fn load_config(
    path: Option<&Path>,
    overrides: &[String],
    sweep: Option<&str>,
) -> Result<SimulationConfig> {
    let mut doc = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| SimError::Io {
                path: p.into(),
                source,
            })?;
            match serde_json::from_str::<Value>(&text)
                .map_err(|e| SimError::config(format!("{}: {e}", p.display())))?
            {
                Value::Object(map) => map,
                _ => {
                    return Err(SimError::config(format!(
                        "{}: top level must be an object",
                        p.display()
                    )))
                }
            }
        }
        None => Map::new(),
    };
    apply_overrides(&mut doc, overrides)?;
    if let Some(s) = sweep {
        doc.insert("sweep".into(), Value::String(s.into()));
    }
    let raw: RawConfig =
        serde_json::from_value(Value::Object(doc)).map_err(|e| SimError::config(e.to_string()))?;
    raw.validate()
}
