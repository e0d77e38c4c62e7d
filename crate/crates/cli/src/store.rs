//! Append-only JSON-lines store of run records.
//!
//! One UTF-8 JSON object per line, no BOM. Fields: `command`, `params`, `result`,
//! `version`, `wall_time_ms`, `timestamp` (UTC, RFC 3339) and an optional `seed`.

use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::command::Command;

pub const STORE_ENV: &str = "APSQUARES_STORE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub command: String,
    pub params: Map<String, Value>,
    pub result: Value,
    pub version: String,
    pub wall_time_ms: f64,
    pub timestamp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: unknown or malformed command: {source}")]
    Command { line: usize, source: serde_json::Error },
    #[error("store file starts with a byte-order mark")]
    Bom,
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl RunRecord {
    /// Rebuilds the command this record was produced by.
    pub fn to_command(&self) -> Result<Command, serde_json::Error> {
        let mut obj = Map::new();
        obj.insert("command".into(), Value::String(self.command.clone()));
        obj.insert("params".into(), Value::Object(self.params.clone()));
        serde_json::from_value(Value::Object(obj))
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// Decodes one store line.
pub fn parse_record(line: &str) -> Result<RunRecord, serde_json::Error> {
    serde_json::from_str(line)
}

/// Decodes a whole store file; blank lines are skipped. Commands are validated too.
pub fn parse_store(text: &str) -> Result<Vec<RunRecord>, StoreError> {
    if text.starts_with('\u{feff}') {
        return Err(StoreError::Bom);
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_record(line).map_err(|source| StoreError::Json { line: i + 1, source })?;
        record.to_command().map_err(|source| StoreError::Command { line: i + 1, source })?;
        out.push(record);
    }
    Ok(out)
}

pub fn read_store(path: &Path) -> Result<Vec<RunRecord>, StoreError> {
    parse_store(&std::fs::read_to_string(path)?)
}

pub fn append_record(path: &Path, record: &RunRecord) -> io::Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = record.to_line();
    line.push('\n');
    file.write_all(line.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunRecord {
        RunRecord {
            command: "bound".into(),
            params: serde_json::from_str(r#"{"n":4}"#).unwrap(),
            result: serde_json::json!({"n": 4, "fermat_upper_bound": 3}),
            version: "0.1.0".into(),
            wall_time_ms: 0.25,
            timestamp: "2026-01-01T00:00:00Z".into(),
            seed: None,
        }
    }

    #[test]
    fn line_roundtrip() {
        let r = sample();
        assert_eq!(parse_record(&r.to_line()).unwrap(), r);
        assert!(!r.to_line().contains('\n'));
    }

    #[test]
    fn store_rejects_bom_and_unknown_commands() {
        let line = sample().to_line();
        assert!(matches!(parse_store(&format!("\u{feff}{line}")), Err(StoreError::Bom)));
        let bogus = line.replace("\"bound\"", "\"frobnicate\"");
        assert!(matches!(parse_store(&bogus), Err(StoreError::Command { line: 1, .. })));
        assert!(matches!(parse_store("{not json"), Err(StoreError::Json { line: 1, .. })));
        assert_eq!(parse_store(&format!("{line}\n\n{line}\n")).unwrap().len(), 2);
    }

    #[test]
    fn unknown_fields_rejected() {
        let line = sample().to_line().replacen('{', r#"{"extra":1,"#, 1);
        assert!(parse_record(&line).is_err());
    }
}
