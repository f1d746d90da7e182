//! Run records and all-or-nothing output writing.

use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use optobell_core::sweep::round_sig12;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const TOOL: &str = "optobell";

/// JSON envelope of every structured result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    /// Effective inputs after merging config file and flags.
    pub inputs: Value,
    pub outputs: Value,
    /// Present only when timing was requested, so default output stays reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_s: Option<f64>,
}

impl RunRecord {
    pub fn new(
        command: &str,
        seed: Option<u64>,
        inputs: impl Serialize,
        outputs: impl Serialize,
    ) -> anyhow::Result<Self> {
        Ok(Self {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            inputs: serde_json::to_value(inputs)?,
            outputs: serde_json::to_value(outputs)?,
            wall_clock_s: None,
        })
    }

    /// Pretty JSON with every float at 12 significant digits, newline-terminated.
    pub fn to_json(&self) -> anyhow::Result<String> {
        let mut value = serde_json::to_value(self)?;
        round_floats(&mut value);
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        Ok(text)
    }
}

pub fn round_floats(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            if let Some(r) = serde_json::Number::from_f64(round_sig12(x)) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Files and stdout text of one command; nothing touches disk until `commit`.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
    stdout: String,
}

impl Outputs {
    pub fn file(&mut self, path: PathBuf, bytes: impl Into<Vec<u8>>) {
        self.files.push((path, bytes.into()));
    }

    pub fn print(&mut self, text: &str) {
        self.stdout.push_str(text);
    }

    /// Writes every file; on the first failure removes the ones already written.
    pub fn commit(self) -> anyhow::Result<()> {
        let mut written: Vec<&PathBuf> = Vec::new();
        for (path, bytes) in &self.files {
            if let Err(e) = fs::write(path, bytes) {
                for done in written {
                    let _ = fs::remove_file(done);
                }
                return Err(e).with_context(|| format!("cannot write {}", path.display()));
            }
            written.push(path);
        }
        print!("{}", self.stdout);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding_reaches_nested_floats() {
        let mut v = json!({"a": [0.1234567890123456, 3], "b": {"c": 2.0}});
        round_floats(&mut v);
        assert_eq!(v["a"][0].as_f64().unwrap(), 0.123456789012);
        assert!(v["a"][1].is_u64());
        assert_eq!(v["b"]["c"].as_f64().unwrap(), 2.0);
    }

    #[test]
    fn record_round_trips() {
        let rec =
            RunRecord::new("probe", Some(3), json!({"p": 0.1}), json!({"joint": 0.7})).unwrap();
        let text = rec.to_json().unwrap();
        let back: RunRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rec);
        assert_eq!(back.to_json().unwrap(), text);
        assert!(!text.contains("wall_clock"));
    }

    #[test]
    fn failed_commit_removes_earlier_files() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("a.csv");
        let mut out = Outputs::default();
        out.file(good.clone(), "x");
        out.file(dir.path().join("missing/b.svg"), "y");
        assert!(out.commit().is_err());
        assert!(!good.exists());
    }
}
