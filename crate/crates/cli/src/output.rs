//! Output manifests: every run writes `<command>-<hash>.json` holding the
//! echoed config, its hash, digests of the data files and the result.

use std::fs;
use std::path::{Path, PathBuf};

use eigenlab::experiments::{config_hash, report_json, verify_report_json};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub struct Run {
    pub command: &'static str,
    pub config: RunConfig,
    pub out_dir: PathBuf,
}

impl Run {
    fn config_value(&self) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("command".into(), Value::String(self.command.into()));
        for (k, v) in self.config.values() {
            m.insert(k.clone(), Value::String(v.clone()));
        }
        Value::Object(m)
    }

    pub fn hash(&self) -> Result<String, CliError> {
        Ok(config_hash(&self.config_value())?)
    }

    /// `<command>-<hash>.<ext>` inside the output directory.
    pub fn path(&self, ext: &str) -> Result<PathBuf, CliError> {
        Ok(self.out_dir.join(format!("{}-{}.{ext}", self.command, self.hash()?)))
    }

    /// Writes the manifest after the data files listed in `outputs`.
    pub fn finish<R: Serialize>(&self, outputs: &[PathBuf], result: &R) -> Result<PathBuf, CliError> {
        let files: Vec<Value> = outputs
            .iter()
            .map(|p| {
                let bytes = fs::read(p)?;
                let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                Ok(json!({ "file": name, "sha256": hex(&Sha256::digest(&bytes)) }))
            })
            .collect::<Result<_, std::io::Error>>()?;
        let body = json!({
            "config": self.config_value(),
            "config_hash": self.hash()?,
            "outputs": files,
            "result": serde_json::to_value(result).map_err(eigenlab::Error::from)?,
        });
        let path = self.path("json")?;
        fs::create_dir_all(&self.out_dir)?;
        fs::write(&path, report_json(&body)?)?;
        Ok(path)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Re-derives the manifest hash, the hash of any embedded experiment
/// report and the digests of the listed data files.
pub fn verify(path: &Path) -> Result<Vec<String>, CliError> {
    let body = fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut problems = Vec::new();
    if !verify_report_json(&body)? {
        problems.push("config_hash does not match the echoed config".to_string());
    }
    let value: Value = serde_json::from_str(&body).map_err(eigenlab::Error::from)?;
    if let Some(report) = value.get("result").and_then(embedded_report) {
        if !verify_report_json(&report.to_string())? {
            problems.push("embedded report hash does not match its config".to_string());
        }
    }
    let dir = path.parent().unwrap_or(Path::new("."));
    for f in value.get("outputs").and_then(Value::as_array).into_iter().flatten() {
        let name = f.get("file").and_then(Value::as_str).unwrap_or("");
        let want = f.get("sha256").and_then(Value::as_str).unwrap_or("");
        match fs::read(dir.join(name)) {
            Ok(bytes) if hex(&Sha256::digest(&bytes)) == want => {}
            Ok(_) => problems.push(format!("{name}: digest mismatch")),
            Err(e) => problems.push(format!("{name}: {e}")),
        }
    }
    Ok(problems)
}

/// A report with its own `config` and `config_hash`, possibly inside a
/// retry record's `attempts`.
fn embedded_report(v: &Value) -> Option<&Value> {
    if v.get("config_hash").is_some() {
        return Some(v);
    }
    v.get("attempts").and_then(Value::as_array).and_then(|a| a.last())
}
