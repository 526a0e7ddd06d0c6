use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};

/// First 16 hex digits of the SHA-256 of the config's canonical JSON
/// (object keys sorted).
pub fn config_hash<C: Serialize>(config: &C) -> Result<String> {
    let value = serde_json::to_value(config)?;
    Ok(hash_value(&value))
}

fn hash_value(value: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(value).expect("JSON values serialize");
    let digest = Sha256::digest(&bytes);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// An experiment report: a JSON body with `config` and `config_hash`
/// fields and a CSV summary.
pub trait Report: Serialize {
    /// File-name stem, e.g. `clt`.
    fn kind(&self) -> &'static str;
    fn config_hash(&self) -> &str;
    fn summary_csv(&self) -> String;
}

/// Writes `<kind>-<hash>.json` and `<kind>-<hash>.csv` into `dir`.
pub fn write_report<R: Report>(report: &R, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let stem = format!("{}-{}", report.kind(), report.config_hash());
    let json = dir.join(format!("{stem}.json"));
    let csv = dir.join(format!("{stem}.csv"));
    fs::write(&json, report_json(report)?)?;
    fs::write(&csv, report.summary_csv())?;
    Ok((json, csv))
}

/// Pretty JSON body with a trailing newline.
pub fn report_json<R: Serialize>(report: &R) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// Re-derives the hash of a JSON report's `config` and compares it with
/// the recorded `config_hash`.
pub fn verify_report_json(body: &str) -> Result<bool> {
    let value: serde_json::Value = serde_json::from_str(body)?;
    let config = value.get("config").ok_or_else(|| invalid("report has no config field"))?;
    let recorded = value
        .get("config_hash")
        .and_then(|h| h.as_str())
        .ok_or_else(|| Error::Parse("report has no config_hash string".into()))?;
    Ok(hash_value(config) == recorded)
}
