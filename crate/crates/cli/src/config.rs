//! Flat `key=value` run configuration: file values first, then flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use eigenlab::laplacians::{KernelProfile, Metric};
use eigenlab::spaces::{Density, Space};

use crate::error::CliError;

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("config line {}: expected key=value, got '{line}'", i + 1)))?;
            values.insert(normalize(k), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Flag values override file values.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(normalize(key), value.into());
    }

    /// Rejects keys a subcommand does not read.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        for k in self.values.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(CliError::config(format!("unknown key '{k}'; allowed: {}", allowed.join(", "))));
            }
        }
        Ok(())
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Typed value; the default is written back so the echo is complete.
    pub fn get<T: FromStr + Display>(&mut self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        match self.values.get(key) {
            Some(v) => v.parse().map_err(|e| CliError::config(format!("key '{key}': cannot parse '{v}': {e}"))),
            None => {
                self.values.insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        let v = self.values.get(key).ok_or_else(|| CliError::config(format!("missing required key '{key}'")))?;
        v.parse().map_err(|e| CliError::config(format!("key '{key}': cannot parse '{v}': {e}")))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&mut self, key: &str, default: &str) -> Result<Vec<T>, CliError>
    where
        T::Err: Display,
    {
        let raw = self.values.entry(key.to_string()).or_insert_with(|| default.to_string()).clone();
        raw.split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| CliError::config(format!("key '{key}': cannot parse '{s}': {e}"))))
            .collect()
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}

fn normalize(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('-', "_")
}

/// `interval`, `square`, `sphere`, `torus`, `thin-torus`, `sg`, `gaussian`,
/// `exponential`; torus radii and density parameters come from their own
/// keys.
pub fn space(cfg: &mut RunConfig) -> Result<Space, CliError> {
    let name: String = cfg.get("space", "interval".to_string())?;
    let s = match name.as_str() {
        "interval" | "grid" => Space::Interval,
        "square" => Space::Square,
        "sphere" => Space::Sphere,
        "torus" => Space::Torus { major: cfg.get("torus_major", 2.0)?, minor: cfg.get("torus_minor", 1.0)? },
        "thin-torus" | "thin_torus" => {
            Space::Torus { major: cfg.get("torus_major", 1.0)?, minor: cfg.get("torus_minor", 0.1)? }
        }
        "sg" | "gasket" => Space::Gasket,
        "gaussian" => Space::Line(Density::Gaussian { mean: cfg.get("mean", 0.0)?, sd: cfg.get("sd", 1.0)? }),
        "exponential" => Space::Line(Density::Exponential { rate: cfg.get("rate", 1.0)? }),
        other => {
            return Err(CliError::config(format!(
                "unknown space '{other}' (interval, grid, square, sphere, torus, thin-torus, sg, gaussian, exponential)"
            )))
        }
    };
    s.validate().map_err(CliError::from)?;
    Ok(s)
}

/// Bandwidth: `eps` directly, or `eps_rule=power` with `ε = eps_c · n^(−eps_beta)`.
pub fn bandwidth(cfg: &mut RunConfig, n: usize) -> Result<f64, CliError> {
    let rule: String = cfg.get("eps_rule", "fixed".to_string())?;
    match rule.as_str() {
        "fixed" => cfg.require("eps"),
        "power" => {
            let c: f64 = cfg.require("eps_c")?;
            let beta: f64 = cfg.require("eps_beta")?;
            Ok(c * (n as f64).powf(-beta))
        }
        other => Err(CliError::config(format!("unknown eps_rule '{other}' (fixed, power)"))),
    }
}

pub enum GraphKernel {
    Ball,
    Kernel(KernelProfile),
}

pub fn graph_kernel(cfg: &mut RunConfig) -> Result<GraphKernel, CliError> {
    let k: String = cfg.get("kernel", "none".to_string())?;
    if k == "none" || k == "ball" {
        return Ok(GraphKernel::Ball);
    }
    k.parse::<KernelProfile>().map(GraphKernel::Kernel).map_err(CliError::from)
}

pub fn metric(cfg: &mut RunConfig) -> Result<Metric, CliError> {
    let m: String = cfg.get("metric", "euclidean".to_string())?;
    m.parse::<Metric>().map_err(CliError::from)
}
