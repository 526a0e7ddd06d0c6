use rayon::prelude::*;
use serde::Serialize;

use super::functions::TestFunction;
use super::report::{config_hash, Report};
use super::stats::{mean_sd, rate_fit, RateFit};
use crate::error::{invalid, Error, Result};
use crate::rng::substream_seed;
use crate::spaces::{sample_density_1d, sample_uniform, Space};

/// 21 equally spaced points of `[−0.8, 0.8]`.
pub fn default_eval_points() -> Vec<f64> {
    (0..21).map(|i| -0.8 + 0.08 * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    /// Interval or a line with a density.
    pub space: Space,
    pub f: TestFunction,
    pub n_grid: Vec<usize>,
    pub eps_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub eval_points: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub n: usize,
    pub eps: f64,
    /// False when some trial had an empty neighborhood at an evaluation
    /// point; such cells are excluded from the argmin and the fits.
    pub valid: bool,
    pub trials: usize,
    pub mean_error: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArgminRow {
    pub n: usize,
    pub index: usize,
    pub eps: f64,
    pub error: f64,
    /// Neither the first nor the last entry of the ε grid.
    pub interior: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub config_hash: String,
    /// `n`-major: cell `(i, j)` sits at `i · |eps_grid| + j`.
    pub cells: Vec<SweepCell>,
    pub argmin: Vec<ArgminRow>,
    /// `log argmin ε` against `log n`.
    pub eps_fit: Option<RateFit>,
    /// `log min error` against `log n`.
    pub error_fit: Option<RateFit>,
}

impl Report for SweepResult {
    fn kind(&self) -> &'static str {
        "sweep"
    }

    fn config_hash(&self) -> &str {
        &self.config_hash
    }

    fn summary_csv(&self) -> String {
        let mut s = String::from("n,eps,valid,trials,mean_error,std_error,is_argmin\n");
        for c in &self.cells {
            let is_min = self.argmin.iter().any(|a| a.n == c.n && a.eps == c.eps);
            s.push_str(&format!("{},{},{},{},{},{},{}\n", c.n, c.eps, c.valid, c.trials, c.mean_error, c.std_error, is_min));
        }
        s
    }
}

/// Errors of one sample against every ε: the mean over evaluation points
/// of `|ε⁻² L_{ε,n} f(x) − f″(x)/6|`, or `None` when a neighborhood is
/// empty.
fn trial_errors(sorted: &[f64], f: TestFunction, eps_grid: &[f64], xs: &[f64]) -> Vec<Option<f64>> {
    let fy: Vec<f64> = sorted.iter().map(|&y| f.value(y)).collect();
    eps_grid
        .iter()
        .map(|&eps| {
            let mut total = 0.0;
            for &x in xs {
                let lo = sorted.partition_point(|&y| y < x - eps);
                let hi = sorted.partition_point(|&y| y <= x + eps);
                if hi == lo {
                    return None;
                }
                let fx = f.value(x);
                let sum: f64 = fy[lo..hi].iter().map(|v| v - fx).sum();
                let lap = sum / (hi - lo) as f64 / (eps * eps);
                total += (lap - f.d2(x) / 6.0).abs();
            }
            Some(total / xs.len() as f64)
        })
        .collect()
}

/// Mean absolute error of the rescaled random graph Laplacian over an
/// `(n, ε)` grid. Every ε at a given `(n, trial)` reuses one sample, drawn
/// from substream `i · trials + t` of the seed.
pub fn epsilon_sweep(config: &SweepConfig) -> Result<SweepResult> {
    if config.n_grid.is_empty() || config.eps_grid.is_empty() || config.eval_points.is_empty() {
        return Err(invalid("sweep grids and evaluation set must be nonempty"));
    }
    if config.trials < 2 {
        return Err(invalid("a sweep needs at least 2 trials per cell"));
    }
    if config.eps_grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) || config.n_grid.contains(&0) {
        return Err(invalid("ε values and sample sizes must be positive"));
    }
    match config.space {
        Space::Interval => {}
        Space::Line(d) => d.validate()?,
        ref other => return Err(Error::Unsupported(format!("ε sweeps on {}", other.name()))),
    }
    let jobs: Vec<(usize, usize)> =
        (0..config.n_grid.len()).flat_map(|i| (0..config.trials).map(move |t| (i, t))).collect();
    let per_job = jobs
        .par_iter()
        .map(|&(i, t)| {
            let n = config.n_grid[i];
            let seed = substream_seed(config.seed, (i * config.trials + t) as u64);
            let pts = match config.space {
                Space::Line(d) => sample_density_1d::<f64>(&d, n, seed)?,
                _ => sample_uniform::<f64>(&Space::Interval, n, seed)?,
            };
            let mut xs = pts.first_coordinates();
            xs.sort_by(|a, b| a.total_cmp(b));
            Ok(trial_errors(&xs, config.f, &config.eps_grid, &config.eval_points))
        })
        .collect::<Result<Vec<_>>>()?;

    let ne = config.eps_grid.len();
    let mut cells = Vec::with_capacity(config.n_grid.len() * ne);
    let mut argmin = Vec::new();
    for (i, &n) in config.n_grid.iter().enumerate() {
        let rows = &per_job[i * config.trials..(i + 1) * config.trials];
        let mut best: Option<(usize, f64)> = None;
        for (j, &eps) in config.eps_grid.iter().enumerate() {
            let errs: Option<Vec<f64>> = rows.iter().map(|r| r[j]).collect();
            let cell = match errs {
                Some(e) => {
                    let (m, sd) = mean_sd(&e);
                    if best.is_none_or(|(_, b)| m < b) {
                        best = Some((j, m));
                    }
                    SweepCell { n, eps, valid: true, trials: e.len(), mean_error: m, std_error: sd / (e.len() as f64).sqrt() }
                }
                None => SweepCell { n, eps, valid: false, trials: config.trials, mean_error: f64::NAN, std_error: f64::NAN },
            };
            cells.push(cell);
        }
        if let Some((j, e)) = best {
            argmin.push(ArgminRow { n, index: j, eps: config.eps_grid[j], error: e, interior: j > 0 && j + 1 < ne });
        }
    }
    let ln = |v: f64| v.ln();
    let lx: Vec<f64> = argmin.iter().map(|a| ln(a.n as f64)).collect();
    let eps_fit = rate_fit(&lx, &argmin.iter().map(|a| ln(a.eps)).collect::<Vec<_>>()).ok();
    let error_fit = rate_fit(&lx, &argmin.iter().map(|a| ln(a.error)).collect::<Vec<_>>()).ok();
    Ok(SweepResult { config_hash: config_hash(config)?, config: config.clone(), cells, argmin, eps_fit, error_fit })
}

