use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use eigenlab::eigenmap::{build_eigenmap, fit_polynomial_image, Eigenmap};
use eigenlab::exact_spectra::{
    grid_graph_eigenpairs, group_multiplicities, interval_eigenpairs, product_eigenpairs, BoundaryCondition, ProductSpace,
};
use eigenlab::experiments::{
    clt_with_retries, default_eval_points, epsilon_sweep, log_grid, sg_probe, sg_rescaling_probe, CltMode, CltSetup,
    SgProbeConfig, SweepConfig, TestFunction,
};
use eigenlab::laplacians::{graph_lap_eps, graph_lap_kernel, write_coo, Kernel, KernelProfile, Metric};
use eigenlab::linalg::SparseSymOperator;
use eigenlab::rng::substream_seed;
use eigenlab::spaces::{sample_gasket, sample_grid, sample_uniform, PointSet, Space, DEFAULT_ADDRESS_LENGTH};
use serde::Serialize;
use serde_json::json;

use crate::config::{bandwidth, graph_kernel, metric, space, GraphKernel, RunConfig};
use crate::error::CliError;
use crate::output::Run;

const SAMPLE_KEYS: &[&str] = &["space", "n", "seed", "addr_len", "torus_major", "torus_minor", "mean", "sd", "rate"];
const GRAPH_KEYS: &[&str] = &["input", "eps", "eps_rule", "eps_c", "eps_beta", "kernel", "metric"];

fn keys(groups: &[&[&'static str]]) -> Vec<&'static str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

/// Points from `input` when given, otherwise sampled from the config.
fn points(cfg: &mut RunConfig) -> Result<PointSet<f64>, CliError> {
    if let Some(path) = cfg.raw("input").map(str::to_string) {
        let f = File::open(&path).map_err(|e| CliError::config(format!("cannot open input {path}: {e}")))?;
        return Ok(PointSet::read_csv(BufReader::new(f), format!("file:{path}"))?);
    }
    let is_grid = cfg.raw("space") == Some("grid");
    let sp = space(cfg)?;
    let n: usize = cfg.require("n")?;
    let seed: u64 = cfg.get("seed", 0)?;
    if is_grid {
        return Ok(sample_grid(n)?);
    }
    if sp == Space::Gasket {
        let m: usize = cfg.get("addr_len", DEFAULT_ADDRESS_LENGTH)?;
        return Ok(sample_gasket(n, m, seed)?);
    }
    Ok(sample_uniform(&sp, n, seed)?)
}

fn graph(cfg: &mut RunConfig, pts: &PointSet<f64>) -> Result<SparseSymOperator<f64>, CliError> {
    let eps = bandwidth(cfg, pts.len())?;
    let m = metric(cfg)?;
    if m == Metric::DCell && pts.addresses().is_none() {
        return Err(CliError::config("metric=dcell needs gasket points with addresses"));
    }
    Ok(match graph_kernel(cfg)? {
        GraphKernel::Ball => graph_lap_eps(pts, eps, m)?,
        GraphKernel::Kernel(p) => graph_lap_kernel(pts, &Kernel::new(p), eps, m)?,
    })
}

pub fn sample(run: &mut Run) -> Result<PathBuf, CliError> {
    run.config.check_keys(SAMPLE_KEYS)?;
    let pts = points(&mut run.config)?;
    let csv = run.path("csv")?;
    fs::create_dir_all(&run.out_dir)?;
    pts.write_csv(BufWriter::new(File::create(&csv)?))?;
    run.finish(&[csv], &json!({ "points": pts.len(), "dim": pts.dim(), "distribution": pts.distribution() }))
}

pub fn laplacian(run: &mut Run) -> Result<PathBuf, CliError> {
    run.config.check_keys(&keys(&[SAMPLE_KEYS, GRAPH_KEYS]))?;
    let pts = points(&mut run.config)?;
    let op = graph(&mut run.config, &pts)?;
    let coo = run.path("coo")?;
    fs::create_dir_all(&run.out_dir)?;
    let mut w = BufWriter::new(File::create(&coo)?);
    write_coo(&op, &mut w)?;
    w.flush()?;
    run.finish(&[coo], &json!({ "n": op.n(), "nnz": op.nnz_adjacency(), "isolated": op.isolated_count() }))
}

#[derive(Serialize)]
struct SpectrumSummary {
    eigenvalues: Vec<f64>,
    skipped_zero_modes: usize,
    n: usize,
    dim: usize,
}

pub fn eigenmap(run: &mut Run) -> Result<PathBuf, CliError> {
    run.config.check_keys(&keys(&[SAMPLE_KEYS, GRAPH_KEYS, &["dim", "tol"]]))?;
    let pts = points(&mut run.config)?;
    let op = graph(&mut run.config, &pts)?;
    let dim: usize = run.config.get("dim", 2)?;
    let tol: f64 = run.config.get("tol", 1e-8)?;
    let map = build_eigenmap(&op, dim, tol)?;
    let csv = run.path("csv")?;
    fs::create_dir_all(&run.out_dir)?;
    map.write_csv(&pts, BufWriter::new(File::create(&csv)?))?;
    let summary =
        SpectrumSummary { eigenvalues: map.eigenvalues.clone(), skipped_zero_modes: map.skipped_zero_modes, n: map.n(), dim };
    run.finish(&[csv], &summary)
}

#[derive(Serialize)]
struct FitRow {
    x_mode: usize,
    y_mode: usize,
    degree: usize,
    /// Highest degree first.
    coefficients: Vec<f64>,
    residual: f64,
}

/// `pairs` lists `x:y:degree` triples of 1-based modes.
pub fn fit(run: &mut Run) -> Result<PathBuf, CliError> {
    run.config.check_keys(&["input", "pairs"])?;
    let input: String = run.config.require("input")?;
    let spec: Vec<String> = run.config.list("pairs", "1:2:2,1:3:3")?;
    let f = File::open(&input).map_err(|e| CliError::config(format!("cannot open input {input}: {e}")))?;
    let (_, map) = Eigenmap::<f64>::read_csv(BufReader::new(f))?;
    let mut rows = Vec::new();
    for s in &spec {
        let parts: Vec<usize> = s
            .split(':')
            .map(|p| p.parse().map_err(|_| CliError::config(format!("pair '{s}' is not x:y:degree"))))
            .collect::<Result<_, _>>()?;
        let [x, y, degree] = parts[..] else {
            return Err(CliError::config(format!("pair '{s}' is not x:y:degree")));
        };
        let pf = fit_polynomial_image(&map, x, y, degree)?;
        rows.push(FitRow { x_mode: x, y_mode: y, degree, coefficients: pf.coefficients.clone(), residual: pf.residual });
    }
    run.finish(&[], &rows)
}

pub fn clt(run: &mut Run, check: bool) -> Result<PathBuf, CliError> {
    run.config.check_keys(&[
        "mode", "space", "f", "x", "kernel", "eps", "n", "trials", "seed", "threshold", "retries", "mean", "sd", "rate",
        "torus_major", "torus_minor", "sd_tolerance",
    ])?;
    let cfg = &mut run.config;
    let mode: CltMode = cfg.get("mode", "kernel-difference".to_string())?.parse()?;
    let sp = space(cfg)?;
    let setup = CltSetup {
        mode,
        space: sp,
        f: cfg.get("f", "x".to_string())?.parse::<TestFunction>()?,
        x: cfg.list("x", "0")?,
        kernel: cfg.get("kernel", "indicator".to_string())?.parse::<KernelProfile>()?,
        eps: cfg.get("eps", 0.05)?,
        n: cfg.get("n", 20_000)?,
    };
    let trials: usize = cfg.get("trials", 500)?;
    let seed: u64 = cfg.get("seed", 0)?;
    let threshold: f64 = cfg.get("threshold", 0.01)?;
    let retries: usize = cfg.get("retries", 3)?;
    let sd_tol: f64 = cfg.get("sd_tolerance", 0.1)?;
    let result = clt_with_retries(&setup, trials, seed, threshold, retries)?;
    let last = result.attempts.last().expect("at least one attempt");
    let csv = run.path("csv")?;
    fs::create_dir_all(&run.out_dir)?;
    fs::write(&csv, eigenlab::experiments::Report::summary_csv(last))?;
    let sd_ratio = last.raw_sd / last.predicted_raw_sd;
    let manifest = run.finish(&[csv], &result)?;
    if check {
        if !result.passed {
            return Err(CliError::check(format!("KS p-value stayed at or below {threshold} in all attempts")));
        }
        if (sd_ratio - 1.0).abs() > sd_tol {
            return Err(CliError::check(format!("raw sd / predicted sd = {sd_ratio:.4} is outside 1 ± {sd_tol}")));
        }
    }
    Ok(manifest)
}

pub fn sweep(run: &mut Run, check: bool) -> Result<PathBuf, CliError> {
    run.config.check_keys(&[
        "space", "f", "n_grid", "eps_lo", "eps_hi", "eps_count", "trials", "seed", "slope_lo", "slope_hi", "mean", "sd",
        "rate", "torus_major", "torus_minor",
    ])?;
    let cfg = &mut run.config;
    let config = SweepConfig {
        space: space(cfg)?,
        f: cfg.get("f", "cos_pi".to_string())?.parse::<TestFunction>()?,
        n_grid: cfg.list("n_grid", "500,1000,2000,4000,8000")?,
        eps_grid: log_grid(cfg.get("eps_lo", 1e-3)?, cfg.get("eps_hi", 0.5)?, cfg.get("eps_count", 28)?)?,
        trials: cfg.get("trials", 20)?,
        seed: cfg.get("seed", 0)?,
        eval_points: default_eval_points(),
    };
    let (lo, hi): (f64, f64) = (cfg.get("slope_lo", -0.27)?, cfg.get("slope_hi", -0.13)?);
    let result = epsilon_sweep(&config)?;
    let csv = run.path("csv")?;
    fs::create_dir_all(&run.out_dir)?;
    fs::write(&csv, eigenlab::experiments::Report::summary_csv(&result))?;
    let manifest = run.finish(&[csv], &result)?;
    if check {
        let slope = result.error_fit.map(|f| f.slope);
        if !slope.is_some_and(|s| (lo..=hi).contains(&s)) {
            return Err(CliError::check(format!("min-error exponent {slope:?} is outside [{lo}, {hi}]")));
        }
        if let Some(a) = result.argmin.iter().find(|a| !a.interior) {
            return Err(CliError::check(format!("argmin ε = {} at n = {} sits at the grid end", a.eps, a.n)));
        }
    }
    Ok(manifest)
}

pub fn sgprobe(run: &mut Run, check: bool) -> Result<PathBuf, CliError> {
    run.config.check_keys(&[
        "mode", "n", "eps", "seed", "seeds", "seed_count", "metrics", "addr_len", "cell_level", "levels", "modes", "gap_max",
        "rms_ratio_max",
    ])?;
    let cfg = &mut run.config;
    let mode: String = cfg.get("mode", "probe".to_string())?;
    let report = match mode.as_str() {
        "probe" => {
            let seeds: Vec<u64> = if cfg.has("seeds") {
                cfg.list("seeds", "")?
            } else {
                let master: u64 = cfg.get("seed", 0)?;
                let count: usize = cfg.get("seed_count", 5)?;
                (0..count as u64).map(|i| substream_seed(master, i)).collect()
            };
            let metrics: Vec<String> = cfg.list("metrics", "euclidean")?;
            let config = SgProbeConfig {
                n: cfg.get("n", 3000)?,
                eps: cfg.get("eps", 0.1)?,
                address_length: cfg.get("addr_len", DEFAULT_ADDRESS_LENGTH)?,
                cell_level: cfg.get("cell_level", 4)?,
                seeds,
                metrics: metrics.iter().map(|m| m.parse::<Metric>()).collect::<Result<_, _>>()?,
            };
            sg_probe(&config)?
        }
        "rescale" => sg_rescaling_probe(&cfg.list::<usize>("levels", "4,5,6,7")?, cfg.get("modes", 3)?)?,
        other => return Err(CliError::config(format!("unknown sgprobe mode '{other}' (probe, rescale)"))),
    };
    let gap_max: f64 = cfg.get("gap_max", 0.05)?;
    let rms_max: f64 = cfg.get("rms_ratio_max", 0.1)?;
    let csv = run.path("csv")?;
    fs::create_dir_all(&run.out_dir)?;
    fs::write(&csv, eigenlab::experiments::Report::summary_csv(&report))?;
    let manifest = run.finish(&[csv], &report)?;
    if check {
        if let Some(s) = report.seeds.iter().find(|s| s.gap_ratio >= gap_max) {
            return Err(CliError::check(format!("seed {} has gap ratio {:.4} ≥ {gap_max}", s.seed, s.gap_ratio)));
        }
        if let Some(p) = report.pairs.iter().find(|p| p.rms_after >= rms_max * p.rms_before) {
            return Err(CliError::check(format!(
                "seeds {} and {}: aligned RMS {:.4} is not below {rms_max} × {:.4}",
                p.seed_a, p.seed_b, p.rms_after, p.rms_before
            )));
        }
        if report.ratios_5.iter().any(|r| (r - 1.0).abs() > 0.1) || report.ratios_4.iter().any(|r| 1.0 / r < 1.2) {
            return Err(CliError::check(format!(
                "rescaling ratios 5^m {:?} / 4^m {:?} miss their targets",
                report.ratios_5, report.ratios_4
            )));
        }
    }
    Ok(manifest)
}

fn boundary(cfg: &mut RunConfig) -> Result<BoundaryCondition, CliError> {
    let bc: String = cfg.get("bc", "neumann".to_string())?;
    Ok(match bc.as_str() {
        "neumann" => BoundaryCondition::Neumann,
        "dirichlet" => BoundaryCondition::Dirichlet,
        "periodic" => BoundaryCondition::Periodic,
        "robin" => BoundaryCondition::Robin { a: cfg.require("robin_a")?, b: cfg.require("robin_b")? },
        other => return Err(CliError::config(format!("unknown bc '{other}' (neumann, dirichlet, periodic, robin)"))),
    })
}

/// Closed-form spectra: `kind` is `interval`, `grid`, `square` or `torus`.
pub fn exactspec(run: &mut Run) -> Result<PathBuf, CliError> {
    run.config.check_keys(&["kind", "bc", "robin_a", "robin_b", "kmax", "n"])?;
    let cfg = &mut run.config;
    let kind: String = cfg.get("kind", "interval".to_string())?;
    let (values, mult): (Vec<f64>, Option<Vec<usize>>) = match kind.as_str() {
        "interval" => {
            let bc = boundary(cfg)?;
            let kmax: usize = cfg.get("kmax", 10)?;
            (interval_eigenpairs::<f64>(bc, kmax)?.iter().map(|e| e.eigenvalue).collect(), None)
        }
        "grid" => {
            let n: usize = cfg.get("n", 50)?;
            (grid_graph_eigenpairs::<f64>(n)?.into_iter().map(|(l, _)| l).collect(), None)
        }
        "square" | "torus" => {
            let space = if kind == "square" { ProductSpace::Square } else { ProductSpace::FlatTorus };
            let kmax: usize = cfg.get("kmax", 4)?;
            let vals: Vec<f64> = product_eigenpairs::<f64>(space, kmax)?.iter().map(|e| e.eigenvalue).collect();
            let groups = group_multiplicities(&vals, 1e-12);
            (groups.iter().map(|g| g.0).collect(), Some(groups.iter().map(|g| g.1).collect()))
        }
        other => return Err(CliError::config(format!("unknown kind '{other}' (interval, grid, square, torus)"))),
    };
    let csv = run.path("csv")?;
    fs::create_dir_all(&run.out_dir)?;
    let mut body = String::from("index,eigenvalue,multiplicity\n");
    for (i, v) in values.iter().enumerate() {
        body.push_str(&format!("{i},{v:.16e},{}\n", mult.as_ref().map_or(1, |m| m[i])));
    }
    fs::write(&csv, body)?;
    run.finish(&[csv], &json!({ "eigenvalues": values, "multiplicities": mult }))
}
