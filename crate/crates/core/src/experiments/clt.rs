use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::functions::TestFunction;
use super::report::{config_hash, Report};
use super::stats::{ks_standard_normal, mean_sd, rate_fit, RateFit};
use crate::error::{invalid, Error, Result};
use crate::laplacians::{appendix_d_expectation, appendix_d_sample, weighted_averaging_lap, Kernel, KernelProfile};
use crate::quadrature::adaptive_simpson_split;
use crate::rng::{open_unit, substream_seed};
use crate::spaces::{sample_density_1d, sample_uniform, Density, PointSet, Space};

/// Which normalized statistic a CLT run checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CltMode {
    /// `√n (L_{K,n} f(x) − E) / √Var` with `K(x, y) = k(|x − y|/ε)`.
    KernelMean,
    /// `√(nε³)(ε⁻² L_{ε,n} f(x) − ε⁻² L_ε f(x)) / s`, `s = |f′(x)| / √(6 g(x))`.
    BallAverage,
    /// `√(nε^{d+2})(D_{ε,n} f(p) − D_ε f(p)) / s`, `s² = f′(p)² g(p) ∫K²t²`.
    KernelDifference,
    /// Standard normal draws through the same pipeline.
    Sanity,
}

impl std::str::FromStr for CltMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel-mean" | "2.6" => Ok(CltMode::KernelMean),
            "ball-average" | "4.7" => Ok(CltMode::BallAverage),
            "kernel-difference" | "A.1" | "a1" => Ok(CltMode::KernelDifference),
            "sanity" => Ok(CltMode::Sanity),
            other => Err(invalid(format!(
                "unknown CLT mode '{other}' (kernel-mean, ball-average, kernel-difference, sanity)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltSetup {
    pub mode: CltMode,
    /// Interval, square (kernel-difference only) or a line with a density.
    pub space: Space,
    pub f: TestFunction,
    /// Evaluation point (`p`); its dimension matches the space.
    pub x: Vec<f64>,
    pub kernel: KernelProfile,
    pub eps: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltConfig {
    pub setup: CltSetup,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub config: CltConfig,
    pub config_hash: String,
    /// Normalized statistic per trial.
    pub samples: Vec<f64>,
    /// Unnormalized centered statistic per trial.
    pub raw: Vec<f64>,
    /// Limit scale `s`.
    pub scale: f64,
    /// Centering value from quadrature.
    pub center: f64,
    /// Predicted standard deviation of `raw`.
    pub predicted_raw_sd: f64,
    pub mean: f64,
    pub sd: f64,
    pub raw_sd: f64,
    pub ks_statistic: f64,
    pub p_value: f64,
    /// Ball-average mode: `|ε⁻² L_ε f(x) − f″(x)/6|`.
    pub drift: Option<f64>,
}

impl Report for CltReport {
    fn kind(&self) -> &'static str {
        "clt"
    }

    fn config_hash(&self) -> &str {
        &self.config_hash
    }

    fn summary_csv(&self) -> String {
        let c = &self.config;
        format!(
            "mode,n,eps,trials,seed,scale,center,mean,sd,raw_sd,predicted_raw_sd,ks_statistic,p_value\n{:?},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            c.setup.mode,
            c.setup.n,
            c.setup.eps,
            c.trials,
            c.seed,
            self.scale,
            self.center,
            self.mean,
            self.sd,
            self.raw_sd,
            self.predicted_raw_sd,
            self.ks_statistic,
            self.p_value
        )
    }
}

/// Sampling density on `ℝ^d` of the setup's space, with the coordinates
/// where it jumps.
struct Law {
    density: Option<Density>,
    dim: usize,
}

impl Law {
    fn of(space: &Space) -> Result<Self> {
        match *space {
            Space::Interval => Ok(Law { density: Some(Density::Uniform { lo: -1.0, hi: 1.0 }), dim: 1 }),
            Space::Line(d) => Ok(Law { density: Some(d), dim: 1 }),
            Space::Square => Ok(Law { density: None, dim: 2 }),
            ref other => Err(Error::Unsupported(format!("CLT harness on {}", other.name()))),
        }
    }

    fn pdf(&self, p: &[f64]) -> f64 {
        match self.density {
            Some(d) => d.pdf(p[0]),
            None => {
                if p.iter().all(|v| (-1.0..=1.0).contains(v)) {
                    0.25
                } else {
                    0.0
                }
            }
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self.density {
            Some(Density::Uniform { lo, hi }) => vec![lo, hi],
            Some(Density::Exponential { .. }) => vec![0.0],
            _ => Vec::new(),
        }
    }

    fn sample(&self, space: &Space, n: usize, seed: u64) -> Result<PointSet<f64>> {
        match self.density {
            Some(d) if !matches!(space, Space::Interval) => sample_density_1d(&d, n, seed),
            _ => sample_uniform(space, n, seed),
        }
    }
}

/// What every trial needs: centering, scale and the per-trial statistic.
struct Plan {
    center: f64,
    scale: f64,
    predicted_raw_sd: f64,
    drift: Option<f64>,
}

fn validate(setup: &CltSetup, trials: usize) -> Result<Law> {
    if trials < 100 {
        return Err(invalid(format!("CLT runs need at least 100 trials, got {trials}")));
    }
    if !(setup.eps > 0.0 && setup.eps.is_finite()) {
        return Err(invalid(format!("ε must be positive and finite, got {}", setup.eps)));
    }
    if setup.n == 0 {
        return Err(invalid("n must be positive"));
    }
    if setup.mode == CltMode::Sanity {
        return Ok(Law { density: None, dim: setup.x.len() });
    }
    setup.space.validate()?;
    let law = Law::of(&setup.space)?;
    if setup.x.len() != law.dim {
        return Err(invalid(format!("x has dimension {}, the space needs {}", setup.x.len(), law.dim)));
    }
    if law.dim != 1 && setup.mode != CltMode::KernelDifference {
        return Err(Error::Unsupported("only the kernel-difference mode runs in two dimensions".into()));
    }
    if !(law.pdf(&setup.x) > 0.0) {
        return Err(invalid("the density vanishes at x"));
    }
    Ok(law)
}

const SCALE_FLOOR: f64 = 1e-12;

fn degenerate(scale: f64) -> Error {
    Error::Degenerate(format!(
        "theory scale {scale:e} is below {SCALE_FLOOR:e}: f′(x) = 0 puts the statistic in the degenerate \
         regime; use clt_degenerate_decay to measure its decay in ε"
    ))
}

fn plan(setup: &CltSetup, law: &Law) -> Result<Plan> {
    let f = setup.f;
    let x = setup.x[0];
    let eps = setup.eps;
    let n = setup.n as f64;
    let kernel = Kernel::<f64>::new(setup.kernel);
    match setup.mode {
        CltMode::Sanity => Ok(Plan { center: 0.0, scale: 1.0, predicted_raw_sd: 1.0, drift: None }),
        CltMode::BallAverage => {
            let g = law.density.expect("one-dimensional law");
            let center = weighted_averaging_lap(&|y: f64| f.value(y), &g, x, eps)? / (eps * eps);
            let scale = f.d1(x).abs() / (6.0 * g.pdf(x)).sqrt();
            if scale < SCALE_FLOOR {
                return Err(degenerate(scale));
            }
            Ok(Plan {
                center,
                scale,
                predicted_raw_sd: scale / (n * eps.powi(3)).sqrt(),
                drift: Some((center - f.d2(x) / 6.0).abs()),
            })
        }
        CltMode::KernelMean => {
            let g = law.density.expect("one-dimensional law");
            let s = kernel.support();
            let (lo, hi) = (x - s * eps, x + s * eps);
            let mut br: Vec<f64> = (1..32).map(|i| lo + (hi - lo) * i as f64 / 32.0).collect();
            br.push(x);
            br.extend(law.kinks().into_iter().filter(|k| *k > lo && *k < hi));
            let fx = f.value(x);
            let h = |y: f64| kernel.eval((y - x).abs() / eps) * (f.value(y) - fx);
            let m1 = adaptive_simpson_split(&|y: f64| h(y) * g.pdf(y), lo, hi, &br, 1e-14);
            let m2 = adaptive_simpson_split(&|y: f64| h(y) * h(y) * g.pdf(y), lo, hi, &br, 1e-14);
            let var = m2 - m1 * m1;
            let scale = var.max(0.0).sqrt();
            if scale < SCALE_FLOOR {
                return Err(degenerate(scale));
            }
            Ok(Plan { center: m1, scale, predicted_raw_sd: scale / n.sqrt(), drift: None })
        }
        CltMode::KernelDifference => {
            let d = law.dim;
            let kinks = law.kinks();
            let center = appendix_d_expectation(&|p: &[f64]| f.at(p), &setup.x, eps, &kernel, &|p: &[f64]| law.pdf(p), &kinks)?;
            // ∫K²t² for the unit-mass radial kernel, along the first axis
            let k2t2 = kernel_square_moment(&kernel, d);
            let scale = (f.d1(x).powi(2) * law.pdf(&setup.x) * k2t2).sqrt();
            if scale < SCALE_FLOOR {
                return Err(degenerate(scale));
            }
            Ok(Plan { center, scale, predicted_raw_sd: scale / (n * eps.powi(d as i32 + 2)).sqrt(), drift: None })
        }
    }
}

/// `∫_{ℝ^d} K(u)² u₁² du` for the radial kernel of unit mass.
fn kernel_square_moment(kernel: &Kernel<f64>, d: usize) -> f64 {
    let mass = kernel.radial_mass(d);
    let s = kernel.support();
    let br: Vec<f64> = (1..64).map(|i| s * i as f64 / 64.0).collect();
    // radial integral of k(r)² r² times the surface factor, divided by d
    // for the share of one coordinate
    let surface = match d {
        1 => 2.0,
        2 => std::f64::consts::TAU,
        _ => 4.0 * std::f64::consts::PI,
    };
    let radial = adaptive_simpson_split(&|r: f64| kernel.eval(r).powi(2) * r.powi(d as i32 + 1), 0.0, s, &br, 1e-14);
    surface * radial / d as f64 / (mass * mass)
}

fn trial_statistic(setup: &CltSetup, law: &Law, seed: u64) -> Result<f64> {
    let f = setup.f;
    let x = setup.x[0];
    let eps = setup.eps;
    match setup.mode {
        CltMode::Sanity => {
            let mut rng = crate::rng::stream(seed);
            Ok(Normal::standard().inverse_cdf(open_unit(&mut rng)))
        }
        CltMode::BallAverage => {
            let pts = law.sample(&setup.space, setup.n, seed)?;
            let fx = f.value(x);
            let (mut sum, mut count) = (0.0, 0usize);
            for p in pts.points() {
                if (p[0] - x).abs() <= eps {
                    sum += f.value(p[0]) - fx;
                    count += 1;
                }
            }
            if count == 0 {
                return Err(Error::EmptyNeighborhood(format!("no sample point within ε = {eps} of x = {x}")));
            }
            Ok(sum / count as f64 / (eps * eps))
        }
        CltMode::KernelMean => {
            let pts = law.sample(&setup.space, setup.n, seed)?;
            let kernel = Kernel::<f64>::new(setup.kernel);
            let fx = f.value(x);
            let sum: f64 = pts.points().map(|p| kernel.eval((p[0] - x).abs() / eps) * (f.value(p[0]) - fx)).sum();
            Ok(sum / setup.n as f64)
        }
        CltMode::KernelDifference => {
            let pts = law.sample(&setup.space, setup.n, seed)?;
            let kernel = Kernel::<f64>::new(setup.kernel);
            appendix_d_sample(&pts, &|p: &[f64]| f.at(p), &setup.x, eps, &kernel)
        }
    }
}

/// Runs `trials` independent resamples and tests the normalized statistic
/// against `N(0, 1)`. Trial `i` draws from substream `i` of `seed`.
pub fn clt_fixed_point(setup: &CltSetup, trials: usize, seed: u64) -> Result<CltReport> {
    let law = validate(setup, trials)?;
    let plan = plan(setup, &law)?;
    let values = (0..trials)
        .into_par_iter()
        .map(|i| trial_statistic(setup, &law, substream_seed(seed, i as u64)))
        .collect::<Result<Vec<f64>>>()?;
    let raw: Vec<f64> = values.iter().map(|v| v - plan.center).collect();
    let samples: Vec<f64> = raw.iter().map(|r| r / plan.predicted_raw_sd).collect();
    let (mean, sd) = mean_sd(&samples);
    let (_, raw_sd) = mean_sd(&raw);
    let ks = ks_standard_normal(&samples)?;
    let config = CltConfig { setup: setup.clone(), trials, seed };
    Ok(CltReport {
        config_hash: config_hash(&config)?,
        config,
        samples,
        raw,
        scale: plan.scale,
        center: plan.center,
        predicted_raw_sd: plan.predicted_raw_sd,
        mean,
        sd,
        raw_sd,
        ks_statistic: ks.statistic,
        p_value: ks.p_value,
        drift: plan.drift,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltCheck {
    pub threshold: f64,
    pub passed: bool,
    /// Runs in order; attempt `a` uses substream `a` of the master seed.
    pub attempts: Vec<CltReport>,
}

/// Accepts when some run among `1 + retries` has p-value above
/// `threshold`.
pub fn clt_with_retries(setup: &CltSetup, trials: usize, seed: u64, threshold: f64, retries: usize) -> Result<CltCheck> {
    let mut attempts = Vec::new();
    for a in 0..=retries {
        let report = clt_fixed_point(setup, trials, substream_seed(seed, a as u64))?;
        let ok = report.p_value > threshold;
        attempts.push(report);
        if ok {
            return Ok(CltCheck { threshold, passed: true, attempts });
        }
    }
    Ok(CltCheck { threshold, passed: false, attempts })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub eps: Vec<f64>,
    /// Standard deviation of `√(nε^{d+2})(D_{ε,n} − D_ε)` per `ε`.
    pub scaled_sd: Vec<f64>,
    /// Log-log fit of `scaled_sd` against `ε`.
    pub fit: RateFit,
}

/// Kernel-difference statistic at a critical point (`f′(p) = 0`): the
/// `√(nε^{d+2})`-scaled statistic has no Gaussian limit of positive width
/// and its spread shrinks linearly in `ε`.
pub fn clt_degenerate_decay(setup: &CltSetup, eps_grid: &[f64], trials: usize, seed: u64) -> Result<DecayReport> {
    if setup.mode != CltMode::KernelDifference {
        return Err(invalid("the degenerate decay check applies to the kernel-difference mode"));
    }
    let mut sds = Vec::with_capacity(eps_grid.len());
    for (j, &eps) in eps_grid.iter().enumerate() {
        let s = CltSetup { eps, ..setup.clone() };
        let law = validate(&s, trials)?;
        let kernel = Kernel::<f64>::new(s.kernel);
        let kinks = law.kinks();
        let f = s.f;
        let center = appendix_d_expectation(&|p: &[f64]| f.at(p), &s.x, eps, &kernel, &|p: &[f64]| law.pdf(p), &kinks)?;
        let scale = (s.n as f64 * eps.powi(law.dim as i32 + 2)).sqrt();
        let run_seed = substream_seed(seed, j as u64);
        let raw = (0..trials)
            .into_par_iter()
            .map(|i| Ok(scale * (trial_statistic(&s, &law, substream_seed(run_seed, i as u64))? - center)))
            .collect::<Result<Vec<f64>>>()?;
        sds.push(mean_sd(&raw).1);
    }
    let lx: Vec<f64> = eps_grid.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = sds.iter().map(|s| s.ln()).collect();
    Ok(DecayReport { eps: eps_grid.to_vec(), scaled_sd: sds, fit: rate_fit(&lx, &ly)? })
}

