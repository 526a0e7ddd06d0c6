use eigenlab::experiments::*;
use eigenlab::laplacians::{KernelProfile, Metric};
use eigenlab::spaces::{Density, Space};
use proptest::prelude::*;

fn a1_setup() -> CltSetup {
    CltSetup {
        mode: CltMode::KernelDifference,
        space: Space::Interval,
        f: TestFunction::Linear,
        x: vec![0.0],
        kernel: KernelProfile::Indicator,
        eps: 0.05,
        n: 20_000,
    }
}

#[test]
fn kernel_difference_scale_is_one_twelfth() {
    let r = clt_fixed_point(&a1_setup(), 100, 3).unwrap();
    assert!((r.scale * r.scale - 1.0 / 12.0).abs() < 1e-12, "{}", r.scale);
    // f linear and g symmetric about 0: the expectation vanishes
    assert!(r.center.abs() < 1e-12);
    assert_eq!(r.samples.len(), 100);
    assert!((0.0..=1.0).contains(&r.p_value));
}

#[test]
fn kernel_difference_normalized_statistic_is_gaussian() {
    let check = clt_with_retries(&a1_setup(), 500, 11, 0.01, 3).unwrap();
    assert!(check.passed, "{:?}", check.attempts.iter().map(|a| a.p_value).collect::<Vec<_>>());
    let last = check.attempts.last().unwrap();
    assert!((last.raw_sd / last.predicted_raw_sd - 1.0).abs() < 0.1);
}

#[test]
fn ball_average_mode_scale_and_drift() {
    let setup = CltSetup {
        mode: CltMode::BallAverage,
        f: TestFunction::CosPi,
        x: vec![0.3],
        eps: 0.05,
        n: 20_000,
        ..a1_setup()
    };
    let r = clt_fixed_point(&setup, 300, 5).unwrap();
    let fp = std::f64::consts::PI * (0.3 * std::f64::consts::PI).sin();
    assert!((r.scale - fp / 3f64.sqrt()).abs() < 1e-12);
    // interior drift of ε⁻²L_ε f from f″/6 is O(ε²)
    assert!(r.drift.unwrap() < 0.01);
    assert!((r.sd - 1.0).abs() < 0.15, "{}", r.sd);
}

#[test]
fn kernel_mean_variance_matches_quadrature() {
    let setup = CltSetup { mode: CltMode::KernelMean, f: TestFunction::SinPi, x: vec![0.2], eps: 0.2, n: 2000, ..a1_setup() };
    let trials = 600;
    let r = clt_fixed_point(&setup, trials, 9).unwrap();
    // n·Var(raw) against the quadrature variance, within 3 standard errors
    let var_hat = r.raw_sd.powi(2) * setup.n as f64;
    let var = r.scale * r.scale;
    let se = var * (2.0 / (trials as f64 - 1.0)).sqrt();
    assert!((var_hat - var).abs() < 3.0 * se, "{var_hat} vs {var}");
}

#[test]
fn critical_point_is_rejected_with_pointer() {
    let setup = CltSetup { f: TestFunction::Quadratic, ..a1_setup() };
    let err = clt_fixed_point(&setup, 100, 1).unwrap_err().to_string();
    assert!(err.contains("clt_degenerate_decay"), "{err}");
}

#[test]
fn critical_point_spread_decays_linearly() {
    let setup = CltSetup { f: TestFunction::Quadratic, n: 20_000, ..a1_setup() };
    let grid = [0.4, 0.2, 0.1, 0.05];
    let d = clt_degenerate_decay(&setup, &grid, 200, 4).unwrap();
    assert!((d.fit.slope - 1.0).abs() < 0.15, "{:?}", d);
    assert!(d.scaled_sd.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn sanity_mode_p_values_are_uniform() {
    let setup = CltSetup { mode: CltMode::Sanity, ..a1_setup() };
    let mut ps: Vec<f64> = (0..50).map(|s| clt_fixed_point(&setup, 200, s).unwrap().p_value).collect();
    ps.sort_by(|a, b| a.total_cmp(b));
    let median = 0.5 * (ps[24] + ps[25]);
    assert!((median - 0.5).abs() < 0.2, "{median}");
}

#[test]
fn clt_preconditions() {
    assert!(clt_fixed_point(&a1_setup(), 50, 1).is_err());
    let sphere = CltSetup { space: Space::Sphere, x: vec![0.0, 0.0, 1.0], ..a1_setup() };
    assert!(clt_fixed_point(&sphere, 100, 1).is_err());
}

#[test]
fn clt_gaussian_density_line() {
    let setup = CltSetup {
        space: Space::Line(Density::Gaussian { mean: 0.0, sd: 1.0 }),
        x: vec![0.5],
        eps: 0.1,
        n: 10_000,
        ..a1_setup()
    };
    let r = clt_fixed_point(&setup, 300, 2).unwrap();
    assert!((r.sd - 1.0).abs() < 0.15, "{}", r.sd);
}

#[test]
fn ks_detects_shifted_sample() {
    let shifted: Vec<f64> = (0..400).map(|i| 1.0 + ((i as f64 + 0.5) / 400.0 - 0.5)).collect();
    assert!(ks_standard_normal(&shifted).unwrap().p_value < 1e-6);
    assert_eq!(kolmogorov_tail(0.0), 1.0);
    // textbook critical value: P(K > 1.358) ≈ 0.05
    assert!((kolmogorov_tail(1.358) - 0.05).abs() < 1e-3);
}

#[test]
fn rate_fit_examples() {
    let xs: Vec<f64> = (0..6).map(|i| i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|x| -0.2 * x + 1.5).collect();
    let f = rate_fit(&xs, &ys).unwrap();
    assert!((f.slope + 0.2).abs() < 1e-14 && (f.r2 - 1.0).abs() < 1e-12);
    // symmetric ±δ on two points mirrored about the mean abscissa
    let mut yp = ys.clone();
    yp[1] += 0.1;
    yp[4] += 0.1;
    assert!((rate_fit(&xs, &yp).unwrap().slope + 0.2).abs() < 1e-14);
    assert!(rate_fit(&xs[..2], &ys[..2]).is_err());
}

fn sweep_config(f: TestFunction) -> SweepConfig {
    SweepConfig {
        space: Space::Interval,
        f,
        n_grid: vec![500, 1000, 2000],
        eps_grid: log_grid(1e-3, 0.5, 12).unwrap(),
        trials: 5,
        seed: 3,
        eval_points: default_eval_points(),
    }
}

#[test]
fn sweep_of_linear_function_is_flat() {
    let r = epsilon_sweep(&sweep_config(TestFunction::Linear)).unwrap();
    for c in r.cells.iter().filter(|c| c.valid) {
        // symmetric cancellation: only sampling noise in f(X) − f(x) remains
        assert!(c.mean_error.is_finite() && c.mean_error >= 0.0);
    }
    assert!(r.cells.iter().any(|c| !c.valid), "the smallest ε should leave empty neighborhoods at n = 500");
}

#[test]
fn sweep_shape_and_argmin() {
    let r = epsilon_sweep(&sweep_config(TestFunction::CosPi)).unwrap();
    assert_eq!(r.cells.len(), 3 * 12);
    assert_eq!(r.argmin.len(), 3);
    for a in &r.argmin {
        let row: Vec<_> = r.cells.iter().filter(|c| c.n == a.n && c.valid).collect();
        assert!(row.iter().all(|c| c.mean_error >= a.error));
    }
    assert!(r.error_fit.unwrap().slope < 0.0);
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let cfg = sweep_config(TestFunction::CosPi);
    let run = |k: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap();
        pool.install(|| report_json(&epsilon_sweep(&cfg).unwrap()).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn report_hash_round_trip() {
    let r = epsilon_sweep(&sweep_config(TestFunction::Linear)).unwrap();
    let body = report_json(&r).unwrap();
    assert!(verify_report_json(&body).unwrap());
    let tampered = body.replacen("\"seed\": 3", "\"seed\": 4", 1);
    assert!(!verify_report_json(&tampered).unwrap());
    let dir = tempfile_dir();
    let (json, csv) = write_report(&r, &dir).unwrap();
    assert!(json.file_name().unwrap().to_string_lossy().contains(&r.config_hash));
    assert!(std::fs::read_to_string(csv).unwrap().starts_with("n,eps,valid"));
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("eigenlab-exp-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn rescaling_probe_levels() {
    let r = sg_rescaling_probe(&[3, 4, 5], 3).unwrap();
    for l in &r.levels {
        assert!(l.eigenvalues[0].abs() < 1e-9);
    }
    assert!(r.ratios_5.iter().all(|q| (q - 1.0).abs() < 0.1), "{:?}", r.ratios_5);
    assert!(r.ratios_4.iter().all(|q| 1.0 / q > 1.2), "{:?}", r.ratios_4);
    assert!(sg_rescaling_probe(&[4, 3], 3).is_err());
    assert!(sg_rescaling_probe(&[9], 3).is_err());
}

#[test]
fn gasket_probe_identical_seeds_align_trivially() {
    let cfg = SgProbeConfig { n: 600, eps: 0.2, address_length: 12, cell_level: 2, seeds: vec![7, 7, 7], metrics: vec![Metric::Euclidean] };
    let r = sg_probe(&cfg).unwrap();
    for p in &r.pairs {
        assert!(p.angle.abs() < 1e-9 && !p.reflection && p.rms_after < 1e-12, "{p:?}");
    }
}

#[test]
fn gasket_probe_report_invariants() {
    let cfg = SgProbeConfig {
        n: 800,
        eps: 0.2,
        address_length: 12,
        cell_level: 3,
        seeds: vec![1, 2, 3],
        metrics: vec![Metric::Euclidean, Metric::DCell],
    };
    let r = sg_probe(&cfg).unwrap();
    assert_eq!(r.seeds.len(), 6);
    assert_eq!(r.pairs.len(), 6);
    for p in &r.pairs {
        assert!(p.angle > -std::f64::consts::PI && p.angle <= std::f64::consts::PI);
        assert!(p.rms_after <= p.rms_before + 1e-12);
    }
    assert!(sg_probe(&SgProbeConfig { n: 100, ..cfg.clone() }).is_err());
    assert!(sg_probe(&SgProbeConfig { seeds: vec![1, 2], ..cfg }).is_err());
}

#[test]
fn gasket_probe_reports_disconnection() {
    let cfg = SgProbeConfig { n: 500, eps: 0.01, address_length: 12, cell_level: 2, seeds: vec![1, 2, 3], metrics: vec![Metric::Euclidean] };
    let err = sg_probe(&cfg).unwrap_err().to_string();
    assert!(err.contains("larger ε"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn log_grid_is_monotone(lo in 1e-4f64..0.1, span in 1.5f64..100.0, count in 2usize..40) {
        let g = log_grid(lo, lo * span, count).unwrap();
        prop_assert_eq!(g.len(), count);
        prop_assert!((g[0] - lo).abs() < 1e-15 * lo.max(1.0) && g[count - 1] == lo * span);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
