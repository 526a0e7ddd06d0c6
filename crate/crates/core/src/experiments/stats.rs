use std::f64::consts::PI;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};

/// Sample mean and standard deviation (`n − 1` denominator).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov limiting tail `P(K > z)`.
pub fn kolmogorov_tail(z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    if z < 1.18 {
        let y = (-PI * PI / (8.0 * z * z)).exp();
        let cdf = (2.0 * PI).sqrt() / z * (y + y.powi(9) + y.powi(25) + y.powi(49));
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let x = (-2.0 * z * z).exp();
        (2.0 * (x - x.powi(4) + x.powi(9) - x.powi(16))).clamp(0.0, 1.0)
    }
}

/// One-sample KS test against `N(0, 1)`; the p-value uses Stephens'
/// finite-sample scaling `(√n + 0.12 + 0.11/√n) D`.
pub fn ks_standard_normal(samples: &[f64]) -> Result<KsResult> {
    if samples.is_empty() || samples.iter().any(|x| !x.is_finite()) {
        return Err(invalid("KS test needs a nonempty finite sample"));
    }
    let phi = Normal::standard();
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = phi.cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    Ok(KsResult { statistic: d, p_value: kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares line through `(xs, ys)`.
pub fn rate_fit(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() {
        return Err(invalid(format!("{} abscissae for {} ordinates", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(invalid(format!("a rate fit needs at least 3 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(invalid("rate fit data must be finite"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(invalid("rate fit abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit { slope, intercept: my - slope * mx, r2 })
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && count >= 2) {
        return Err(invalid(format!("log grid needs 0 < lo < hi and count ≥ 2, got {lo}, {hi}, {count}")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| if i + 1 == count { hi } else { (a + (b - a) * i as f64 / (count - 1) as f64).exp() })
        .collect())
}
