use serde::Serialize;

use super::kernel::Kernel;
use crate::error::{invalid, Error, Result};
use crate::quadrature::adaptive_simpson_split;
use crate::scalar::Real;
use crate::spaces::{Density, Space};

/// Sets over which an averaging Laplacian averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Neighborhood {
    /// Metric ball intersected with the space (the truncated ball on the
    /// interval and the clipped disc on the square).
    Ball,
    /// Gasket `d_cell` ball: the union of level-`m` cells meeting the cell
    /// of `x`.
    CellBall,
    /// Gasket level-`m` cell containing `x`.
    Cell,
    /// Gasket level-`m` cell of `x` together with its neighbor across the
    /// corner `F_w(p_j)`, `j` the next letter of `x`: the two cells meeting
    /// at a junction point.
    Junction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AveragingConfig<T> {
    pub eps: T,
    pub rule: Neighborhood,
    /// Relative quadrature tolerance.
    pub tol: T,
}

impl<T: Real> AveragingConfig<T> {
    pub fn ball(eps: T) -> Self {
        Self { eps, rule: Neighborhood::Ball, tol: T::of(1e-10) }
    }

    pub fn validate(&self, space: &Space) -> Result<()> {
        if !(self.eps > T::zero()) || !self.eps.is_finite() {
            return Err(invalid(format!("ε must be positive and finite, got {}", self.eps)));
        }
        if !(self.tol > T::zero()) {
            return Err(invalid("quadrature tolerance must be positive"));
        }
        match (space, self.rule) {
            (Space::Gasket, Neighborhood::CellBall | Neighborhood::Cell | Neighborhood::Junction) => Ok(()),
            (Space::Gasket, Neighborhood::Ball) => {
                Err(Error::Unsupported("gasket averaging is over cells; use the cell-ball rule".into()))
            }
            (_, Neighborhood::Ball) => Ok(()),
            (s, r) => Err(invalid(format!("rule {r:?} does not apply to {}", s.name()))),
        }
    }
}

const PANELS: usize = 16;

fn panel_breaks<T: Real>(lo: T, hi: T, extra: &[T]) -> Vec<T> {
    let mut b: Vec<T> = (1..PANELS).map(|i| lo + (hi - lo) * T::of_usize(i) / T::of_usize(PANELS)).collect();
    b.extend_from_slice(extra);
    b
}

/// `(∫ w(|y − x|) (f(y) − f(x)) dy, ∫ w(|y − x|) dy)` over `[lo, hi]`.
fn segment_pair<T: Real>(
    f: &impl Fn(T) -> T,
    w: &impl Fn(T) -> T,
    x: T,
    lo: T,
    hi: T,
    breaks: &[T],
    tol: T,
) -> (T, T) {
    let fx = f(x);
    let br = panel_breaks(lo, hi, breaks);
    let mass = adaptive_simpson_split(&|y: T| w((y - x).abs()), lo, hi, &br, tol * (hi - lo));
    let num = adaptive_simpson_split(&|y: T| w((y - x).abs()) * (f(y) - fx), lo, hi, &br, tol * (hi - lo) * (T::one() + fx.abs()));
    (num, mass)
}

/// Same pair over the disc of radius `r` around `x` clipped to `[−1, 1]²`,
/// with the outer variable `y₁ = x₁ + r sin θ` to remove the edge
/// singularity of the chord length.
fn disc_pair<T: Real>(f: &impl Fn(&[T]) -> T, w: &impl Fn(T) -> T, x: &[T], r: T, tol: T) -> (T, T) {
    let one = T::one();
    let fx = f(x);
    let t_lo = ((-one - x[0]).max(-r) / r).max(-one).asin();
    let t_hi = ((one - x[0]).min(r) / r).min(one).asin();
    let scale = tol * r * r * (one + fx.abs());
    let inner = |theta: T, with_f: bool| {
        let y1 = x[0] + r * theta.sin();
        let h = r * theta.cos();
        let lo = (x[1] - h).max(-one);
        let hi = (x[1] + h).min(one);
        if hi <= lo {
            return T::zero();
        }
        let g = |y2: T| {
            let d = ((y1 - x[0]).powi(2) + (y2 - x[1]).powi(2)).sqrt();
            let p = [y1, y2];
            if with_f { w(d) * (f(&p) - fx) } else { w(d) }
        };
        r * theta.cos() * adaptive_simpson_split(&g, lo, hi, &panel_breaks(lo, hi, &[x[1]]), scale)
    };
    let br = panel_breaks(t_lo, t_hi, &[]);
    let mass = adaptive_simpson_split(&|t: T| inner(t, false), t_lo, t_hi, &br, tol * r * r);
    let num = adaptive_simpson_split(&|t: T| inner(t, true), t_lo, t_hi, &br, scale);
    (num, mass)
}

/// Averaging Laplacian `⨍_{N_x} (f(y) − f(x)) dμ(y)` with `N_x` the ball of
/// radius `ε` in the space.
///
/// Supported spaces: the interval (truncated ball), the square (clipped
/// disc) and the line with a density (weighted window). Gasket averages go
/// through [`super::sg_cell_averaging_lap`].
pub fn averaging_lap<T: Real>(space: &Space, f: &impl Fn(&[T]) -> T, x: &[T], cfg: &AveragingConfig<T>) -> Result<T> {
    cfg.validate(space)?;
    let one = T::one();
    match space {
        Space::Interval => {
            let x0 = check_point(x, 1, true)?;
            let lo = (x0 - cfg.eps).max(-one);
            let hi = (x0 + cfg.eps).min(one);
            let (num, mass) = segment_pair(&|y: T| f(&[y]), &|_| one, x0, lo, hi, &[x0], cfg.tol * cfg.eps * cfg.eps);
            Ok(num / mass)
        }
        Space::Square => {
            check_point(x, 2, true)?;
            let (num, mass) = disc_pair(f, &|_| one, x, cfg.eps, cfg.tol * cfg.eps * cfg.eps);
            Ok(num / mass)
        }
        Space::Line(g) => {
            let x0 = check_point(x, 1, false)?;
            weighted_averaging_lap(&|y: T| f(&[y]), g, x0, cfg.eps)
        }
        Space::Gasket => Err(Error::Unsupported("gasket averages are indexed by address".into())),
        other => Err(Error::Unsupported(format!("averaging quadrature on {}", other.name()))),
    }
}

/// Kernel averaging Laplacian with `K_ε(x, y) ∝ k(ε⁻¹|x − y|)` restricted
/// to the space and normalized to unit mass.
pub fn averaging_lap_kernel<T: Real>(
    space: &Space,
    f: &impl Fn(&[T]) -> T,
    x: &[T],
    kernel: &Kernel<T>,
    eps: T,
) -> Result<T> {
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(invalid(format!("ε must be positive and finite, got {eps}")));
    }
    let one = T::one();
    let tol = T::of(1e-10) * eps * eps;
    let reach = kernel.support() * eps;
    let w = |d: T| kernel.eval(d / eps);
    let (num, mass) = match space {
        Space::Interval => {
            let x0 = check_point(x, 1, true)?;
            let lo = (x0 - reach).max(-one);
            let hi = (x0 + reach).min(one);
            let breaks = [x0, x0 - eps, x0 + eps];
            segment_pair(&|y: T| f(&[y]), &w, x0, lo, hi, &breaks, tol)
        }
        Space::Square => {
            check_point(x, 2, true)?;
            disc_pair(f, &w, x, reach, tol)
        }
        Space::Line(g) => {
            let x0 = check_point(x, 1, false)?;
            let gw = |y: T| g.pdf(y);
            let (lo, hi) = (x0 - reach, x0 + reach);
            let br = panel_breaks(lo, hi, &[x0, x0 - eps, x0 + eps]);
            let fx = f(&[x0]);
            let mass = adaptive_simpson_split(&|y: T| w((y - x0).abs()) * gw(y), lo, hi, &br, tol * eps);
            let num = adaptive_simpson_split(&|y: T| w((y - x0).abs()) * gw(y) * (f(&[y]) - fx), lo, hi, &br, tol * eps);
            (num, mass)
        }
        other => return Err(Error::Unsupported(format!("kernel averaging on {}", other.name()))),
    };
    if mass < T::of(1e-12) * eps {
        return Err(Error::EmptyNeighborhood(format!("kernel mass {mass} in the space is below 1e-12")));
    }
    Ok(num / mass)
}

/// `∫fg / ∫g − f(x)` over `(x − ε, x + ε)`.
pub fn weighted_averaging_lap<T: Real>(f: &impl Fn(T) -> T, g: &Density, x: T, eps: T) -> Result<T> {
    g.validate()?;
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(invalid(format!("ε must be positive and finite, got {eps}")));
    }
    if !(g.pdf(x) > T::zero()) {
        return Err(invalid(format!("density vanishes at x = {x}")));
    }
    let (lo, hi) = (x - eps, x + eps);
    let mut kinks = vec![x];
    match *g {
        Density::Uniform { lo, hi } => kinks.extend([T::of(lo), T::of(hi)]),
        Density::Exponential { .. } => kinks.push(T::zero()),
        Density::Gaussian { .. } => {}
    }
    let br = panel_breaks(lo, hi, &kinks);
    let gx = g.pdf(x);
    let tol = T::of(1e-13) * gx * eps;
    let mass = adaptive_simpson_split(&|y: T| g.pdf(y), lo, hi, &br, tol);
    if !(mass.as_f64() > 1e-300) {
        return Err(Error::Degenerate(format!("density mass {mass} over the window is below 1e-300")));
    }
    let fx = f(x);
    let num = adaptive_simpson_split(&|y: T| (f(y) - fx) * g.pdf(y), lo, hi, &br, tol * eps * eps * (T::one() + fx.abs()));
    Ok(num / mass)
}

fn check_point<T: Real>(x: &[T], dim: usize, bounded: bool) -> Result<T> {
    if x.len() != dim {
        return Err(invalid(format!("point has dimension {}, space needs {dim}", x.len())));
    }
    let lim = T::one();
    if bounded && x.iter().any(|&v| !(v >= -lim && v <= lim)) {
        return Err(invalid("point lies outside [−1, 1]^d"));
    }
    Ok(x[0])
}
