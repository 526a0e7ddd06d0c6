use super::kernel::Kernel;
use crate::error::{invalid, Result};
use crate::quadrature::adaptive_simpson_split;
use crate::scalar::Real;
use crate::spaces::PointSet;

/// Kernel statistics at `p ∈ ℝ^d`:
/// `D_{ε,n} = (nε^{d+2})⁻¹ Σ_j K((p − X_j)/ε)(f(X_j) − f(p))` and its
/// expectation `D_ε = ε^{−(d+2)} E[K((p − X)/ε)(f(X) − f(p))]` under the
/// density `g`. `K` is the kernel profile made radial with unit mass on
/// `ℝ^d`. `kinks` lists coordinates where `g` jumps (one-dimensional case);
/// they become quadrature breakpoints.
pub fn appendix_d<T: Real>(
    points: &PointSet<T>,
    f: &impl Fn(&[T]) -> T,
    p: &[T],
    eps: T,
    kernel: &Kernel<T>,
    g: &impl Fn(&[T]) -> T,
    kinks: &[T],
) -> Result<(T, T)> {
    let d_n = appendix_d_sample(points, f, p, eps, kernel)?;
    let d_eps = appendix_d_expectation(f, p, eps, kernel, g, kinks)?;
    Ok((d_n, d_eps))
}

/// The sample statistic `D_{ε,n}` alone.
pub fn appendix_d_sample<T: Real>(points: &PointSet<T>, f: &impl Fn(&[T]) -> T, p: &[T], eps: T, kernel: &Kernel<T>) -> Result<T> {
    let d = points.dim();
    if !(1..=3).contains(&d) || p.len() != d {
        return Err(invalid(format!("appendix statistics need d ∈ {{1,2,3}} matching p, got d={d}")));
    }
    if !(eps > T::zero()) {
        return Err(invalid("ε must be positive"));
    }
    if points.is_empty() {
        return Err(invalid("no sample points"));
    }
    let mass = kernel.radial_mass(d);
    let fp = f(p);
    let scale = eps.powi(d as i32 + 2);
    let mut u = vec![T::zero(); d];
    let mut sum = T::zero();
    for x in points.points() {
        for k in 0..d {
            u[k] = (p[k] - x[k]) / eps;
        }
        let w = kernel.radial(&u, mass);
        if w != T::zero() {
            sum += w * (f(x) - fp);
        }
    }
    Ok(sum / (T::of_usize(points.len()) * scale))
}

/// The expectation `D_ε` alone, by quadrature.
pub fn appendix_d_expectation<T: Real>(
    f: &impl Fn(&[T]) -> T,
    p: &[T],
    eps: T,
    kernel: &Kernel<T>,
    g: &impl Fn(&[T]) -> T,
    kinks: &[T],
) -> Result<T> {
    let d = p.len();
    if !(1..=3).contains(&d) {
        return Err(invalid(format!("appendix statistics need d ∈ {{1,2,3}}, got d={d}")));
    }
    if !(eps > T::zero()) {
        return Err(invalid("ε must be positive"));
    }
    let mass = kernel.radial_mass(d);
    Ok(expectation(f, p, eps, kernel, mass, g, kinks)? / (eps * eps))
}

/// `∫ K(u)(f(p + εu) − f(p)) g(p + εu) du`, which equals `ε^{−d}` times
/// the expectation in the original variable.
fn expectation<T: Real>(
    f: &impl Fn(&[T]) -> T,
    p: &[T],
    eps: T,
    kernel: &Kernel<T>,
    mass: T,
    g: &impl Fn(&[T]) -> T,
    kinks: &[T],
) -> Result<T> {
    let d = p.len();
    let s = kernel.support();
    let fp = f(p);
    let tol = T::of(1e-12);
    let panels = |lo: T, hi: T, n: usize| -> Vec<T> { (1..n).map(|i| lo + (hi - lo) * T::of_usize(i) / T::of_usize(n)).collect() };
    match d {
        1 => {
            let mut br = panels(-s, s, 32);
            br.push(T::zero());
            // g is evaluated at p − εu; jumps of g sit where p − εu hits a kink
            br.extend(kinks.iter().map(|&k| (p[0] - k) / eps));
            let h = |u: T| {
                let x = [p[0] - eps * u];
                kernel.eval(u) / mass * (f(&x) - fp) * g(&x)
            };
            Ok(adaptive_simpson_split(&h, -s, s, &br, tol))
        }
        2 => {
            let ring = |r: T| {
                let a = |phi: T| {
                    let x = [p[0] + eps * r * phi.cos(), p[1] + eps * r * phi.sin()];
                    (f(&x) - fp) * g(&x)
                };
                kernel.eval(r) / mass * r * adaptive_simpson_split(&a, T::zero(), T::TAU(), &panels(T::zero(), T::TAU(), 16), tol)
            };
            Ok(adaptive_simpson_split(&ring, T::zero(), s, &panels(T::zero(), s, 16), tol))
        }
        _ => {
            let shell = |r: T| {
                let polar = |th: T| {
                    let a = |phi: T| {
                        let x = [
                            p[0] + eps * r * th.sin() * phi.cos(),
                            p[1] + eps * r * th.sin() * phi.sin(),
                            p[2] + eps * r * th.cos(),
                        ];
                        (f(&x) - fp) * g(&x)
                    };
                    th.sin() * adaptive_simpson_split(&a, T::zero(), T::TAU(), &panels(T::zero(), T::TAU(), 8), tol)
                };
                kernel.eval(r) / mass
                    * r
                    * r
                    * adaptive_simpson_split(&polar, T::zero(), T::PI(), &panels(T::zero(), T::PI(), 8), tol)
            };
            Ok(adaptive_simpson_split(&shell, T::zero(), s, &panels(T::zero(), s, 8), tol))
        }
    }
}
