//! Adaptive Simpson quadrature on intervals and tensor Simpson on boxes.

use crate::scalar::Real;

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T) -> T {
    if a == b {
        return T::zero();
    }
    let half = T::of(0.5);
    let m = (a + b) * half;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    refine(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[inline]
fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::of(6.0) * (fa + T::of(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> T {
    let half = T::of(0.5);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // the second test stops refinement once the panel is at rounding level
    if depth == 0 || delta.abs() <= T::of(15.0) * tol || m <= a || m >= b {
        return left + right + delta / T::of(15.0);
    }
    refine(f, a, m, fa, flm, fm, left, tol * half, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, tol * half, depth - 1)
}

/// Adaptive Simpson over `[a, b]` after splitting at the interior `breaks`,
/// which keeps kinks of the integrand on panel edges.
pub fn adaptive_simpson_split<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, breaks: &[T], tol: T) -> T {
    let mut pts = vec![a];
    let mut inner: Vec<T> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.extend(inner);
    pts.push(b);
    let pieces = T::of_usize(pts.len() - 1);
    pts.windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], tol / pieces))
        .sum()
}

/// Composite Simpson rule over a box in up to three dimensions with
/// `panels` (even) panels per axis.
pub fn tensor_simpson<T: Real, F: Fn(&[T]) -> T>(f: &F, lo: &[T], hi: &[T], panels: usize) -> T {
    assert_eq!(lo.len(), hi.len());
    let panels = panels + panels % 2;
    let d = lo.len();
    let weights: Vec<T> = (0..=panels)
        .map(|i| {
            if i == 0 || i == panels {
                T::one()
            } else if i % 2 == 1 {
                T::of(4.0)
            } else {
                T::of(2.0)
            }
        })
        .collect();
    let h: Vec<T> = (0..d).map(|k| (hi[k] - lo[k]) / T::of_usize(panels)).collect();
    let mut idx = vec![0usize; d];
    let mut x = vec![T::zero(); d];
    let mut total = T::zero();
    loop {
        let mut w = T::one();
        for k in 0..d {
            x[k] = lo[k] + h[k] * T::of_usize(idx[k]);
            w *= weights[idx[k]];
        }
        total += w * f(&x);
        let mut k = 0;
        loop {
            if k == d {
                let scale: T = h.iter().fold(T::one(), |acc, &hk| acc * hk / T::of(3.0));
                return total * scale;
            }
            idx[k] += 1;
            if idx[k] <= panels {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = adaptive_simpson(&|x: f64| x * x * x - x, -1.0, 2.0, 1e-12);
        assert!((v - (4.0 - 0.25 - 2.0 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_integrand() {
        let v = adaptive_simpson(&|x: f64| (10.0 * x).cos(), 0.0, 1.0, 1e-12);
        assert!((v - (10.0f64).sin() / 10.0).abs() < 1e-10);
    }

    #[test]
    fn split_handles_kink() {
        let v = adaptive_simpson_split(&|x: f64| x.abs(), -1.0, 1.0, &[0.0], 1e-12);
        assert!((v - 1.0).abs() < 1e-13);
    }

    #[test]
    fn single_precision_works() {
        let v = adaptive_simpson(&|x: f32| x.sin(), 0.0, std::f32::consts::PI, 1e-5);
        assert!((v - 2.0).abs() < 1e-4);
    }

    #[test]
    fn tensor_rule_on_square() {
        let v = tensor_simpson(&|x: &[f64]| x[0] * x[0] + x[1], &[-1.0, 0.0], &[1.0, 1.0], 10);
        assert!((v - (2.0 / 3.0 + 1.0)).abs() < 1e-12);
    }
}
