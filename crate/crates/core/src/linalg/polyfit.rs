//! Least-squares polynomial fits by Householder QR of the Vandermonde matrix.

use serde::Serialize;

use super::matrix::Matrix;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyFit<T> {
    /// Highest degree first.
    pub coefficients: Vec<T>,
    /// `‖V c − y‖₂`.
    pub residual: T,
}

impl<T: Real> PolyFit<T> {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, x: T) -> T {
        self.coefficients.iter().fold(T::zero(), |acc, &c| acc * x + c)
    }
}

pub fn polyfit_ls<T: Real>(xs: &[T], ys: &[T], degree: usize) -> Result<PolyFit<T>> {
    if xs.len() != ys.len() {
        return Err(invalid(format!("{} abscissae but {} ordinates", xs.len(), ys.len())));
    }
    let rows = xs.len();
    let cols = degree + 1;
    if rows < cols {
        return Err(invalid(format!("{rows} points cannot determine a degree-{degree} polynomial")));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(invalid("non-finite data"));
    }
    // column j holds x^(degree - j)
    let mut a = Matrix::from_fn(rows, cols, |i, j| xs[i].powi((degree - j) as i32));
    let mut b = ys.to_vec();
    let scale = a.frobenius();

    for k in 0..cols {
        let mut alpha = (k..rows).map(|i| a[(i, k)] * a[(i, k)]).sum::<T>().sqrt();
        if alpha <= T::of_usize(rows) * T::epsilon() * scale {
            return Err(Error::RankDeficient(format!(
                "Vandermonde column for x^{} is dependent on higher powers ({} distinct abscissae for degree {degree})",
                degree - k,
                distinct(xs)
            )));
        }
        if a[(k, k)] > T::zero() {
            alpha = -alpha;
        }
        let mut v: Vec<T> = (k..rows).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vv: T = v.iter().map(|&x| x * x).sum();
        for j in k..cols {
            let s: T = (k..rows).map(|i| v[i - k] * a[(i, j)]).sum::<T>() * T::of(2.0) / vv;
            for i in k..rows {
                a[(i, j)] -= s * v[i - k];
            }
        }
        let s: T = (k..rows).map(|i| v[i - k] * b[i]).sum::<T>() * T::of(2.0) / vv;
        for i in k..rows {
            b[i] -= s * v[i - k];
        }
    }
    let mut c = vec![T::zero(); cols];
    for k in (0..cols).rev() {
        let mut s = b[k];
        for j in k + 1..cols {
            s -= a[(k, j)] * c[j];
        }
        c[k] = s / a[(k, k)];
    }
    let residual = b[cols..].iter().map(|&r| r * r).sum::<T>().sqrt();
    Ok(PolyFit { coefficients: c, residual })
}

fn distinct<T: Real>(xs: &[T]) -> usize {
    let mut v: Vec<T> = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v.len()
}
