//! Orthogonal Procrustes alignment.

use super::dense::{eigh_dense, DenseSymMatrix};
use super::matrix::Matrix;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Orthogonal `R` minimizing `‖A R − B‖_F`: the polar factor of `AᵀB`.
pub fn orthogonal_align<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(invalid(format!(
            "shapes {}x{} and {}x{} differ",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if a.cols() == 0 {
        return Err(invalid("no columns to align"));
    }
    if a.frobenius() == T::zero() {
        return Err(invalid("reference coordinates are identically zero"));
    }
    let d = a.cols();
    let m = a.tr_matmul(b);
    let mtm = m.tr_matmul(&m);
    let sym = DenseSymMatrix::from_upper(d, |i, j| mtm[(i, j)])?;
    let spec = eigh_dense(&sym)?;
    let sig2 = spec.eigenvalues();
    let top = sig2[d - 1].max(T::zero());
    let floor = T::of_usize(d) * T::of(1e3) * T::epsilon() * top;
    if top == T::zero() || sig2[0] <= floor {
        return Err(Error::RankDeficient(format!(
            "cross-covariance has singular values {:?}",
            sig2.iter().map(|s| s.max(T::zero()).sqrt().as_f64()).collect::<Vec<_>>()
        )));
    }
    // R = M V Σ⁻¹ Vᵀ
    let vecs = spec.eigenvectors();
    let mut inv_sqrt = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut s = T::zero();
            for (k, v) in vecs.iter().enumerate() {
                s += v[i] * v[j] / sig2[k].sqrt();
            }
            inv_sqrt[(i, j)] = s;
        }
    }
    let mut r = m.matmul(&inv_sqrt);
    // one Newton-Schulz step toward the orthogonal factor
    let rtr = r.tr_matmul(&r);
    let corr = Matrix::from_fn(d, d, |i, j| {
        let id = if i == j { T::of(1.5) } else { T::zero() };
        id - T::of(0.5) * rtr[(i, j)]
    });
    r = r.matmul(&corr);
    Ok(r)
}

/// `‖RᵀR − I‖_F`.
pub fn orthogonality_defect<T: Real>(r: &Matrix<T>) -> T {
    r.tr_matmul(r).sub(&Matrix::identity(r.cols())).frobenius()
}
