//! Dense symmetric eigensolver: Householder reduction to tridiagonal form
//! followed by the implicit QL iteration.

use super::matrix::Matrix;
use super::spectrum::Spectrum;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Symmetric dense matrix; `entries[(i, j)] == entries[(j, i)]` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymMatrix<T> {
    entries: Matrix<T>,
}

impl<T: Real> DenseSymMatrix<T> {
    /// Validates exact symmetry and finiteness.
    pub fn new(entries: Matrix<T>) -> Result<Self> {
        if entries.rows() != entries.cols() {
            return Err(invalid(format!("matrix is {}x{}, not square", entries.rows(), entries.cols())));
        }
        if !entries.is_finite() {
            return Err(invalid("matrix has a non-finite entry"));
        }
        let n = entries.rows();
        for i in 0..n {
            for j in i + 1..n {
                if entries[(i, j)] != entries[(j, i)] {
                    return Err(invalid(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows))
    }

    /// Evaluates `f` on the upper triangle and mirrors it.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self::new(m)
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[(i, j)]
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n()).map(|i| super::matrix::dot(self.entries.row(i), x)).collect()
    }
}

/// Full spectrum of a symmetric matrix, eigenvalues ascending.
pub fn eigh_dense<T: Real>(m: &DenseSymMatrix<T>) -> Result<Spectrum<T>> {
    let n = m.n();
    if n == 0 {
        return Err(invalid("empty matrix"));
    }
    let mut v: Vec<Vec<T>> = (0..n).map(|i| m.entries.row(i).to_vec()).collect();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tridiagonalize(&mut v, &mut d, &mut e);
    // QL works on eigenvector columns; keep them as contiguous rows.
    let mut vt: Vec<Vec<T>> = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    drop(v);
    ql_implicit(&mut d, &mut e, &mut vt)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let eigenvalues: Vec<T> = order.iter().map(|&i| d[i]).collect();
    let eigenvectors: Vec<Vec<T>> = order.iter().map(|&i| std::mem::take(&mut vt[i])).collect();
    let residuals = eigenvalues
        .iter()
        .zip(&eigenvectors)
        .map(|(&lam, vec)| {
            let mv = m.matvec(vec);
            mv.iter().zip(vec).map(|(&a, &b)| (a - lam * b) * (a - lam * b)).sum::<T>().sqrt()
        })
        .collect();
    Ok(Spectrum::new(eigenvalues, eigenvectors, residuals, None))
}

/// `‖M − VΛVᵀ‖_F`.
pub fn reconstruction_error<T: Real>(m: &DenseSymMatrix<T>, s: &Spectrum<T>) -> T {
    let n = m.n();
    let mut err = T::zero();
    for i in 0..n {
        for j in 0..n {
            let mut acc = T::zero();
            for (lam, v) in s.eigenvalues().iter().zip(s.eigenvectors()) {
                acc += *lam * v[i] * v[j];
            }
            let diff = m.get(i, j) - acc;
            err += diff * diff;
        }
    }
    err.sqrt()
}

// Householder reduction (EISPACK tred2 ordering). On exit `v` holds the
// orthogonal transform, `d` the diagonal and `e[1..]` the subdiagonal.
fn tridiagonalize<T: Real>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
                v[j][i] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let t = f * e[k] + g * d[k];
                    v[k][j] -= t;
                }
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[n - 1][i] = v[i][i];
        v[i][i] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    let t = g * d[k];
                    v[k][j] -= t;
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = T::zero();
    }
    v[n - 1][n - 1] = T::one();
    e[0] = T::zero();
}

// Implicit QL with Wilkinson-type shifts; `vt[i]` is eigenvector i.
fn ql_implicit<T: Real>(d: &mut [T], e: &mut [T], vt: &mut [Vec<T>]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 64 {
                    return Err(Error::NonConvergence { iterations: iter, residuals: vec![e[l].as_f64()] });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (T::of(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = vt.split_at_mut(i + 1);
                    let vi = &mut lo[i];
                    let vi1 = &mut hi[0];
                    for k in 0..n {
                        let t = vi1[k];
                        vi1[k] = s * vi[k] + c * t;
                        vi[k] = c * vi[k] - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_orthonormal(s: &Spectrum<f64>, tol: f64) {
        assert!(s.gram_error() <= tol, "gram error {}", s.gram_error());
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let m = DenseSymMatrix::<f64>::from_upper(3, |i, j| if i == j { 1.0 } else { 0.0 }).unwrap();
        let s = eigh_dense(&m).unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn swap_matrix() {
        let m = DenseSymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = eigh_dense(&m).unwrap();
        assert!((s.eigenvalues()[0] + 1.0_f64).abs() < 1e-15);
        assert!((s.eigenvalues()[1] - 1.0_f64).abs() < 1e-15);
        check_orthonormal(&s, 1e-14);
    }

    #[test]
    fn complete_graph_k3_averaging() {
        // P = (J - I)/2, L = P - I: eigenvalues -1.5 (twice) and 0.
        let m = DenseSymMatrix::from_upper(3, |i, j| if i == j { -1.0 } else { 0.5 }).unwrap();
        let s = eigh_dense(&m).unwrap();
        let want = [-1.5, -1.5, 0.0];
        for (a, b) in s.eigenvalues().iter().zip(want) {
            assert!((a - b as f64).abs() < 1e-14);
        }
        assert!(reconstruction_error(&m, &s) < 1e-14);
    }

    #[test]
    fn rejects_non_finite_and_asymmetric() {
        assert!(DenseSymMatrix::from_rows(&[vec![f64::NAN]]).is_err());
        assert!(DenseSymMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
    }

    #[test]
    fn reconstruction_on_pseudorandom_matrix() {
        let n = 40;
        let m = DenseSymMatrix::from_upper(n, |i, j| (((i * 31 + j * 17) % 23) as f64 - 11.0) / 7.0).unwrap();
        let s = eigh_dense(&m).unwrap();
        let scale = m.entries().frobenius();
        assert!(reconstruction_error(&m, &s) <= 1e-10 * scale);
        check_orthonormal(&s, 1e-12);
        assert!(s.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn tridiagonal_path_spectrum_matches_closed_form() {
        // path-graph adjacency: eigenvalues 2cos(kπ/(n+1))
        let n = 25;
        let m = DenseSymMatrix::from_upper(n, |i, j| if j == i + 1 { 1.0 } else { 0.0 }).unwrap();
        let s = eigh_dense(&m).unwrap();
        let mut want: Vec<f64> =
            (1..=n).map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos()).collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in s.eigenvalues().iter().zip(&want) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn single_precision() {
        let m = DenseSymMatrix::<f32>::from_upper(3, |i, j| if i == j { -1.0 } else { 0.5 }).unwrap();
        let s = eigh_dense(&m).unwrap();
        assert!((s.eigenvalues()[2]).abs() < 1e-6);
        assert!((s.eigenvalues()[0] + 1.5).abs() < 1e-6);
    }

    #[test]
    fn one_by_one() {
        let m = DenseSymMatrix::from_rows(&[vec![4.0]]).unwrap();
        let s = eigh_dense(&m).unwrap();
        assert_eq!(s.eigenvalues(), &[4.0]);
        assert_eq!(s.eigenvectors()[0], vec![1.0]);
    }
}
