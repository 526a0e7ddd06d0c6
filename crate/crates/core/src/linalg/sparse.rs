//! Sparse averaging-convention Laplacians.
//!
//! The operator is stored through its adjacency weights `w_ij ≥ 0` (no
//! self-loops) and degrees `d_i = Σ_j w_ij`:
//!
//! ```text
//! (L f)_i = Σ_j (w_ij / d_i) f_j − f_i     if d_i > 0
//! (L f)_i = 0                              if d_i = 0  (isolated vertex)
//! ```
//!
//! so `L·1 = 0` and the spectrum lies in `[−2, 0]`. The positive
//! semidefinite graph-Laplacian form used in much of the literature is `−L`.
//! When `w` is symmetric, `L` is self-adjoint for the inner product weighted
//! by `d`, and `D^{1/2} L D^{−1/2}` is the symmetric matrix handed to the
//! eigensolvers.

use std::collections::VecDeque;

use super::dense::DenseSymMatrix;
use super::matrix::Matrix;
use crate::error::{invalid, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymOperator<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<T>,
    degree: Vec<T>,
    symmetric: bool,
}

impl<T: Real> SparseSymOperator<T> {
    /// Builds from adjacency triplets `(i, j, w_ij)`; duplicates are summed,
    /// zero weights and self-loops dropped.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        let mut per_row: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for (i, j, w) in triplets {
            if i >= n || j >= n {
                return Err(invalid(format!("index ({i},{j}) out of range for n={n}")));
            }
            if !w.is_finite() || w < T::zero() {
                return Err(invalid(format!("weight {w} at ({i},{j}) is not a finite nonnegative number")));
            }
            if i != j && w > T::zero() {
                per_row[i].push((j, w));
            }
        }
        Ok(Self::from_rows_unchecked(per_row))
    }

    /// Builds from per-row neighbor lists (need not be sorted).
    pub fn from_adjacency_rows(rows: Vec<Vec<(usize, T)>>) -> Result<Self> {
        let n = rows.len();
        let triplets = rows.into_iter().enumerate().flat_map(|(i, r)| r.into_iter().map(move |(j, w)| (i, j, w)));
        Self::from_triplets(n, triplets)
    }

    fn from_rows_unchecked(mut per_row: Vec<Vec<(usize, T)>>) -> Self {
        let n = per_row.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        let mut degree = Vec::with_capacity(n);
        row_ptr.push(0);
        for row in per_row.iter_mut() {
            row.sort_by_key(|&(j, _)| j);
            let mut d = T::zero();
            let mut last: Option<usize> = None;
            for &(j, w) in row.iter() {
                if last == Some(j) {
                    *weights.last_mut().unwrap() += w;
                } else {
                    cols.push(j);
                    weights.push(w);
                    last = Some(j);
                }
                d += w;
            }
            degree.push(d);
            row_ptr.push(cols.len());
        }
        let mut op = Self { n, row_ptr, cols, weights, degree, symmetric: false };
        op.symmetric = op.check_symmetric();
        op
    }

    fn check_symmetric(&self) -> bool {
        for i in 0..self.n {
            for (j, w) in self.adjacency_row(i) {
                match self.adjacency_weight(j, i) {
                    Some(wt) if wt == w => {}
                    _ => return false,
                }
            }
        }
        true
    }

    fn adjacency_weight(&self, i: usize, j: usize) -> Option<T> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.cols[lo..hi].binary_search(&j).ok().map(|k| self.weights[lo + k])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored off-diagonal adjacency entries.
    pub fn nnz_adjacency(&self) -> usize {
        self.cols.len()
    }

    /// Whether `w_ij == w_ji` for every stored entry (required by the eigensolvers).
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn degrees(&self) -> &[T] {
        &self.degree
    }

    pub fn is_isolated(&self, i: usize) -> bool {
        self.degree[i] == T::zero()
    }

    pub fn isolated_count(&self) -> usize {
        self.degree.iter().filter(|&&d| d == T::zero()).count()
    }

    pub fn adjacency_row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.cols[lo..hi].iter().copied().zip(self.weights[lo..hi].iter().copied())
    }

    /// Row `i` of `L` itself, diagonal included, ascending column order.
    pub fn operator_row(&self, i: usize) -> Vec<(usize, T)> {
        let d = self.degree[i];
        if d == T::zero() {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(self.row_ptr[i + 1] - self.row_ptr[i] + 1);
        let mut diag_done = false;
        for (j, w) in self.adjacency_row(i) {
            if !diag_done && j > i {
                out.push((i, -T::one()));
                diag_done = true;
            }
            out.push((j, w / d));
        }
        if !diag_done {
            out.push((i, -T::one()));
        }
        out
    }

    /// `L f`.
    pub fn apply(&self, f: &[T]) -> Vec<T> {
        assert_eq!(f.len(), self.n);
        (0..self.n)
            .map(|i| {
                let d = self.degree[i];
                if d == T::zero() {
                    return T::zero();
                }
                let s: T = self.adjacency_row(i).map(|(j, w)| w * f[j]).sum();
                s / d - f[i]
            })
            .collect()
    }

    /// `D^{1/2} L D^{−1/2}` applied to `x`, restricted to non-isolated
    /// vertices (isolated coordinates map to zero).
    pub(crate) fn apply_symmetric(&self, x: &[T], out: &mut [T], inv_sqrt_deg: &[T]) {
        for i in 0..self.n {
            if self.degree[i] == T::zero() {
                out[i] = T::zero();
                continue;
            }
            let mut s = T::zero();
            for (j, w) in self.adjacency_row(i) {
                s += w * inv_sqrt_deg[j] * x[j];
            }
            out[i] = s * inv_sqrt_deg[i] - x[i];
        }
    }

    /// Dense copy of `L` (not symmetric in general).
    pub fn to_dense(&self) -> Matrix<T> {
        let mut m = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.operator_row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Dense `D^{1/2} L D^{−1/2}`; isolated rows and columns are zero.
    pub fn to_dense_symmetric(&self) -> Result<DenseSymMatrix<T>> {
        if !self.symmetric {
            return Err(invalid("adjacency weights are not symmetric"));
        }
        let isd = self.inv_sqrt_degrees();
        let mut m = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            if self.degree[i] == T::zero() {
                continue;
            }
            m[(i, i)] = -T::one();
            for (j, w) in self.adjacency_row(i) {
                if j > i {
                    let v = w * isd[i] * isd[j];
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
        }
        DenseSymMatrix::new(m)
    }

    pub(crate) fn inv_sqrt_degrees(&self) -> Vec<T> {
        self.degree
            .iter()
            .map(|&d| if d > T::zero() { T::one() / d.sqrt() } else { T::zero() })
            .collect()
    }

    /// Rebuilds an operator from the rows of `L` (e.g. read from a file).
    ///
    /// The averaging rows determine `w` only up to a per-component scale; the
    /// degrees are recovered by detailed balance `d_i L_ij = d_j L_ji` along a
    /// spanning forest. When no consistent degrees exist the result keeps the
    /// row-normalized weights and reports `is_symmetric() == false`.
    pub fn from_operator_rows(rows: Vec<Vec<(usize, T)>>) -> Result<Self> {
        let n = rows.len();
        let mut prob: Vec<Vec<(usize, T)>> = Vec::with_capacity(n);
        for (i, r) in rows.into_iter().enumerate() {
            let off: Vec<(usize, T)> = r.into_iter().filter(|&(j, w)| j != i && w != T::zero()).collect();
            prob.push(off);
        }
        let lookup = |i: usize, j: usize, prob: &[Vec<(usize, T)>]| prob[i].iter().find(|e| e.0 == j).map(|e| e.1);
        let mut scale = vec![T::zero(); n];
        let mut seen = vec![false; n];
        let mut consistent = true;
        for root in 0..n {
            if seen[root] || prob[root].is_empty() {
                continue;
            }
            seen[root] = true;
            scale[root] = T::one();
            let mut queue = VecDeque::from([root]);
            while let Some(i) = queue.pop_front() {
                for &(j, pij) in &prob[i] {
                    let Some(pji) = lookup(j, i, &prob) else {
                        consistent = false;
                        continue;
                    };
                    let sj = scale[i] * pij / pji;
                    if !seen[j] {
                        seen[j] = true;
                        scale[j] = sj;
                        queue.push_back(j);
                    } else if (scale[j] - sj).abs() > T::of(1e3) * T::epsilon() * sj.abs() {
                        consistent = false;
                    }
                }
            }
        }
        let triplets: Vec<(usize, usize, T)> = prob
            .iter()
            .enumerate()
            .flat_map(|(i, r)| {
                let s = if consistent { scale[i] } else { T::one() };
                r.iter().map(move |&(j, p)| (i, j, s * p))
            })
            .collect();
        let mut op = Self::from_triplets(n, triplets)?;
        if consistent {
            // detailed balance holds to rounding; make it exact
            op.symmetrize();
        }
        Ok(op)
    }

    fn symmetrize(&mut self) {
        let mut per_row: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for (j, w) in self.adjacency_row(i) {
                let wt = self.adjacency_weight(j, i).unwrap_or(w);
                let v = if i < j { (w + wt) * T::of(0.5) } else { (wt + w) * T::of(0.5) };
                per_row[i].push((j, v));
            }
        }
        *self = Self::from_rows_unchecked(per_row);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> SparseSymOperator<f64> {
        SparseSymOperator::from_triplets(3, [(0, 1, 1.0), (1, 0, 1.0), (0, 2, 1.0), (2, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)])
            .unwrap()
    }

    #[test]
    fn constants_in_kernel() {
        let op = k3();
        assert!(op.apply(&[2.0, 2.0, 2.0]).iter().all(|v| v.abs() < 1e-15));
        assert!(op.is_symmetric());
    }

    #[test]
    fn operator_rows_include_diagonal() {
        let op = k3();
        assert_eq!(op.operator_row(1), vec![(0, 0.5), (1, -1.0), (2, 0.5)]);
    }

    #[test]
    fn isolated_vertex_has_zero_row() {
        let op = SparseSymOperator::from_triplets(3, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert!(op.is_isolated(2));
        assert!(op.operator_row(2).is_empty());
        assert_eq!(op.apply(&[0.0, 0.0, 5.0])[2], 0.0);
    }

    #[test]
    fn detects_asymmetric_weights() {
        let op = SparseSymOperator::from_triplets(2, [(0, 1, 1.0), (1, 0, 2.0)]).unwrap();
        assert!(!op.is_symmetric());
        assert!(op.to_dense_symmetric().is_err());
    }

    #[test]
    fn recovers_degrees_from_operator_rows() {
        // path 0-1-2 with unit weights: degrees (1, 2, 1)
        let op = SparseSymOperator::from_triplets(3, [(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)]).unwrap();
        let rows: Vec<_> = (0..3).map(|i| op.operator_row(i)).collect();
        let back = SparseSymOperator::from_operator_rows(rows).unwrap();
        assert!(back.is_symmetric());
        assert_eq!(back.to_dense(), op.to_dense());
        let r = back.degrees()[1] / back.degrees()[0];
        assert!((r - 2.0_f64).abs() < 1e-15);
    }

    #[test]
    fn symmetric_form_is_similar() {
        let op = SparseSymOperator::from_triplets(3, [(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)]).unwrap();
        let s = op.to_dense_symmetric().unwrap();
        assert!((s.get(0, 1) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.get(0, 0), -1.0);
    }
}
