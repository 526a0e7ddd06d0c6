//! Thick-restart Lanczos for the eigenpairs of an averaging Laplacian
//! nearest zero.
//!
//! The iteration runs on the symmetric similarity `S = D^{1/2} L D^{−1/2}`
//! with full reorthogonalization. Converged vectors are mapped back through
//! `D^{−1/2}`; isolated vertices contribute the pairs `(0, e_i)`. After the
//! main run a deflated pass from a fresh start vector looks for eigenvalues
//! the Krylov space missed, which happens for repeated eigenvalues.

use rand::Rng;

use super::dense::eigh_dense;
use super::dense::DenseSymMatrix;
use super::matrix::{axpy, dot, norm, Matrix};
use super::sparse::SparseSymOperator;
use super::spectrum::Spectrum;
use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Bound on every returned residual `‖Lv − λv‖₂` with `‖v‖₂ = 1`.
    pub tol: f64,
    /// Seed of the start vector.
    pub seed: u64,
    /// Operator applications allowed before giving up.
    pub max_matvecs: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tol: 1e-8, seed: 0x5EED, max_matvecs: 200_000 }
    }
}

/// The `k` eigenpairs of `op` nearest zero, ordered by ascending `|λ|`.
pub fn eigs_smallest_magnitude<T: Real>(op: &SparseSymOperator<T>, k: usize, tol: T) -> Result<Spectrum<T>> {
    eigs_smallest_magnitude_with(op, k, &LanczosOptions { tol: tol.as_f64(), ..LanczosOptions::default() })
}

pub fn eigs_smallest_magnitude_with<T: Real>(
    op: &SparseSymOperator<T>,
    k: usize,
    opts: &LanczosOptions,
) -> Result<Spectrum<T>> {
    let n = op.n();
    if k == 0 || k > n {
        return Err(invalid(format!("requested {k} eigenpairs of a {n}x{n} operator")));
    }
    if !op.is_symmetric() {
        return Err(invalid("adjacency weights are not symmetric; the operator is not self-adjoint"));
    }
    let isd = op.inv_sqrt_degrees();
    let active: Vec<bool> = (0..n).map(|i| !op.is_isolated(i)).collect();
    let na = active.iter().filter(|&&a| a).count();

    let mut pairs: Vec<(T, Vec<T>)> = Vec::with_capacity(k);
    let want = k.min(na);
    if want > 0 {
        let degs = op.degrees();
        let (dmin, dmax) = degs
            .iter()
            .filter(|&&d| d > T::zero())
            .fold((T::infinity(), T::zero()), |(lo, hi), &d| (lo.min(d), hi.max(d)));
        let floor = T::of(64.0) * T::epsilon();
        let inner_tol = (T::of(opts.tol) / (dmax / dmin).sqrt()).max(floor);
        let apply = |x: &[T], y: &mut [T]| op.apply_symmetric(x, y, &isd);
        let mut solver = Solver { n, active: &active, apply: &apply, tol: inner_tol, budget: opts.max_matvecs, used: 0 };
        let mut rng = rng::stream(opts.seed);
        let (vals, vecs) = solver.top_with_verification(want, na, &mut rng)?;
        for (lam, y) in vals.into_iter().zip(vecs) {
            let mut v: Vec<T> = y.iter().zip(&isd).map(|(&a, &s)| a * s).collect();
            let nv = norm(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            pairs.push((lam, v));
        }
    }
    for i in (0..n).filter(|&i| !active[i]).take(k) {
        let mut e = vec![T::zero(); n];
        e[i] = T::one();
        pairs.push((T::zero(), e));
    }
    pairs.sort_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).unwrap());
    pairs.truncate(k);

    let (eigenvalues, eigenvectors): (Vec<T>, Vec<Vec<T>>) = pairs.into_iter().unzip();
    let residuals: Vec<T> = eigenvalues
        .iter()
        .zip(&eigenvectors)
        .map(|(&lam, v)| {
            let lv = op.apply(v);
            lv.iter().zip(v).map(|(&a, &b)| (a - lam * b) * (a - lam * b)).sum::<T>().sqrt()
        })
        .collect();
    let worst = residuals.iter().fold(T::zero(), |a, &r| a.max(r));
    if worst > T::of(opts.tol) {
        return Err(Error::NonConvergence {
            iterations: 0,
            residuals: residuals.iter().map(|r| r.as_f64()).collect(),
        });
    }
    Ok(Spectrum::new(eigenvalues, eigenvectors, residuals, Some(operator_weights(op))))
}

/// Every eigenpair of `op` through the dense solver, in the same layout as
/// [`eigs_smallest_magnitude`].
pub fn eigh_operator_dense<T: Real>(op: &SparseSymOperator<T>) -> Result<Spectrum<T>> {
    let full = op.to_dense_symmetric()?;
    let n = op.n();
    let isd = op.inv_sqrt_degrees();
    let active: Vec<usize> = (0..n).filter(|&i| !op.is_isolated(i)).collect();
    let mut pairs: Vec<(T, Vec<T>)> = Vec::with_capacity(n);
    if !active.is_empty() {
        let sub = DenseSymMatrix::from_upper(active.len(), |a, b| full.get(active[a], active[b]))?;
        let (vals, vecs, _, _) = eigh_dense(&sub)?.into_parts();
        for (lam, y) in vals.into_iter().zip(vecs).rev() {
            let mut v = vec![T::zero(); n];
            for (&i, &a) in active.iter().zip(&y) {
                v[i] = a * isd[i];
            }
            let nv = norm(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            pairs.push((lam, v));
        }
    }
    for i in (0..n).filter(|&i| op.is_isolated(i)) {
        let mut e = vec![T::zero(); n];
        e[i] = T::one();
        pairs.push((T::zero(), e));
    }
    pairs.sort_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).unwrap());
    let (eigenvalues, eigenvectors): (Vec<T>, Vec<Vec<T>>) = pairs.into_iter().unzip();
    let residuals = eigenvalues
        .iter()
        .zip(&eigenvectors)
        .map(|(&lam, v)| {
            let lv = op.apply(v);
            lv.iter().zip(v).map(|(&a, &b)| (a - lam * b) * (a - lam * b)).sum::<T>().sqrt()
        })
        .collect();
    Ok(Spectrum::new(eigenvalues, eigenvectors, residuals, Some(operator_weights(op))))
}

fn operator_weights<T: Real>(op: &SparseSymOperator<T>) -> Vec<T> {
    op.degrees().iter().map(|&d| if d > T::zero() { d } else { T::one() }).collect()
}

struct Solver<'a, T, F> {
    n: usize,
    active: &'a [bool],
    apply: &'a F,
    tol: T,
    budget: usize,
    used: usize,
}

impl<T: Real, F: Fn(&[T], &mut [T])> Solver<'_, T, F> {
    fn top_with_verification(&mut self, want: usize, na: usize, rng: &mut rng::Stream) -> Result<(Vec<T>, Vec<Vec<T>>)> {
        let (mut vals, mut vecs) = self.top(want, &[], na, rng)?;
        while vecs.len() < na {
            let (extra_val, extra_vec) = self.top(1, &vecs, na - vecs.len(), rng)?;
            let lowest = vals[vals.len() - 1];
            if extra_val[0] <= lowest + self.tol {
                break;
            }
            let pos = vals.iter().position(|&v| v < extra_val[0]).unwrap_or(vals.len());
            vals.insert(pos, extra_val[0]);
            vecs.insert(pos, extra_vec.into_iter().next().unwrap());
            vals.truncate(want);
            vecs.truncate(want);
        }
        Ok((vals, vecs))
    }

    fn random_vector(&self, rng: &mut rng::Stream) -> Vec<T> {
        (0..self.n)
            .map(|i| if self.active[i] { T::of(rng.random::<f64>() - 0.5) } else { T::zero() })
            .collect()
    }

    /// The `want` algebraically largest eigenpairs of `S` restricted to the
    /// complement of `locked`, a space of dimension `avail`.
    fn top(&mut self, want: usize, locked: &[Vec<T>], avail: usize, rng: &mut rng::Stream) -> Result<(Vec<T>, Vec<Vec<T>>)> {
        let want = want.min(avail);
        let m = avail.min((2 * want + 40).max(80));
        let breakdown = T::of(1e3) * T::epsilon();

        let mut start = self.random_vector(rng);
        Self::project_out(&mut start, locked);
        Self::project_out(&mut start, locked);
        let s0 = norm(&start);
        start.iter_mut().for_each(|x| *x /= s0);

        let mut basis: Vec<Vec<T>> = Vec::with_capacity(m + 1);
        basis.push(start);
        let mut h = Matrix::zeros(m, m);
        let mut w = vec![T::zero(); self.n];
        let mut iterations = 0usize;
        loop {
            iterations += 1;
            let mut beta;
            let mut residual = vec![T::zero(); self.n];
            let mut j = basis.len() - 1;
            loop {
                (self.apply)(&basis[j], &mut w);
                self.used += 1;
                let mut coeffs = vec![T::zero(); j + 1];
                for _ in 0..2 {
                    Self::project_out(&mut w, locked);
                    for (i, b) in basis.iter().enumerate() {
                        let c = dot(b, &w);
                        axpy(-c, b, &mut w);
                        coeffs[i] += c;
                    }
                }
                for (i, &c) in coeffs.iter().enumerate() {
                    h[(i, j)] = c;
                    h[(j, i)] = c;
                }
                beta = norm(&w);
                if j + 1 == m {
                    residual.copy_from_slice(&w);
                    break;
                }
                if beta <= breakdown {
                    let mut fresh = self.random_vector(rng);
                    for _ in 0..2 {
                        Self::project_out(&mut fresh, locked);
                        Self::project_out(&mut fresh, &basis);
                    }
                    let nf = norm(&fresh);
                    if nf <= breakdown {
                        beta = T::zero();
                        break;
                    }
                    fresh.iter_mut().for_each(|x| *x /= nf);
                    basis.push(fresh);
                } else {
                    basis.push(w.iter().map(|&x| x / beta).collect());
                }
                j += 1;
            }

            let size = basis.len();
            let proj = DenseSymMatrix::from_upper(size, |a, b| h[(a, b)])?;
            let ritz = eigh_dense(&proj)?;
            // descending: the algebraically largest first
            let order: Vec<usize> = (0..size).rev().collect();
            let s = ritz.eigenvectors();
            let theta = ritz.eigenvalues();
            let res_est: Vec<T> = order[..want].iter().map(|&c| beta * s[c][size - 1].abs()).collect();
            let converged = res_est.iter().all(|&r| r <= self.tol);
            if converged {
                let vecs = order[..want].iter().map(|&c| combine(&basis, &s[c], self.n)).collect();
                let vals = order[..want].iter().map(|&c| theta[c]).collect();
                return Ok((vals, vecs));
            }
            if self.used >= self.budget {
                return Err(Error::NonConvergence {
                    iterations,
                    residuals: res_est.iter().map(|r| r.as_f64()).collect(),
                });
            }

            let keep = (want + (size - want) / 2).min(size - 1);
            let mut next: Vec<Vec<T>> = order[..keep].iter().map(|&c| combine(&basis, &s[c], self.n)).collect();
            h = Matrix::zeros(m, m);
            for (i, &c) in order[..keep].iter().enumerate() {
                h[(i, i)] = theta[c];
            }
            let mut r = residual;
            for _ in 0..2 {
                Self::project_out(&mut r, locked);
                Self::project_out(&mut r, &next);
            }
            let nr = norm(&r);
            if nr <= breakdown {
                let mut fresh = self.random_vector(rng);
                for _ in 0..2 {
                    Self::project_out(&mut fresh, locked);
                    Self::project_out(&mut fresh, &next);
                }
                let nf = norm(&fresh);
                fresh.iter_mut().for_each(|x| *x /= nf);
                next.push(fresh);
            } else {
                next.push(r.iter().map(|&x| x / nr).collect());
            }
            basis = next;
        }
    }

    fn project_out(w: &mut [T], against: &[Vec<T>]) {
        for b in against {
            let c = dot(b, w);
            axpy(-c, b, w);
        }
    }
}

fn combine<T: Real>(basis: &[Vec<T>], coeffs: &[T], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n];
    for (b, &c) in basis.iter().zip(coeffs) {
        axpy(c, b, &mut out);
    }
    let nv = norm(&out);
    out.iter_mut().for_each(|x| *x /= nv);
    out
}
