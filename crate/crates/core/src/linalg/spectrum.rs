use serde::Serialize;

use crate::scalar::Real;

/// Eigenpairs with per-pair residual norms `‖Lv − λv‖₂`.
///
/// Eigenvectors are orthonormal in the inner product `⟨u, v⟩ = Σ wᵢ uᵢ vᵢ`,
/// where `w` is `weights` (all ones when `None`). Averaging Laplacians are
/// self-adjoint for the degree weights, so their spectra carry them.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum<T> {
    eigenvalues: Vec<T>,
    eigenvectors: Vec<Vec<T>>,
    residuals: Vec<T>,
    weights: Option<Vec<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn new(eigenvalues: Vec<T>, eigenvectors: Vec<Vec<T>>, residuals: Vec<T>, weights: Option<Vec<T>>) -> Self {
        assert_eq!(eigenvalues.len(), eigenvectors.len());
        assert_eq!(eigenvalues.len(), residuals.len());
        Self { eigenvalues, eigenvectors, residuals, weights }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[Vec<T>] {
        &self.eigenvectors
    }

    pub fn residuals(&self) -> &[T] {
        &self.residuals
    }

    pub fn weights(&self) -> Option<&[T]> {
        self.weights.as_deref()
    }

    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |a, &r| a.max(r))
    }

    /// Weighted inner product used for orthogonality.
    pub fn inner(&self, a: &[T], b: &[T]) -> T {
        match &self.weights {
            Some(w) => a.iter().zip(b).zip(w).map(|((&x, &y), &wi)| x * y * wi).sum(),
            None => super::matrix::dot(a, b),
        }
    }

    /// Largest deviation of the normalized Gram matrix from the identity.
    pub fn gram_error(&self) -> T {
        let norms: Vec<T> = self.eigenvectors.iter().map(|v| self.inner(v, v).sqrt()).collect();
        let mut worst = T::zero();
        for i in 0..self.len() {
            for j in i..self.len() {
                let g = self.inner(&self.eigenvectors[i], &self.eigenvectors[j]) / (norms[i] * norms[j]);
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    pub fn into_parts(self) -> (Vec<T>, Vec<Vec<T>>, Vec<T>, Option<Vec<T>>) {
        (self.eigenvalues, self.eigenvectors, self.residuals, self.weights)
    }
}
