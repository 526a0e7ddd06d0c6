//! Dense and sparse symmetric eigensolvers, least squares and alignment.

mod dense;
mod lanczos;
mod matrix;
mod polyfit;
mod procrustes;
mod sparse;
mod spectrum;

pub use dense::{eigh_dense, reconstruction_error, DenseSymMatrix};
pub use lanczos::{eigh_operator_dense, eigs_smallest_magnitude, eigs_smallest_magnitude_with, LanczosOptions};
pub use matrix::Matrix;
pub use polyfit::{polyfit_ls, PolyFit};
pub use procrustes::{orthogonal_align, orthogonality_defect};
pub use sparse::SparseSymOperator;
pub use spectrum::Spectrum;
