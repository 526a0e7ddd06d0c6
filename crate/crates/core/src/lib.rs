//! Laplacian eigenmaps, graph Laplacians and their convergence experiments.
//!
//! Every Laplacian follows the averaging sign convention
//! `L f(x) = mean of f over the neighbors of x − f(x)`, so spectra are
//! nonpositive. Numeric routines are generic over [`Real`] (`f32` or `f64`);
//! the aliases below fix `f64`.

pub mod eigenmap;
pub mod error;
pub mod exact_spectra;
pub mod experiments;
pub mod laplacians;
pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod spaces;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix64 = linalg::Matrix<f64>;
pub type DenseSymMatrix64 = linalg::DenseSymMatrix<f64>;
pub type SparseSymOperator64 = linalg::SparseSymOperator<f64>;
pub type Spectrum64 = linalg::Spectrum<f64>;
pub type PointSet64 = spaces::PointSet<f64>;
