//! Model spaces, samplers, the gasket's cellular semimetric and
//! equal-measure partitions.

mod equipartition;
mod gasket;
mod pointset;
mod sample;

pub use equipartition::{equipartition, Cell, Equipartition};
pub use gasket::{
    cell_corners, d_cell, deepest_intersecting_level, sg_point_of_address, Address, SG_CENTROID, SG_VERTICES,
};
pub use pointset::PointSet;
pub(crate) use pointset::fmt17;
pub use sample::{sample_density_1d, sample_gasket, sample_grid, sample_uniform, DEFAULT_ADDRESS_LENGTH};

use serde::Serialize;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// One-dimensional sampling densities on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Density {
    Gaussian { mean: f64, sd: f64 },
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Density {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Density::Gaussian { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
            Density::Exponential { rate } => rate.is_finite() && rate > 0.0,
            Density::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid density parameters {self:?}")))
        }
    }

    fn normal(mean: f64, sd: f64) -> Normal {
        Normal::new(mean, sd).expect("validated parameters")
    }

    pub fn pdf<T: Real>(&self, x: T) -> T {
        let x = x.as_f64();
        let v = match *self {
            Density::Gaussian { mean, sd } => Self::normal(mean, sd).pdf(x),
            Density::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Density::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
        };
        T::of(v)
    }

    /// Derivative of the density (one-sided at kinks).
    pub fn pdf_derivative<T: Real>(&self, x: T) -> T {
        let xf = x.as_f64();
        let v = match *self {
            Density::Gaussian { mean, sd } => -(xf - mean) / (sd * sd) * Self::normal(mean, sd).pdf(xf),
            Density::Exponential { rate } => {
                if xf < 0.0 {
                    0.0
                } else {
                    -rate * rate * (-rate * xf).exp()
                }
            }
            Density::Uniform { .. } => 0.0,
        };
        T::of(v)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Density::Gaussian { mean, sd } => Self::normal(mean, sd).cdf(x),
            Density::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Density::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    pub fn inverse_cdf(&self, u: f64) -> f64 {
        match *self {
            Density::Gaussian { mean, sd } => Self::normal(mean, sd).inverse_cdf(u),
            Density::Exponential { rate } => -(-u).ln_1p() / rate,
            Density::Uniform { lo, hi } => lo + (hi - lo) * u,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Density::Gaussian { mean, sd } => format!("gaussian({mean},{sd})"),
            Density::Exponential { rate } => format!("exponential({rate})"),
            Density::Uniform { lo, hi } => format!("uniform({lo},{hi})"),
        }
    }
}

/// Model spaces. Coordinates are ambient: the torus and sphere live in ℝ³,
/// the gasket in ℝ².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Space {
    /// `[−1, 1]`
    Interval,
    /// `[−1, 1]²`
    Square,
    /// Torus of revolution about the z axis.
    Torus { major: f64, minor: f64 },
    /// Unit sphere.
    Sphere,
    /// The real line carrying a density.
    Line(Density),
    /// Sierpinski gasket with vertices (0,0), (1,0), (½, √3/2).
    Gasket,
}

impl Space {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Space::Torus { major, minor } => {
                if minor > 0.0 && minor < major && major.is_finite() {
                    Ok(())
                } else {
                    Err(invalid(format!("torus needs 0 < minor < major, got minor={minor}, major={major}")))
                }
            }
            Space::Line(d) => d.validate(),
            _ => Ok(()),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Space::Interval | Space::Line(_) => 1,
            Space::Square | Space::Gasket => 2,
            Space::Torus { .. } | Space::Sphere => 3,
        }
    }

    /// Euclidean diameter (infinite for the line).
    pub fn diameter(&self) -> f64 {
        match *self {
            Space::Interval => 2.0,
            Space::Square => 2.0 * 2f64.sqrt(),
            Space::Torus { major, minor } => 2.0 * (major + minor),
            Space::Sphere => 2.0,
            Space::Line(_) => f64::INFINITY,
            Space::Gasket => 1.0,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Space::Interval => "interval".into(),
            Space::Square => "square".into(),
            Space::Torus { major, minor } => format!("torus({major},{minor})"),
            Space::Sphere => "sphere".into(),
            Space::Line(d) => format!("line:{}", d.name()),
            Space::Gasket => "sg".into(),
        }
    }
}
