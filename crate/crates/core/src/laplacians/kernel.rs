use serde::Serialize;
use statrs::function::erf::erfc;

use crate::quadrature::adaptive_simpson_split;
use crate::scalar::Real;

/// Even kernel profiles, each normalized to unit mass on the line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelProfile {
    /// `½·1_{[−1,1]}`
    Indicator,
    /// Standard normal density, truncated at 6.
    Gaussian,
    /// `¾(1 − t²)` on `[−1, 1]`
    Epanechnikov,
    /// `1 − |t|` on `[−1, 1]`
    Triangular,
}

impl KernelProfile {
    pub fn name(&self) -> &'static str {
        match self {
            KernelProfile::Indicator => "indicator",
            KernelProfile::Gaussian => "gaussian",
            KernelProfile::Epanechnikov => "epanechnikov",
            KernelProfile::Triangular => "triangular",
        }
    }
}

impl std::str::FromStr for KernelProfile {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "indicator" | "ball" => Ok(KernelProfile::Indicator),
            "gaussian" => Ok(KernelProfile::Gaussian),
            "epanechnikov" => Ok(KernelProfile::Epanechnikov),
            "triangular" => Ok(KernelProfile::Triangular),
            other => Err(crate::error::invalid(format!("unknown kernel '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TailClass {
    Compact,
    /// Support cut at `radius`; `mass_error` is the discarded mass.
    Truncated { radius: f64, mass_error: f64 },
}

/// Moments of the one-dimensional profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelMoments<T> {
    /// `∫k`
    pub mass: T,
    /// `∫k t²`
    pub t2: T,
    /// `∫k² t²`
    pub k2_t2: T,
    /// `∫k² t⁴`
    pub k2_t4: T,
    /// `∫(t⁴ + t²)(k⁴ + k²)`, finite for every supported profile.
    pub integrability: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kernel<T> {
    pub profile: KernelProfile,
    pub tail: TailClass,
    pub moments: KernelMoments<T>,
}

const GAUSSIAN_CUTOFF: f64 = 6.0;

impl<T: Real> Kernel<T> {
    pub fn new(profile: KernelProfile) -> Self {
        let tail = match profile {
            KernelProfile::Gaussian => TailClass::Truncated {
                radius: GAUSSIAN_CUTOFF,
                mass_error: erfc(GAUSSIAN_CUTOFF / std::f64::consts::SQRT_2),
            },
            _ => TailClass::Compact,
        };
        let mut k = Self {
            profile,
            tail,
            moments: KernelMoments {
                mass: T::zero(),
                t2: T::zero(),
                k2_t2: T::zero(),
                k2_t4: T::zero(),
                integrability: T::zero(),
            },
        };
        k.moments = KernelMoments {
            mass: k.integrate(|_, v| v),
            t2: k.integrate(|t, v| v * t * t),
            k2_t2: k.integrate(|t, v| v * v * t * t),
            k2_t4: k.integrate(|t, v| v * v * t * t * t * t),
            integrability: k.integrate(|t, v| {
                let t2 = t * t;
                (t2 * t2 + t2) * (v * v * v * v + v * v)
            }),
        };
        debug_assert!(k.is_even());
        k
    }

    pub fn indicator() -> Self {
        Self::new(KernelProfile::Indicator)
    }

    pub fn gaussian() -> Self {
        Self::new(KernelProfile::Gaussian)
    }

    /// Radius beyond which the profile is treated as zero.
    pub fn support(&self) -> T {
        match self.tail {
            TailClass::Compact => T::one(),
            TailClass::Truncated { radius, .. } => T::of(radius),
        }
    }

    /// Profile value `k(t)`; zero outside the support.
    pub fn eval(&self, t: T) -> T {
        let a = t.abs();
        if a > self.support() {
            return T::zero();
        }
        match self.profile {
            KernelProfile::Indicator => T::of(0.5),
            KernelProfile::Gaussian => (-(a * a) * T::of(0.5)).exp() / (T::TAU()).sqrt(),
            KernelProfile::Epanechnikov => T::of(0.75) * (T::one() - a * a),
            KernelProfile::Triangular => T::one() - a,
        }
    }

    /// `M = ½∫k t²`, the constant in `ε⁻²L_{K,ε}f → M f″`.
    pub fn half_second_moment(&self) -> T {
        self.moments.t2 * T::of(0.5)
    }

    /// Mass of `u ↦ k(|u|)` over `ℝ^d`.
    pub fn radial_mass(&self, d: usize) -> T {
        match d {
            1 => self.moments.mass,
            _ => {
                let area = match d {
                    2 => T::TAU(),
                    3 => T::of(4.0) * T::PI(),
                    _ => {
                        // 2π^{d/2} / Γ(d/2)
                        let half = d as f64 / 2.0;
                        T::of(2.0 * std::f64::consts::PI.powf(half) / statrs::function::gamma::gamma(half))
                    }
                };
                let s = self.support();
                let p = (d - 1) as i32;
                area * adaptive_simpson_split(&|r: T| self.eval(r) * r.powi(p), T::zero(), s, &self.breaks(s), T::of(1e-14))
            }
        }
    }

    /// `K(u) = k(|u|) / radial_mass(d)`, unit mass on `ℝ^d`.
    pub fn radial(&self, u: &[T], mass: T) -> T {
        let r = u.iter().map(|&x| x * x).sum::<T>().sqrt();
        self.eval(r) / mass
    }

    fn breaks(&self, s: T) -> Vec<T> {
        (1..32).map(|i| s * T::of_usize(i) / T::of(32.0)).collect()
    }

    fn integrate(&self, g: impl Fn(T, T) -> T) -> T {
        let s = self.support();
        let breaks: Vec<T> = (-31..32).map(|i| s * T::of(i as f64 / 32.0)).collect();
        adaptive_simpson_split(&|t: T| g(t, self.eval(t)), -s, s, &breaks, T::of(1e-15))
    }

    fn is_even(&self) -> bool {
        (0..50).all(|i| {
            let t = T::of(0.123 * i as f64);
            self.eval(t) == self.eval(-t)
        })
    }
}
