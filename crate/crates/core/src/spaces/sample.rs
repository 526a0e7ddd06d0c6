use std::f64::consts::PI;

use rand::Rng;

use super::gasket::{sg_point_of_address, Address};
use super::pointset::PointSet;
use super::{Density, Space};
use crate::error::{invalid, Result};
use crate::rng::{open_unit, stream, Stream};
use crate::scalar::Real;

/// Address length used for gasket samples unless stated otherwise.
pub const DEFAULT_ADDRESS_LENGTH: usize = 15;

/// `n` i.i.d. points from the normalized uniform measure of `space`.
///
/// The torus is sampled uniformly for surface area: the poloidal angle `θ`
/// is drawn by rejection with acceptance `(R + r cos θ)/(R + r)`. Gasket
/// points carry addresses of length [`DEFAULT_ADDRESS_LENGTH`].
pub fn sample_uniform<T: Real>(space: &Space, n: usize, seed: u64) -> Result<PointSet<T>> {
    space.validate()?;
    if n == 0 {
        return Err(invalid("sample size must be positive"));
    }
    let mut rng = stream(seed);
    let tag = format!("uniform:{}", space.name());
    let coords: Vec<f64> = match *space {
        Space::Interval => (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect(),
        Space::Square => (0..2 * n).map(|_| rng.random_range(-1.0..=1.0)).collect(),
        Space::Sphere => (0..n)
            .flat_map(|_| {
                let z: f64 = rng.random_range(-1.0..=1.0);
                let phi = 2.0 * PI * rng.random::<f64>();
                let rho = (1.0 - z * z).max(0.0).sqrt();
                [rho * phi.cos(), rho * phi.sin(), z]
            })
            .collect(),
        Space::Torus { major, minor } => (0..n)
            .flat_map(|_| {
                let theta = loop {
                    let t = 2.0 * PI * rng.random::<f64>();
                    if rng.random::<f64>() * (major + minor) <= major + minor * t.cos() {
                        break t;
                    }
                };
                let phi = 2.0 * PI * rng.random::<f64>();
                let rho = major + minor * theta.cos();
                [rho * phi.cos(), rho * phi.sin(), minor * theta.sin()]
            })
            .collect(),
        Space::Line(d) => return sample_density_1d(&d, n, seed),
        Space::Gasket => return sample_gasket(n, DEFAULT_ADDRESS_LENGTH, seed),
    };
    let coords = coords.into_iter().map(T::of).collect();
    Ok(PointSet::new(space.ambient_dim(), coords, tag)?.with_seed(seed))
}

/// Gasket sample: `m` i.i.d. uniform letters per point, realizing the
/// self-similar measure on level-`m` cells.
pub fn sample_gasket<T: Real>(n: usize, m: usize, seed: u64) -> Result<PointSet<T>> {
    if n == 0 {
        return Err(invalid("sample size must be positive"));
    }
    let mut rng = stream(seed);
    let addresses: Vec<Address> = (0..n)
        .map(|_| Address::from_letters_unchecked((0..m).map(|_| rng.random_range(1..=3u8)).collect()))
        .collect();
    let coords = addresses.iter().flat_map(sg_point_of_address::<T>).collect();
    PointSet::new(2, coords, format!("uniform:sg:m={m}"))?.with_addresses(addresses).map(|p| p.with_seed(seed))
}

/// `x_j = −1 + 2j/(n−1)`, `j = 0..n`.
pub fn sample_grid<T: Real>(n: usize) -> Result<PointSet<T>> {
    if n < 2 {
        return Err(invalid("a grid needs at least two points"));
    }
    let h = 2.0 / (n - 1) as f64;
    let coords = (0..n).map(|j| if j == n - 1 { T::one() } else { T::of(-1.0 + h * j as f64) }).collect();
    PointSet::new(1, coords, "grid:interval")
}

/// Inverse-CDF sampling of a one-dimensional density.
pub fn sample_density_1d<T: Real>(density: &Density, n: usize, seed: u64) -> Result<PointSet<T>> {
    density.validate()?;
    if n == 0 {
        return Err(invalid("sample size must be positive"));
    }
    let mut rng: Stream = stream(seed);
    let coords = (0..n).map(|_| T::of(density.inverse_cdf(open_unit(&mut rng)))).collect();
    Ok(PointSet::new(1, coords, density.name())?.with_seed(seed))
}
