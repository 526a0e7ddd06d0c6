use serde::Serialize;

use super::gasket::{sg_point_of_address, Address};
use super::Space;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One cell of an equal-measure partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell<T> {
    pub id: usize,
    /// Dyadic index (`"j"`, `"j,k"`) or gasket address.
    pub label: String,
    pub measure: T,
    pub diameter: T,
    pub representative: Vec<T>,
    /// Bounding box for interval and square cells; half-open except on the
    /// upper boundary of the space.
    pub bounds: Option<(Vec<T>, Vec<T>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equipartition<T> {
    pub level: usize,
    /// Children per refinement step.
    pub branching: usize,
    pub cells: Vec<Cell<T>>,
}

impl<T: Real> Equipartition<T> {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn max_diameter(&self) -> T {
        self.cells.iter().fold(T::zero(), |a, c| a.max(c.diameter))
    }
}

/// Level-`m` partition into `N^m` cells of measure `N^{−m}`: dyadic halves
/// of the interval (`N = 2`), quarters of the square (`N = 4`) or gasket
/// cells (`N = 3`). The representative is the cell's center (the centroid
/// image for gasket cells).
pub fn equipartition<T: Real>(space: &Space, m: usize) -> Result<Equipartition<T>> {
    match space {
        Space::Interval => {
            let k = 1usize << m;
            let h = 2.0 / k as f64;
            let measure = T::one() / T::of_usize(k);
            let cells = (0..k)
                .map(|j| {
                    let lo = -1.0 + h * j as f64;
                    let hi = if j + 1 == k { 1.0 } else { lo + h };
                    Cell {
                        id: j,
                        label: j.to_string(),
                        measure,
                        diameter: T::of(hi - lo),
                        representative: vec![T::of(0.5 * (lo + hi))],
                        bounds: Some((vec![T::of(lo)], vec![T::of(hi)])),
                    }
                })
                .collect();
            Ok(Equipartition { level: m, branching: 2, cells })
        }
        Space::Square => {
            let k = 1usize << m;
            let h = 2.0 / k as f64;
            let measure = T::one() / T::of_usize(k * k);
            let mut cells = Vec::with_capacity(k * k);
            for a in 0..k {
                for b in 0..k {
                    let lo = [-1.0 + h * a as f64, -1.0 + h * b as f64];
                    let hi = [lo[0] + h, lo[1] + h];
                    cells.push(Cell {
                        id: a * k + b,
                        label: format!("{a},{b}"),
                        measure,
                        diameter: T::of(h * 2f64.sqrt()),
                        representative: vec![T::of(lo[0] + 0.5 * h), T::of(lo[1] + 0.5 * h)],
                        bounds: Some((lo.iter().map(|&v| T::of(v)).collect(), hi.iter().map(|&v| T::of(v)).collect())),
                    });
                }
            }
            Ok(Equipartition { level: m, branching: 4, cells })
        }
        Space::Gasket => {
            let count = 3usize.pow(m as u32);
            let measure = T::one() / T::of_usize(count);
            let diameter = T::of(0.5f64.powi(m as i32));
            let cells = (0..count)
                .map(|id| {
                    let mut letters = vec![0u8; m];
                    let mut r = id;
                    for slot in letters.iter_mut().rev() {
                        *slot = (r % 3) as u8 + 1;
                        r /= 3;
                    }
                    let w = Address::from_letters_unchecked(letters);
                    Cell {
                        id,
                        label: w.to_string(),
                        measure,
                        diameter,
                        representative: sg_point_of_address::<T>(&w).to_vec(),
                        bounds: None,
                    }
                })
                .collect();
            Ok(Equipartition { level: m, branching: 3, cells })
        }
        other => Err(Error::Unsupported(format!("no self-similar equipartition of {}", other.name()))),
    }
}
