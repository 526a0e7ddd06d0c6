use rand::Rng;
use serde::Serialize;

use super::graph::{neighbor_lists, Metric};
use crate::error::{invalid, Error, Result};
use crate::linalg::SparseSymOperator;
use crate::quadrature::{adaptive_simpson, tensor_simpson};
use crate::rng::substream;
use crate::scalar::Real;
use crate::spaces::{cell_corners, equipartition, sg_point_of_address, Address, Equipartition, PointSet, Space, DEFAULT_ADDRESS_LENGTH};

/// How each cell's sample point is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Representative {
    Center,
    /// Uniform in the cell, one substream per cell.
    Random { seed: u64 },
}

/// Partition sets have diameter at most `ε / (δ n)`.
pub const PARTITION_DELTA: f64 = 2.0;

const MAX_CELLS: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquipartitionReport<T> {
    pub level: usize,
    pub cells: usize,
    pub cell_diameter: T,
    pub eps: T,
    pub n: usize,
    /// Modulus of continuity at the cell diameter: bounds the oscillation
    /// of `f` over every partition set, hence `|L_ε f − L_{ε,n} f|`.
    pub bound: T,
    /// The same modulus at `ε / n`.
    pub corollary_bound: T,
}

#[derive(Debug, Clone)]
pub struct EquipartitionGraph<T> {
    pub operator: SparseSymOperator<T>,
    pub partition: Equipartition<T>,
    pub points: PointSet<T>,
    /// For each cell, the `n` cells averaged by its row.
    pub selections: Vec<Vec<usize>>,
    pub report: EquipartitionReport<T>,
}

/// Graph Laplacian built from an equal-measure partition: row `i` averages
/// the representatives of `n` cells lying inside the closed `ε`-ball around
/// the representative of cell `i`, spread over the ball by picking evenly
/// spaced ranks of the candidates sorted by distance. The cell of `i` itself
/// is not selected, so the operator has no self-loops; it is in general not
/// reversible.
pub fn graph_lap_equipartition<T: Real>(
    space: &Space,
    rep: Representative,
    eps: T,
    n: usize,
    modulus: &impl Fn(T) -> T,
) -> Result<EquipartitionGraph<T>> {
    if !(eps > T::zero()) || n == 0 {
        return Err(invalid("need ε > 0 and n ≥ 1"));
    }
    let target = eps / (T::of(PARTITION_DELTA) * T::of_usize(n));
    let mut level = 0;
    let partition = loop {
        let p = equipartition::<T>(space, level)?;
        if p.max_diameter() <= target {
            break p;
        }
        if p.len() * p.branching > MAX_CELLS {
            return Err(Error::Unsupported(format!(
                "a partition fine enough for ε/(δn) = {target} needs more than {MAX_CELLS} cells"
            )));
        }
        level += 1;
    };
    let reps: Vec<Vec<T>> = partition.cells.iter().map(|c| representative(space, c, rep, level)).collect::<Result<_>>()?;
    let dim = reps[0].len();
    let points = PointSet::new(dim, reps.concat(), format!("equipartition-{}-level{level}", space.name()))?;
    let candidates = neighbor_lists(&points, eps, Metric::Euclidean)?;
    let mut selections = Vec::with_capacity(partition.len());
    for (i, cands) in candidates.into_iter().enumerate() {
        let x = points.point(i);
        let mut inside: Vec<(usize, T)> = cands
            .into_iter()
            .filter(|&(j, _)| cell_inside_ball(space, &partition, j, x, eps))
            .collect();
        if inside.len() < n {
            return Err(Error::EmptyNeighborhood(format!(
                "the ε-ball around cell {i} contains {} whole cells, fewer than n = {n}",
                inside.len()
            )));
        }
        inside.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        let c = inside.len();
        selections.push((0..n).map(|k| inside[k * c / n].0).collect::<Vec<_>>());
    }
    let triplets = selections.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |&j| (i, j, T::one())));
    let operator = SparseSymOperator::from_triplets(partition.len(), triplets)?;
    let cell_diameter = partition.max_diameter();
    let report = EquipartitionReport {
        level,
        cells: partition.len(),
        cell_diameter,
        eps,
        n,
        bound: modulus(cell_diameter),
        corollary_bound: modulus(eps / T::of_usize(n)),
    };
    Ok(EquipartitionGraph { operator, partition, points, selections, report })
}

impl<T: Real> EquipartitionGraph<T> {
    /// Continuum average `⨍_{N(x_i)} f − f(x_i)` over the union of the
    /// selected cells (interval and square partitions).
    pub fn continuum_average(&self, i: usize, f: &impl Fn(&[T]) -> T) -> Result<T> {
        let mut total = T::zero();
        for &j in &self.selections[i] {
            let cell = &self.partition.cells[j];
            let (lo, hi) = cell
                .bounds
                .as_ref()
                .ok_or_else(|| Error::Unsupported("continuum cell averages need box cells".into()))?;
            let vol: T = lo.iter().zip(hi).map(|(&a, &b)| b - a).fold(T::one(), |a, b| a * b);
            let integral = match lo.len() {
                1 => adaptive_simpson(&|y: T| f(&[y]), lo[0], hi[0], T::of(1e-14) * vol),
                _ => tensor_simpson(f, lo, hi, 16),
            };
            total += integral / vol;
        }
        Ok(total / T::of_usize(self.selections[i].len()) - f(self.points.point(i)))
    }
}

fn representative<T: Real>(space: &Space, cell: &crate::spaces::Cell<T>, rep: Representative, level: usize) -> Result<Vec<T>> {
    match rep {
        Representative::Center => Ok(cell.representative.clone()),
        Representative::Random { seed } => {
            let mut rng = substream(seed, cell.id as u64);
            match (space, &cell.bounds) {
                (_, Some((lo, hi))) => Ok(lo.iter().zip(hi).map(|(&a, &b)| a + (b - a) * T::of(rng.random::<f64>())).collect()),
                (Space::Gasket, None) => {
                    let mut letters: Vec<u8> = cell.label.bytes().map(|b| b - b'0').collect();
                    let depth = DEFAULT_ADDRESS_LENGTH.max(level + 1);
                    while letters.len() < depth {
                        letters.push(rng.random_range(1..=3));
                    }
                    Ok(sg_point_of_address::<T>(&Address::new(letters)?).to_vec())
                }
                _ => Err(Error::Unsupported(format!("random representatives on {}", space.name()))),
            }
        }
    }
}

/// Whether every corner of cell `j` lies within `eps` of `x`; cells are
/// convex hulls of their corners, so this is containment in the ball.
fn cell_inside_ball<T: Real>(space: &Space, part: &Equipartition<T>, j: usize, x: &[T], eps: T) -> bool {
    let cell = &part.cells[j];
    let within = |c: &[T]| c.iter().zip(x).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt() <= eps;
    match (&cell.bounds, space) {
        (Some((lo, hi)), _) => {
            let d = lo.len();
            (0..1usize << d).all(|mask| {
                let c: Vec<T> = (0..d).map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] }).collect();
                within(&c)
            })
        }
        (None, Space::Gasket) => match cell.label.parse::<Address>() {
            Ok(w) => cell_corners::<T>(&w).iter().all(|c| within(c)),
            Err(_) => false,
        },
        _ => false,
    }
}
