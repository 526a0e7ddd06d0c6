use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::kernel::Kernel;
use crate::error::{invalid, Result};
use crate::linalg::SparseSymOperator;
use crate::scalar::Real;
use crate::spaces::{deepest_intersecting_level, Address, PointSet};

/// Relative slack on the closed ball `d ≤ ε`, absorbing rounding in
/// coordinates that sit exactly `ε` apart (grid neighbors).
pub const BALL_SLACK: f64 = 1e-9;

/// Drop threshold for kernel weights, relative to the row maximum.
pub const SPARSIFY: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Metric {
    Euclidean,
    /// Gasket cellular semimetric on the point addresses.
    DCell,
}

impl std::str::FromStr for Metric {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "dcell" | "d_cell" => Ok(Metric::DCell),
            other => Err(invalid(format!("unknown metric '{other}'"))),
        }
    }
}

/// Per-point neighbor lists `(j, d(x_i, x_j))` with `d ≤ radius`, self
/// excluded, columns ascending.
pub fn neighbor_lists<T: Real>(pts: &PointSet<T>, radius: T, metric: Metric) -> Result<Vec<Vec<(usize, T)>>> {
    if radius.is_nan() || radius < T::zero() {
        return Err(invalid(format!("radius must be nonnegative, got {radius}")));
    }
    match metric {
        Metric::Euclidean => Ok(euclidean_neighbors(pts, radius)),
        Metric::DCell => {
            let addrs = pts
                .addresses()
                .ok_or_else(|| invalid("the d_cell metric needs point addresses"))?;
            dcell_neighbors(addrs, radius)
        }
    }
}

fn euclidean_neighbors<T: Real>(pts: &PointSet<T>, radius: T) -> Vec<Vec<(usize, T)>> {
    let n = pts.len();
    let d = pts.dim();
    let reach = radius * (T::one() + T::of(BALL_SLACK));
    let mut lo = vec![T::infinity(); d];
    let mut hi = vec![T::neg_infinity(); d];
    for p in pts.points() {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let extent = (0..d).fold(T::zero(), |a, k| a.max(hi[k] - lo[k]));
    // any pitch ≥ reach is correct; a single bucket covers huge radii
    let pitch = if reach > extent || !reach.is_finite() {
        extent + T::one()
    } else if reach > T::zero() {
        reach
    } else {
        (extent + T::one()) / T::of_usize(n.max(1))
    };
    let key = |p: &[T]| -> [i64; 3] {
        let mut k = [0i64; 3];
        for a in 0..d.min(3) {
            k[a] = ((p[a] - lo[a]) / pitch).floor().to_i64().unwrap_or(0);
        }
        k
    };
    let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for i in 0..n {
        buckets.entry(key(pts.point(i))).or_default().push(i);
    }
    let offsets: Vec<[i64; 3]> = {
        let r: Vec<i64> = vec![-1, 0, 1];
        let zero = vec![0i64];
        let axis = |a: usize| if a < d { r.clone() } else { zero.clone() };
        let mut out = Vec::new();
        for &a in &axis(0) {
            for &b in &axis(1) {
                for &c in &axis(2) {
                    out.push([a, b, c]);
                }
            }
        }
        out
    };
    (0..n)
        .into_par_iter()
        .map(|i| {
            let p = pts.point(i);
            let k = key(p);
            let mut row = Vec::new();
            for o in &offsets {
                if let Some(list) = buckets.get(&[k[0] + o[0], k[1] + o[1], k[2] + o[2]]) {
                    for &j in list {
                        if j == i {
                            continue;
                        }
                        let q = pts.point(j);
                        let dist = p.iter().zip(q).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt();
                        if dist <= reach {
                            row.push((j, dist));
                        }
                    }
                }
            }
            row.sort_by_key(|&(j, _)| j);
            row
        })
        .collect()
}

/// Level `K` with `2^{−K} ≤ radius < 2^{−(K−1)}`, or 0 for `radius ≥ 1`.
fn cell_level(radius: f64) -> usize {
    let mut k = 0;
    while 0.5f64.powi(k as i32) > radius * (1.0 + BALL_SLACK) && k < 64 {
        k += 1;
    }
    k
}

fn dcell_neighbors<T: Real>(addrs: &[Address], radius: T) -> Result<Vec<Vec<(usize, T)>>> {
    let n = addrs.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = addrs[0].len();
    if addrs.iter().any(|a| a.len() != m) {
        return Err(invalid("addresses must share one length"));
    }
    let level = cell_level(radius.as_f64());
    if level > m {
        // d_cell ≥ 2^{−M} > radius for every pair
        return Ok(vec![Vec::new(); n]);
    }
    let mut cells: HashMap<[u64; 2], Vec<usize>> = HashMap::new();
    for (i, a) in addrs.iter().enumerate() {
        cells.entry(a.offset(level)).or_default().push(i);
    }
    let mut corners: HashMap<[u64; 2], Vec<[u64; 2]>> = HashMap::new();
    for &o in cells.keys() {
        for e in [[0, 0], [1, 0], [0, 1]] {
            corners.entry([o[0] + e[0], o[1] + e[1]]).or_default().push(o);
        }
    }
    let rows = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Vec<(usize, T)>> {
            let o = addrs[i].offset(level);
            let mut near: Vec<[u64; 2]> = [[0u64, 0u64], [1, 0], [0, 1]]
                .iter()
                .flat_map(|e| corners[&[o[0] + e[0], o[1] + e[1]]].iter().copied())
                .collect();
            near.sort_unstable();
            near.dedup();
            let mut row = Vec::new();
            for c in near {
                for &j in &cells[&c] {
                    if j != i {
                        let k = deepest_intersecting_level(&addrs[i], &addrs[j])?;
                        row.push((j, T::of(0.5f64.powi(k as i32))));
                    }
                }
            }
            row.sort_by_key(|&(j, _)| j);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows)
}

/// Averaging graph Laplacian on the sample points: each row averages the
/// points within `ε` (self excluded) minus the center value. Points with no
/// neighbor get zero rows.
pub fn graph_lap_eps<T: Real>(pts: &PointSet<T>, eps: T, metric: Metric) -> Result<SparseSymOperator<T>> {
    if pts.len() < 2 {
        return Err(invalid("a graph Laplacian needs at least two points"));
    }
    let rows = neighbor_lists(pts, eps, metric)?;
    SparseSymOperator::from_adjacency_rows(
        rows.into_iter().map(|r| r.into_iter().map(|(j, _)| (j, T::one())).collect()).collect(),
    )
}

/// Kernel graph Laplacian with weights `k(ε⁻¹ d(x_i, x_j))`, normalized per
/// row over `l ≠ i`. Weights below `1e−14` of both endpoints' row maxima
/// are dropped, which keeps the weight matrix symmetric.
pub fn graph_lap_kernel<T: Real>(
    pts: &PointSet<T>,
    kernel: &Kernel<T>,
    eps: T,
    metric: Metric,
) -> Result<SparseSymOperator<T>> {
    if pts.len() < 2 {
        return Err(invalid("a graph Laplacian needs at least two points"));
    }
    if !(eps > T::zero()) {
        return Err(invalid(format!("kernel bandwidth must be positive, got {eps}")));
    }
    let rows = neighbor_lists(pts, kernel.support() * eps, metric)?;
    let weighted: Vec<Vec<(usize, T)>> =
        rows.into_iter().map(|r| r.into_iter().map(|(j, d)| (j, kernel.eval(d / eps))).collect()).collect();
    let row_max: Vec<T> = weighted.iter().map(|r| r.iter().fold(T::zero(), |a, &(_, w)| a.max(w))).collect();
    let cut = T::of(SPARSIFY);
    let kept = weighted
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.into_iter()
                .filter(|&(j, w)| w > T::zero() && w >= cut * row_max[i].min(row_max[j]))
                .collect()
        })
        .collect();
    SparseSymOperator::from_adjacency_rows(kept)
}
