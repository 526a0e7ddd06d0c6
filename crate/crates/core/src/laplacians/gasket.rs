use std::collections::HashMap;

use super::averaging::Neighborhood;
use crate::error::{invalid, Result};
use crate::linalg::SparseSymOperator;
use crate::scalar::Real;
use crate::spaces::{Address, PointSet, SG_VERTICES};

/// `log 5 / log 2`: the gasket rescales `ε`-averages by `ε^{−log5/log2}`.
pub const SG_WALK_DIMENSION: f64 = 2.321_928_094_887_362_3;

/// Level-`m` cells sharing a corner with the level-`m` cell `w`.
///
/// For the corner `F_w(p_j)` write `w = v a j^k` with `a ≠ j`; the corner is
/// `F_{v j}(p_a)`, which lies in the cell `v j a^k`. Words `j^m` have the
/// outer vertex `p_j` as that corner and no neighbor across it.
pub fn sg_cell_neighbors(w: &Address) -> Vec<Address> {
    let mut out: Vec<Address> = (1..=3u8).filter_map(|j| neighbor_across(w, j)).collect();
    out.sort();
    out.dedup();
    out
}

/// The cell sharing the corner `F_w(p_j)` with `w`, if that corner is not
/// an outer vertex.
fn neighbor_across(w: &Address, j: u8) -> Option<Address> {
    let letters = w.letters();
    let m = letters.len();
    let k = letters.iter().rev().take_while(|&&l| l == j).count();
    if k == m {
        return None;
    }
    let a = letters[m - k - 1];
    let mut nb = letters[..m - k - 1].to_vec();
    nb.push(j);
    nb.extend(std::iter::repeat_n(a, k));
    Some(Address::from_letters_unchecked(nb))
}

/// Cell average `⨍ (f(y) − f(x)) dμ(y)` over the `d_cell` ball of radius
/// `2^{−m}` around `x` (rule [`Neighborhood::CellBall`]), over the level-`m`
/// cell of `x` ([`Neighborhood::Cell`]) or over the two cells meeting at the
/// corner `x` heads to ([`Neighborhood::Junction`]). The integral is the exact mean of
/// `f` over all subcells `extra_levels` deeper, each evaluated at its
/// address.
pub fn sg_cell_averaging_lap<T: Real>(
    f: &impl Fn(&Address) -> T,
    x: &Address,
    m: usize,
    rule: Neighborhood,
    extra_levels: usize,
) -> Result<T> {
    if x.len() < m {
        return Err(invalid(format!("address length {} is below the level {m}", x.len())));
    }
    let own = x.prefix(m);
    let mut cells = vec![own.clone()];
    match rule {
        Neighborhood::Cell => {}
        Neighborhood::CellBall => cells.extend(sg_cell_neighbors(&own)),
        Neighborhood::Junction => {
            let j = *x
                .letters()
                .get(m)
                .ok_or_else(|| invalid("the junction rule needs an address longer than the level"))?;
            cells.extend(neighbor_across(&own, j));
        }
        Neighborhood::Ball => return Err(invalid("gasket averages use the cell or cell-ball rule")),
    }
    let subwords = words(extra_levels);
    let mut sum = T::zero();
    for c in &cells {
        for s in &subwords {
            let mut letters = c.letters().to_vec();
            letters.extend_from_slice(s);
            sum += f(&Address::from_letters_unchecked(letters));
        }
    }
    let count = T::of_usize(cells.len() * subwords.len());
    Ok(sum / count - f(x))
}

/// `5^m` times [`sg_cell_averaging_lap`].
pub fn sg_cell_averaging_lap_rescaled<T: Real>(
    f: &impl Fn(&Address) -> T,
    x: &Address,
    m: usize,
    rule: Neighborhood,
    extra_levels: usize,
) -> Result<T> {
    Ok(sg_cell_averaging_lap(f, x, m, rule, extra_levels)? * T::of(5f64.powi(m as i32)))
}

fn words(len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (1..=3u8).map(move |l| {
                    let mut v = w.clone();
                    v.push(l);
                    v
                })
            })
            .collect();
    }
    out
}

/// Level-`m` vertex graph of the gasket: corners of the `3^m` cells joined
/// along cell edges, with uniform neighbor averaging. Interior vertices
/// have four neighbors, the outer corners two. Vertices are ordered by
/// their lattice coordinates.
pub fn sg_vertex_graph<T: Real>(m: usize) -> Result<(SparseSymOperator<T>, PointSet<T>)> {
    if m > 12 {
        return Err(invalid(format!("level {m} exceeds the supported maximum 12")));
    }
    let mut offsets: Vec<[u64; 2]> = vec![[0, 0]];
    for _ in 0..m {
        offsets = offsets
            .iter()
            .flat_map(|o| [[2 * o[0], 2 * o[1]], [2 * o[0] + 1, 2 * o[1]], [2 * o[0], 2 * o[1] + 1]])
            .collect();
    }
    let corners = |o: &[u64; 2]| [[o[0], o[1]], [o[0] + 1, o[1]], [o[0], o[1] + 1]];
    let mut lattice: Vec<[u64; 2]> = offsets.iter().flat_map(corners).collect();
    lattice.sort_unstable();
    lattice.dedup();
    let index: HashMap<[u64; 2], usize> = lattice.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut triplets = Vec::with_capacity(offsets.len() * 6);
    for o in &offsets {
        let c = corners(o).map(|v| index[&v]);
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            triplets.push((c[a], c[b], T::one()));
            triplets.push((c[b], c[a], T::one()));
        }
    }
    let op = SparseSymOperator::from_triplets(lattice.len(), triplets)?;
    let scale = 0.5f64.powi(m as i32);
    let coords: Vec<T> = lattice
        .iter()
        .flat_map(|v| {
            let a = v[0] as f64 * scale;
            let b = v[1] as f64 * scale;
            [T::of(a + 0.5 * b), T::of(b * SG_VERTICES[2][1])]
        })
        .collect();
    let pts = PointSet::new(2, coords, format!("sg-vertices-level{m}"))?;
    Ok((op, pts))
}
