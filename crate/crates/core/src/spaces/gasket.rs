//! Addresses, points and the cellular semimetric of the Sierpinski gasket.
//!
//! Cells are tracked exactly in the integer lattice spanned by `p₂ − p₁` and
//! `p₃ − p₁`: the level-`k` cell `F_w(SG)` has corners `(o + e_j) / 2^k`
//! where `o` is an integer offset and `e_j ∈ {(0,0), (1,0), (0,1)}`. Two
//! distinct cells of the same level meet iff they share a corner.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

pub const SG_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.866_025_403_784_438_6]];
pub const SG_CENTROID: [f64; 2] = [0.5, 0.288_675_134_594_812_9];

const LATTICE: [[u64; 2]; 3] = [[0, 0], [1, 0], [0, 1]];
const MAX_LEN: usize = 62;

/// A word over `{1, 2, 3}` naming the cell `F_{w₁} ∘ … ∘ F_{w_m}(SG)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Address(Vec<u8>);

impl Address {
    /// Letters must lie in `1..=3`.
    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&l| !(1..=3).contains(&l)) {
            return Err(invalid(format!("address letter {bad} is not in {{1,2,3}}")));
        }
        Ok(Self(letters))
    }

    pub(crate) fn from_letters_unchecked(letters: Vec<u8>) -> Self {
        Self(letters)
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn prefix(&self, m: usize) -> Address {
        Address(self.0[..m.min(self.0.len())].to_vec())
    }

    /// Lattice offset of the level-`m` cell, in units of `2^{−m}`.
    pub(crate) fn offset(&self, m: usize) -> [u64; 2] {
        let mut o = [0u64; 2];
        for &l in &self.0[..m] {
            let e = LATTICE[(l - 1) as usize];
            o = [2 * o[0] + e[0], 2 * o[1] + e[1]];
        }
        o
    }

    /// Index of the level-`m` cell in `0..3^m` (letters read base 3).
    pub fn cell_index(&self, m: usize) -> usize {
        self.0[..m].iter().fold(0usize, |acc, &l| acc * 3 + (l - 1) as usize)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Address {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                '1' => Ok(1),
                '2' => Ok(2),
                '3' => Ok(3),
                other => Err(invalid(format!("address letter '{other}' is not in {{1,2,3}}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Self(letters))
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `F_w` applied to the centroid of the outer triangle.
pub fn sg_point_of_address<T: Real>(w: &Address) -> [T; 2] {
    let mut x = SG_CENTROID;
    for &l in w.letters().iter().rev() {
        let p = SG_VERTICES[(l - 1) as usize];
        x = [0.5 * (x[0] + p[0]), 0.5 * (x[1] + p[1])];
    }
    [T::of(x[0]), T::of(x[1])]
}

/// Ambient corners of the cell `F_w(SG)`.
pub fn cell_corners<T: Real>(w: &Address) -> [[T; 2]; 3] {
    let m = w.len();
    let o = w.offset(m);
    let scale = 0.5f64.powi(m as i32);
    let mut out = [[T::zero(); 2]; 3];
    for (j, e) in LATTICE.iter().enumerate() {
        let a = (o[0] + e[0]) as f64 * scale;
        let b = (o[1] + e[1]) as f64 * scale;
        // lattice basis vectors are p₂ and p₃
        out[j] = [T::of(a + 0.5 * b), T::of(b * SG_VERTICES[2][1])];
    }
    out
}

fn cells_meet(ox: [u64; 2], oy: [u64; 2]) -> bool {
    if ox == oy {
        return true;
    }
    LATTICE.iter().any(|ex| {
        let cx = [ox[0] + ex[0], ox[1] + ex[1]];
        LATTICE.iter().any(|ey| cx == [oy[0] + ey[0], oy[1] + ey[1]])
    })
}

/// Deepest level `k ≤ M` at which the level-`k` cells of `wx` and `wy` meet.
pub fn deepest_intersecting_level(wx: &Address, wy: &Address) -> Result<usize> {
    if wx.len() != wy.len() {
        return Err(invalid(format!("address lengths {} and {} differ", wx.len(), wy.len())));
    }
    if wx.len() > MAX_LEN {
        return Err(invalid(format!("address length {} exceeds {MAX_LEN}", wx.len())));
    }
    let mut ox = [0u64; 2];
    let mut oy = [0u64; 2];
    for k in 0..wx.len() {
        let ex = LATTICE[(wx.0[k] - 1) as usize];
        let ey = LATTICE[(wy.0[k] - 1) as usize];
        ox = [2 * ox[0] + ex[0], 2 * ox[1] + ex[1]];
        oy = [2 * oy[0] + ey[0], 2 * oy[1] + ey[1]];
        if !cells_meet(ox, oy) {
            return Ok(k);
        }
    }
    Ok(wx.len())
}

/// `min{2^{−k} : the level-k cells of x and y intersect}`; equal addresses
/// give `2^{−M}`.
pub fn d_cell<T: Real>(wx: &Address, wy: &Address) -> Result<T> {
    let k = deepest_intersecting_level(wx, wy)?;
    Ok(T::of(0.5f64.powi(k as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Address {
        s.parse().unwrap()
    }

    #[test]
    fn parse_roundtrip() {
        assert_eq!(a("1231").to_string(), "1231");
        assert!("124".parse::<Address>().is_err());
        assert!(Address::new(vec![0]).is_err());
    }

    #[test]
    fn corners_of_top_cell() {
        let c: [[f64; 2]; 3] = cell_corners(&a("2"));
        assert_eq!(c[0], [0.5, 0.0]);
        assert_eq!(c[1], [1.0, 0.0]);
        assert!((c[2][0] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn touching_top_cells() {
        assert_eq!(deepest_intersecting_level(&a("12"), &a("21")).unwrap(), 2);
        assert_eq!(deepest_intersecting_level(&a("11"), &a("22")).unwrap(), 1);
        assert_eq!(deepest_intersecting_level(&a("111"), &a("122")).unwrap(), 2);
    }

    #[test]
    fn lengths_must_match() {
        assert!(d_cell::<f64>(&a("1"), &a("12")).is_err());
    }
}
