//! Eigenmaps: embeddings by low eigenvectors, polynomial images and
//! alignment of embeddings across runs.
//!
//! Columns are normalized to max-abs 1. Signs follow one rule so that
//! repeated runs agree: column 1 takes its largest-magnitude entry positive
//! (ties go to the lowest index); every later column is made positive at the
//! point where column 1 peaks, unless its value there is below half its own
//! peak, in which case the largest-magnitude rule applies.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{eigs_smallest_magnitude_with, orthogonal_align, polyfit_ls, LanczosOptions, Matrix, PolyFit, SparseSymOperator};
use crate::scalar::Real;
use crate::spaces::{fmt17, PointSet};

/// Eigenvalues below this magnitude are constant modes.
pub const ZERO_MODE: f64 = 1e-10;

/// Relative eigenvalue gap within which columns form one alignment group.
pub const GROUP_GAP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eigenmap<T> {
    /// `n × D`, column `d` the normalized eigenvector of rank `d + 1`.
    pub coords: Matrix<T>,
    /// Unit-Euclidean eigenvectors with the same signs as `coords`.
    pub raw: Matrix<T>,
    pub eigenvalues: Vec<T>,
    /// Degree weights of the inner product in which the raw columns are
    /// orthogonal.
    pub weights: Vec<T>,
    /// Zero modes beyond the first (extra connected components).
    pub skipped_zero_modes: usize,
}

impl<T: Real> Eigenmap<T> {
    pub fn n(&self) -> usize {
        self.coords.rows()
    }

    pub fn dim(&self) -> usize {
        self.coords.cols()
    }

    /// Wraps given coordinates (used for derived maps such as cell means).
    pub fn from_coords(coords: Matrix<T>, eigenvalues: Vec<T>) -> Result<Self> {
        if coords.cols() != eigenvalues.len() {
            return Err(invalid("one eigenvalue per column is required"));
        }
        Ok(Self {
            raw: coords.clone(),
            weights: vec![T::one(); coords.rows()],
            coords,
            eigenvalues,
            skipped_zero_modes: 0,
        })
    }

    /// 1-based mode column `φ_k` of the normalized coordinates.
    pub fn mode(&self, k: usize) -> Result<Vec<T>> {
        if k == 0 || k > self.dim() {
            return Err(invalid(format!("mode {k} is not in 1..={}", self.dim())));
        }
        Ok(self.coords.column(k - 1))
    }

    /// Rows permuted: row `i` of the result is row `perm[i]` of `self`.
    pub fn permuted_rows(&self, perm: &[usize]) -> Self {
        let pick = |m: &Matrix<T>| Matrix::from_fn(perm.len(), m.cols(), |i, j| m[(perm[i], j)]);
        Self {
            coords: pick(&self.coords),
            raw: pick(&self.raw),
            eigenvalues: self.eigenvalues.clone(),
            weights: perm.iter().map(|&i| self.weights[i]).collect(),
            skipped_zero_modes: self.skipped_zero_modes,
        }
    }

    /// CSV with header `point_index,x1..xd,phi_1..phi_D,lambda_1..lambda_D`;
    /// eigenvalues repeat on every row.
    pub fn write_csv<W: Write>(&self, pts: &PointSet<T>, out: W) -> Result<()> {
        if pts.len() != self.n() {
            return Err(invalid(format!("{} points for an eigenmap of {} rows", pts.len(), self.n())));
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["point_index".to_string()];
        header.extend((1..=pts.dim()).map(|k| format!("x{k}")));
        header.extend((1..=self.dim()).map(|k| format!("phi_{k}")));
        header.extend((1..=self.dim()).map(|k| format!("lambda_{k}")));
        w.write_record(&header).map_err(csv_err)?;
        let lambdas: Vec<String> = self.eigenvalues.iter().map(|l| fmt17(l.as_f64())).collect();
        for i in 0..self.n() {
            let mut rec = vec![i.to_string()];
            rec.extend(pts.point(i).iter().map(|v| fmt17(v.as_f64())));
            rec.extend(self.coords.row(i).iter().map(|v| fmt17(v.as_f64())));
            rec.extend(lambdas.iter().cloned());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the layout of [`Eigenmap::write_csv`]. The raw columns are set
    /// to the normalized ones and the weights to 1.
    pub fn read_csv<R: Read>(input: R) -> Result<(PointSet<T>, Self)> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(csv_err)?.clone();
        let count = |prefix: &str| header.iter().filter(|h| h.starts_with(prefix)).count();
        let (dx, dim) = (count("x"), count("phi_"));
        if header.get(0) != Some("point_index") || dx == 0 || dim == 0 || count("lambda_") != dim || header.len() != 1 + dx + 2 * dim {
            return Err(Error::Parse("expected point_index, x…, phi_…, lambda_… columns".into()));
        }
        let mut xs = Vec::new();
        let mut phis = Vec::new();
        let mut lambdas = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let vals = rec
                .iter()
                .skip(1)
                .map(|f| f.trim().parse::<f64>().map_err(|_| Error::Parse(format!("row {}: '{f}' is not a number", line + 2))))
                .collect::<Result<Vec<f64>>>()?;
            xs.extend(vals[..dx].iter().map(|&v| T::of(v)));
            phis.push(vals[dx..dx + dim].iter().map(|&v| T::of(v)).collect::<Vec<T>>());
            if lambdas.is_empty() {
                lambdas = vals[dx + dim..].iter().map(|&v| T::of(v)).collect();
            }
        }
        if phis.is_empty() {
            return Err(Error::Parse("eigenmap file has no rows".into()));
        }
        let pts = PointSet::new(dx, xs, "eigenmap-csv")?;
        let map = Self::from_coords(Matrix::from_rows(&phis), lambdas)?;
        Ok((pts, map))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Embedding by the `dim` eigenvectors of smallest nonzero `|λ|`.
///
/// The first zero mode is the constant; further zero modes (disconnected
/// components, isolated points) are skipped with a warning.
pub fn build_eigenmap<T: Real>(op: &SparseSymOperator<T>, dim: usize, tol: T) -> Result<Eigenmap<T>> {
    build_eigenmap_with(op, dim, &LanczosOptions { tol: tol.as_f64(), ..LanczosOptions::default() })
}

pub fn build_eigenmap_with<T: Real>(op: &SparseSymOperator<T>, dim: usize, opts: &LanczosOptions) -> Result<Eigenmap<T>> {
    if dim == 0 {
        return Err(invalid("an eigenmap needs D ≥ 1"));
    }
    let active = op.n() - op.isolated_count();
    if active < dim + 1 {
        return Err(invalid(format!("{active} non-isolated vertices cannot carry D = {dim} modes")));
    }
    let zero = T::of(ZERO_MODE);
    let mut k = dim + 1 + op.isolated_count();
    let spec = loop {
        let k_eff = k.min(op.n());
        let spec = eigs_smallest_magnitude_with(op, k_eff, opts)?;
        let zeros = spec.eigenvalues().iter().filter(|l| l.abs() < zero).count();
        if spec.len() >= dim + zeros || k_eff == op.n() {
            break spec;
        }
        k = dim + zeros + 1;
    };
    let zeros = spec.eigenvalues().iter().filter(|l| l.abs() < zero).count();
    if zeros > 1 {
        log::warn!("skipping {} extra zero modes (disconnected components or isolated points)", zeros - 1);
    }
    let picked: Vec<usize> = (0..spec.len()).filter(|&i| spec.eigenvalues()[i].abs() >= zero).take(dim).collect();
    if picked.len() < dim {
        return Err(Error::NonConvergence { iterations: 0, residuals: spec.residuals().iter().map(|r| r.as_f64()).collect() });
    }
    let n = op.n();
    let weights = spec.weights().map(<[T]>::to_vec).unwrap_or_else(|| vec![T::one(); n]);
    let mut raw_cols: Vec<Vec<T>> = picked.iter().map(|&i| spec.eigenvectors()[i].clone()).collect();
    let eigenvalues: Vec<T> = picked.iter().map(|&i| spec.eigenvalues()[i]).collect();
    fix_signs(&mut raw_cols);
    let coords_cols: Vec<Vec<T>> = raw_cols
        .iter()
        .map(|c| {
            let peak = c.iter().fold(T::zero(), |a, v| a.max(v.abs()));
            c.iter().map(|&v| v / peak).collect()
        })
        .collect();
    Ok(Eigenmap {
        coords: Matrix::from_columns(&coords_cols),
        raw: Matrix::from_columns(&raw_cols),
        eigenvalues,
        weights,
        skipped_zero_modes: zeros.saturating_sub(1),
    })
}

fn peak_index<T: Real>(c: &[T]) -> usize {
    let peak = c.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let cut = peak * (T::one() - T::of(1e-9));
    c.iter().position(|v| v.abs() >= cut).unwrap_or(0)
}

fn fix_signs<T: Real>(cols: &mut [Vec<T>]) {
    let flip = |c: &mut Vec<T>| c.iter_mut().for_each(|v| *v = -*v);
    if cols.is_empty() {
        return;
    }
    let p = peak_index(&cols[0]);
    if cols[0][p] < T::zero() {
        flip(&mut cols[0]);
    }
    let anchor = peak_index(&cols[0]);
    for c in cols.iter_mut().skip(1) {
        let peak = c.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        let at = c[anchor];
        let negative = if at.abs() >= peak * T::of(0.5) { at < T::zero() } else { c[peak_index(c)] < T::zero() };
        if negative {
            flip(c);
        }
    }
}

/// Least-squares polynomial through the points `(φ_x, φ_y)`, 1-based modes.
pub fn fit_polynomial_image<T: Real>(map: &Eigenmap<T>, col_x: usize, col_y: usize, degree: usize) -> Result<PolyFit<T>> {
    if degree == 0 {
        return Err(invalid("degree must be at least 1"));
    }
    let xs = map.mode(col_x)?;
    let ys = map.mode(col_y)?;
    let spread = xs.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    if spread == T::zero() {
        return Err(Error::Degenerate(format!("mode {col_x} is identically zero")));
    }
    polyfit_ls(&xs, &ys, degree)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alignment<T> {
    /// `b` with each group rotated onto `a`.
    pub aligned: Eigenmap<T>,
    /// One orthogonal matrix per group, acting on the right of `b`'s columns.
    pub transforms: Vec<Matrix<T>>,
    pub rms_before: T,
    pub rms_after: T,
}

/// Groups consecutive columns whose eigenvalues lie within `GROUP_GAP`
/// relative of the group's first eigenvalue (0-based column indices).
pub fn degenerate_groups<T: Real>(eigenvalues: &[T]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &l) in eigenvalues.iter().enumerate() {
        match out.last_mut() {
            Some(g) if (l - eigenvalues[g[0]]).abs() <= T::of(GROUP_GAP) * l.abs().max(eigenvalues[g[0]].abs()) => g.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Rotates `b` onto `a` group by group (0-based column indices, disjoint).
/// Columns outside every group are compared as they are.
pub fn align_eigenmaps<T: Real>(a: &Eigenmap<T>, b: &Eigenmap<T>, groups: &[Vec<usize>]) -> Result<Alignment<T>> {
    if a.n() != b.n() || a.dim() != b.dim() {
        return Err(invalid(format!("eigenmaps {}x{} and {}x{} differ in shape", a.n(), a.dim(), b.n(), b.dim())));
    }
    let mut used = vec![false; a.dim()];
    for (gi, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(invalid(format!("group {gi} is empty")));
        }
        for &c in g {
            if c >= a.dim() || used[c] {
                return Err(invalid(format!("group {gi} repeats or exceeds column {c}")));
            }
            used[c] = true;
            let (la, lb) = (a.eigenvalues[c], b.eigenvalues[c]);
            if (la - lb).abs() > T::of(GROUP_GAP) * la.abs().max(lb.abs()) {
                return Err(invalid(format!(
                    "group {gi}: eigenvalues {la} and {lb} of column {c} differ by more than 5%"
                )));
            }
        }
    }
    let mut aligned = b.clone();
    let mut transforms = Vec::with_capacity(groups.len());
    for g in groups {
        let pick = |m: &Matrix<T>| Matrix::from_columns(&g.iter().map(|&c| m.column(c)).collect::<Vec<_>>());
        let (ag, bg) = (pick(&a.coords), pick(&b.coords));
        let r = orthogonal_align(&bg, &ag)?;
        let rotated = bg.matmul(&r);
        let raw = pick(&b.raw).matmul(&r);
        for (k, &c) in g.iter().enumerate() {
            aligned.coords.set_column(c, &rotated.column(k));
            aligned.raw.set_column(c, &raw.column(k));
        }
        transforms.push(r);
    }
    let rms = |m: &Matrix<T>| {
        let diff = a.coords.sub(m);
        diff.frobenius() / T::of_usize(diff.rows() * diff.cols()).sqrt()
    };
    Ok(Alignment { rms_before: rms(&b.coords), rms_after: rms(&aligned.coords), aligned, transforms })
}
