//! Averaging Laplacians, graph Laplacians on samples and partitions, gasket
//! cell averages and kernel statistics.
//!
//! Graph Laplacians act on the sample points themselves: row `i` is built
//! with `x = x_i` and `x_i` removed from its own neighborhood, and isolated
//! points get zero rows. Kernel normalizers skip the self term, which keeps
//! constants in the kernel.

mod appendix;
mod averaging;
mod cells;
mod gasket;
mod graph;
mod kernel;

pub use appendix::{appendix_d, appendix_d_expectation, appendix_d_sample};
pub use averaging::{averaging_lap, averaging_lap_kernel, weighted_averaging_lap, AveragingConfig, Neighborhood};
pub use cells::{graph_lap_equipartition, EquipartitionGraph, EquipartitionReport, Representative, PARTITION_DELTA};
pub use gasket::{
    sg_cell_averaging_lap, sg_cell_averaging_lap_rescaled, sg_cell_neighbors, sg_vertex_graph, SG_WALK_DIMENSION,
};
pub use graph::{graph_lap_eps, graph_lap_kernel, neighbor_lists, Metric, BALL_SLACK, SPARSIFY};
pub use kernel::{Kernel, KernelMoments, KernelProfile, TailClass};

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::SparseSymOperator;
use crate::scalar::Real;
use crate::spaces::fmt17;

/// Writes the operator's entries as `i j w` lines, rows ascending and
/// columns ascending within a row, after the header `n nnz convention=averaging`.
pub fn write_coo<T: Real, W: Write>(op: &SparseSymOperator<T>, mut out: W) -> Result<()> {
    let rows: Vec<Vec<(usize, T)>> = (0..op.n()).map(|i| op.operator_row(i)).collect();
    let nnz: usize = rows.iter().map(Vec::len).sum();
    writeln!(out, "{} {} convention=averaging", op.n(), nnz)?;
    for (i, row) in rows.iter().enumerate() {
        for &(j, w) in row {
            writeln!(out, "{i} {j} {}", fmt17(w.as_f64()))?;
        }
    }
    Ok(())
}

/// Reads the format of [`write_coo`].
pub fn read_coo<T: Real, R: BufRead>(input: R) -> Result<SparseSymOperator<T>> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty operator file".into()))??;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[2] != "convention=averaging" {
        return Err(Error::Parse(format!("bad header '{header}'")));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("{s}: {e}")));
    let n = parse(parts[0])?;
    let nnz = parse(parts[1])?;
    let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    let mut count = 0;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::Parse(format!("bad entry '{line}'")));
        }
        let (i, j) = (parse(f[0])?, parse(f[1])?);
        let w: f64 = f[2].parse().map_err(|e| Error::Parse(format!("{}: {e}", f[2])))?;
        if i >= n || j >= n {
            return Err(Error::Parse(format!("entry ({i},{j}) out of range")));
        }
        rows[i].push((j, T::of(w)));
        count += 1;
    }
    if count != nnz {
        return Err(Error::Parse(format!("header promises {nnz} entries, found {count}")));
    }
    SparseSymOperator::from_operator_rows(rows)
}
