use std::io::{Read, Write};

use serde::Serialize;

use super::gasket::Address;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Sampled points in ambient coordinates, with optional gasket addresses
/// and the provenance of the draw.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSet<T> {
    dim: usize,
    coords: Vec<T>,
    addresses: Option<Vec<Address>>,
    seed: Option<u64>,
    distribution: String,
}

impl<T: Real> PointSet<T> {
    /// `coords` is row-major, `dim` values per point.
    pub fn new(dim: usize, coords: Vec<T>, distribution: impl Into<String>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(invalid(format!("{} coordinates do not split into points of dimension {dim}", coords.len())));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("non-finite coordinate"));
        }
        Ok(Self { dim, coords, addresses: None, seed: None, distribution: distribution.into() })
    }

    pub fn from_points(points: &[Vec<T>], distribution: impl Into<String>) -> Result<Self> {
        let dim = points.first().map_or(1, |p| p.len());
        if points.iter().any(|p| p.len() != dim) {
            return Err(invalid("points of mixed dimension"));
        }
        Self::new(dim, points.concat(), distribution)
    }

    pub fn with_addresses(mut self, addresses: Vec<Address>) -> Result<Self> {
        if addresses.len() != self.len() {
            return Err(invalid(format!("{} addresses for {} points", addresses.len(), self.len())));
        }
        if let Some(first) = addresses.first() {
            if addresses.iter().any(|a| a.len() != first.len()) {
                return Err(invalid("addresses of mixed length"));
            }
        }
        self.addresses = Some(addresses);
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// First coordinate of every point.
    pub fn first_coordinates(&self) -> Vec<T> {
        self.points().map(|p| p[0]).collect()
    }

    pub fn addresses(&self) -> Option<&[Address]> {
        self.addresses.as_deref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn distribution(&self) -> &str {
        &self.distribution
    }

    /// Row `i` of the result is row `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let coords = perm.iter().flat_map(|&i| self.point(i).iter().copied()).collect();
        let addresses = self.addresses.as_ref().map(|a| perm.iter().map(|&i| a[i].clone()).collect());
        Self { dim: self.dim, coords, addresses, seed: self.seed, distribution: self.distribution.clone() }
    }

    /// CSV with header `x[,y[,z]][,address]`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = ["x", "y", "z"].iter().take(self.dim).map(|s| s.to_string()).collect();
        for extra in 3..self.dim {
            header.push(format!("x{extra}"));
        }
        if self.addresses.is_some() {
            header.push("address".into());
        }
        w.write_record(&header).map_err(csv_err)?;
        for i in 0..self.len() {
            let mut row: Vec<String> = self.point(i).iter().map(|v| fmt17(v.as_f64())).collect();
            if let Some(a) = &self.addresses {
                row.push(a[i].to_string());
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, distribution: impl Into<String>) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(csv_err)?.clone();
        let has_addr = header.iter().last() == Some("address");
        let dim = header.len() - usize::from(has_addr);
        if dim == 0 {
            return Err(Error::Parse("no coordinate columns".into()));
        }
        let mut coords = Vec::new();
        let mut addresses = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            for field in rec.iter().take(dim) {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: '{field}' is not a number", line + 2)))?;
                coords.push(T::of(v));
            }
            if has_addr {
                addresses.push(rec.get(dim).unwrap_or("").trim().parse::<Address>()?);
            }
        }
        let ps = Self::new(dim, coords, distribution)?;
        if has_addr {
            ps.with_addresses(addresses)
        } else {
            Ok(ps)
        }
    }
}

/// Scientific notation with 17 significant digits.
pub(crate) fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}
