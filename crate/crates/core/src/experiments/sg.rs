use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::report::{config_hash, Report};
use crate::eigenmap::{align_eigenmaps, build_eigenmap, Eigenmap};
use crate::error::{invalid, Error, Result};
use crate::laplacians::{graph_lap_eps, sg_vertex_graph, Metric};
use crate::linalg::{eigs_smallest_magnitude, Matrix};
use crate::spaces::sample_gasket;

/// Nonzero eigenvalues kept per seed.
const KEPT_EIGENVALUES: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgProbeConfig {
    pub n: usize,
    pub eps: f64,
    /// Address length of the sampled points.
    pub address_length: usize,
    /// Level of the cells whose coordinate means are aligned across seeds.
    pub cell_level: usize,
    pub seeds: Vec<u64>,
    pub metrics: Vec<Metric>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgSeedResult {
    pub seed: u64,
    pub metric: Metric,
    /// Smallest-magnitude nonzero eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// `|λ₂ − λ₃| / |λ₂|` for the first two nonzero eigenvalues.
    pub gap_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgPairResult {
    pub metric: Metric,
    pub seed_a: u64,
    pub seed_b: u64,
    /// Angle of the aligning orthogonal map in `(−π, π]`.
    pub angle: f64,
    pub reflection: bool,
    pub rms_before: f64,
    pub rms_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgLevelRow {
    pub level: usize,
    pub vertices: usize,
    /// Eigenvalues ordered by magnitude, the zero mode first.
    pub eigenvalues: Vec<f64>,
    /// `−λ_k · 5^m`.
    pub rescaled_5: Vec<f64>,
    /// `−λ_k · 4^m`.
    pub rescaled_4: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgRescalingConfig {
    pub levels: Vec<usize>,
    pub modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SgConfig {
    Probe(SgProbeConfig),
    Rescaling(SgRescalingConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgProbeReport {
    pub config: SgConfig,
    pub config_hash: String,
    pub seeds: Vec<SgSeedResult>,
    pub pairs: Vec<SgPairResult>,
    pub levels: Vec<SgLevelRow>,
    /// Successive ratios of `λ₁ · 5^m` (level `m + 1` over level `m`).
    pub ratios_5: Vec<f64>,
    /// Successive ratios of `λ₁ · 4^m`.
    pub ratios_4: Vec<f64>,
}

impl Report for SgProbeReport {
    fn kind(&self) -> &'static str {
        match self.config {
            SgConfig::Probe(_) => "sgprobe",
            SgConfig::Rescaling(_) => "sgrescale",
        }
    }

    fn config_hash(&self) -> &str {
        &self.config_hash
    }

    fn summary_csv(&self) -> String {
        let mut s = String::new();
        if !self.seeds.is_empty() {
            s.push_str("seed,metric,lambda_1,lambda_2,gap_ratio\n");
            for r in &self.seeds {
                s.push_str(&format!("{},{:?},{},{},{}\n", r.seed, r.metric, r.eigenvalues[0], r.eigenvalues[1], r.gap_ratio));
            }
        }
        if !self.pairs.is_empty() {
            s.push_str("metric,seed_a,seed_b,angle,reflection,rms_before,rms_after\n");
            for p in &self.pairs {
                s.push_str(&format!(
                    "{:?},{},{},{},{},{},{}\n",
                    p.metric, p.seed_a, p.seed_b, p.angle, p.reflection, p.rms_before, p.rms_after
                ));
            }
        }
        if !self.levels.is_empty() {
            s.push_str("level,vertices,lambda_1,rescaled_5,rescaled_4\n");
            for l in &self.levels {
                let k = 1.min(l.eigenvalues.len() - 1);
                s.push_str(&format!("{},{},{},{},{}\n", l.level, l.vertices, l.eigenvalues[k], l.rescaled_5[k], l.rescaled_4[k]));
            }
        }
        s
    }
}

/// Mean eigenmap coordinates over each level-`m` cell that holds points,
/// keyed by cell index.
fn cell_means(map: &Eigenmap<f64>, cells: &[usize]) -> BTreeMap<usize, Vec<f64>> {
    let mut acc: BTreeMap<usize, (Vec<f64>, usize)> = BTreeMap::new();
    for (i, &c) in cells.iter().enumerate() {
        let e = acc.entry(c).or_insert_with(|| (vec![0.0; map.dim()], 0));
        for (s, v) in e.0.iter_mut().zip(map.coords.row(i)) {
            *s += v;
        }
        e.1 += 1;
    }
    acc.into_iter().map(|(c, (s, k))| (c, s.into_iter().map(|v| v / k as f64).collect())).collect()
}

struct SeedMap {
    result: SgSeedResult,
    means: BTreeMap<usize, Vec<f64>>,
    eigenvalues: Vec<f64>,
}

fn probe_seed(config: &SgProbeConfig, seed: u64, metric: Metric) -> Result<SeedMap> {
    let pts = sample_gasket::<f64>(config.n, config.address_length, seed)?;
    let op = graph_lap_eps(&pts, config.eps, metric)?;
    let map = build_eigenmap(&op, KEPT_EIGENVALUES, 1e-9)?;
    if map.skipped_zero_modes > 0 || op.isolated_count() > 0 {
        return Err(Error::Degenerate(format!(
            "the ε-graph at ε = {} is disconnected ({} extra components); try a larger ε",
            config.eps,
            map.skipped_zero_modes + op.isolated_count()
        )));
    }
    let addresses = pts.addresses().expect("gasket samples carry addresses");
    let cells: Vec<usize> = addresses.iter().map(|a| a.cell_index(config.cell_level)).collect();
    let two = Eigenmap::from_coords(
        Matrix::from_fn(map.n(), 2, |i, j| map.coords[(i, j)]),
        map.eigenvalues[..2].to_vec(),
    )?;
    let (l2, l3) = (map.eigenvalues[0], map.eigenvalues[1]);
    Ok(SeedMap {
        result: SgSeedResult { seed, metric, eigenvalues: map.eigenvalues.clone(), gap_ratio: (l2 - l3).abs() / l2.abs() },
        means: cell_means(&two, &cells),
        eigenvalues: map.eigenvalues[..2].to_vec(),
    })
}

fn angle_of(r: &Matrix<f64>) -> (f64, bool) {
    let det = r[(0, 0)] * r[(1, 1)] - r[(0, 1)] * r[(1, 0)];
    let mut a = r[(1, 0)].atan2(r[(0, 0)]);
    if a <= -std::f64::consts::PI {
        a = std::f64::consts::PI;
    }
    (a, det < 0.0)
}

/// Aligns the cell means of `b` onto those of `a` over the cells both
/// samples reach, rotating the two eigenvector columns as one group.
fn align_pair(a: &SeedMap, b: &SeedMap) -> Result<SgPairResult> {
    let common: Vec<usize> = a.means.keys().filter(|c| b.means.contains_key(c)).copied().collect();
    if common.len() < 3 {
        return Err(Error::Degenerate(format!("only {} cells hold points of both samples", common.len())));
    }
    let mat = |m: &SeedMap| Matrix::from_fn(common.len(), 2, |i, j| m.means[&common[i]][j]);
    // both maps carry the mean eigenvalues: the alignment compares the
    // eigenspaces, not the sampling noise in λ
    let lam: Vec<f64> = (0..2).map(|k| 0.5 * (a.eigenvalues[k] + b.eigenvalues[k])).collect();
    let ma = Eigenmap::from_coords(mat(a), lam.clone())?;
    let mb = Eigenmap::from_coords(mat(b), lam)?;
    let al = align_eigenmaps(&ma, &mb, &[vec![0, 1]])?;
    let (angle, reflection) = angle_of(&al.transforms[0]);
    Ok(SgPairResult {
        metric: a.result.metric,
        seed_a: a.result.seed,
        seed_b: b.result.seed,
        angle,
        reflection,
        rms_before: al.rms_before,
        rms_after: al.rms_after,
    })
}

/// Per seed and metric: sample the gasket, build the ε-graph, take the
/// eigenmap; then align every pair of seeds through level-`m` cell means.
pub fn sg_probe(config: &SgProbeConfig) -> Result<SgProbeReport> {
    if config.n < 500 {
        return Err(invalid(format!("the gasket probe needs n ≥ 500, got {}", config.n)));
    }
    if config.seeds.len() < 3 {
        return Err(invalid(format!("the gasket probe needs at least 3 seeds, got {}", config.seeds.len())));
    }
    if config.metrics.is_empty() {
        return Err(invalid("no metric selected"));
    }
    if config.cell_level == 0 || config.cell_level > config.address_length {
        return Err(invalid("cell level must lie in 1..=address length"));
    }
    let jobs: Vec<(Metric, u64)> = config.metrics.iter().flat_map(|&m| config.seeds.iter().map(move |&s| (m, s))).collect();
    let maps = jobs.par_iter().map(|&(m, s)| probe_seed(config, s, m)).collect::<Result<Vec<_>>>()?;
    let k = config.seeds.len();
    let mut pairs = Vec::new();
    for block in maps.chunks(k) {
        for i in 0..k {
            for j in i + 1..k {
                pairs.push(align_pair(&block[i], &block[j])?);
            }
        }
    }
    let cfg = SgConfig::Probe(config.clone());
    Ok(SgProbeReport {
        config_hash: config_hash(&cfg)?,
        config: cfg,
        seeds: maps.into_iter().map(|m| m.result).collect(),
        pairs,
        levels: Vec::new(),
        ratios_5: Vec::new(),
        ratios_4: Vec::new(),
    })
}

/// Spectra of the level-`m` vertex graphs, rescaled by `5^m` and, as the
/// negative control, by `4^m`.
pub fn sg_rescaling_probe(levels: &[usize], modes: usize) -> Result<SgProbeReport> {
    if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("levels must be nonempty and strictly ascending"));
    }
    if *levels.last().unwrap() > 8 {
        return Err(invalid("levels above 8 are not supported by the probe"));
    }
    if modes < 2 {
        return Err(invalid("at least two modes (the zero mode and λ₁) are needed"));
    }
    let rows = levels
        .par_iter()
        .map(|&m| {
            let (op, _) = sg_vertex_graph::<f64>(m)?;
            let k = modes.min(op.n());
            let spec = eigs_smallest_magnitude(&op, k, 1e-10)?;
            let ev = spec.eigenvalues().to_vec();
            let s5 = 5f64.powi(m as i32);
            let s4 = 4f64.powi(m as i32);
            Ok(SgLevelRow {
                level: m,
                vertices: op.n(),
                rescaled_5: ev.iter().map(|l| -l * s5).collect(),
                rescaled_4: ev.iter().map(|l| -l * s4).collect(),
                eigenvalues: ev,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ratio = |f: fn(&SgLevelRow) -> f64| rows.windows(2).map(|w| f(&w[1]) / f(&w[0])).collect::<Vec<_>>();
    let cfg = SgConfig::Rescaling(SgRescalingConfig { levels: levels.to_vec(), modes });
    Ok(SgProbeReport {
        config_hash: config_hash(&cfg)?,
        config: cfg,
        seeds: Vec::new(),
        pairs: Vec::new(),
        ratios_5: ratio(|r| r.rescaled_5[1]),
        ratios_4: ratio(|r| r.rescaled_4[1]),
        levels: rows,
    })
}
