use std::f64::consts::PI;

use eigenlab::exact_spectra::grid_graph_eigenpairs;
use eigenlab::laplacians::{
    appendix_d, averaging_lap, averaging_lap_kernel, graph_lap_eps, graph_lap_equipartition, graph_lap_kernel,
    read_coo, sg_cell_averaging_lap, sg_cell_averaging_lap_rescaled, sg_cell_neighbors, sg_vertex_graph,
    weighted_averaging_lap, write_coo, AveragingConfig, Kernel, KernelProfile, Metric, Neighborhood, Representative,
};
use eigenlab::linalg::{eigh_operator_dense, eigs_smallest_magnitude, SparseSymOperator};
use eigenlab::quadrature::adaptive_simpson;
use eigenlab::spaces::{
    d_cell, sample_gasket, sample_grid, sample_uniform, sg_point_of_address, Address, Density, PointSet, Space,
};
use proptest::prelude::*;

fn line(xs: &[f64]) -> PointSet<f64> {
    PointSet::new(1, xs.to_vec(), "test").unwrap()
}

fn dense_rows(op: &SparseSymOperator<f64>) -> Vec<Vec<f64>> {
    let n = op.n();
    (0..n)
        .map(|i| {
            let mut r = vec![0.0; n];
            for (j, w) in op.operator_row(i) {
                r[j] = w;
            }
            r
        })
        .collect()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[test]
fn averaging_of_square_at_center() {
    let cfg = AveragingConfig::ball(0.1);
    let v = averaging_lap(&Space::Interval, &|y: &[f64]| y[0] * y[0], &[0.0], &cfg).unwrap();
    assert!((v - 0.01 / 3.0).abs() < 1e-12, "{v}");
    assert!((v / 0.01 - 1.0 / 3.0).abs() < 1e-9);
}

#[test]
fn averaging_at_boundary_uses_truncated_ball() {
    let cfg = AveragingConfig::ball(0.1);
    let v = averaging_lap(&Space::Interval, &|y: &[f64]| (y[0] + 1.0).powi(2), &[-1.0], &cfg).unwrap();
    assert!((v - 0.01 / 3.0).abs() < 1e-12, "{v}");
}

#[test]
fn averaging_of_linear_vanishes_inside() {
    let cfg = AveragingConfig::ball(0.05);
    let v = averaging_lap(&Space::Interval, &|y: &[f64]| 3.0 * y[0] - 1.0, &[0.3], &cfg).unwrap();
    assert!(v.abs() < 1e-14);
    let sq = averaging_lap(&Space::Square, &|y: &[f64]| y[0] - 2.0 * y[1], &[0.2, -0.4], &cfg).unwrap();
    assert!(sq.abs() < 1e-12, "{sq}");
}

#[test]
fn square_disc_average_of_radius_squared() {
    // ⨍_disc |y − x|² = r²/2
    let cfg = AveragingConfig::ball(0.2);
    let x = [0.1, 0.3];
    let v = averaging_lap(&Space::Square, &|y: &[f64]| (y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2), &x, &cfg).unwrap();
    assert!((v - 0.02).abs() < 1e-10, "{v}");
}

#[test]
fn averaging_convergence_slope() {
    let f = |y: &[f64]| (PI * y[0]).cos();
    let f2 = |x: f64| -PI * PI * (PI * x).cos();
    let mut pts: Vec<f64> = (0..21).map(|i| -0.8 + 0.08 * i as f64).collect();
    pts.extend([-1.0, 1.0]);
    let eps = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
    let errs: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let cfg = AveragingConfig::ball(e);
            pts.iter()
                .map(|&x| (averaging_lap(&Space::Interval, &f, &[x], &cfg).unwrap() / (e * e) - f2(x) / 6.0).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(slope(&eps, &errs) >= 0.9, "{errs:?}");
}

#[test]
fn kernel_indicator_matches_ball_average() {
    let k = Kernel::<f64>::indicator();
    let f = |y: &[f64]| (2.0 * y[0]).sin() + y[0] * y[0];
    for x in [-1.0, -0.97, 0.0, 0.5] {
        let a = averaging_lap(&Space::Interval, &f, &[x], &AveragingConfig::ball(0.1)).unwrap();
        let b = averaging_lap_kernel(&Space::Interval, &f, &[x], &k, 0.1).unwrap();
        assert!((a - b).abs() < 1e-12, "x={x}: {a} vs {b}");
    }
}

#[test]
fn gaussian_kernel_second_moment_limit() {
    let k = Kernel::<f64>::gaussian();
    assert!((k.moments.mass - 1.0).abs() < 1e-8);
    let eps = 1e-2;
    let v = averaging_lap_kernel(&Space::Interval, &|y: &[f64]| y[0] * y[0], &[0.0], &k, eps).unwrap();
    assert!((v / (eps * eps) - k.half_second_moment() * 2.0).abs() < 1e-4);
    let lin = averaging_lap_kernel(&Space::Interval, &|y: &[f64]| 2.0 * y[0], &[0.1], &k, eps).unwrap();
    assert!(lin.abs() < 1e-12);
}

#[test]
fn kernel_moments_known_values() {
    let ind = Kernel::<f64>::indicator();
    assert!((ind.moments.t2 - 1.0 / 3.0).abs() < 1e-12);
    assert!((ind.moments.k2_t2 - 1.0 / 6.0).abs() < 1e-12);
    let g = Kernel::<f64>::gaussian();
    assert!((g.moments.t2 - 1.0).abs() < 1e-7);
    let ep = Kernel::<f64>::new(KernelProfile::Epanechnikov);
    assert!((ep.moments.mass - 1.0).abs() < 1e-12);
    assert!(ep.moments.integrability.is_finite());
    // the one-dimensional normal profile integrates to √(2π) over the plane
    assert!((g.radial_mass(2) - (2.0 * PI).sqrt()).abs() < 1e-7);
}

#[test]
fn weighted_average_drift() {
    let g = Density::Gaussian { mean: 0.0, sd: 1.0 };
    let f = |y: f64| y;
    let eps = 1e-2;
    let at0 = weighted_averaging_lap(&f, &g, 0.0, eps).unwrap();
    assert!((6.0 * at0 / (eps * eps)).abs() < 1e-8);
    let at1 = 6.0 * weighted_averaging_lap(&f, &g, 1.0, eps).unwrap() / (eps * eps);
    // independent oracle: ratio of quadratures of y g(y) and g(y)
    let pdf = |y: f64| (-0.5 * y * y).exp();
    let num = adaptive_simpson(&|y: f64| y * pdf(y), 1.0 - eps, 1.0 + eps, 1e-16);
    let den = adaptive_simpson(&pdf, 1.0 - eps, 1.0 + eps, 1e-16);
    let oracle = 6.0 * (num / den - 1.0) / (eps * eps);
    assert!((at1 - oracle).abs() < 1e-6, "{at1} vs {oracle}");
    assert!((at1 + 2.0).abs() < 0.1);
    let unif = Density::Uniform { lo: -1.0, hi: 1.0 };
    let a = weighted_averaging_lap(&|y: f64| y * y, &unif, 0.2, 0.1).unwrap();
    let b = averaging_lap(&Space::Interval, &|y: &[f64]| y[0] * y[0], &[0.2], &AveragingConfig::ball(0.1)).unwrap();
    assert!((a - b).abs() < 1e-13);
}

#[test]
fn weighted_average_far_tail_errors() {
    let g = Density::Gaussian { mean: 0.0, sd: 1.0 };
    assert!(weighted_averaging_lap(&|y: f64| y, &g, 60.0, 0.1).is_err());
}

#[test]
fn grid_operator_rows() {
    let pts = sample_grid::<f64>(5).unwrap();
    let op = graph_lap_eps(&pts, 0.5, Metric::Euclidean).unwrap();
    let d = dense_rows(&op);
    assert_eq!(d[0], vec![-1.0, 1.0, 0.0, 0.0, 0.0]);
    assert_eq!(d[2], vec![0.0, 0.5, -1.0, 0.5, 0.0]);
    assert_eq!(d[4], vec![0.0, 0.0, 0.0, 1.0, -1.0]);
}

#[test]
fn distant_points_are_isolated() {
    let op = graph_lap_eps(&line(&[0.0, 1.0]), 0.5, Metric::Euclidean).unwrap();
    assert_eq!(op.isolated_count(), 2);
    assert!(op.apply(&[3.0, -1.0]).iter().all(|&v| v == 0.0));
}

#[test]
fn three_points_form_k3() {
    let op = graph_lap_eps(&line(&[0.0, 0.1, 0.2]), 0.2, Metric::Euclidean).unwrap();
    for (i, row) in dense_rows(&op).iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            assert_eq!(v, if i == j { -1.0 } else { 0.5 });
        }
    }
}

#[test]
fn grid_spectrum_matches_closed_form() {
    for n in [5usize, 50, 500] {
        let pts = sample_grid::<f64>(n).unwrap();
        let op = graph_lap_eps(&pts, 2.0 / (n - 1) as f64, Metric::Euclidean).unwrap();
        let spec = eigh_operator_dense(&op).unwrap();
        let mut got: Vec<f64> = spec.eigenvalues().to_vec();
        got.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (k, (lam, v)) in grid_graph_eigenpairs::<f64>(n).unwrap().iter().enumerate() {
            assert!((got[k] - lam).abs() <= 1e-10, "n={n} k={k}");
            let lv = op.apply(v);
            let res = lv.iter().zip(v).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
            assert!(res <= 1e-12);
        }
    }
}

#[test]
fn indicator_kernel_graph_equals_eps_graph() {
    let pts: PointSet<f64> = sample_uniform(&Space::Square, 400, 9).unwrap();
    let a = graph_lap_eps(&pts, 0.2, Metric::Euclidean).unwrap();
    let b = graph_lap_kernel(&pts, &Kernel::indicator(), 0.2, Metric::Euclidean).unwrap();
    for i in 0..pts.len() {
        let (ra, rb) = (a.operator_row(i), b.operator_row(i));
        assert_eq!(ra.len(), rb.len());
        for (x, y) in ra.iter().zip(&rb) {
            assert_eq!(x.0, y.0);
            assert!((x.1 - y.1).abs() < 1e-15);
        }
    }
}

#[test]
fn two_point_gaussian_row_is_one() {
    let op = graph_lap_kernel(&line(&[0.0, 0.3]), &Kernel::gaussian(), 0.1, Metric::Euclidean).unwrap();
    assert_eq!(dense_rows(&op), vec![vec![-1.0, 1.0], vec![1.0, -1.0]]);
}

#[test]
fn kernel_rows_match_direct_summation() {
    let xs = [0.0, 0.05, 0.17];
    let eps = 0.1;
    let k = Kernel::<f64>::gaussian();
    let op = graph_lap_kernel(&line(&xs), &k, eps, Metric::Euclidean).unwrap();
    let d = dense_rows(&op);
    let phi = |t: f64| (-0.5 * t * t).exp();
    for i in 0..3 {
        let z: f64 = (0..3).filter(|&l| l != i).map(|l| phi((xs[i] - xs[l]) / eps)).sum();
        for j in 0..3 {
            let want = if i == j { -1.0 } else { phi((xs[i] - xs[j]) / eps) / z };
            assert!((d[i][j] - want).abs() < 1e-14, "({i},{j})");
        }
    }
}

#[test]
fn dcell_graph_matches_brute_force() {
    let pts: PointSet<f64> = sample_gasket(300, 8, 4).unwrap();
    let addrs = pts.addresses().unwrap();
    for eps in [0.3, 0.125, 0.05] {
        let op = graph_lap_eps(&pts, eps, Metric::DCell).unwrap();
        for i in 0..pts.len() {
            let want: Vec<usize> =
                (0..pts.len()).filter(|&j| j != i && d_cell::<f64>(&addrs[i], &addrs[j]).unwrap() <= eps).collect();
            let got: Vec<usize> = op.adjacency_row(i).map(|(j, _)| j).collect();
            assert_eq!(got, want, "eps={eps} i={i}");
        }
    }
}

#[test]
fn coo_round_trip() {
    let pts: PointSet<f64> = sample_uniform(&Space::Interval, 60, 2).unwrap();
    let op = graph_lap_eps(&pts, 0.1, Metric::Euclidean).unwrap();
    let mut buf = Vec::new();
    write_coo(&op, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.lines().next().unwrap().ends_with("convention=averaging"));
    let back: SparseSymOperator<f64> = read_coo(buf.as_slice()).unwrap();
    let f: Vec<f64> = (0..60).map(|i| (i as f64 * 0.37).sin()).collect();
    for (a, b) in op.apply(&f).iter().zip(back.apply(&f)) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn equipartition_operator_obeys_oscillation_bound() {
    let f = |y: &[f64]| y[0] * y[0];
    let lip = 2.0;
    let g = graph_lap_equipartition(&Space::Interval, Representative::Center, 0.1, 64, &|r: f64| lip * r).unwrap();
    assert!(g.report.bound <= lip * 0.1 / 64.0);
    let vals: Vec<f64> = g.points.points().map(&f).collect();
    let lv = g.operator.apply(&vals);
    for i in (0..g.points.len()).step_by(97) {
        let cont = g.continuum_average(i, &f).unwrap();
        assert!((cont - lv[i]).abs() <= g.report.bound, "cell {i}");
    }
    let constant = g.operator.apply(&vec![1.0; g.points.len()]);
    assert!(constant.iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn equipartition_needs_enough_cells() {
    let r = graph_lap_equipartition(&Space::Interval, Representative::Center, 1e-3, 4000, &|r: f64| r);
    assert!(r.is_err());
}

#[test]
fn sg_cell_neighbors_share_a_corner() {
    let w: Address = "1213".parse().unwrap();
    let nb = sg_cell_neighbors(&w);
    assert_eq!(nb.len(), 3);
    for c in &nb {
        let long_w = Address::new([w.letters(), &[1u8; 6]].concat()).unwrap();
        let long_c = Address::new([c.letters(), &[1u8; 6]].concat()).unwrap();
        assert!(d_cell::<f64>(&long_w, &long_c).unwrap() <= 1.0 / 16.0);
    }
    let corner: Address = "111".parse().unwrap();
    assert_eq!(sg_cell_neighbors(&corner).len(), 2);
}

#[test]
fn sg_cell_average_constant_and_linear() {
    let x: Address = "21312".parse().unwrap();
    let c = sg_cell_averaging_lap(&|_: &Address| 4.0f64, &x, 3, Neighborhood::CellBall, 3).unwrap();
    assert!(c.abs() < 1e-14);
    let centroid: Address = "".parse().unwrap();
    let lin = |w: &Address| {
        let p: [f64; 2] = sg_point_of_address(w);
        p[0] + 2.0 * p[1]
    };
    let padded = Address::new([centroid.letters(), &[1u8, 2, 3, 1, 2, 3]].concat()).unwrap();
    let v = sg_cell_averaging_lap(&lin, &padded, 2, Neighborhood::CellBall, 4).unwrap();
    assert!(v.abs() > 1e-3, "{v}");
}

#[test]
fn sg_vertex_graph_shape_and_scaling() {
    let (op, pts) = sg_vertex_graph::<f64>(3).unwrap();
    assert_eq!(pts.len(), (27 * 3 + 3) / 2);
    let degrees: Vec<usize> = (0..op.n()).map(|i| op.adjacency_row(i).count()).collect();
    assert_eq!(degrees.iter().filter(|&&d| d == 2).count(), 3);
    assert!(degrees.iter().all(|&d| d == 2 || d == 4));
    let mut prev = None;
    let mut ratios5 = Vec::new();
    let mut ratios4 = Vec::new();
    for m in 4..=7i32 {
        let (op, pts) = sg_vertex_graph::<f64>(m as usize).unwrap();
        if m == 7 {
            assert_eq!(pts.len(), 3282);
        }
        let spec = eigs_smallest_magnitude(&op, 2, 1e-10).unwrap();
        let lam = spec.eigenvalues()[1].abs();
        if let Some(p) = prev {
            ratios5.push(lam * 5f64.powi(m) / (p * 5f64.powi(m - 1)));
            ratios4.push(lam * 4f64.powi(m) / (p * 4f64.powi(m - 1)));
        }
        prev = Some(lam);
    }
    assert!(ratios5.iter().all(|r| (r - 1.0).abs() < 0.1), "{ratios5:?}");
    assert!(ratios4.iter().all(|r| (1.0 / r - 1.25).abs() < 0.05), "{ratios4:?}");
}

#[test]
fn sg_rescaled_cell_average_stabilizes() {
    // oracle: the first nonconstant eigenvector of the level-8 vertex graph,
    // read off at each cell through the mean of its level-8 corners
    let level = 8;
    let (op, pts) = sg_vertex_graph::<f64>(level).unwrap();
    let spec = eigs_smallest_magnitude(&op, 2, 1e-10).unwrap();
    let phi: Vec<f64> = spec.eigenvectors()[1].clone();
    let lookup: std::collections::HashMap<(i64, i64), usize> = pts
        .points()
        .enumerate()
        .map(|(i, p)| (((p[0] * 4096.0).round() as i64, (p[1] * 4096.0).round() as i64), i))
        .collect();
    let at = |c: &[f64; 2]| phi[lookup[&((c[0] * 4096.0).round() as i64, (c[1] * 4096.0).round() as i64)]];
    // cells integrate by the mean of their corners; long addresses are
    // points and interpolate linearly inside their level-8 cell
    let f = |w: &Address| {
        let corners: [[f64; 2]; 3] = eigenlab::spaces::cell_corners(&w.prefix(level));
        if w.len() <= level {
            return corners.iter().map(at).sum::<f64>() / 3.0;
        }
        let p: [f64; 2] = sg_point_of_address(w);
        let [a, b, c] = corners;
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let lb = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
        let lc = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
        (1.0 - lb - lc) * at(&a) + lb * at(&b) + lc * at(&c)
    };
    // x = F_1(p_2), a junction point at every level
    let x = Address::new([vec![1u8], vec![2u8; 11]].concat()).unwrap();
    let vals: Vec<f64> =
        (2..=4).map(|m| sg_cell_averaging_lap_rescaled(&f, &x, m, Neighborhood::Junction, 3).unwrap()).collect();
    for w in vals.windows(2) {
        assert!((w[1] / w[0] - 1.0).abs() < 0.1, "{vals:?} f(x)={}", f(&x));
    }
}

#[test]
fn appendix_statistics() {
    let pts: PointSet<f64> = sample_uniform(&Space::Interval, 20_000, 17).unwrap();
    let k = Kernel::indicator();
    let half = |x: &[f64]| if x[0].abs() <= 1.0 { 0.5 } else { 0.0 };
    let (dn, de) = appendix_d(&pts, &|_: &[f64]| 2.0, &[0.0], 0.1, &k, &half, &[-1.0, 1.0]).unwrap();
    assert_eq!((dn, de), (0.0, 0.0));
    let (_, de) = appendix_d(&pts, &|x: &[f64]| x[0], &[0.0], 0.1, &k, &half, &[-1.0, 1.0]).unwrap();
    assert!(de.abs() < 1e-12);
    let (dn, de) = appendix_d(&pts, &|x: &[f64]| x[0] * x[0], &[0.0], 0.1, &k, &half, &[-1.0, 1.0]).unwrap();
    assert!((de - 1.0 / 6.0).abs() < 1e-10, "{de}");
    // Monte Carlo error of the sum at n = 20000, ε = 0.1
    assert!((dn - de).abs() < 0.05, "{dn}");
}

#[test]
fn appendix_two_dimensional_expectation() {
    // uniform density on the plane patch, f = |x|²: D_ε = g ∫K(u)|u|² du
    let pts = PointSet::new(2, vec![0.0, 0.0], "origin").unwrap();
    let k = Kernel::<f64>::indicator();
    let (_, de) = appendix_d(&pts, &|x: &[f64]| x[0] * x[0] + x[1] * x[1], &[0.0, 0.0], 0.1, &k, &|_: &[f64]| 0.25, &[]).unwrap();
    // K uniform on the unit disc: ∫|u|² / π = ½
    assert!((de - 0.25 * 0.5).abs() < 1e-8, "{de}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn graph_operators_annihilate_constants(seed in 0u64..1000, n in 5usize..300, eps in 0.01f64..1.5) {
        let pts: PointSet<f64> = sample_uniform(&Space::Square, n, seed).unwrap();
        for op in [
            graph_lap_eps(&pts, eps, Metric::Euclidean).unwrap(),
            graph_lap_kernel(&pts, &Kernel::gaussian(), eps, Metric::Euclidean).unwrap(),
        ] {
            let ones = op.apply(&vec![1.0; n]);
            prop_assert!(ones.iter().all(|v| v.abs() <= 1e-14));
            for i in 0..n {
                let row = op.operator_row(i);
                let off: f64 = row.iter().filter(|e| e.0 != i).map(|e| e.1).sum();
                prop_assert!(row.iter().all(|e| e.0 == i || e.1 >= 0.0));
                prop_assert!(row.is_empty() || (off - 1.0).abs() < 1e-13);
            }
        }
    }
}
