use eigenlab::quadrature::adaptive_simpson;
use eigenlab::spaces::{
    d_cell, equipartition, sample_density_1d, sample_gasket, sample_grid, sample_uniform, sg_point_of_address,
    Address, Density, PointSet, Space, SG_CENTROID,
};
use proptest::prelude::*;

fn addr(s: &str) -> Address {
    s.parse().unwrap()
}

#[test]
fn interval_mean_within_clt_bound() {
    let ps: PointSet<f64> = sample_uniform(&Space::Interval, 1_000_000, 11).unwrap();
    let mean = ps.coords().iter().sum::<f64>() / ps.len() as f64;
    assert!(mean.abs() < 3.0 * (1.0 / 3f64.sqrt()) / 1e3, "mean {mean}");
    assert!(ps.coords().iter().all(|x| (-1.0..=1.0).contains(x)));
}

#[test]
fn gasket_first_letter_frequencies() {
    let n = 30_000;
    let ps: PointSet<f64> = sample_gasket(n, 8, 5).unwrap();
    let sigma = (1.0 / 3.0 * 2.0 / 3.0 / n as f64).sqrt();
    for letter in 1..=3u8 {
        let count = ps.addresses().unwrap().iter().filter(|a| a.letters()[0] == letter).count();
        let freq = count as f64 / n as f64;
        assert!((freq - 1.0 / 3.0).abs() < 3.0 * sigma, "letter {letter}: {freq}");
    }
}

#[test]
fn gasket_points_match_addresses() {
    let ps: PointSet<f64> = sample_gasket(500, 15, 9).unwrap();
    for (p, a) in ps.points().zip(ps.addresses().unwrap()) {
        let q: [f64; 2] = sg_point_of_address(a);
        assert_eq!(p, &q[..]);
    }
}

#[test]
fn torus_poloidal_cosine_against_quadrature() {
    let (major, minor) = (2.0, 0.7);
    let n = 200_000;
    let ps: PointSet<f64> = sample_uniform(&Space::Torus { major, minor }, n, 21).unwrap();
    let cos: Vec<f64> = ps.points().map(|p| ((p[0] * p[0] + p[1] * p[1]).sqrt() - major) / minor).collect();
    let mean = cos.iter().sum::<f64>() / n as f64;
    let var = cos.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    // surface element is proportional to R + r cos θ
    let tau = 2.0 * std::f64::consts::PI;
    let num = adaptive_simpson(&|t: f64| t.cos() * (major + minor * t.cos()), 0.0, tau, 1e-12);
    let den = adaptive_simpson(&|t: f64| major + minor * t.cos(), 0.0, tau, 1e-12);
    let oracle = num / den;
    assert!((oracle - minor / (2.0 * major)).abs() < 1e-10);
    assert!((mean - oracle).abs() < 3.0 * (var / n as f64).sqrt(), "{mean} vs {oracle}");
}

#[test]
fn sphere_points_are_unit() {
    let ps: PointSet<f64> = sample_uniform(&Space::Sphere, 1000, 2).unwrap();
    assert!(ps.points().all(|p| (p.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12));
}

#[test]
fn torus_rejects_bad_radii() {
    assert!(sample_uniform::<f64>(&Space::Torus { major: 1.0, minor: 1.5 }, 10, 0).is_err());
}

#[test]
fn grid_examples() {
    let g5: PointSet<f64> = sample_grid(5).unwrap();
    assert_eq!(g5.coords(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
    let g2: PointSet<f64> = sample_grid(2).unwrap();
    assert_eq!(g2.coords(), &[-1.0, 1.0]);
    let g3: PointSet<f64> = sample_grid(3).unwrap();
    assert_eq!(g3.coords(), &[-1.0, 0.0, 1.0]);
}

#[test]
fn gaussian_moments() {
    let n = 400_000;
    let d = Density::Gaussian { mean: 0.0, sd: 1.0 };
    let ps: PointSet<f64> = sample_density_1d(&d, n, 4).unwrap();
    let xs = ps.coords();
    let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
    let m4 = xs.iter().map(|x| x.powi(4)).sum::<f64>() / n as f64;
    // oracle fourth moment by integration against the density
    let m4_oracle = adaptive_simpson(&|x: f64| x.powi(4) * d.pdf(x), -12.0, 12.0, 1e-12);
    assert!((m4_oracle - 3.0).abs() < 1e-8);
    assert!((m2 - 1.0).abs() < 3.0 * (2.0 / n as f64).sqrt(), "variance {m2}");
    assert!((m4 - m4_oracle).abs() < 3.0 * (96.0 / n as f64).sqrt(), "fourth moment {m4}");
}

#[test]
fn exponential_is_nonnegative() {
    let ps: PointSet<f64> = sample_density_1d(&Density::Exponential { rate: 1.0 }, 10_000, 8).unwrap();
    assert!(ps.coords().iter().all(|&x| x >= 0.0));
}

#[test]
fn sg_point_examples() {
    let c: [f64; 2] = sg_point_of_address(&Address::default());
    assert_eq!(c, SG_CENTROID);
    assert!((c[1] - 3f64.sqrt() / 6.0).abs() < 1e-16);
    let p: [f64; 2] = sg_point_of_address(&addr("12"));
    assert!((p[0] - 0.375).abs() < 1e-16 && (p[1] - 3f64.sqrt() / 24.0).abs() < 1e-16);
    for m in [5, 20, 40] {
        let q: [f64; 2] = sg_point_of_address(&"1".repeat(m).parse().unwrap());
        assert!(q[0].hypot(q[1]) <= 0.5f64.powi(m as i32));
    }
    assert!("1a".parse::<Address>().is_err());
}

#[test]
fn d_cell_touching_at_level_k() {
    let big_m = 12;
    for k in 1..big_m {
        // level-k cells meet at F₁(p₂) = F₂(p₁); the next letters move away from it
        let x = format!("1{}{}", "2".repeat(k - 1), "1".repeat(big_m - k));
        let y = format!("2{}{}", "1".repeat(k - 1), "2".repeat(big_m - k));
        let d: f64 = d_cell(&addr(&x), &addr(&y)).unwrap();
        assert_eq!(d, 0.5f64.powi(k as i32), "k={k}");
    }
}

#[test]
fn d_cell_identical_is_finest_scale() {
    let w = addr("3121312");
    assert_eq!(d_cell::<f64>(&w, &w).unwrap(), 0.5f64.powi(7));
}

#[test]
fn d_cell_from_corner() {
    // p₁ against points of F₂(SG) away from F₁(SG): the top-level cells meet, nothing finer does
    let p1 = addr(&"1".repeat(10));
    let y = addr(&format!("2{}", "3".repeat(9)));
    assert_eq!(d_cell::<f64>(&p1, &y).unwrap(), 0.5);
    // points of F₁(SG) sit at most 1/4 from p₁ under the intersecting-cell rule
    let x = addr(&format!("12{}", "3".repeat(8)));
    assert_eq!(d_cell::<f64>(&p1, &x).unwrap(), 0.25);
}

#[test]
fn equipartition_examples() {
    let e = equipartition::<f64>(&Space::Interval, 1).unwrap();
    assert_eq!(e.len(), 2);
    assert_eq!(e.cells[0].bounds, Some((vec![-1.0], vec![0.0])));
    assert_eq!(e.cells[1].bounds, Some((vec![0.0], vec![1.0])));
    assert!(e.cells.iter().all(|c| c.measure == 0.5));

    let sg = equipartition::<f64>(&Space::Gasket, 3).unwrap();
    assert_eq!(sg.len(), 27);
    assert!(sg.cells.iter().all(|c| (c.measure - 1.0 / 27.0).abs() < 1e-16));

    let sq = equipartition::<f64>(&Space::Square, 2).unwrap();
    assert_eq!(sq.len(), 16);
    assert!(sq.cells.iter().all(|c| (c.diameter - 0.5 * 2f64.sqrt()).abs() < 1e-15));

    assert!(equipartition::<f64>(&Space::Sphere, 1).is_err());
}

#[test]
fn equipartition_invariants() {
    for space in [Space::Interval, Space::Square, Space::Gasket] {
        for m in 0..5 {
            let e = equipartition::<f64>(&space, m).unwrap();
            let n = e.branching.pow(m as u32);
            assert_eq!(e.len(), n);
            let total: f64 = e.cells.iter().map(|c| c.measure).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(e.max_diameter() <= space.diameter() * 0.5f64.powi(m as i32) + 1e-15);
            if let Some((lo, hi)) = &e.cells[0].bounds {
                assert!(lo.iter().zip(hi).all(|(a, b)| a < b));
                let volume: f64 = e.cells.iter().map(|c| {
                    let (l, h) = c.bounds.as_ref().unwrap();
                    l.iter().zip(h).map(|(a, b)| b - a).product::<f64>()
                }).sum();
                assert!((volume - 2f64.powi(space.ambient_dim() as i32)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn sampling_is_reproducible() {
    for space in [Space::Interval, Space::Square, Space::Sphere, Space::Gasket, Space::Torus { major: 1.0, minor: 0.3 }] {
        let a: PointSet<f64> = sample_uniform(&space, 300, 77).unwrap();
        let b: PointSet<f64> = sample_uniform(&space, 300, 77).unwrap();
        let c: PointSet<f64> = sample_uniform(&space, 300, 78).unwrap();
        assert!(a.coords().iter().zip(b.coords()).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_ne!(a.coords(), c.coords());
    }
}

#[test]
fn f32_sampling() {
    let ps: PointSet<f32> = sample_uniform(&Space::Square, 100, 1).unwrap();
    assert_eq!(ps.len(), 100);
}

fn word(len: usize) -> impl Strategy<Value = Address> {
    proptest::collection::vec(1u8..=3, len).prop_map(|l| Address::new(l).unwrap())
}

proptest! {
    #[test]
    fn d_cell_symmetric_and_lipschitz(x in word(14), y in word(14)) {
        let dxy: f64 = d_cell(&x, &y).unwrap();
        let dyx: f64 = d_cell(&y, &x).unwrap();
        prop_assert_eq!(dxy, dyx);
        let px: [f64; 2] = sg_point_of_address(&x);
        let py: [f64; 2] = sg_point_of_address(&y);
        let e = (px[0] - py[0]).hypot(px[1] - py[1]);
        prop_assert!(e <= 2.0 * dxy);
        if x != y {
            prop_assert!(0.5 * dxy <= e, "d_cell {} euclid {}", dxy, e);
        }
    }
}
