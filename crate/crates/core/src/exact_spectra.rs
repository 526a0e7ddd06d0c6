//! Closed-form spectra: interval Laplacians under each boundary condition,
//! the equally spaced grid graph, Chebyshev polynomials and tensor-product
//! spectra of the square and the flat torus.
//!
//! Eigenvalues are those of `−d²/dx²` on `[−1, 1]` (nonnegative). Analytic
//! eigenfunctions are normalized to unit `L²([−1, 1])` norm; discrete
//! vectors to unit Euclidean norm.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BoundaryCondition {
    Neumann,
    Dirichlet,
    Periodic,
    /// `f′(−1) = a f(−1)`, `f′(1) = b f(1)`; an infinite parameter imposes
    /// a Dirichlet condition at that end.
    Robin { a: f64, b: f64 },
}

impl BoundaryCondition {
    /// Maps `robin(0, 0)` to Neumann and `robin(∞, ∞)` to Dirichlet.
    pub fn canonical(self) -> Self {
        match self {
            BoundaryCondition::Robin { a, b } if a == 0.0 && b == 0.0 => BoundaryCondition::Neumann,
            BoundaryCondition::Robin { a, b } if a.is_infinite() && b.is_infinite() => BoundaryCondition::Dirichlet,
            other => other,
        }
    }
}

/// `c_cos cos(ωx) + c_sin sin(ωx) + c_lin x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode<T> {
    pub freq: T,
    pub c_cos: T,
    pub c_sin: T,
    pub c_lin: T,
}

impl<T: Real> Mode<T> {
    fn trig(freq: T, c_cos: T, c_sin: T) -> Self {
        Self { freq, c_cos, c_sin, c_lin: T::zero() }
    }

    pub fn eval(&self, x: T) -> T {
        let t = self.freq * x;
        self.c_cos * t.cos() + self.c_sin * t.sin() + self.c_lin * x
    }

    pub fn derivative(&self, x: T) -> T {
        let t = self.freq * x;
        self.freq * (self.c_sin * t.cos() - self.c_cos * t.sin()) + self.c_lin
    }

    pub fn second_derivative(&self, x: T) -> T {
        -self.freq * self.freq * (self.eval(x) - self.c_lin * x)
    }

    /// `∫_{−1}^{1} φ²`, in closed form.
    pub fn l2_norm_squared(&self) -> T {
        let one = T::one();
        let two = T::of(2.0);
        let w = self.freq;
        let lin = self.c_lin * self.c_lin * two / T::of(3.0);
        if w == T::zero() {
            return self.c_cos * self.c_cos * two + lin;
        }
        let s2 = (two * w).sin() / (two * w);
        // ∫cos² = 1 + sin2ω/2ω, ∫sin² = 1 − sin2ω/2ω, ∫cos·sin = 0 (odd),
        // ∫x sin(ωx) = 2(sin ω − ω cos ω)/ω², ∫x cos = 0
        let xs = two * (w.sin() - w * w.cos()) / (w * w);
        self.c_cos * self.c_cos * (one + s2) + self.c_sin * self.c_sin * (one - s2) + lin + two * self.c_sin * self.c_lin * xs
    }

    fn scaled(self, s: T) -> Self {
        Self { freq: self.freq, c_cos: self.c_cos * s, c_sin: self.c_sin * s, c_lin: self.c_lin * s }
    }
}

/// An eigenpair of `−Δ`: one factor per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPair<T> {
    pub index: usize,
    pub eigenvalue: T,
    pub factors: Vec<Mode<T>>,
    /// Factor applied to the textbook formula to reach unit `L²` norm.
    pub normalization: T,
}

impl<T: Real> EigenPair<T> {
    pub fn eval(&self, x: &[T]) -> T {
        self.factors.iter().zip(x).map(|(m, &xi)| m.eval(xi)).fold(T::one(), |a, b| a * b)
    }

    /// `−Δφ` by differentiating the factors.
    pub fn neg_laplacian(&self, x: &[T]) -> T {
        let vals: Vec<T> = self.factors.iter().zip(x).map(|(m, &xi)| m.eval(xi)).collect();
        let mut out = T::zero();
        for (i, (m, &xi)) in self.factors.iter().zip(x).enumerate() {
            let mut term = -m.second_derivative(xi);
            for (j, &v) in vals.iter().enumerate() {
                if j != i {
                    term *= v;
                }
            }
            out += term;
        }
        out
    }
}

fn normalized<T: Real>(index: usize, eigenvalue: T, mode: Mode<T>) -> EigenPair<T> {
    let s = T::one() / mode.l2_norm_squared().sqrt();
    EigenPair { index, eigenvalue, factors: vec![mode.scaled(s)], normalization: s }
}

/// Eigenpairs of `−d²/dx²` on `[−1, 1]` up to mode index `kmax`.
///
/// Neumann: `λ_k = (kπ/2)²`, `k ≥ 0`, `cos(kπx/2)` for even `k` and
/// `sin(kπx/2)` for odd `k`. Dirichlet: same values for `k ≥ 1` with the
/// functions swapped. Periodic: `λ_k = (kπ)²` with eigenspace
/// `{cos kπx, sin kπx}` for `k ≥ 1`, constants for `k = 0`. Robin: the
/// first `kmax + 1` nonnegative frequencies of [`robin_eigenvalues`].
pub fn interval_eigenpairs<T: Real>(bc: BoundaryCondition, kmax: usize) -> Result<Vec<EigenPair<T>>> {
    let half_pi = T::FRAC_PI_2();
    let mut out = Vec::new();
    match bc.canonical() {
        BoundaryCondition::Neumann => {
            for k in 0..=kmax {
                let w = half_pi * T::of_usize(k);
                let mode = if k % 2 == 0 { Mode::trig(w, T::one(), T::zero()) } else { Mode::trig(w, T::zero(), T::one()) };
                out.push(normalized(k, w * w, mode));
            }
        }
        BoundaryCondition::Dirichlet => {
            for k in 1..=kmax.max(1) {
                let w = half_pi * T::of_usize(k);
                let mode = if k % 2 == 0 { Mode::trig(w, T::zero(), T::one()) } else { Mode::trig(w, T::one(), T::zero()) };
                out.push(normalized(k, w * w, mode));
            }
        }
        BoundaryCondition::Periodic => {
            out.push(normalized(0, T::zero(), Mode::trig(T::zero(), T::one(), T::zero())));
            for k in 1..=kmax {
                let w = T::PI() * T::of_usize(k);
                out.push(normalized(k, w * w, Mode::trig(w, T::one(), T::zero())));
                out.push(normalized(k, w * w, Mode::trig(w, T::zero(), T::one())));
            }
        }
        BoundaryCondition::Robin { a, b } => {
            let freqs = robin_eigenvalues(a, b, kmax + 1)?;
            for (k, &w) in freqs.iter().enumerate() {
                let mode = robin_mode(a, b, w);
                let mode = Mode {
                    freq: T::of(mode.freq),
                    c_cos: T::of(mode.c_cos),
                    c_sin: T::of(mode.c_sin),
                    c_lin: T::of(mode.c_lin),
                };
                let wt = T::of(w);
                out.push(normalized(k, wt * wt, mode));
            }
        }
    }
    Ok(out)
}

/// Real form of the Robin secular equation: with `φ = A cos λx + B sin λx`
/// the boundary conditions have a nonzero solution iff
/// `(λ² + ab) sin 2λ + λ(b − a) cos 2λ = 0`. Infinite parameters divide out.
fn robin_secular(a: f64, b: f64, lam: f64) -> f64 {
    let (s, c) = (2.0 * lam).sin_cos();
    match (a.is_infinite(), b.is_infinite()) {
        (true, true) => s,
        (true, false) => b * s - lam * c,
        (false, true) => a * s + lam * c,
        (false, false) => (lam * lam + a * b) * s + lam * (b - a) * c,
    }
}

/// Secular function divided by `λ`, removing the root every case has at 0.
fn robin_reduced(a: f64, b: f64, lam: f64) -> f64 {
    if lam == 0.0 {
        return match (a.is_infinite(), b.is_infinite()) {
            (true, true) => 2.0,
            (true, false) => 2.0 * b - 1.0,
            (false, true) => 2.0 * a + 1.0,
            (false, false) => 2.0 * a * b + b - a,
        };
    }
    robin_secular(a, b, lam) / lam
}

/// Whether `λ = 0` is an eigenvalue: `A + Bx` satisfies both conditions.
fn robin_zero_mode(a: f64, b: f64) -> bool {
    robin_reduced(a, b, 0.0) == 0.0
}

/// `|e^{4iλ} − (a − iλ)(b + iλ) / ((a + iλ)(b − iλ))|`, with the infinite
/// limits taken factor by factor.
pub fn robin_residual(a: f64, b: f64, lam: f64) -> f64 {
    // complex arithmetic on (re, im) pairs
    let mul = |x: (f64, f64), y: (f64, f64)| (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0);
    let div = |x: (f64, f64), y: (f64, f64)| {
        let d = y.0 * y.0 + y.1 * y.1;
        ((x.0 * y.0 + x.1 * y.1) / d, (x.1 * y.0 - x.0 * y.1) / d)
    };
    let fa = if a.is_infinite() { (1.0, 0.0) } else { div((a, -lam), (a, lam)) };
    let fb = if b.is_infinite() { (1.0, 0.0) } else { div((b, lam), (b, -lam)) };
    let rhs = mul(fa, fb);
    let lhs = ((4.0 * lam).cos(), (4.0 * lam).sin());
    (lhs.0 - rhs.0).hypot(lhs.1 - rhs.1)
}

/// First `count` nonnegative frequencies `λ` (eigenvalues `λ²` of `−d²/dx²`)
/// of the Robin problem `f′(−1) = a f(−1)`, `f′(1) = b f(1)`.
///
/// Roots are bracketed on a grid of pitch `π/64` and refined by bisection;
/// each is checked against the exponential form of the secular equation.
pub fn robin_eigenvalues(a: f64, b: f64, count: usize) -> Result<Vec<f64>> {
    if a.is_nan() || b.is_nan() {
        return Err(invalid("Robin parameters must not be NaN"));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut roots = Vec::with_capacity(count);
    if robin_zero_mode(a, b) {
        roots.push(0.0);
    }
    let pitch = PI / 64.0;
    let g = |x: f64| robin_reduced(a, b, x);
    let mut lo = 0.0;
    let mut glo = g(lo);
    let limit = (count as f64 + 4.0) * FRAC_PI_2 + 2.0 * (a.abs().min(1e6) + b.abs().min(1e6));
    while roots.len() < count {
        let hi = lo + pitch;
        if hi > limit {
            return Err(Error::Bracketing { lo: 0.0, hi: limit });
        }
        let ghi = g(hi);
        if ghi == 0.0 {
            roots.push(hi);
            lo = hi + 1e-9 * pitch;
            glo = g(lo);
            continue;
        }
        if glo != 0.0 && glo.signum() != ghi.signum() {
            let r = bisect(&g, lo, hi)?;
            if r > 0.0 {
                roots.push(r);
            }
        }
        lo = hi;
        glo = ghi;
    }
    for &r in &roots {
        let res = robin_residual(a, b, r);
        if res > 1e-10 {
            return Err(Error::Bracketing { lo: r - pitch, hi: r + pitch });
        }
    }
    Ok(roots)
}

fn bisect(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut glo = g(lo);
    if glo.signum() == g(hi).signum() {
        return Err(Error::Bracketing { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Eigenfunction at frequency `lam` (not normalized).
fn robin_mode(a: f64, b: f64, lam: f64) -> Mode<f64> {
    if lam == 0.0 {
        // φ = A + Bx with B = a(A − B)
        return if a.is_infinite() {
            Mode { freq: 0.0, c_cos: 1.0, c_sin: 0.0, c_lin: 1.0 }
        } else {
            Mode { freq: 0.0, c_cos: 1.0 + a, c_sin: 0.0, c_lin: a }
        };
    }
    let (s, c) = lam.sin_cos();
    // rows of the 2×2 system in (A, B); infinite parameters leave φ(±1) = 0
    let row_left = if a.is_infinite() { [c, -s] } else { [lam * s - a * c, lam * c + a * s] };
    let row_right = if b.is_infinite() { [c, s] } else { [-lam * s - b * c, lam * c - b * s] };
    let row = if row_left[0].hypot(row_left[1]) >= row_right[0].hypot(row_right[1]) { row_left } else { row_right };
    Mode { freq: lam, c_cos: row[1], c_sin: -row[0], c_lin: 0.0 }
}

/// Chebyshev polynomial of the first kind by the three-term recurrence.
pub fn chebyshev_t<T: Real>(j: usize, x: T) -> T {
    let two = T::of(2.0);
    let (mut prev, mut cur) = (T::one(), x);
    if j == 0 {
        return prev;
    }
    for _ in 1..j {
        let next = two * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Chebyshev polynomial of the second kind by the three-term recurrence.
pub fn chebyshev_u<T: Real>(j: usize, x: T) -> T {
    let two = T::of(2.0);
    let (mut prev, mut cur) = (T::one(), two * x);
    if j == 0 {
        return prev;
    }
    for _ in 1..j {
        let next = two * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Spectrum of the averaging Laplacian on the `n`-point grid of `[−1, 1]`
/// with nearest-neighbor edges: `λ_k = cos(kπ/(n−1)) − 1`, eigenvector the
/// grid sampling of the `k`-th Neumann mode, normalized to unit length.
pub fn grid_graph_eigenpairs<T: Real>(n: usize) -> Result<Vec<(T, Vec<T>)>> {
    if n < 3 {
        return Err(invalid("the grid spectrum needs n ≥ 3"));
    }
    let h = 2.0 / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|j| if j == n - 1 { 1.0 } else { -1.0 + h * j as f64 }).collect();
    Ok((0..n)
        .map(|k| {
            let lam = T::of((k as f64 * PI / (n - 1) as f64).cos() - 1.0);
            let w = 0.5 * k as f64 * PI;
            let v: Vec<f64> = xs.iter().map(|&x| if k % 2 == 0 { (w * x).cos() } else { (w * x).sin() }).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            (lam, v.into_iter().map(|a| T::of(a / norm)).collect())
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProductSpace {
    /// `[−1, 1]²` with Neumann conditions.
    Square,
    /// `[−1, 1]²` with periodic identifications.
    FlatTorus,
}

/// Tensor-product eigenpairs with per-axis mode indices `≤ kmax`, sorted by
/// eigenvalue (ties keep enumeration order).
pub fn product_eigenpairs<T: Real>(space: ProductSpace, kmax: usize) -> Result<Vec<EigenPair<T>>> {
    let bc = match space {
        ProductSpace::Square => BoundaryCondition::Neumann,
        ProductSpace::FlatTorus => BoundaryCondition::Periodic,
    };
    let axis = interval_eigenpairs::<T>(bc, kmax)?;
    let mut out = Vec::with_capacity(axis.len() * axis.len());
    for p in &axis {
        for q in &axis {
            out.push(EigenPair {
                index: 0,
                eigenvalue: p.eigenvalue + q.eigenvalue,
                factors: vec![p.factors[0], q.factors[0]],
                normalization: p.normalization * q.normalization,
            });
        }
    }
    out.sort_by(|a, b| a.eigenvalue.partial_cmp(&b.eigenvalue).unwrap());
    for (i, e) in out.iter_mut().enumerate() {
        e.index = i;
    }
    Ok(out)
}

/// Groups sorted eigenvalues whose relative gap is within `rel_tol`;
/// returns `(representative value, multiplicity)`.
pub fn group_multiplicities<T: Real>(values: &[T], rel_tol: T) -> Vec<(T, usize)> {
    let mut out: Vec<(T, usize)> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some((rep, count)) if (v - *rep).abs() <= rel_tol * rep.abs().max(v.abs()).max(T::min_positive_value()) => {
                *count += 1
            }
            _ => out.push((v, 1)),
        }
    }
    out
}
