//! Polynomial symbols `a(t, ξ) = Σ_{|α| <= m} a_α(t) ξ^α` of differential
//! operators with matrix coefficients, sectorial resolvent estimates, the
//! resolvent multiplier `λ(λ + a(t, ·))⁻¹` and the discrete Leibniz rule for
//! differences of inverses.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::{euclidean_norm, LatticeBox};
use crate::linalg::{self, Mat, C64};
use crate::par;
use crate::symbol::{bv_certificate, OperatorSymbol, Support};

/// A scalar function of time.
#[derive(Clone, Debug, PartialEq)]
pub enum TimeFunction {
    /// `Σ_i c_i t^i`.
    Polynomial(Vec<f64>),
    /// `e^{rate·t}`.
    Exp(f64),
    /// Piecewise-linear interpolation of `(t_i, v_i)`, constant outside.
    Table(Vec<(f64, f64)>),
}

impl TimeFunction {
    pub fn constant(c: f64) -> Self {
        TimeFunction::Polynomial(vec![c])
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFunction::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci),
            TimeFunction::Exp(rate) => (rate * t).exp(),
            TimeFunction::Table(points) => {
                let (first, last) = (points[0], points[points.len() - 1]);
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                let i = points.partition_point(|p| p.0 <= t);
                let (a, b) = (points[i - 1], points[i]);
                a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            TimeFunction::Polynomial(c) => c.iter().skip(1).all(|&x| x == 0.0),
            TimeFunction::Exp(rate) => *rate == 0.0,
            TimeFunction::Table(points) => points.iter().all(|p| p.1 == points[0].1),
        }
    }
}

/// `a_α(t) = Σ_i M_i g_i(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficient {
    pub alpha: Vec<u32>,
    pub terms: Vec<(Mat, TimeFunction)>,
}

impl Coefficient {
    pub fn eval(&self, t: f64, dim: usize) -> Mat {
        self.terms.iter().fold(linalg::zeros(dim), |acc, (m, g)| {
            acc + m * C64::new(g.eval(t), 0.0)
        })
    }

    pub fn degree(&self) -> u32 {
        self.alpha.iter().sum()
    }
}

/// Symbol of `A(t) = Σ_{|α| <= m} a_α(t) D^α`.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipticSymbol {
    order: u32,
    n: usize,
    dim: usize,
    coefficients: Vec<Coefficient>,
    time_domain: (f64, f64),
}

fn monomial(xi: &[f64], alpha: &[u32]) -> f64 {
    xi.iter()
        .zip(alpha)
        .map(|(x, &a)| x.powi(a as i32))
        .product()
}

impl EllipticSymbol {
    pub fn new(order: u32, n: usize, dim: usize, time_domain: (f64, f64)) -> Result<Self> {
        if order == 0 || order % 2 == 1 {
            return Err(Error::invalid(format!(
                "order must be even and positive, got {order}"
            )));
        }
        if n == 0 || dim == 0 {
            return Err(Error::invalid(
                "dimension and coefficient size must be positive",
            ));
        }
        if !(time_domain.0 <= time_domain.1) {
            return Err(Error::invalid(format!("empty time domain {time_domain:?}")));
        }
        Ok(EllipticSymbol {
            order,
            n,
            dim,
            coefficients: Vec::new(),
            time_domain,
        })
    }

    /// `−Δ ⊗ I`: `a(ξ) = |ξ|² I`.
    pub fn negative_laplacian(n: usize, dim: usize) -> Self {
        let mut a = EllipticSymbol::new(2, n, dim, (0.0, f64::INFINITY)).expect("valid order");
        for i in 0..n {
            let mut alpha = vec![0; n];
            alpha[i] = 2;
            a.add_term(alpha, linalg::identity(dim), TimeFunction::constant(1.0))
                .expect("valid term");
        }
        a
    }

    /// Add `M g(t) ξ^α` to the symbol.
    pub fn add_term(&mut self, alpha: Vec<u32>, m: Mat, g: TimeFunction) -> Result<()> {
        if alpha.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: alpha.len(),
            });
        }
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.nrows(),
            });
        }
        if alpha.iter().sum::<u32>() > self.order {
            return Err(Error::invalid(format!(
                "multi-index {alpha:?} exceeds the order {}",
                self.order
            )));
        }
        if let TimeFunction::Table(points) = &g {
            if points.is_empty() || points.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::invalid(
                    "time tables need strictly increasing sample times",
                ));
            }
        }
        match self.coefficients.iter_mut().find(|c| c.alpha == alpha) {
            Some(c) => c.terms.push((m, g)),
            None => self.coefficients.push(Coefficient {
                alpha,
                terms: vec![(m, g)],
            }),
        }
        Ok(())
    }

    pub fn with_term(mut self, alpha: Vec<u32>, m: Mat, g: TimeFunction) -> Result<Self> {
        self.add_term(alpha, m, g)?;
        Ok(self)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn time_domain(&self) -> (f64, f64) {
        self.time_domain
    }

    pub fn set_time_domain(&mut self, domain: (f64, f64)) {
        self.time_domain = domain;
    }

    pub fn coefficients(&self) -> &[Coefficient] {
        &self.coefficients
    }

    pub fn is_time_constant(&self) -> bool {
        self.coefficients
            .iter()
            .all(|c| c.terms.iter().all(|(_, g)| g.is_constant()))
    }

    /// `c · a`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for coef in &mut out.coefficients {
            for (m, _) in &mut coef.terms {
                *m *= C64::new(c, 0.0);
            }
        }
        out
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t < self.time_domain.0 || t > self.time_domain.1 || t.is_nan() {
            return Err(Error::invalid(format!(
                "t = {t} is outside the time domain {:?}",
                self.time_domain
            )));
        }
        Ok(())
    }

    fn eval_filtered(&self, t: f64, xi: &[f64], principal_only: bool) -> Result<Mat> {
        self.check_time(t)?;
        if xi.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: xi.len(),
            });
        }
        let mut out = linalg::zeros(self.dim);
        for c in &self.coefficients {
            if principal_only && c.degree() != self.order {
                continue;
            }
            out += c.eval(t, self.dim) * C64::new(monomial(xi, &c.alpha), 0.0);
        }
        Ok(out)
    }

    /// `a(t, ξ)`.
    pub fn eval(&self, t: f64, xi: &[f64]) -> Result<Mat> {
        self.eval_filtered(t, xi, false)
    }

    /// `a⁰(t, ξ) = Σ_{|α| = m} a_α(t) ξ^α`.
    pub fn eval_principal(&self, t: f64, xi: &[f64]) -> Result<Mat> {
        self.eval_filtered(t, xi, true)
    }

    /// `a(t, k)` at a lattice point.
    pub fn eval_lattice(&self, t: f64, k: &[i64]) -> Result<Mat> {
        let xi: Vec<f64> = k.iter().map(|&x| x as f64).collect();
        self.eval(t, &xi)
    }

    /// Largest `‖a_α(t) − a_α(s)‖ / |t − s|^ρ` over a uniform grid of
    /// `samples` times, maximised over `α`.
    pub fn holder_estimate(&self, rho: f64, samples: usize) -> f64 {
        let (t0, t1) = self.finite_domain();
        let times = uniform_times((t0, t1), samples.max(2));
        let mut worst: f64 = 0.0;
        for c in &self.coefficients {
            let vals: Vec<Mat> = times.iter().map(|&t| c.eval(t, self.dim)).collect();
            for i in 0..times.len() {
                for j in i + 1..times.len() {
                    let d = linalg::op_norm(&(&vals[j] - &vals[i]));
                    worst = worst.max(d / (times[j] - times[i]).powf(rho));
                }
            }
        }
        worst
    }

    /// The time domain with an infinite right end replaced by `t0 + 1`.
    pub fn finite_domain(&self) -> (f64, f64) {
        let (a, b) = self.time_domain;
        (a, if b.is_finite() { b } else { a + 1.0 })
    }
}

/// `{λ : |arg(λ − ω₀)| <= θ} ∪ {ω₀}` with the constant `κ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sector {
    pub theta: f64,
    pub omega0: f64,
    pub kappa: f64,
}

impl Sector {
    pub fn new(theta: f64, omega0: f64, kappa: f64) -> Result<Self> {
        if !(0.0..PI).contains(&theta) {
            return Err(Error::invalid(format!(
                "sector angle must lie in [0, π), got {theta}"
            )));
        }
        if omega0.is_nan() || omega0 < 0.0 {
            return Err(Error::invalid(format!(
                "shift ω₀ must be nonnegative, got {omega0}"
            )));
        }
        if kappa.is_nan() || kappa < 1.0 {
            return Err(Error::invalid(format!("κ must be >= 1, got {kappa}")));
        }
        Ok(Sector {
            theta,
            omega0,
            kappa,
        })
    }

    pub fn contains(&self, lambda: C64) -> bool {
        let z = lambda - self.omega0;
        z.norm() == 0.0 || z.arg().abs() <= self.theta + 1e-12
    }

    /// `ω₀ + r e^{±iθ}` and `ω₀ + r` for each magnitude, plus `ω₀` itself.
    pub fn samples(&self, magnitudes: &[f64]) -> Vec<C64> {
        let mut out = vec![C64::new(self.omega0, 0.0)];
        for &r in magnitudes {
            for angle in [self.theta, -self.theta, 0.0] {
                out.push(C64::new(self.omega0, 0.0) + C64::from_polar(r, angle));
            }
        }
        out
    }
}

/// `count` magnitudes spaced logarithmically over `[lo, hi]`.
pub fn log_magnitudes(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// One time for a time-independent symbol, otherwise a uniform grid.
fn sample_times(a: &EllipticSymbol, count: usize) -> Vec<f64> {
    if a.is_time_constant() {
        vec![a.time_domain().0]
    } else {
        uniform_times(a.finite_domain(), count)
    }
}

pub fn uniform_times(domain: (f64, f64), count: usize) -> Vec<f64> {
    if count <= 1 || domain.0 == domain.1 {
        return vec![domain.0];
    }
    (0..count)
        .map(|i| domain.0 + (domain.1 - domain.0) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Points on the unit sphere of `R^n`: `±1`, equally spaced angles, a
/// Fibonacci lattice, or seeded Gaussian directions for `n >= 4`.
pub fn sphere_points(n: usize, count: usize) -> Vec<Vec<f64>> {
    let count = count.max(1);
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * i as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => {
            use rand::Rng;
            let mut rng = crate::random::seeded(0x5eed);
            (0..count)
                .map(|_| {
                    let v: Vec<f64> = (0..n)
                        .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                        .collect();
                    let norm = euclidean_norm_f(&v);
                    v.into_iter().map(|x| x / norm).collect()
                })
                .collect()
        }
    }
}

fn euclidean_norm_f(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sampling plan for the sectorial checks.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorSampling {
    pub sphere_points: usize,
    /// Magnitudes of `λ − ω` on each ray.
    pub magnitudes: Vec<f64>,
    pub times: usize,
}

impl Default for SectorSampling {
    fn default() -> Self {
        SectorSampling {
            sphere_points: 512,
            magnitudes: log_magnitudes(1e-3, 1e4, 57),
            times: 9,
        }
    }
}

/// Outcome of [`ellipticity_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct EllipticityReport {
    pub passed: bool,
    /// `max (1 + |λ|) ‖(λ + a⁰(t, ξ))⁻¹‖` over `|ξ| = 1`.
    pub kappa: f64,
    /// `max (|ξ|^m + |λ|) ‖(λ + a⁰(t, ξ))⁻¹‖` over off-sphere `ξ`.
    pub scaled_kappa: f64,
    /// `(t, ξ, λ)` where `λ + a⁰` was found singular.
    pub witness: Option<String>,
}

/// Values of `κ` above this are reported as a failed check.
pub const KAPPA_CAP: f64 = 1e8;

struct Probe {
    t: f64,
    xi: Vec<f64>,
    lambda: C64,
}

fn resolvent_scan<F>(
    probes: &[Probe],
    matrix: F,
    weight: impl Fn(&Probe) -> f64 + Sync,
) -> std::result::Result<f64, String>
where
    F: Fn(&Probe) -> Mat + Sync,
{
    let values = par::map(probes, |p| {
        let m = matrix(p);
        match linalg::checked_inverse(&m) {
            Some(inv) => Ok(weight(p) * linalg::op_norm(&inv)),
            None => Err(format!(
                "t={}, xi={:?}, lambda={}",
                p.t,
                p.xi,
                linalg::fmt_c64(p.lambda)
            )),
        }
    });
    let mut worst: f64 = 0.0;
    for v in values {
        worst = worst.max(v?);
    }
    Ok(worst)
}

fn sector_lambdas(theta: f64, shift: f64, magnitudes: &[f64], include_zero: bool) -> Vec<C64> {
    let mut out = Vec::new();
    if include_zero {
        out.push(C64::new(shift, 0.0));
    }
    for &r in magnitudes {
        for angle in [theta, -theta, 0.0] {
            out.push(C64::new(shift, 0.0) + C64::from_polar(r, angle));
        }
    }
    out
}

/// Check `‖(λ + a⁰(t, ξ))⁻¹‖ <= κ / (1 + |λ|)` on `|ξ| = 1`, `λ ∈ Σ_θ`.
pub fn ellipticity_check(
    a: &EllipticSymbol,
    theta: f64,
    sampling: &SectorSampling,
) -> Result<EllipticityReport> {
    if !(0.0..PI).contains(&theta) {
        return Err(Error::invalid(format!(
            "sector angle must lie in [0, π), got {theta}"
        )));
    }
    let lambdas = sector_lambdas(theta, 0.0, &sampling.magnitudes, true);
    let times = sample_times(a, sampling.times);
    let sphere = sphere_points(a.n(), sampling.sphere_points);
    let m = a.order() as i32;
    let mut on_sphere = Vec::new();
    let mut off_sphere = Vec::new();
    for &t in &times {
        for xi in &sphere {
            for &lambda in &lambdas {
                on_sphere.push(Probe {
                    t,
                    xi: xi.clone(),
                    lambda,
                });
            }
            for scale in [0.25, 2.0, 8.0] {
                let xs: Vec<f64> = xi.iter().map(|x| x * scale).collect();
                for &lambda in lambdas.iter().step_by(4) {
                    off_sphere.push(Probe {
                        t,
                        xi: xs.clone(),
                        lambda,
                    });
                }
            }
        }
    }
    let principal = |p: &Probe| {
        let a0 = a
            .eval_principal(p.t, &p.xi)
            .expect("sampled t lies in the domain");
        a0 + linalg::scalar(a.dim(), p.lambda)
    };
    let kappa = match resolvent_scan(&on_sphere, principal, |p| 1.0 + p.lambda.norm()) {
        Ok(k) => k,
        Err(w) => {
            return Ok(EllipticityReport {
                passed: false,
                kappa: f64::INFINITY,
                scaled_kappa: f64::INFINITY,
                witness: Some(w),
            })
        }
    };
    let scaled = resolvent_scan(&off_sphere, principal, |p| {
        euclidean_norm_f(&p.xi).powi(m) + p.lambda.norm()
    });
    let (scaled_kappa, witness) = match scaled {
        Ok(v) => (v, None),
        Err(w) => (f64::INFINITY, Some(w)),
    };
    Ok(EllipticityReport {
        passed: witness.is_none() && kappa <= KAPPA_CAP && scaled_kappa <= KAPPA_CAP,
        kappa,
        scaled_kappa,
        witness,
    })
}

/// Radii of the `ξ` samples used for the full-symbol bound.
const FULL_SYMBOL_RADII: [f64; 12] = [
    0.0, 0.125, 0.25, 0.5, 1.0, 1.5, 2.0, 4.0, 8.0, 16.0, 64.0, 256.0,
];

/// `max (|ξ|^m + |λ|) ‖(λ + a(t, ξ))⁻¹‖` over `λ ∈ ω + Σ_θ` samples; an
/// error carries the singular witness.
pub fn full_resolvent_bound(
    a: &EllipticSymbol,
    theta: f64,
    omega: f64,
    sampling: &SectorSampling,
) -> std::result::Result<f64, String> {
    let lambdas = sector_lambdas(theta, omega, &sampling.magnitudes, true);
    let times = sample_times(a, sampling.times);
    let directions = sphere_points(a.n(), sampling.sphere_points.min(64));
    let m = a.order() as i32;
    let mut probes = Vec::new();
    for &t in &times {
        for &r in &FULL_SYMBOL_RADII {
            for dir in if r == 0.0 {
                &directions[..1]
            } else {
                &directions[..]
            } {
                let xi: Vec<f64> = dir.iter().map(|x| x * r).collect();
                for &lambda in &lambdas {
                    probes.push(Probe {
                        t,
                        xi: xi.clone(),
                        lambda,
                    });
                }
            }
        }
    }
    resolvent_scan(
        &probes,
        |p| {
            a.eval(p.t, &p.xi).expect("sampled t lies in the domain")
                + linalg::scalar(a.dim(), p.lambda)
        },
        |p| euclidean_norm_f(&p.xi).powi(m) + p.lambda.norm(),
    )
}

/// Smallest `ω` on the grid `0, start, 2·start, 4·start, …` (up to `cap`)
/// for which `(|ξ|^m + |λ|) ‖(λ + a(t, ξ))⁻¹‖ <= 2κ` at every sample with
/// `λ ∈ ω + Σ_θ`.
pub fn omega0_search(
    a: &EllipticSymbol,
    sector: &Sector,
    sampling: &SectorSampling,
    start: f64,
    cap: f64,
) -> Result<f64> {
    if !(start > 0.0) || !(cap >= start) {
        return Err(Error::invalid(format!(
            "ω grid needs 0 < start <= cap, got start={start}, cap={cap}"
        )));
    }
    let mut omega = start;
    while omega <= cap {
        if let Ok(bound) = full_resolvent_bound(a, sector.theta, omega, sampling) {
            if bound <= 2.0 * sector.kappa {
                return Ok(omega);
            }
        }
        omega *= 2.0;
    }
    Err(Error::ShiftNotFound { cap })
}

/// `M_{λ,t}(k) = λ (λ + a(t, k))⁻¹`. Invertibility is verified on `window`;
/// outside it the evaluator falls back to the unguarded inverse.
pub fn resolvent_multiplier(
    a: &EllipticSymbol,
    sector: &Sector,
    lambda: C64,
    t: f64,
    window: &LatticeBox,
) -> Result<OperatorSymbol> {
    if !sector.contains(lambda) {
        return Err(Error::invalid(format!(
            "λ = {} is outside ω₀ + Σ_θ (ω₀ = {}, θ = {})",
            linalg::fmt_c64(lambda),
            sector.omega0,
            sector.theta
        )));
    }
    resolvent_multiplier_unchecked(a, lambda, t, window)
}

/// [`resolvent_multiplier`] without the sector membership test; used for
/// negative controls below `ω₀`.
pub fn resolvent_multiplier_unchecked(
    a: &EllipticSymbol,
    lambda: C64,
    t: f64,
    window: &LatticeBox,
) -> Result<OperatorSymbol> {
    a.check_time(t)?;
    if window.dim() != a.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: window.dim(),
        });
    }
    let dim = a.dim();
    let resolvent_input =
        |k: &[i64]| a.eval_lattice(t, k).expect("t checked") + linalg::scalar(dim, lambda);
    let bad = par::map_range(window.len(), |i| {
        let k = window.point_at(i);
        linalg::checked_inverse(&resolvent_input(&k))
            .is_none()
            .then_some(k)
    });
    if let Some(k) = bad.into_iter().flatten().next() {
        return Err(Error::Singular {
            witness: format!("k={k}, lambda={}, t={t}", linalg::fmt_c64(lambda)),
        });
    }
    let symbol = a.clone();
    Ok(OperatorSymbol::new(a.n(), dim, Support::All, move |k| {
        let m = symbol.eval_lattice(t, k).expect("t checked") + linalg::scalar(dim, lambda);
        let inv = m
            .try_inverse()
            .unwrap_or_else(|| Mat::from_element(dim, dim, C64::new(f64::NAN, f64::NAN)));
        inv * lambda
    }))
}

/// An ordered tuple `(w¹, …, w^r)` of nonzero multi-indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditiveDecomposition {
    pub parts: Vec<Vec<u32>>,
}

impl AdditiveDecomposition {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `w_*^j = Σ_{l > j} w^l` (0-based `j`).
    pub fn tail_sum(&self, j: usize) -> Vec<u32> {
        let n = self.parts.first().map_or(0, |p| p.len());
        let mut out = vec![0; n];
        for w in &self.parts[j + 1..] {
            for (o, x) in out.iter_mut().zip(w) {
                *o += x;
            }
        }
        out
    }
}

/// All ordered decompositions of `α` into nonzero multi-indices; `{∅}` for `α = 0`.
pub fn additive_decompositions(alpha: &[u32]) -> Vec<AdditiveDecomposition> {
    fn go(rest: &mut Vec<u32>, prefix: &mut Vec<Vec<u32>>, out: &mut Vec<AdditiveDecomposition>) {
        if rest.iter().all(|&x| x == 0) {
            out.push(AdditiveDecomposition {
                parts: prefix.clone(),
            });
            return;
        }
        // enumerate 0 < w <= rest with an odometer
        let mut w = vec![0u32; rest.len()];
        loop {
            let mut axis = 0;
            while axis < w.len() {
                if w[axis] < rest[axis] {
                    w[axis] += 1;
                    break;
                }
                w[axis] = 0;
                axis += 1;
            }
            if axis == w.len() {
                return;
            }
            for (r, x) in rest.iter_mut().zip(&w) {
                *r -= x;
            }
            prefix.push(w.clone());
            go(rest, prefix, out);
            prefix.pop();
            for (r, x) in rest.iter_mut().zip(&w) {
                *r += x;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut alpha.to_vec(), &mut Vec::new(), &mut out);
    out
}

/// Unrestricted backward difference `Δ^w g(k) = Σ_{ε <= w} (−1)^{|ε|} C(w, ε) g(k − ε)`.
pub fn unrestricted_difference<F>(g: F, w: &[u32], k: &[i64], dim: usize) -> Result<Mat>
where
    F: Fn(&[i64]) -> Result<Mat>,
{
    fn binom(n: u32, k: u32) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }
    let mut acc = linalg::zeros(dim);
    let mut eps = vec![0u32; w.len()];
    loop {
        let coef: f64 = eps
            .iter()
            .zip(w)
            .map(|(&e, &wi)| binom(wi, e))
            .product::<f64>()
            * if eps.iter().sum::<u32>() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
        let point: Vec<i64> = k.iter().zip(&eps).map(|(&ki, &e)| ki - e as i64).collect();
        acc += g(&point)? * C64::new(coef, 0.0);
        let mut axis = 0;
        while axis < w.len() {
            if eps[axis] < w[axis] {
                eps[axis] += 1;
                break;
            }
            eps[axis] = 0;
            axis += 1;
        }
        if axis == w.len() {
            return Ok(acc);
        }
    }
}

fn inverse_at(s: &OperatorSymbol, k: &[i64]) -> Result<Mat> {
    linalg::checked_inverse(&s.eval(k)).ok_or_else(|| Error::Singular {
        witness: format!("k={}", crate::lattice::LatticePoint::from(k)),
    })
}

/// `Δ^α(S⁻¹)(k)` by the discrete Leibniz rule
/// `Σ_{W ∈ Z_α} (−1)^{r_W} S⁻¹(k − α) Π_j ((Δ^{w^j} S) S⁻¹)(k − w_*^j)`.
///
/// Only for `α ∈ {0,1}^n`: with a repeated axis the product misses the
/// cross terms (scalar `s = 1, 2, 4` gives 0 against the true 1/4).
pub fn inverse_difference(s: &OperatorSymbol, alpha: &[u32], k: &[i64]) -> Result<Mat> {
    if alpha.len() != s.n() || k.len() != s.n() {
        return Err(Error::DimensionMismatch {
            expected: s.n(),
            found: alpha.len().max(k.len()),
        });
    }
    if alpha.iter().any(|&a| a > 1) {
        return Err(Error::invalid(format!(
            "inverse-difference formula needs α in {{0,1}}^n, got {alpha:?}"
        )));
    }
    let dim = s.dim();
    let base_point: Vec<i64> = k.iter().zip(alpha).map(|(&ki, &a)| ki - a as i64).collect();
    let base = inverse_at(s, &base_point)?;
    let mut total = linalg::zeros(dim);
    for w in additive_decompositions(alpha) {
        let mut term = base.clone();
        for (j, part) in w.parts.iter().enumerate() {
            let shift = w.tail_sum(j);
            let at: Vec<i64> = k
                .iter()
                .zip(&shift)
                .map(|(&ki, &x)| ki - x as i64)
                .collect();
            let diff = unrestricted_difference(|p| Ok(s.eval(p)), part, &at, dim)?;
            term = term * diff * inverse_at(s, &at)?;
        }
        if w.len() % 2 == 1 {
            total -= term;
        } else {
            total += term;
        }
    }
    Ok(total)
}

/// `Δ^α(S⁻¹)(k)` straight from the definition.
pub fn direct_inverse_difference(s: &OperatorSymbol, alpha: &[u32], k: &[i64]) -> Result<Mat> {
    unrestricted_difference(|p| inverse_at(s, p), alpha, k, s.dim())
}

/// One `(λ, t)` entry of a resolvent sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub lambda: C64,
    pub t: f64,
    pub in_sector: bool,
    pub bv_sup: f64,
    pub argmax: u64,
    /// `max |k|^{|γ|} ‖Δ^γ M_{λ,t}(k)‖` over the certified cells.
    pub weighted_sup: f64,
    pub tail_norm: f64,
    /// `max_k (|k|^m + |λ|) ‖(λ + a(t, k))⁻¹‖` over the certified window.
    pub resolvent_bound: f64,
}

/// Table of certificates with the uniformity verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Largest certificate on the requested samples.
    pub cap: f64,
    /// Largest certificate after inserting geometric midpoints between the
    /// requested magnitudes of `λ − ω₀`.
    pub refined_cap: f64,
    /// `refined_cap <= 1.1 · cap`.
    pub uniform: bool,
    /// `2^{3n+1}`.
    pub soft_bound: f64,
    pub within_soft_bound: bool,
    /// A user cap was supplied and exceeded.
    pub cap_exceeded: bool,
}

/// Smallest cube containing the cells `D_0 … D_{d_max}` in dimension `n`.
pub fn cell_window(n: usize, d_max: u64) -> LatticeBox {
    let r = if d_max == 0 {
        0
    } else {
        (d_max - 1) / n as u64 + 1
    };
    let half = (1_i64 << r.min(40)) - 1;
    LatticeBox::cube(n, -half, half).expect("nonnegative radius")
}

fn sweep_row(
    a: &EllipticSymbol,
    sector: &Sector,
    lambda: C64,
    t: f64,
    d_max: u64,
) -> Result<SweepRow> {
    let window = cell_window(a.n(), d_max);
    let m = resolvent_multiplier_unchecked(a, lambda, t, &window)?;
    let cert = bv_certificate(&m, d_max);
    let order = a.order() as i32;
    let bounds = par::map_range(window.len(), |i| {
        let k = window.point_at(i);
        let inv = (m.eval(&k) * lambda.inv()).map(|z| z);
        (euclidean_norm(&k).powi(order) + lambda.norm()) * linalg::op_norm(&inv)
    });
    Ok(SweepRow {
        lambda,
        t,
        in_sector: sector.contains(lambda),
        bv_sup: cert.sup,
        argmax: cert.argmax,
        weighted_sup: cert.weighted_sup,
        tail_norm: cert.tail_norm,
        resolvent_bound: bounds.into_iter().fold(0.0, f64::max),
    })
}

/// Bounded-variation certificates of `M_{λ,t}` over `λ ∈ lambdas`, `t ∈ times`.
pub fn resolvent_bv_sweep(
    a: &EllipticSymbol,
    sector: &Sector,
    lambdas: &[C64],
    times: &[f64],
    d_max: u64,
    cap: Option<f64>,
) -> Result<SweepReport> {
    if lambdas.is_empty() || times.is_empty() {
        return Err(Error::invalid("sweep needs at least one λ and one t"));
    }
    let mut rows = Vec::with_capacity(lambdas.len() * times.len());
    for &t in times {
        for &lambda in lambdas {
            rows.push(sweep_row(a, sector, lambda, t, d_max)?);
        }
    }
    let max_of = |rows: &[SweepRow]| rows.iter().map(|r| r.bv_sup).fold(0.0, f64::max);
    let cap_value = max_of(&rows);

    // refine: geometric midpoints between consecutive magnitudes on each ray
    let omega = C64::new(sector.omega0, 0.0);
    let mut refined = Vec::new();
    let mut by_ray: Vec<(f64, Vec<f64>)> = Vec::new();
    for &l in lambdas {
        let z = l - omega;
        if z.norm() == 0.0 {
            continue;
        }
        let arg = z.arg();
        match by_ray.iter_mut().find(|(a, _)| (a - arg).abs() < 1e-12) {
            Some((_, mags)) => mags.push(z.norm()),
            None => by_ray.push((arg, vec![z.norm()])),
        }
    }
    for (arg, mut mags) in by_ray {
        mags.sort_by(f64::total_cmp);
        for pair in mags.windows(2) {
            refined.push(omega + C64::from_polar((pair[0] * pair[1]).sqrt(), arg));
        }
    }
    let mut refined_rows = Vec::new();
    for &t in times {
        for &lambda in &refined {
            refined_rows.push(sweep_row(a, sector, lambda, t, d_max)?);
        }
    }
    let refined_cap = cap_value.max(max_of(&refined_rows));
    let soft_bound = 2f64.powi(3 * a.n() as i32 + 1);
    Ok(SweepReport {
        rows,
        cap: cap_value,
        refined_cap,
        uniform: refined_cap <= 1.1 * cap_value,
        soft_bound,
        within_soft_bound: refined_cap <= soft_bound,
        cap_exceeded: cap.is_some_and(|c| refined_cap > c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{complex_normal, seeded};
    use rand::Rng;

    fn quick() -> SectorSampling {
        SectorSampling {
            sphere_points: 64,
            magnitudes: log_magnitudes(1e-3, 1e4, 29),
            times: 3,
        }
    }

    fn re(m: &Mat) -> f64 {
        m[(0, 0)].re
    }

    #[test]
    fn laplacian_symbol() {
        let a = EllipticSymbol::negative_laplacian(3, 2);
        let v = a.eval(0.0, &[1.0, -2.0, 0.5]).unwrap();
        assert!((v - linalg::scalar(2, C64::new(5.25, 0.0))).norm() < 1e-15);
        assert!(a.is_time_constant());
    }

    #[test]
    fn principal_part_is_homogeneous() {
        let mut rng = seeded(1);
        let mut a = EllipticSymbol::negative_laplacian(2, 2);
        let b = Mat::from_fn(2, 2, |_, _| complex_normal(&mut rng));
        a.add_term(
            vec![1, 0],
            b.clone(),
            TimeFunction::Polynomial(vec![1.0, 2.0]),
        )
        .unwrap();
        a.add_term(vec![1, 1], b.clone(), TimeFunction::constant(0.3))
            .unwrap();
        a.add_term(vec![0, 0], b, TimeFunction::Exp(-1.0)).unwrap();
        let xi = [0.7, -1.3];
        let two: Vec<f64> = xi.iter().map(|x| 2.0 * x).collect();
        let p1 = a.eval_principal(0.4, &xi).unwrap();
        let p2 = a.eval_principal(0.4, &two).unwrap();
        assert!((p2 - p1 * C64::new(4.0, 0.0)).norm() < 1e-12);
        // a − a⁰ has degree <= 1: second differences along a line vanish
        let lower = |s: f64| {
            let x = [s * 0.3, s * 0.8];
            a.eval(0.4, &x).unwrap() - a.eval_principal(0.4, &x).unwrap()
        };
        assert!((lower(2.0) - lower(1.0) * C64::new(2.0, 0.0) + lower(0.0)).norm() < 1e-12);
        assert!(!a.is_time_constant());
    }

    #[test]
    fn construction_errors() {
        assert!(EllipticSymbol::new(3, 2, 1, (0.0, 1.0)).is_err());
        let mut a = EllipticSymbol::new(2, 2, 1, (0.0, 1.0)).unwrap();
        assert!(a
            .add_term(vec![2, 1], linalg::identity(1), TimeFunction::constant(1.0))
            .is_err());
        assert!(a
            .add_term(vec![2], linalg::identity(1), TimeFunction::constant(1.0))
            .is_err());
        assert!(a.eval(2.0, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn time_functions() {
        assert_eq!(
            TimeFunction::Polynomial(vec![1.0, 2.0, 3.0]).eval(2.0),
            17.0
        );
        let table = TimeFunction::Table(vec![(0.0, 1.0), (1.0, 3.0)]);
        assert_eq!(table.eval(0.25), 1.5);
        assert_eq!(table.eval(5.0), 3.0);
        assert!(TimeFunction::Exp(0.0).is_constant());
    }

    #[test]
    fn laplacian_is_normally_elliptic() {
        let a = EllipticSymbol::negative_laplacian(2, 1);
        let rep = ellipticity_check(&a, PI / 2.0, &quick()).unwrap();
        assert!(rep.passed);
        // 1/(λ + 1) on the sphere: worst on the imaginary rays, (1+r)/|1+ir| -> √2
        assert!(rep.kappa >= 1.0 && rep.kappa <= 2f64.sqrt() + 1e-12);
        assert!(rep.scaled_kappa <= 2f64.sqrt() + 1e-12);
    }

    #[test]
    fn diagonal_symbol_kappa() {
        let mut a = EllipticSymbol::new(2, 2, 2, (0.0, 1.0)).unwrap();
        let d = Mat::from_diagonal(&crate::linalg::CVec::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(2.0, 0.0),
        ]));
        a.add_term(vec![2, 0], d.clone(), TimeFunction::constant(1.0))
            .unwrap();
        a.add_term(vec![0, 2], d, TimeFunction::constant(1.0))
            .unwrap();
        let rep = ellipticity_check(&a, PI / 4.0, &quick()).unwrap();
        assert!(rep.passed);
        // scalar oracle: max over c ∈ {1,2} of (1+|λ|)/|λ+c| on the π/4 rays
        let mut oracle: f64 = 0.0;
        for lambda in sector_lambdas(PI / 4.0, 0.0, &quick().magnitudes, true) {
            for c in [1.0, 2.0] {
                oracle = oracle.max((1.0 + lambda.norm()) / (lambda + c).norm());
            }
        }
        assert!((rep.kappa - oracle).abs() < 1e-12);
    }

    #[test]
    fn negative_control_reports_witness() {
        let a = EllipticSymbol::negative_laplacian(1, 1).scaled(-1.0);
        let rep = ellipticity_check(&a, 0.1, &quick()).unwrap();
        assert!(!rep.passed);
        assert!(rep.witness.is_some() || rep.kappa > KAPPA_CAP);
    }

    #[test]
    fn omega0_examples() {
        let sampling = quick();
        let lap = EllipticSymbol::negative_laplacian(2, 1);
        let kappa = ellipticity_check(&lap, PI / 2.0, &sampling).unwrap().kappa;
        let sector = Sector::new(PI / 2.0, 0.0, kappa).unwrap();
        assert_eq!(
            omega0_search(&lap, &sector, &sampling, 1e-3, 1e4).unwrap(),
            1e-3
        );
        let plus5 = lap
            .clone()
            .with_term(vec![0, 0], linalg::identity(1), TimeFunction::constant(5.0))
            .unwrap();
        let w = omega0_search(&plus5, &sector, &sampling, 1e-3, 1e4).unwrap();
        assert!(w > 0.0 && w.is_finite());
        // −Δ − 5: the shifted resolvent is singular until ω passes 5
        let minus5 = lap
            .clone()
            .with_term(
                vec![0, 0],
                linalg::identity(1),
                TimeFunction::constant(-5.0),
            )
            .unwrap();
        let w = omega0_search(&minus5, &sector, &sampling, 1e-3, 1e4).unwrap();
        assert!(w > 5.0);
        // scalar oracle at the found ω: (|ξ|²+|λ|)/|λ + |ξ|² − 5| <= 2κ on the samples
        for lambda in sector_lambdas(PI / 2.0, w, &sampling.magnitudes, true) {
            for r in FULL_SYMBOL_RADII {
                let v = (r * r + lambda.norm()) / (lambda + r * r - 5.0).norm();
                assert!(v <= 2.0 * kappa + 1e-12);
            }
        }
        let mut tv = lap.clone();
        tv.set_time_domain((0.0, 1.0));
        let tv = tv
            .with_term(
                vec![0, 0],
                linalg::identity(1),
                TimeFunction::Polynomial(vec![1.0, 1.0]),
            )
            .unwrap();
        assert!(omega0_search(&tv, &sector, &sampling, 1e-3, 1e4).is_ok());
        assert!(matches!(
            omega0_search(&minus5, &sector, &sampling, 1e-3, 1.0),
            Err(Error::ShiftNotFound { .. })
        ));
    }

    #[test]
    fn resolvent_multiplier_values() {
        let a = EllipticSymbol::negative_laplacian(2, 1);
        let sector = Sector::new(PI / 2.0, 0.0, 2f64.sqrt()).unwrap();
        let window = LatticeBox::cube(2, -8, 8).unwrap();
        let m = resolvent_multiplier(&a, &sector, C64::new(1.0, 0.0), 0.0, &window).unwrap();
        assert_eq!(re(&m.eval(&[0, 0])), 1.0);
        assert!((re(&m.eval(&[1, 2])) - 1.0 / 6.0).abs() < 1e-15);
        let (sup, _) = m.sup_norm_on(&window);
        assert!(sup <= 2.0 * sector.kappa);
        assert!(resolvent_multiplier(&a, &sector, C64::new(-1.0, 0.0), 0.0, &window).is_err());
        let shifted = a
            .clone()
            .with_term(
                vec![0, 0],
                linalg::identity(1),
                TimeFunction::constant(-2.0),
            )
            .unwrap();
        match resolvent_multiplier_unchecked(&shifted, C64::new(1.0, 0.0), 0.0, &window) {
            Err(Error::Singular { witness }) => assert!(witness.contains("k=")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn decomposition_counts() {
        assert_eq!(
            additive_decompositions(&[0, 0]),
            vec![AdditiveDecomposition { parts: vec![] }]
        );
        assert_eq!(additive_decompositions(&[1, 0]).len(), 1);
        let z11 = additive_decompositions(&[1, 1]);
        assert_eq!(z11.len(), 3);
        assert!(z11.contains(&AdditiveDecomposition {
            parts: vec![vec![1, 1]]
        }));
        assert!(z11.contains(&AdditiveDecomposition {
            parts: vec![vec![1, 0], vec![0, 1]]
        }));
        assert!(z11.contains(&AdditiveDecomposition {
            parts: vec![vec![0, 1], vec![1, 0]]
        }));
        assert_eq!(additive_decompositions(&[1, 1, 1]).len(), 13);
        assert_eq!(additive_decompositions(&[1, 1, 1, 1]).len(), 75);
        assert_eq!(additive_decompositions(&[2]).len(), 2);
    }

    /// Ordered set partitions of a k-set, counted by brute force over
    /// block-label assignments.
    fn ordered_partitions(k: usize) -> usize {
        let mut count = 0;
        for r in 1..=k {
            let total = r.pow(k as u32);
            for code in 0..total {
                let mut used = vec![false; r];
                let mut c = code;
                for _ in 0..k {
                    used[c % r] = true;
                    c /= r;
                }
                if used.iter().all(|&u| u) {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn counts_match_set_partitions() {
        for k in 1..=4 {
            assert_eq!(
                additive_decompositions(&vec![1; k]).len(),
                ordered_partitions(k)
            );
        }
    }

    #[test]
    fn inverse_difference_scalar_example() {
        let s = OperatorSymbol::scalar(1, 1, Support::All, |k| C64::new(k[0] as f64 + 3.0, 0.0));
        let f = inverse_difference(&s, &[1], &[0]).unwrap();
        let d = direct_inverse_difference(&s, &[1], &[0]).unwrap();
        assert!((re(&f) + 1.0 / 6.0).abs() < 1e-15);
        assert!((re(&d) + 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(
            inverse_difference(&s, &[0], &[4]).unwrap(),
            Mat::from_element(1, 1, C64::new(1.0 / 7.0, 0.0))
        );
    }

    #[test]
    fn inverse_difference_matches_definition() {
        let mut rng = seeded(21);
        for trial in 0..40 {
            let n = 1 + trial % 3;
            let seed: u64 = rng.random();
            let s = OperatorSymbol::new(n, 2, Support::All, move |k| {
                let mut r = seeded(
                    seed ^ k
                        .iter()
                        .fold(7u64, |h, &x| h.wrapping_mul(131).wrapping_add(x as u64)),
                );
                Mat::from_fn(2, 2, |i, j| {
                    complex_normal(&mut r) * 0.3
                        + if i == j {
                            C64::new(2.0, 0.0)
                        } else {
                            C64::new(0.0, 0.0)
                        }
                })
            });
            let alpha: Vec<u32> = (0..n).map(|_| rng.random_range(0..=1)).collect();
            let k: Vec<i64> = (0..n).map(|_| rng.random_range(-5..=5)).collect();
            let f = inverse_difference(&s, &alpha, &k).unwrap();
            let d = direct_inverse_difference(&s, &alpha, &k).unwrap();
            assert!((f - &d).norm() <= 1e-10 * (1.0 + d.norm()));
        }
    }

    #[test]
    fn sweep_is_uniform_for_laplacian() {
        let a = EllipticSymbol::negative_laplacian(2, 1);
        let sector = Sector::new(PI / 2.0, 1e-3, 2f64.sqrt()).unwrap();
        let lambdas = sector.samples(&log_magnitudes(1.0, 1e4, 5));
        let rep = resolvent_bv_sweep(&a, &sector, &lambdas, &[0.0], 8, None).unwrap();
        assert!(rep.uniform, "{} vs {}", rep.refined_cap, rep.cap);
        assert!(rep
            .rows
            .iter()
            .all(|r| r.resolvent_bound <= 2.0 * sector.kappa + 1e-12));
    }

    #[test]
    fn sweep_flags_blow_up_below_omega0() {
        let a = EllipticSymbol::negative_laplacian(1, 1)
            .with_term(vec![0], linalg::identity(1), TimeFunction::constant(-4.5))
            .unwrap();
        let sector = Sector::new(PI / 2.0, 0.0, 2f64.sqrt()).unwrap();
        // λ + k² − 4.5 nearly vanishes at k = 2
        let lambdas = [C64::new(0.5 + 1e-6, 0.0)];
        let rep = resolvent_bv_sweep(&a, &sector, &lambdas, &[0.0], 6, Some(64.0)).unwrap();
        assert!(rep.cap_exceeded);
    }

    #[test]
    fn sweep_scaling_covariance() {
        let a = EllipticSymbol::negative_laplacian(2, 1);
        let a10 = a.scaled(10.0);
        let sector = Sector::new(PI / 2.0, 0.0, 2f64.sqrt()).unwrap();
        for lambda in [C64::new(2.0, 0.0), C64::new(0.0, 30.0), C64::new(5.0, -5.0)] {
            let w = cell_window(2, 8);
            let m = resolvent_multiplier(&a, &sector, lambda, 0.0, &w).unwrap();
            let m10 = resolvent_multiplier(&a10, &sector, lambda * 10.0, 0.0, &w).unwrap();
            let c = bv_certificate(&m, 8);
            let c10 = bv_certificate(&m10, 8);
            assert!((c.sup - c10.sup).abs() <= 1e-12 * c.sup);
        }
    }
}
