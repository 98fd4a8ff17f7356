//! Vector-valued trigonometric polynomials `f = Σ_k e_k ⊗ x_k` on `T^n`,
//! their evaluation on uniform grids, `L^p` norms with respect to the
//! normalised measure `(2π)^{-n} dx`, and multiplier application.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::lattice::{euclidean_norm, LatticePoint};
use crate::linalg::{CVec, C64};
use crate::symbol::OperatorSymbol;

/// A finite family `{k ↦ x_k ∈ C^m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    n: usize,
    dim: usize,
    coeffs: BTreeMap<LatticePoint, CVec>,
}

impl TrigPolynomial {
    pub fn zero(n: usize, dim: usize) -> Self {
        assert!(n >= 1 && dim >= 1);
        TrigPolynomial {
            n,
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    /// `e_k ⊗ x`.
    pub fn single_mode(k: LatticePoint, x: CVec) -> Self {
        let mut f = TrigPolynomial::zero(k.dim(), x.len());
        f.set(k, x);
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Set the coefficient at `k`; exact zeros are not stored.
    pub fn set(&mut self, k: LatticePoint, x: CVec) {
        assert_eq!(k.dim(), self.n, "frequency dimension");
        assert_eq!(x.len(), self.dim, "coefficient dimension");
        if x.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, x);
        }
    }

    pub fn add_mode(&mut self, k: LatticePoint, x: &CVec) {
        let cur = self.coefficient(&k);
        self.set(k, cur + x);
    }

    /// `f̂(k)`: the stored coefficient, zero off the support.
    pub fn coefficient(&self, k: &[i64]) -> CVec {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| CVec::zeros(self.dim))
    }

    /// Nonzero modes in lexicographic order.
    pub fn modes(&self) -> impl Iterator<Item = (&LatticePoint, &CVec)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `max_k |k|_∞` over the support.
    pub fn max_frequency(&self) -> i64 {
        self.coeffs
            .keys()
            .flat_map(|k| k.iter().map(|x| x.abs()))
            .max()
            .unwrap_or(0)
    }

    /// `max_k |k|` (Euclidean) over the support.
    pub fn max_radius(&self) -> f64 {
        self.coeffs
            .keys()
            .map(|k| euclidean_norm(k))
            .fold(0.0, f64::max)
    }

    /// `f(x) = Σ_k e^{i k·x} x_k`.
    pub fn evaluate(&self, x: &[f64]) -> CVec {
        let mut out = CVec::zeros(self.dim);
        for (k, c) in &self.coeffs {
            let phase: f64 = k.iter().zip(x).map(|(ki, xi)| *ki as f64 * xi).sum();
            out += c * C64::from_polar(1.0, phase);
        }
        out
    }

    /// Apply `g(k, x_k)` to every coefficient.
    pub fn map_modes(&self, g: impl Fn(&LatticePoint, &CVec) -> CVec) -> TrigPolynomial {
        let mut out = TrigPolynomial::zero(self.n, self.dim);
        for (k, c) in &self.coeffs {
            out.set(k.clone(), g(k, c));
        }
        out
    }

    pub fn scale(&self, c: C64) -> TrigPolynomial {
        self.map_modes(|_, x| x * c)
    }

    pub fn add(&self, other: &TrigPolynomial) -> Result<TrigPolynomial> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_mode(k.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &TrigPolynomial) -> Result<TrigPolynomial> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Keep only the modes in `keep`.
    pub fn filter(&self, keep: impl Fn(&LatticePoint) -> bool) -> TrigPolynomial {
        let mut out = TrigPolynomial::zero(self.n, self.dim);
        for (k, c) in &self.coeffs {
            if keep(k) {
                out.set(k.clone(), c.clone());
            }
        }
        out
    }

    /// `(Σ_k ‖x_k‖²)^{1/2}`, the Parseval value of the `L²` norm.
    pub fn parseval_norm(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| c.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// `max_k ‖x_k‖`.
    pub fn max_coefficient_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn check_shape(&self, other: &TrigPolynomial) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

pub fn fourier_coefficient(f: &TrigPolynomial, k: &[i64]) -> CVec {
    f.coefficient(k)
}

/// Build a polynomial from `(k, x_k)` pairs; repeated frequencies add up.
pub fn synthesize<I>(n: usize, dim: usize, coeffs: I) -> Result<TrigPolynomial>
where
    I: IntoIterator<Item = (LatticePoint, CVec)>,
{
    let mut f = TrigPolynomial::zero(n, dim);
    for (k, x) in coeffs {
        if k.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: k.dim(),
            });
        }
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.len(),
            });
        }
        f.add_mode(k, &x);
    }
    Ok(f)
}

/// Samples of an `E`-valued function on the grid `x_m = 2π m / N`,
/// row-major in `m`, with the `dim` components of each sample contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub n: usize,
    pub dim: usize,
    pub points_per_axis: usize,
    pub values: Vec<C64>,
}

fn fft_along_axes(data: &mut [C64], n: usize, npts: usize, dim: usize, direction: FftDirection) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft(npts, direction);
    let total = npts.pow(n as u32);
    let mut line = vec![C64::new(0.0, 0.0); npts];
    let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..n {
        let stride = npts.pow((n - 1 - axis) as u32);
        for c in 0..dim {
            for start in 0..total {
                if !(start / stride).is_multiple_of(npts) {
                    continue;
                }
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[(start + i * stride) * dim + c];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[(start + i * stride) * dim + c] = *v;
                }
            }
        }
    }
}

impl GridFunction {
    /// Exact samples of `f` on an `N^n` grid. Frequencies are folded modulo
    /// `N`, which is exact at the grid points for any `N`.
    pub fn from_polynomial(f: &TrigPolynomial, npts: usize) -> Result<GridFunction> {
        if npts == 0 {
            return Err(Error::invalid("grid needs at least one point per axis"));
        }
        let n = f.n();
        let dim = f.dim();
        let total = npts
            .checked_pow(n as u32)
            .filter(|t| t.saturating_mul(dim) <= 1 << 26)
            .ok_or_else(|| Error::invalid(format!("grid {npts}^{n} is too large")))?;
        let mut data = vec![C64::new(0.0, 0.0); total * dim];
        for (k, c) in f.modes() {
            let idx = k.iter().fold(0usize, |acc, &ki| {
                acc * npts + ki.rem_euclid(npts as i64) as usize
            });
            for (comp, z) in c.iter().enumerate() {
                data[idx * dim + comp] += z;
            }
        }
        fft_along_axes(&mut data, n, npts, dim, FftDirection::Inverse);
        Ok(GridFunction {
            n,
            dim,
            points_per_axis: npts,
            values: data,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample(&self, idx: usize) -> &[C64] {
        &self.values[idx * self.dim..(idx + 1) * self.dim]
    }

    /// Grid coordinates of sample `idx`.
    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for axis in (0..self.n).rev() {
            x[axis] = 2.0 * PI * (idx % self.points_per_axis) as f64 / self.points_per_axis as f64;
            idx /= self.points_per_axis;
        }
        x
    }

    fn pointwise_norms(&self) -> Vec<f64> {
        self.values
            .chunks(self.dim)
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }

    /// Rectangle-rule `(N^{-n} Σ_m ‖f(x_m)‖^p)^{1/p}`; grid max for `p = ∞`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let norms = self.pointwise_norms();
        if p.is_infinite() {
            return norms.into_iter().fold(0.0, f64::max);
        }
        let powered: Vec<f64> = norms.into_iter().map(|v| v.powf(p)).collect();
        (crate::par::pairwise_sum(&powered) / powered.len() as f64).powf(1.0 / p)
    }

    /// Discrete Fourier coefficients on the grid's frequency window.
    pub fn dft(&self) -> Vec<C64> {
        let mut data = self.values.clone();
        fft_along_axes(
            &mut data,
            self.n,
            self.points_per_axis,
            self.dim,
            FftDirection::Forward,
        );
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
        data
    }

    /// Discrete coefficient at frequency `k` (aliased modulo `N`).
    pub fn dft_coefficient(&self, k: &[i64]) -> CVec {
        let data = self.dft();
        let npts = self.points_per_axis as i64;
        let idx = k.iter().fold(0usize, |acc, &ki| {
            acc * self.points_per_axis + ki.rem_euclid(npts) as usize
        });
        CVec::from_iterator(
            self.dim,
            data[idx * self.dim..(idx + 1) * self.dim].iter().cloned(),
        )
    }
}

/// Result of an automatically resolved `L^p` quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpNorm {
    pub value: f64,
    /// Grid points per axis used for the final value.
    pub points_per_axis: usize,
}

/// Relative change below which adaptive refinement stops.
pub const QUADRATURE_TOLERANCE: f64 = 1e-8;

const MAX_GRID_POINTS: usize = 1 << 22;

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!(
            "L^p exponent must satisfy p >= 1, got {p}"
        )));
    }
    Ok(())
}

/// `‖f‖_{L^p}` by the rectangle rule on a fixed `N^n` grid.
pub fn lp_norm_fixed(f: &TrigPolynomial, p: f64, npts: usize) -> Result<f64> {
    check_exponent(p)?;
    if f.is_empty() {
        return Ok(0.0);
    }
    Ok(GridFunction::from_polynomial(f, npts)?.lp_norm(p))
}

fn is_even_integer(p: f64) -> bool {
    p.fract() == 0.0 && (p as u64).is_multiple_of(2) && p <= 64.0
}

/// `‖f‖_{L^p}` with the grid chosen automatically.
///
/// * even integer `p`: `N = p K + 1`, exact for band-limited `‖f‖^p`;
/// * `p = ∞`: grid maximum with `N = 8K + 1` (a lower bound);
/// * otherwise: `N` doubles until successive values agree to
///   [`QUADRATURE_TOLERANCE`].
pub fn lp_norm(f: &TrigPolynomial, p: f64) -> Result<LpNorm> {
    check_exponent(p)?;
    if f.is_empty() {
        return Ok(LpNorm {
            value: 0.0,
            points_per_axis: 1,
        });
    }
    let k = f.max_frequency() as usize;
    if p.is_infinite() {
        let npts = 8 * k + 1;
        return Ok(LpNorm {
            value: lp_norm_fixed(f, p, npts)?,
            points_per_axis: npts,
        });
    }
    if is_even_integer(p) {
        let npts = p as usize * k + 1;
        return Ok(LpNorm {
            value: lp_norm_fixed(f, p, npts)?,
            points_per_axis: npts,
        });
    }
    let n = f.n() as u32;
    let mut npts = (2 * k + 2).max(8).next_power_of_two();
    let mut prev = lp_norm_fixed(f, p, npts)?;
    loop {
        let next_pts = npts * 2;
        if next_pts.pow(n) > MAX_GRID_POINTS {
            return Ok(LpNorm {
                value: prev,
                points_per_axis: npts,
            });
        }
        let next = lp_norm_fixed(f, p, next_pts)?;
        if (next - prev).abs() <= QUADRATURE_TOLERANCE * next.abs().max(f64::MIN_POSITIVE) {
            return Ok(LpNorm {
                value: next,
                points_per_axis: next_pts,
            });
        }
        prev = next;
        npts = next_pts;
    }
}

/// `S_M f = Σ_k e_k ⊗ M(k) f̂(k)`.
pub fn apply_multiplier(m: &OperatorSymbol, f: &TrigPolynomial) -> Result<TrigPolynomial> {
    if m.n() != f.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            found: m.n(),
        });
    }
    if m.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: m.dim(),
        });
    }
    Ok(f.map_modes(|k, x| m.eval(k) * x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeBox;
    use crate::random::{complex_vector, random_polynomial, seeded};
    use crate::symbol::riesz_symbol;

    fn v(xs: &[f64]) -> CVec {
        CVec::from_iterator(xs.len(), xs.iter().map(|&x| C64::new(x, 0.0)))
    }

    #[test]
    fn coefficient_lookup() {
        let x = v(&[1.0, -2.0]);
        let f = TrigPolynomial::single_mode([2, -1].into(), x.clone());
        assert_eq!(fourier_coefficient(&f, &[2, -1]), x);
        assert_eq!(fourier_coefficient(&f, &[2, 1]), CVec::zeros(2));
        let z = TrigPolynomial::zero(2, 2);
        assert_eq!(fourier_coefficient(&z, &[0, 0]), CVec::zeros(2));
    }

    #[test]
    fn discrete_transform_recovers_coefficients() {
        let mut rng = seeded(4);
        let support = LatticeBox::cube(2, -3, 3).unwrap();
        let f = random_polynomial(&mut rng, &support, 2);
        let grid = GridFunction::from_polynomial(&f, 2 * 3 + 2).unwrap();
        support.for_each(|k| {
            let d = grid.dft_coefficient(k) - f.coefficient(k);
            assert!(d.norm() < 1e-12);
        });
    }

    #[test]
    fn grid_matches_direct_evaluation() {
        let mut rng = seeded(5);
        let support = LatticeBox::new([-2, 0].into(), [3, 4].into()).unwrap();
        let f = random_polynomial(&mut rng, &support, 3);
        let grid = GridFunction::from_polynomial(&f, 7).unwrap();
        for idx in 0..grid.len() {
            let direct = f.evaluate(&grid.point(idx));
            let sample = CVec::from_iterator(3, grid.sample(idx).iter().cloned());
            assert!((direct - sample).norm() < 1e-12);
        }
    }

    #[test]
    fn synthesize_examples() {
        let x = v(&[0.5, 2.0]);
        let f = synthesize(1, 2, vec![(LatticePoint::zero(1), x.clone())]).unwrap();
        assert!((f.evaluate(&[1.3]) - &x).norm() < 1e-15);
        let g = synthesize(
            1,
            2,
            vec![([1].into(), x.clone()), ([-4].into(), x.clone())],
        )
        .unwrap();
        assert!((g.evaluate(&[0.0]) - &x * C64::new(2.0, 0.0)).norm() < 1e-15);
        let back = synthesize(1, 2, g.modes().map(|(k, c)| (k.clone(), c.clone()))).unwrap();
        assert_eq!(back, g);
        assert!(synthesize(2, 2, vec![([1].into(), x)]).is_err());
    }

    #[test]
    fn lp_norm_examples() {
        let x = v(&[3.0, 4.0]);
        let c = TrigPolynomial::single_mode(LatticePoint::zero(2), x.clone());
        for p in [1.0, 1.5, 2.0, 3.0, 4.0, f64::INFINITY] {
            assert!((lp_norm(&c, p).unwrap().value - 5.0).abs() < 1e-12, "p={p}");
        }
        let e = TrigPolynomial::single_mode([3, -1].into(), x.clone());
        assert!((lp_norm(&e, 2.0).unwrap().value - 5.0).abs() < 1e-12);
        let two = e
            .add(&TrigPolynomial::single_mode([0, 2].into(), x))
            .unwrap();
        assert!((lp_norm(&two, 2.0).unwrap().value - 5.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(lp_norm(&two, 0.5).is_err());
    }

    #[test]
    fn even_exponent_quadrature_is_exact() {
        let mut rng = seeded(8);
        let support = LatticeBox::cube(1, -6, 6).unwrap();
        for _ in 0..5 {
            let f = random_polynomial(&mut rng, &support, 2);
            for p in [2.0, 4.0] {
                let auto = lp_norm(&f, p).unwrap();
                let refined = lp_norm_fixed(&f, p, 257).unwrap();
                assert!((auto.value - refined).abs() <= 1e-12 * refined);
            }
        }
    }

    #[test]
    fn adaptive_quadrature_converges() {
        let mut rng = seeded(9);
        let f = random_polynomial(&mut rng, &LatticeBox::cube(1, -5, 5).unwrap(), 2);
        let auto = lp_norm(&f, 3.0).unwrap();
        let refined = lp_norm_fixed(&f, 3.0, 4096).unwrap();
        assert!((auto.value - refined).abs() <= 1e-7 * refined);
    }

    #[test]
    fn riesz_keeps_nonnegative_modes() {
        let x = v(&[1.0]);
        let k = LatticePoint::from([2, 0]);
        let f = TrigPolynomial::single_mode(k.neg(), x.clone())
            .add(&TrigPolynomial::single_mode(k.clone(), x.clone()))
            .unwrap();
        let g = apply_multiplier(&riesz_symbol(2, 1), &f).unwrap();
        assert_eq!(g, TrigPolynomial::single_mode(k, x));
    }

    #[test]
    fn multiplier_acts_coefficientwise() {
        let mut rng = seeded(10);
        let f = random_polynomial(&mut rng, &LatticeBox::cube(2, -2, 2).unwrap(), 2);
        let m = OperatorSymbol::new(2, 2, crate::symbol::Support::All, |k| {
            crate::linalg::Mat::from_fn(2, 2, |i, j| {
                C64::new((k[0] + i as i64) as f64, (k[1] * j as i64) as f64)
            })
        });
        let g = apply_multiplier(&m, &f).unwrap();
        LatticeBox::cube(2, -2, 2).unwrap().for_each(|k| {
            assert_eq!(g.coefficient(k), m.eval(k) * f.coefficient(k));
        });
        let id = apply_multiplier(&OperatorSymbol::identity(2, 2), &f).unwrap();
        assert_eq!(id, f);
        assert!(apply_multiplier(&OperatorSymbol::identity(2, 3), &f).is_err());
        let _ = complex_vector(&mut rng, 1);
    }
}
