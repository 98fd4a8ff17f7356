//! Seeded random test data: complex Gaussians and random trigonometric
//! polynomials on frequency boxes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::lattice::{LatticeBox, LatticePoint};
use crate::linalg::{self, CVec, Mat, C64};
use crate::symbol::{OperatorSymbol, Support};
use crate::transform::TrigPolynomial;

pub type TestRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex standard normal: `E|z|^2 = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVec {
    CVec::from_fn(dim, |_, _| complex_normal(rng))
}

/// I.i.d. complex standard normal coefficients on every point of `support`.
pub fn random_polynomial<R: Rng + ?Sized>(
    rng: &mut R,
    support: &LatticeBox,
    dim: usize,
) -> TrigPolynomial {
    let mut f = TrigPolynomial::zero(support.dim(), dim);
    support.for_each(|k| {
        f.set(LatticePoint::from(k), complex_vector(rng, dim));
    });
    f
}

/// A family of `count` random polynomials on `[-K, K]^n`.
pub fn random_family(
    seed: u64,
    count: usize,
    n: usize,
    k_max: i64,
    dim: usize,
) -> Vec<TrigPolynomial> {
    let mut rng = seeded(seed);
    let support = LatticeBox::cube(n, -k_max, k_max).expect("K >= 0");
    (0..count)
        .map(|_| random_polynomial(&mut rng, &support, dim))
        .collect()
}

/// Random polynomials whose support is a random sub-box of `[-K, K]^n`,
/// mixed with single modes. These probe multiplier norms better than fully
/// populated spectra.
pub fn structured_family(
    seed: u64,
    count: usize,
    n: usize,
    k_max: i64,
    dim: usize,
) -> Vec<TrigPolynomial> {
    let mut rng = seeded(seed);
    (0..count)
        .map(|i| {
            if i % 3 == 0 {
                let k: Vec<i64> = (0..n).map(|_| rng.random_range(-k_max..=k_max)).collect();
                TrigPolynomial::single_mode(k.into(), complex_vector(&mut rng, dim))
            } else {
                let mut lo = Vec::with_capacity(n);
                let mut hi = Vec::with_capacity(n);
                for _ in 0..n {
                    let a = rng.random_range(-k_max..=k_max);
                    let b = rng.random_range(-k_max..=k_max);
                    lo.push(a.min(b));
                    hi.push(a.max(b));
                }
                let b = LatticeBox::new(lo.into(), hi.into()).expect("ordered corners");
                random_polynomial(&mut rng, &b, dim)
            }
        })
        .collect()
}

/// Polynomials supported on short random boxes of side `1..=max_side`
/// inside `[-K, K]^n`; these resolve the transition zones between blocks.
pub fn short_box_family(
    seed: u64,
    count: usize,
    n: usize,
    k_max: i64,
    max_side: i64,
    dim: usize,
) -> Vec<TrigPolynomial> {
    let mut rng = seeded(seed);
    (0..count)
        .map(|_| {
            let lo: Vec<i64> = (0..n).map(|_| rng.random_range(-k_max..=k_max)).collect();
            let hi: Vec<i64> = lo
                .iter()
                .map(|&a| (a + rng.random_range(0..max_side)).min(k_max))
                .collect();
            let b = LatticeBox::new(lo.into(), hi.into()).expect("ordered corners");
            random_polynomial(&mut rng, &b, dim)
        })
        .collect()
}

fn point_hash(seed: u64, k: &[i64]) -> u64 {
    k.iter().fold(seed ^ 0x9e37_79b9_7f4a_7c15, |h, &x| {
        (h ^ x as u64)
            .wrapping_mul(0x0100_0000_01b3)
            .rotate_left(17)
    })
}

/// `M(k) = shift·I + noise·G(k)` with `G(k)` complex Gaussian, drawn from a
/// generator seeded by `(seed, k)` so evaluation is pure.
pub fn hashed_symbol(seed: u64, n: usize, dim: usize, shift: f64, noise: f64) -> OperatorSymbol {
    OperatorSymbol::new(n, dim, Support::All, move |k| {
        let mut rng = seeded(point_hash(seed, k));
        let g = Mat::from_fn(dim, dim, |_, _| complex_normal(&mut rng) * noise);
        g + linalg::scalar(dim, C64::new(shift, 0.0))
    })
}

/// Diagonal symbol on `Z^1` whose entries are step functions with `jumps`
/// random jumps in `[-range, range]`; total variation is finite.
pub fn step_diagonal_symbol(seed: u64, dim: usize, jumps: usize, range: i64) -> OperatorSymbol {
    let mut rng = seeded(seed);
    let entries: Vec<(C64, Vec<(i64, C64)>)> = (0..dim)
        .map(|_| {
            let base = complex_normal(&mut rng);
            let mut steps: Vec<(i64, C64)> = (0..jumps)
                .map(|_| (rng.random_range(-range..=range), complex_normal(&mut rng)))
                .collect();
            steps.sort_by_key(|s| s.0);
            (base, steps)
        })
        .collect();
    OperatorSymbol::diagonal(1, dim, Support::All, move |k| {
        entries
            .iter()
            .map(|(base, steps)| {
                steps
                    .iter()
                    .take_while(|s| s.0 <= k[0])
                    .fold(*base, |acc, s| acc + s.1)
            })
            .collect()
    })
}
