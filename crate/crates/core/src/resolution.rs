//! The smooth dyadic resolution of unity `(φ_j)_{j >= 0}` on `R^n`.
//!
//! A base bump `ϕ_0` equal to 1 on `|ξ| <= 13/8` and an annular bump `ϕ`
//! equal to 1 on `13/8 <= |ξ| <= 13/4` are built from the C^∞ step
//! `h(t) = g(t) / (g(t) + g(1 − t))`, `g(t) = exp(−1/t)`. Dilations
//! `ϕ_j(ξ) = ϕ(ξ / 2^{j−1})` are normalised by `Ψ = Σ_j ϕ_j`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::lattice::euclidean_norm;
use crate::random::seeded;

/// C^∞ step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    fn g(t: f64) -> f64 {
        if t > 0.0 {
            (-1.0 / t).exp()
        } else {
            0.0
        }
    }
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = g(t);
        a / (a + g(1.0 - t))
    }
}

/// Plateau and support radii of the two generating bumps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpRadii {
    /// `ϕ_0 = 1` on `|ξ| <= base_plateau`.
    pub base_plateau: f64,
    /// `ϕ_0 = 0` on `|ξ| >= base_support`.
    pub base_support: f64,
    pub annulus_support_lo: f64,
    pub annulus_plateau_lo: f64,
    pub annulus_plateau_hi: f64,
    pub annulus_support_hi: f64,
}

impl BumpRadii {
    pub const STANDARD: BumpRadii = BumpRadii {
        base_plateau: 13.0 / 8.0,
        base_support: 15.0 / 8.0,
        annulus_support_lo: 3.0 / 2.0,
        annulus_plateau_lo: 13.0 / 8.0,
        annulus_plateau_hi: 13.0 / 4.0,
        annulus_support_hi: 7.0 / 2.0,
    };

    /// Plateaus scaled by 1.2, supports kept inside the dyadic annuli.
    pub const SHIFTED: BumpRadii = BumpRadii {
        base_plateau: 1.95,
        base_support: 1.99,
        annulus_support_lo: 1.8,
        annulus_plateau_lo: 1.95,
        annulus_plateau_hi: 3.9,
        annulus_support_hi: 3.98,
    };

    /// Conditions making the normalised family a resolution of unity with
    /// supports in `Ω_j`.
    pub fn validate(&self) -> Result<()> {
        let r = self;
        let ordered = 0.0 < r.base_plateau
            && r.base_plateau < r.base_support
            && r.base_support <= 2.0
            && 1.0 <= r.annulus_support_lo
            && r.annulus_support_lo < r.annulus_plateau_lo
            && r.annulus_plateau_lo < r.annulus_plateau_hi
            && r.annulus_plateau_hi < r.annulus_support_hi
            && r.annulus_support_hi <= 4.0;
        // Plateaus must cover [0, ∞): ϕ_1 starts before ϕ_0 ends, and the
        // dilated plateaus chain together.
        let covering = r.annulus_plateau_lo <= r.base_plateau
            && 2.0 * r.annulus_plateau_lo <= r.annulus_plateau_hi;
        // supp ϕ_j ∩ supp ϕ_{j+2} = ∅
        let separated = r.annulus_support_hi < 4.0 * r.annulus_support_lo
            && r.base_support < 2.0 * r.annulus_support_lo;
        if ordered && covering && separated {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "bump radii {r:?} do not define a resolution of unity"
            )))
        }
    }
}

/// The normalised family `φ_j = ϕ_j / Ψ`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnityResolution {
    n: usize,
    radii: BumpRadii,
    /// Multiplies the normalised `φ_0`; 1 except for negative controls.
    base_factor: f64,
    /// Highest derivative order exercised by [`verify_resolution`].
    pub smoothness_order: u32,
}

impl UnityResolution {
    pub fn standard(n: usize) -> Self {
        UnityResolution {
            n,
            radii: BumpRadii::STANDARD,
            base_factor: 1.0,
            smoothness_order: 2,
        }
    }

    pub fn shifted(n: usize) -> Self {
        UnityResolution {
            n,
            radii: BumpRadii::SHIFTED,
            base_factor: 1.0,
            smoothness_order: 2,
        }
    }

    pub fn with_radii(n: usize, radii: BumpRadii) -> Result<Self> {
        radii.validate()?;
        Ok(UnityResolution {
            n,
            radii,
            base_factor: 1.0,
            smoothness_order: 2,
        })
    }

    /// A deliberately broken family with `φ_0` multiplied by `factor`.
    pub fn with_scaled_base(mut self, factor: f64) -> Self {
        self.base_factor = factor;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radii(&self) -> &BumpRadii {
        &self.radii
    }

    /// Unnormalised `ϕ_j` as a function of the radius `|ξ|`.
    pub fn unnormalized(&self, j: u32, r: f64) -> f64 {
        let b = &self.radii;
        if j == 0 {
            return 1.0 - smooth_step((r - b.base_plateau) / (b.base_support - b.base_plateau));
        }
        let t = r / (1_u64 << (j - 1)) as f64;
        let up =
            smooth_step((t - b.annulus_support_lo) / (b.annulus_plateau_lo - b.annulus_support_lo));
        let down = 1.0
            - smooth_step(
                (t - b.annulus_plateau_hi) / (b.annulus_support_hi - b.annulus_plateau_hi),
            );
        up * down
    }

    /// Indices `j` whose unnormalised bump can be nonzero at radius `r`.
    pub fn active_blocks(&self, r: f64) -> std::ops::RangeInclusive<u32> {
        if r < 2.0 {
            return 0..=2;
        }
        let t = r.log2().floor() as i64;
        ((t - 2).max(0) as u32)..=(t as u32 + 2)
    }

    /// `Ψ(r) = Σ_j ϕ_j(r)`.
    pub fn psi(&self, r: f64) -> f64 {
        self.active_blocks(r).map(|j| self.unnormalized(j, r)).sum()
    }

    pub fn eval_radial(&self, j: u32, r: f64) -> f64 {
        let u = self.unnormalized(j, r);
        if u == 0.0 {
            return 0.0;
        }
        let v = u / self.psi(r);
        if j == 0 {
            v * self.base_factor
        } else {
            v
        }
    }

    /// `φ_j(ξ)`.
    pub fn eval(&self, j: u32, xi: &[f64]) -> f64 {
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.eval_radial(j, r)
    }

    pub fn eval_lattice(&self, j: u32, k: &[i64]) -> f64 {
        self.eval_radial(j, euclidean_norm(k))
    }

    /// Closed radius interval outside of which `φ_j` vanishes.
    pub fn support_radii(&self, j: u32) -> (f64, f64) {
        if j == 0 {
            (0.0, self.radii.base_support)
        } else {
            let s = (1_u64 << (j - 1)) as f64;
            (
                self.radii.annulus_support_lo * s,
                self.radii.annulus_support_hi * s,
            )
        }
    }
}

/// `Ω_0 = closed ball of radius 2`, `Ω_j = {2^{j−1} <= |x| <= 2^{j+1}}`.
pub fn in_dyadic_annulus(j: u32, r: f64) -> bool {
    if j == 0 {
        r <= 2.0
    } else {
        let s = (1_u64 << (j - 1)) as f64;
        s <= r && r <= 4.0 * s
    }
}

/// `[7·2^{j−3}, 3·2^{j−1}]`, where `φ_j ≡ 1` for `j >= 3`.
pub fn plateau_interval(j: u32) -> (f64, f64) {
    let s = (1_u64 << j) as f64;
    (7.0 * s / 8.0, 3.0 * s / 2.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeRatio {
    pub order: u32,
    pub j: u32,
    /// `max |Δ_h^α φ_j(ξ)| · 2^{j|α|}` over sampled ξ and `|α| = order`.
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResolutionReport {
    pub levels: u32,
    pub samples: usize,
    /// `max |Σ_{j<=J} φ_j(ξ) − 1|`.
    pub partition_deviation: f64,
    /// Values outside `[0, 1]`.
    pub range_violations: usize,
    /// Nonzero values outside `Ω_j`.
    pub support_violations: usize,
    /// `φ_j(ξ) ≠ 1` on the plateau annulus (`j >= 3`).
    pub plateau_violations: usize,
    /// Both neighbours nonzero on a plateau annulus.
    pub separation_violations: usize,
    /// More than three nonzero blocks at one point, or non-consecutive ones.
    pub finiteness_violations: usize,
    pub derivative_ratios: Vec<DerivativeRatio>,
}

pub const PLATEAU_TOLERANCE: f64 = 1e-12;

impl ResolutionReport {
    pub fn violations(&self) -> usize {
        self.range_violations
            + self.support_violations
            + self.plateau_violations
            + self.separation_violations
            + self.finiteness_violations
    }

    pub fn max_derivative_ratio(&self, order: u32) -> f64 {
        self.derivative_ratios
            .iter()
            .filter(|d| d.order == order)
            .map(|d| d.max_ratio)
            .fold(0.0, f64::max)
    }

    /// CSV rows: check name, max deviation, violation count.
    pub fn csv_rows(&self) -> Vec<(String, f64, usize)> {
        let mut rows = vec![
            ("partition".to_string(), self.partition_deviation, 0),
            ("range".to_string(), 0.0, self.range_violations),
            ("support".to_string(), 0.0, self.support_violations),
            ("plateau".to_string(), 0.0, self.plateau_violations),
            ("separation".to_string(), 0.0, self.separation_violations),
            (
                "local_finiteness".to_string(),
                0.0,
                self.finiteness_violations,
            ),
        ];
        for d in &self.derivative_ratios {
            rows.push((
                format!("derivative_order{}_j{}", d.order, d.j),
                d.max_ratio,
                0,
            ));
        }
        rows
    }
}

fn random_direction<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn check_point(res: &UnityResolution, levels: u32, xi: &[f64], report: &mut ResolutionReport) {
    let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    let values: Vec<f64> = (0..=levels + 2).map(|j| res.eval(j, xi)).collect();
    let total: f64 = values[..=levels as usize].iter().sum();
    report.partition_deviation = report.partition_deviation.max((total - 1.0).abs());

    let mut nonzero = Vec::new();
    for (j, &v) in values.iter().enumerate() {
        let j = j as u32;
        if !(0.0..=1.0).contains(&v) {
            report.range_violations += 1;
        }
        if v != 0.0 {
            nonzero.push(j);
            if !in_dyadic_annulus(j, r) {
                report.support_violations += 1;
            }
        }
    }
    if nonzero.len() > 3 || nonzero.windows(2).any(|w| w[1] != w[0] + 1) {
        report.finiteness_violations += 1;
    }
    for j in 3..=levels {
        let (a, b) = plateau_interval(j);
        if a <= r && r <= b {
            if (values[j as usize] - 1.0).abs() > PLATEAU_TOLERANCE {
                report.plateau_violations += 1;
            }
            if values[j as usize - 1] != 0.0 && values[j as usize + 1] != 0.0 {
                report.separation_violations += 1;
            }
        }
    }
}

/// Central finite-difference estimate of `∂^α φ_j(ξ)` for `|α| <= 2`.
fn finite_difference(res: &UnityResolution, j: u32, xi: &[f64], axes: &[usize], h: f64) -> f64 {
    let f = |shift: &[(usize, f64)]| {
        let mut x = xi.to_vec();
        for &(axis, d) in shift {
            x[axis] += d;
        }
        res.eval(j, &x)
    };
    match axes {
        [a] => (f(&[(*a, h)]) - f(&[(*a, -h)])) / (2.0 * h),
        [a, b] if a == b => (f(&[(*a, h)]) - 2.0 * f(&[]) + f(&[(*a, -h)])) / (h * h),
        [a, b] => {
            (f(&[(*a, h), (*b, h)]) - f(&[(*a, h), (*b, -h)]) - f(&[(*a, -h), (*b, h)])
                + f(&[(*a, -h), (*b, -h)]))
                / (4.0 * h * h)
        }
        _ => unreachable!("derivative orders above 2 are not sampled"),
    }
}

/// Check partition, range, support, plateau, separation and finiteness on
/// `samples` random points with
/// `|ξ| <= 2^{levels−1}`, plus dense radial sweeps of every plateau.
pub fn verify_resolution(
    res: &UnityResolution,
    levels: u32,
    samples: usize,
    seed: u64,
) -> Result<ResolutionReport> {
    if levels < 3 {
        return Err(Error::invalid(format!(
            "verification needs J >= 3, got {levels}"
        )));
    }
    let n = res.n();
    let mut rng = seeded(seed);
    let mut report = ResolutionReport {
        levels,
        samples,
        partition_deviation: 0.0,
        range_violations: 0,
        support_violations: 0,
        plateau_violations: 0,
        separation_violations: 0,
        finiteness_violations: 0,
        derivative_ratios: Vec::new(),
    };
    let r_max = (1_u64 << (levels - 1)) as f64;
    check_point(res, levels, &vec![0.0; n], &mut report);
    for i in 0..samples {
        // half log-uniform to reach every block, half uniform in the ball
        let r = if i % 2 == 0 {
            r_max * 2f64.powf(-rng.random_range(0.0..(levels as f64 + 3.0)))
        } else {
            r_max * rng.random_range(0.0..1.0_f64).powf(1.0 / n as f64)
        };
        let xi: Vec<f64> = random_direction(&mut rng, n)
            .into_iter()
            .map(|x| x * r)
            .collect();
        check_point(res, levels, &xi, &mut report);
    }
    for j in 3..levels {
        let (a, b) = plateau_interval(j);
        for t in 0..=64 {
            let r = a + (b - a) * t as f64 / 64.0;
            let xi: Vec<f64> = random_direction(&mut rng, n)
                .into_iter()
                .map(|x| x * r)
                .collect();
            check_point(res, levels, &xi, &mut report);
        }
    }

    for order in 1..=res.smoothness_order.min(2) {
        let multi_indices: Vec<Vec<usize>> = if order == 1 {
            (0..n).map(|a| vec![a]).collect()
        } else {
            (0..n)
                .flat_map(|a| (a..n).map(move |b| vec![a, b]))
                .collect()
        };
        for j in 0..levels.min(8) + 1 {
            let (lo, hi) = res.support_radii(j);
            let h = 1e-3 * (1_u64 << j) as f64;
            let mut max_ratio: f64 = 0.0;
            // dense radial sweeps along an axis and the diagonal; the profile
            // is radial, so these directions see every radial feature
            let diagonal = 1.0 / (n as f64).sqrt();
            for t in 0..=1024 {
                let r = lo + (hi - lo) * t as f64 / 1024.0;
                for xi in [
                    (0..n)
                        .map(|i| if i == 0 { r } else { 0.0 })
                        .collect::<Vec<f64>>(),
                    vec![r * diagonal; n],
                ] {
                    for axes in &multi_indices {
                        let d = finite_difference(res, j, &xi, axes, h).abs();
                        max_ratio = max_ratio.max(d * 2f64.powi((j * order) as i32));
                    }
                }
            }
            report.derivative_ratios.push(DerivativeRatio {
                order,
                j,
                max_ratio,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_are_admissible() {
        BumpRadii::STANDARD.validate().unwrap();
        BumpRadii::SHIFTED.validate().unwrap();
        let mut bad = BumpRadii::STANDARD;
        bad.annulus_support_hi = 6.5;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn eval_examples() {
        let res = UnityResolution::standard(3);
        assert_eq!(res.eval(0, &[0.0, 0.0, 0.0]), 1.0);
        assert_eq!(res.eval(5, &[4.0, 0.0, 0.0]), 0.0);
        assert_eq!(res.eval(4, &[0.0, 14.0, 0.0]), 1.0);
    }

    #[test]
    fn exact_plateaus() {
        let res = UnityResolution::standard(2);
        for j in 3..=8 {
            let (a, b) = plateau_interval(j);
            for t in 0..=200 {
                let r = a + (b - a) * t as f64 / 200.0;
                assert!((res.eval_radial(j, r) - 1.0).abs() <= 1e-12, "j={j} r={r}");
                assert_eq!(res.eval_radial(j - 1, r), 0.0);
                assert_eq!(res.eval_radial(j + 1, r), 0.0);
            }
        }
    }

    #[test]
    fn dilation_covariance_of_bumps() {
        let res = UnityResolution::standard(1);
        for j in 2..10 {
            for t in 0..500 {
                let r = 0.05 * t as f64 * (1u64 << j) as f64 / 10.0;
                assert_eq!(res.unnormalized(j + 1, r), res.unnormalized(j, r / 2.0));
            }
        }
    }

    #[test]
    fn psi_is_at_least_one() {
        for res in [UnityResolution::standard(1), UnityResolution::shifted(1)] {
            for t in 0..20_000 {
                let r = t as f64 * 0.013;
                assert!(res.psi(r) >= 1.0 - 1e-15, "r={r}");
            }
        }
    }

    #[test]
    fn active_blocks_cover_support() {
        let res = UnityResolution::shifted(1);
        for t in 0..50_000 {
            let r = t as f64 * 0.021;
            let active = res.active_blocks(r);
            for j in 0..20 {
                if res.unnormalized(j, r) != 0.0 {
                    assert!(active.contains(&j), "r={r} j={j}");
                }
            }
        }
    }

    #[test]
    fn standard_family_passes_verification() {
        let rep = verify_resolution(&UnityResolution::standard(2), 8, 4000, 3).unwrap();
        assert_eq!(rep.violations(), 0, "{rep:?}");
        assert!(rep.partition_deviation <= 1e-12);
    }

    #[test]
    fn broken_family_is_detected() {
        let res = UnityResolution::standard(2).with_scaled_base(0.9);
        let rep = verify_resolution(&res, 6, 2000, 3).unwrap();
        assert!(rep.partition_deviation > 0.05);
    }

    #[test]
    fn derivative_ratios_do_not_grow_with_j() {
        let rep = verify_resolution(&UnityResolution::standard(2), 8, 100, 5).unwrap();
        for order in 1..=2 {
            let ratios: Vec<f64> = rep
                .derivative_ratios
                .iter()
                .filter(|d| d.order == order && d.j >= 2)
                .map(|d| d.max_ratio)
                .collect();
            let max = ratios.iter().cloned().fold(0.0, f64::max);
            let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(max / min < 1.5, "order {order}: {ratios:?}");
            assert!(max < 1e4);
        }
    }

    #[test]
    fn rejects_small_levels() {
        assert!(verify_resolution(&UnityResolution::standard(1), 2, 10, 0).is_err());
    }
}
