//! Periodic Besov norms of trigonometric polynomials and the multiplier
//! experiments built on them.
//!
//! For a trigonometric polynomial only finitely many blocks are nonzero, so
//! the norm `(Σ_j 2^{sjq} ‖F⁻¹(φ_j f̂)‖_p^q)^{1/q}` is an exact finite sum once
//! the truncation level `J` covers the spectrum.

use crate::error::{Error, Result};
use crate::lattice::cell_index_of;
use crate::par;
use crate::resolution::UnityResolution;
use crate::symbol::{bv_certificate, BvCertificate, OperatorSymbol};
use crate::transform::{apply_multiplier, lp_norm, TrigPolynomial};

/// `(s, p, q)` and an optional fixed truncation level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    /// Highest block index; chosen from the input when `None`.
    pub levels: Option<u32>,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self> {
        let params = BesovParams {
            s,
            p,
            q,
            levels: None,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_levels(mut self, levels: u32) -> Result<Self> {
        self.levels = Some(levels);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::invalid(format!(
                "smoothness s must be finite, got {}",
                self.s
            )));
        }
        if self.p.is_nan() || self.p <= 1.0 {
            return Err(Error::invalid(format!(
                "Besov exponent p must satisfy p > 1, got {}",
                self.p
            )));
        }
        if self.q.is_nan() || self.q < 1.0 {
            return Err(Error::invalid(format!(
                "Besov exponent q must satisfy q >= 1, got {}",
                self.q
            )));
        }
        if let Some(j) = self.levels {
            if j < 3 {
                return Err(Error::invalid(format!(
                    "truncation level must be >= 3, got {j}"
                )));
            }
        }
        Ok(())
    }
}

/// Smallest `J >= 3` with `max_k |k| < 2^{J−1}`, so every block above `J`
/// vanishes on the spectrum of `f`.
pub fn required_levels(f: &TrigPolynomial) -> u32 {
    let radius = f.max_radius();
    let mut j = 3;
    while (1_u64 << (j - 1)) as f64 <= radius {
        j += 1;
    }
    j
}

/// Default truncation `J = ⌈log₂ K⌉ + 2` for max frequency `K`, raised if
/// the Euclidean radius of the spectrum needs more.
pub fn default_levels(f: &TrigPolynomial) -> u32 {
    let k = f.max_frequency().max(1) as u64;
    let ceil_log = 64 - (k - 1).leading_zeros();
    (ceil_log + 2).max(required_levels(f))
}

fn levels_for(f: &TrigPolynomial, params: &BesovParams) -> Result<u32> {
    params.validate()?;
    let required = required_levels(f);
    match params.levels {
        Some(given) if given < required => Err(Error::Truncation { required, given }),
        Some(given) => Ok(given),
        None => Ok(default_levels(f)),
    }
}

/// `F⁻¹(φ_j f̂) = Σ_k e_k ⊗ φ_j(k) f̂(k)`.
pub fn lp_block(f: &TrigPolynomial, res: &UnityResolution, j: u32) -> TrigPolynomial {
    f.map_modes(|k, x| x * crate::linalg::C64::new(res.eval_lattice(j, k), 0.0))
}

/// `‖F⁻¹(φ_j f̂)‖_p` for `j = 0..=J`.
pub fn block_norms(
    f: &TrigPolynomial,
    p: f64,
    levels: u32,
    res: &UnityResolution,
) -> Result<Vec<f64>> {
    if res.n() != f.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            found: res.n(),
        });
    }
    par::map_range(levels as usize + 1, |j| {
        let block = lp_block(f, res, j as u32);
        lp_norm(&block, p).map(|v| v.value)
    })
    .into_iter()
    .collect()
}

/// `ℓ^q` aggregation of `2^{sj} b_j`.
pub fn aggregate(blocks: &[f64], s: f64, q: f64) -> f64 {
    let weighted: Vec<f64> = blocks
        .iter()
        .enumerate()
        .map(|(j, b)| 2f64.powf(s * j as f64) * b)
        .collect();
    if q.is_infinite() {
        return weighted.into_iter().fold(0.0, f64::max);
    }
    let powered: Vec<f64> = weighted.iter().map(|w| w.powf(q)).collect();
    par::pairwise_sum(&powered).powf(1.0 / q)
}

/// `‖f‖_{B^s_{p,q}}` with respect to `res`.
pub fn besov_norm(f: &TrigPolynomial, params: &BesovParams, res: &UnityResolution) -> Result<f64> {
    let levels = levels_for(f, params)?;
    Ok(aggregate(
        &block_norms(f, params.p, levels, res)?,
        params.s,
        params.q,
    ))
}

/// Empirical equivalence bracket `(min, max)` of `‖f‖_{res1} / ‖f‖_{res2}`.
pub fn norm_equivalence_experiment(
    fs: &[TrigPolynomial],
    params: &BesovParams,
    res1: &UnityResolution,
    res2: &UnityResolution,
) -> Result<(f64, f64)> {
    if fs.is_empty() {
        return Err(Error::invalid(
            "norm equivalence needs at least one function",
        ));
    }
    let ratios: Vec<Option<f64>> = par::map(fs, |f| -> Result<Option<f64>> {
        if f.is_empty() {
            return Ok(None);
        }
        Ok(Some(
            besov_norm(f, params, res1)? / besov_norm(f, params, res2)?,
        ))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let ratios: Vec<f64> = ratios.into_iter().flatten().collect();
    if ratios.is_empty() {
        return Err(Error::invalid("every function in the family is zero"));
    }
    Ok(ratios
        .iter()
        .fold((f64::INFINITY, 0.0), |(lo, hi), &r| (lo.min(r), hi.max(r))))
}

/// `‖S_M f‖_B / ‖f‖_B` (zero for `f = 0`).
pub fn multiplier_ratio(
    m: &OperatorSymbol,
    f: &TrigPolynomial,
    params: &BesovParams,
    res: &UnityResolution,
) -> Result<f64> {
    if f.is_empty() {
        return Ok(0.0);
    }
    let levels = levels_for(f, params)?;
    let fixed = BesovParams {
        levels: Some(levels),
        ..*params
    };
    let denom = besov_norm(f, &fixed, res)?;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(besov_norm(&apply_multiplier(m, f)?, &fixed, res)? / denom)
}

/// Cells needed to cover the spectra of every function in `fs`.
pub fn covering_cell_index(fs: &[TrigPolynomial]) -> u64 {
    fs.iter()
        .flat_map(|f| f.modes().map(|(k, _)| cell_index_of(k)))
        .max()
        .unwrap_or(0)
}

/// Measured multiplier constant against the bounded-variation certificate.
#[derive(Clone, Debug)]
pub struct MultiplierCertificate {
    /// `sup_f ‖S_M f‖_B / ‖f‖_B`.
    pub operator_ratio: f64,
    /// Index in the family attaining `operator_ratio`.
    pub argmax: usize,
    /// Same supremum over the first half of the family.
    pub half_sample_ratio: f64,
    pub bv: BvCertificate,
    /// `operator_ratio / bv.sup` (0 when the certificate vanishes).
    pub empirical_constant: f64,
    /// The supremum moved by more than 10% between the half and the full sample.
    pub grows_with_sample: bool,
}

pub fn multiplier_bound_certificate(
    m: &OperatorSymbol,
    fs: &[TrigPolynomial],
    params: &BesovParams,
    res: &UnityResolution,
) -> Result<MultiplierCertificate> {
    if fs.is_empty() {
        return Err(Error::invalid(
            "multiplier certificate needs at least one function",
        ));
    }
    let ratios: Vec<f64> = par::map(fs, |f| multiplier_ratio(m, f, params, res))
        .into_iter()
        .collect::<Result<_>>()?;
    let (argmax, operator_ratio) = ratios.iter().copied().enumerate().fold(
        (0, 0.0),
        |best, (i, r)| if r > best.1 { (i, r) } else { best },
    );
    let half = ratios[..fs.len().div_ceil(2)]
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let bv = bv_certificate(m, covering_cell_index(fs));
    let empirical_constant = if bv.sup > 0.0 {
        operator_ratio / bv.sup
    } else {
        0.0
    };
    Ok(MultiplierCertificate {
        operator_ratio,
        argmax,
        half_sample_ratio: half,
        grows_with_sample: operator_ratio > 1.1 * half,
        bv,
        empirical_constant,
    })
}

/// `sup_f ‖Σ_{k ∈ [0, β]} e_k ⊗ f̂(k)‖_p / ‖f‖_p` with `β` the upper corner
/// of the common frequency cube of the family.
pub fn riesz_box_experiment(fs: &[TrigPolynomial], p: f64) -> Result<f64> {
    if p.is_nan() || p <= 1.0 || p.is_infinite() {
        return Err(Error::invalid(format!(
            "Riesz box experiment needs 1 < p < ∞, got {p}"
        )));
    }
    let ratios: Vec<f64> = par::map(fs, |f| -> Result<f64> {
        if f.is_empty() {
            return Ok(0.0);
        }
        let projected = f.filter(|k| k.iter().all(|&x| x >= 0));
        Ok(lp_norm(&projected, p)?.value / lp_norm(f, p)?.value)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Both sides of the converse-direction identity for the segment symbol:
/// `‖S_{M_j} h‖_B` by definition, and `2^{sj} ‖Σ_{7·2^{j−3} <= k₁ <= 2^j} e_k ⊗ x_k‖_p`
/// where `h = Σ_{7·2^{j−3} <= k₁ <= 3·2^{j−1}} e_{k₁δ₁} ⊗ x_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentIdentity {
    pub by_definition: f64,
    pub closed_form: f64,
    /// `‖h‖_B` by definition and its closed form `2^{sj}‖h‖_p`.
    pub h_by_definition: f64,
    pub h_closed_form: f64,
}

pub fn segment_identity(
    j: u32,
    h: &TrigPolynomial,
    params: &BesovParams,
    res: &UnityResolution,
) -> Result<SegmentIdentity> {
    let m = crate::symbol::segment_symbol(j, h.n(), h.dim())?;
    let lo = 7_i64 << (j - 3);
    let plateau_hi = 3_i64 << (j - 1);
    let on_segment = |k: &crate::lattice::LatticePoint, hi: i64| {
        k[0] >= lo && k[0] <= hi && k[1..].iter().all(|&x| x == 0)
    };
    if h.modes().any(|(k, _)| !on_segment(k, plateau_hi)) {
        return Err(Error::invalid(
            "h must live on the axis segment [7·2^{j−3}, 3·2^{j−1}]",
        ));
    }
    let weight = 2f64.powf(params.s * j as f64);
    let truncated = h.filter(|k| on_segment(k, 1 << j));
    Ok(SegmentIdentity {
        by_definition: besov_norm(&apply_multiplier(&m, h)?, params, res)?,
        closed_form: weight * lp_norm(&truncated, params.p)?.value,
        h_by_definition: besov_norm(h, params, res)?,
        h_closed_form: weight * lp_norm(h, params.p)?.value,
    })
}

/// `h = Σ e_{k₁δ₁} ⊗ x_k` over the plateau segment, with the given
/// coefficient generator.
pub fn segment_test_function(
    j: u32,
    n: usize,
    dim: usize,
    mut coefficient: impl FnMut() -> crate::linalg::CVec,
) -> Result<TrigPolynomial> {
    if j < 3 {
        return Err(Error::invalid(format!(
            "segment level must be >= 3, got {j}"
        )));
    }
    let mut h = TrigPolynomial::zero(n, dim);
    for k1 in (7_i64 << (j - 3))..=(3_i64 << (j - 1)) {
        let mut k = vec![0; n];
        k[0] = k1;
        h.set(k.into(), coefficient());
    }
    Ok(h)
}
