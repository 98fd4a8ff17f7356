//! Multi-index geometry of `Z^n`: points, boxes `[α, β]`, and the coarse
//! decomposition `Z^n = ⊔_d D_d` with its signed half-cells.

use std::fmt;
use std::ops::{Add, Deref, Sub};

use crate::error::{Error, Result};

/// Default upper bound on the lattice dimension. Cell sizes grow like
/// `2^{n r}`, so anything above four is impractical at desk scale.
pub const DEFAULT_MAX_DIM: usize = 4;

pub fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > DEFAULT_MAX_DIM {
        return Err(Error::invalid(format!(
            "dimension n = {n} outside 1..={DEFAULT_MAX_DIM}"
        )));
    }
    Ok(())
}

/// A point of `Z^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        assert!(!coords.is_empty(), "lattice points need n >= 1");
        LatticePoint(coords)
    }

    pub fn zero(n: usize) -> Self {
        LatticePoint::new(vec![0; n])
    }

    /// The standard basis vector `δ_axis` (0-based axis).
    pub fn unit(n: usize, axis: usize) -> Self {
        let mut v = vec![0; n];
        v[axis] = 1;
        LatticePoint::new(v)
    }

    pub fn splat(n: usize, value: i64) -> Self {
        LatticePoint::new(vec![value; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &LatticePoint) -> bool {
        componentwise_le(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        euclidean_norm(&self.0)
    }

    pub fn neg(&self) -> LatticePoint {
        LatticePoint(self.0.iter().map(|x| -x).collect())
    }
}

pub fn componentwise_le(a: &[i64], b: &[i64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn euclidean_norm(k: &[i64]) -> f64 {
    k.iter()
        .map(|&x| (x as f64) * (x as f64))
        .sum::<f64>()
        .sqrt()
}

impl Deref for LatticePoint {
    type Target = [i64];

    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl std::borrow::Borrow<[i64]> for LatticePoint {
    fn borrow(&self) -> &[i64] {
        &self.0
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint::new(v)
    }
}

impl From<&[i64]> for LatticePoint {
    fn from(v: &[i64]) -> Self {
        LatticePoint::new(v.to_vec())
    }
}

impl<const N: usize> From<[i64; N]> for LatticePoint {
    fn from(v: [i64; N]) -> Self {
        LatticePoint::new(v.to_vec())
    }
}

impl Add for &LatticePoint {
    type Output = LatticePoint;

    fn add(self, rhs: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &LatticePoint {
    type Output = LatticePoint;

    fn sub(self, rhs: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// The rectangle `[lo, hi] = {k : lo <= k <= hi}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBox {
    lo: LatticePoint,
    hi: LatticePoint,
}

impl LatticeBox {
    pub fn new(lo: LatticePoint, hi: LatticePoint) -> Result<Self> {
        if lo.dim() != hi.dim() {
            return Err(Error::DimensionMismatch {
                expected: lo.dim(),
                found: hi.dim(),
            });
        }
        if !lo.le(&hi) {
            return Err(Error::invalid(format!(
                "box corners {lo} and {hi} are not ordered"
            )));
        }
        Ok(LatticeBox { lo, hi })
    }

    /// `[a, b]^n`.
    pub fn cube(n: usize, a: i64, b: i64) -> Result<Self> {
        LatticeBox::new(LatticePoint::splat(n, a), LatticePoint::splat(n, b))
    }

    /// The one-point box `{k}`.
    pub fn point(k: LatticePoint) -> Self {
        LatticeBox {
            lo: k.clone(),
            hi: k,
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn lo(&self) -> &LatticePoint {
        &self.lo
    }

    pub fn hi(&self) -> &LatticePoint {
        &self.hi
    }

    pub fn extent(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis] + 1) as usize
    }

    /// Number of lattice points, `Π (β_i − α_i + 1)`.
    pub fn len(&self) -> usize {
        (0..self.dim()).map(|i| self.extent(i)).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        componentwise_le(&self.lo, k) && componentwise_le(k, &self.hi)
    }

    pub fn intersect(&self, other: &LatticeBox) -> Option<LatticeBox> {
        let lo: Vec<i64> = self
            .lo
            .iter()
            .zip(other.lo.iter())
            .map(|(a, b)| *a.max(b))
            .collect();
        let hi: Vec<i64> = self
            .hi
            .iter()
            .zip(other.hi.iter())
            .map(|(a, b)| *a.min(b))
            .collect();
        if componentwise_le(&lo, &hi) {
            Some(LatticeBox {
                lo: lo.into(),
                hi: hi.into(),
            })
        } else {
            None
        }
    }

    /// Row-major strides (last axis fastest), matching lexicographic order.
    pub fn strides(&self) -> Vec<usize> {
        let n = self.dim();
        let mut strides = vec![1; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.extent(i + 1);
        }
        strides
    }

    /// Lexicographic position of `k` inside the box.
    pub fn index_of(&self, k: &[i64]) -> usize {
        let strides = self.strides();
        k.iter()
            .zip(self.lo.iter())
            .zip(&strides)
            .map(|((x, a), s)| (x - a) as usize * s)
            .sum()
    }

    /// The point at lexicographic position `idx`.
    pub fn point_at(&self, mut idx: usize) -> LatticePoint {
        let n = self.dim();
        let mut coords = vec![0; n];
        for i in (0..n).rev() {
            let e = self.extent(i);
            coords[i] = self.lo[i] + (idx % e) as i64;
            idx /= e;
        }
        LatticePoint(coords)
    }

    /// Visit every point in lexicographic order without allocating per point.
    pub fn for_each(&self, mut f: impl FnMut(&[i64])) {
        let n = self.dim();
        let mut cur: Vec<i64> = self.lo.to_vec();
        loop {
            f(&cur);
            let mut axis = n;
            loop {
                if axis == 0 {
                    return;
                }
                axis -= 1;
                if cur[axis] < self.hi[axis] {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = self.lo[axis];
            }
        }
    }

    /// All points in lexicographic order.
    pub fn points(&self) -> Vec<LatticePoint> {
        let mut out = Vec::with_capacity(self.len());
        self.for_each(|k| out.push(LatticePoint(k.to_vec())));
        out
    }
}

impl fmt::Display for LatticeBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Convenience wrapper for [`LatticeBox::points`].
pub fn box_points(b: &LatticeBox) -> Vec<LatticePoint> {
    b.points()
}

/// One cell `D_d` of the coarse decomposition.
///
/// For `d >= 1` with `d = n r + l`, `l ∈ {1..n}`, the cell is
/// `|k_1|,…,|k_{l-1}| < 2^{r+1}`, `2^r <= |k_l| < 2^{r+1}`,
/// `|k_{l+1}|,…,|k_n| < 2^r`, split by the sign of `k_l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoarseCell {
    pub d: u64,
    pub n: usize,
    /// Dyadic scale `r` (0 for `d = 0`).
    pub r: u32,
    /// Distinguished axis `l`, 1-based (0 for `d = 0`).
    pub l: usize,
    pub plus_box: Option<LatticeBox>,
    pub minus_box: Option<LatticeBox>,
}

impl CoarseCell {
    /// The boxes making up the cell: `{0}` for `d = 0`, otherwise `D_{d+}` and `D_{d-}`.
    pub fn boxes(&self) -> Vec<LatticeBox> {
        match (&self.plus_box, &self.minus_box) {
            (Some(p), Some(m)) => vec![p.clone(), m.clone()],
            _ => vec![LatticeBox::point(LatticePoint::zero(self.n))],
        }
    }

    pub fn len(&self) -> usize {
        self.boxes().iter().map(LatticeBox::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        self.boxes().iter().any(|b| b.contains(k))
    }

    pub fn points(&self) -> Vec<LatticePoint> {
        self.boxes().iter().flat_map(LatticeBox::points).collect()
    }
}

/// Decompose `d >= 1` as `d = n r + l` with `l ∈ {1..n}`.
pub fn split_cell_index(d: u64, n: usize) -> (u32, usize) {
    debug_assert!(d >= 1);
    let r = (d - 1) / n as u64;
    let l = ((d - 1) % n as u64) as usize + 1;
    (r as u32, l)
}

pub fn coarse_cell(d: u64, n: usize) -> CoarseCell {
    assert!(n >= 1);
    if d == 0 {
        return CoarseCell {
            d,
            n,
            r: 0,
            l: 0,
            plus_box: None,
            minus_box: None,
        };
    }
    let (r, l) = split_cell_index(d, n);
    let big = (1_i64 << (r + 1)) - 1;
    let small = (1_i64 << r) - 1;
    let mut lo_plus = Vec::with_capacity(n);
    let mut hi_plus = Vec::with_capacity(n);
    for axis in 1..=n {
        let bound = if axis < l { big } else { small };
        lo_plus.push(-bound);
        hi_plus.push(bound);
    }
    let mut lo_minus = lo_plus.clone();
    let mut hi_minus = hi_plus.clone();
    lo_plus[l - 1] = 1 << r;
    hi_plus[l - 1] = big;
    lo_minus[l - 1] = -big;
    hi_minus[l - 1] = -(1 << r);
    CoarseCell {
        d,
        n,
        r,
        l,
        plus_box: Some(LatticeBox {
            lo: lo_plus.into(),
            hi: hi_plus.into(),
        }),
        minus_box: Some(LatticeBox {
            lo: lo_minus.into(),
            hi: hi_minus.into(),
        }),
    }
}

/// The unique `d` with `k ∈ D_d`.
pub fn cell_index_of(k: &[i64]) -> u64 {
    let max = k.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
    if max == 0 {
        return 0;
    }
    let r = 63 - max.leading_zeros();
    let threshold = 1_u64 << r;
    let l = k
        .iter()
        .rposition(|x| x.unsigned_abs() >= threshold)
        .unwrap()
        + 1;
    k.len() as u64 * r as u64 + l as u64
}

/// Smallest `m >= 0` with `sqrt(n) <= 2^m`.
pub fn cover_exponent(n: usize) -> u32 {
    let mut m = 0;
    while (1_usize << (2 * m)) < n {
        m += 1;
    }
    m
}

/// Indices `d` of the cells that can meet `supp(φ_j) ∩ Z^n`.
///
/// `j = 0` gives `0..=n`; `j >= 1` gives `n(j−m−1)+1 ..= n(j+1)` with the
/// lower end clipped at 0 (negative indices stand for `D_0`).
pub fn dyadic_support_cover(j: u32, n: usize) -> Vec<u64> {
    if j == 0 {
        return (0..=n as u64).collect();
    }
    let m = cover_exponent(n) as i64;
    let lo = (n as i64 * (j as i64 - m - 1) + 1).max(0) as u64;
    let hi = n as u64 * (j as u64 + 1);
    (lo..=hi).collect()
}
