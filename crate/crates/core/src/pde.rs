//! Mode-wise spectral solvers on the torus for
//! `u' + A(t) u = f, u(0) = u0` and for the time-periodic problem
//! `u' + (ω + A) u = f`, `u(0) = u(2π)`.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::besov::{besov_norm, BesovParams};
use crate::elliptic::{ellipticity_check, EllipticSymbol, SectorSampling};
use crate::error::{Error, Result};
use crate::lattice::{euclidean_norm, LatticeBox, LatticePoint};
use crate::linalg::{self, CVec, Mat, C64};
use crate::par;
use crate::resolution::UnityResolution;
use crate::transform::{lp_norm, TrigPolynomial};

/// Right-hand side `f(t, ·)` of the initial-value problem.
#[derive(Clone)]
pub enum Forcing {
    Zero,
    /// Time-independent forcing.
    Constant(TrigPolynomial),
    /// Closed form `t ↦ f(t, ·)`.
    Function(Arc<dyn Fn(f64) -> TrigPolynomial + Send + Sync>),
    /// Samples on a time grid, linearly interpolated and constant outside.
    Table(Vec<(f64, TrigPolynomial)>),
}

impl std::fmt::Debug for Forcing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Forcing::Zero => write!(f, "Zero"),
            Forcing::Constant(p) => write!(f, "Constant({} modes)", p.len()),
            Forcing::Function(_) => write!(f, "Function"),
            Forcing::Table(t) => write!(f, "Table({} samples)", t.len()),
        }
    }
}

impl Forcing {
    pub fn function(g: impl Fn(f64) -> TrigPolynomial + Send + Sync + 'static) -> Self {
        Forcing::Function(Arc::new(g))
    }

    pub fn is_time_constant(&self) -> bool {
        matches!(self, Forcing::Zero | Forcing::Constant(_))
    }

    pub fn eval(&self, t: f64, n: usize, dim: usize) -> Result<TrigPolynomial> {
        match self {
            Forcing::Zero => Ok(TrigPolynomial::zero(n, dim)),
            Forcing::Constant(p) => Ok(p.clone()),
            Forcing::Function(g) => Ok(g(t)),
            Forcing::Table(samples) => {
                let first = &samples[0];
                let last = &samples[samples.len() - 1];
                if t <= first.0 {
                    return Ok(first.1.clone());
                }
                if t >= last.0 {
                    return Ok(last.1.clone());
                }
                let i = samples.partition_point(|s| s.0 <= t);
                let (a, b) = (&samples[i - 1], &samples[i]);
                let w = (t - a.0) / (b.0 - a.0);
                a.1.scale(C64::new(1.0 - w, 0.0))
                    .add(&b.1.scale(C64::new(w, 0.0)))
            }
        }
    }
}

/// Initial-value problem data.
#[derive(Clone, Debug)]
pub struct IvpSpec {
    pub symbol: EllipticSymbol,
    pub forcing: Forcing,
    pub initial: TrigPolynomial,
    pub final_time: f64,
    /// Number of uniform steps on `[0, final_time]` for the implicit path.
    pub steps: usize,
    /// Every frequency of the data must lie here.
    pub modes: LatticeBox,
    /// Output times; empty means `final_time` only.
    pub output_times: Vec<f64>,
}

impl IvpSpec {
    pub fn new(
        symbol: EllipticSymbol,
        initial: TrigPolynomial,
        final_time: f64,
        steps: usize,
        modes: LatticeBox,
    ) -> Self {
        IvpSpec {
            symbol,
            forcing: Forcing::Zero,
            initial,
            final_time,
            steps,
            modes,
            output_times: Vec::new(),
        }
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = forcing;
        self
    }

    pub fn with_output_times(mut self, times: Vec<f64>) -> Self {
        self.output_times = times;
        self
    }

    fn times(&self) -> Vec<f64> {
        if self.output_times.is_empty() {
            vec![self.final_time]
        } else {
            self.output_times.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        let (n, dim) = (self.symbol.n(), self.symbol.dim());
        if self.steps == 0 {
            return Err(Error::invalid("steps must be >= 1"));
        }
        if !(self.final_time > 0.0) || !self.final_time.is_finite() {
            return Err(Error::invalid(format!(
                "final time must be positive, got {}",
                self.final_time
            )));
        }
        let (t0, t1) = self.symbol.time_domain();
        if t0 > 0.0 || t1 < self.final_time {
            return Err(Error::invalid(format!(
                "symbol time domain {:?} does not cover [0, {}]",
                (t0, t1),
                self.final_time
            )));
        }
        if self.modes.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.modes.dim(),
            });
        }
        if self.initial.n() != n || self.initial.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.initial.n(),
            });
        }
        let mut times = self.times();
        if times.iter().any(|&t| !(0.0..=self.final_time).contains(&t)) {
            return Err(Error::invalid(format!(
                "output times must lie in [0, {}]",
                self.final_time
            )));
        }
        times.dedup();
        if times.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("output times must be increasing"));
        }
        if let Forcing::Table(samples) = &self.forcing {
            if samples.is_empty() || samples.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::invalid(
                    "forcing table needs strictly increasing times",
                ));
            }
        }
        self.check_modes(&self.initial, "initial data")
    }

    fn check_modes(&self, p: &TrigPolynomial, what: &str) -> Result<()> {
        if p.n() != self.symbol.n() || p.dim() != self.symbol.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.symbol.dim(),
                found: p.dim(),
            });
        }
        match p.modes().find(|(k, _)| !self.modes.contains(k.coords())) {
            Some((k, _)) => Err(Error::invalid(format!(
                "{what} has frequency {k} outside the declared box"
            ))),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Matrix exponential of the augmented system.
    Exact,
    /// TR-BDF2.
    Implicit,
}

/// Solution samples `u(t_i, ·)`.
#[derive(Clone, Debug)]
pub struct IvpSolution {
    pub method: Method,
    pub times: Vec<f64>,
    pub states: Vec<TrigPolynomial>,
}

impl IvpSolution {
    pub fn at(&self, t: f64) -> Option<&TrigPolynomial> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
            .map(|i| &self.states[i])
    }

    pub fn last(&self) -> &TrigPolynomial {
        self.states.last().expect("at least one output time")
    }
}

/// `exp(−a t) u0 + ∫_0^t exp(−a (t − s)) f ds` for constant `a`, `f`, from
/// the exponential of `[[−a t, f t], [0, 0]]`.
pub fn exact_mode_solution(a: &Mat, f: &CVec, u0: &CVec, t: f64) -> CVec {
    let dim = a.nrows();
    let mut aug = Mat::zeros(dim + 1, dim + 1);
    aug.view_mut((0, 0), (dim, dim))
        .copy_from(&(a * C64::new(-t, 0.0)));
    aug.view_mut((0, dim), (dim, 1))
        .copy_from(&(f * C64::new(t, 0.0)));
    let e = aug.exp();
    let mut x = CVec::zeros(dim + 1);
    x.rows_mut(0, dim).copy_from(u0);
    x[dim] = C64::new(1.0, 0.0);
    (e * x).rows(0, dim).into_owned()
}

const TR_GAMMA: f64 = 2.0 - std::f64::consts::SQRT_2;

/// Stage times of one TR-BDF2 step from `t` with size `h`.
fn stage_times(t: f64, h: f64) -> [f64; 2] {
    [t + TR_GAMMA * h, t + h]
}

/// One TR-BDF2 step for `u' = −a(t) u + f(t)`.
fn tr_bdf2_step<A>(a: A, f: [&CVec; 3], u: &CVec, t: f64, h: f64, k: &LatticePoint) -> Result<CVec>
where
    A: Fn(f64) -> Mat,
{
    let dim = u.len();
    let eye = linalg::identity(dim);
    let g = TR_GAMMA;
    let [t_mid, t_end] = stage_times(t, h);
    let (a0, a_mid, a_end) = (a(t), a(t_mid), a(t_end));
    let half = C64::new(g * h / 2.0, 0.0);
    let lhs1 = &eye + &a_mid * half;
    let rhs1 = (&eye - &a0 * half) * u + (f[0] + f[1]) * half;
    let witness = |s: f64| Error::Singular {
        witness: format!("k={k}, t={s}"),
    };
    let u_mid = linalg::checked_solve(&lhs1, &rhs1).ok_or_else(|| witness(t_mid))?;
    let g2 = (1.0 - g) / (2.0 - g);
    let c_mid = 1.0 / (g * (2.0 - g));
    let c_old = (1.0 - g) * (1.0 - g) / (g * (2.0 - g));
    let lhs2 = &eye + &a_end * C64::new(g2 * h, 0.0);
    let rhs2 =
        &u_mid * C64::new(c_mid, 0.0) - u * C64::new(c_old, 0.0) + f[2] * C64::new(g2 * h, 0.0);
    linalg::checked_solve(&lhs2, &rhs2).ok_or_else(|| witness(t_end))
}

fn ellipticity_sampling() -> SectorSampling {
    SectorSampling {
        sphere_points: 64,
        magnitudes: crate::elliptic::log_magnitudes(1e-3, 1e4, 29),
        times: 5,
    }
}

/// Fails unless the principal symbol is parabolic (sector angle `π/2`).
pub fn require_parabolic(a: &EllipticSymbol) -> Result<f64> {
    let report = ellipticity_check(a, PI / 2.0, &ellipticity_sampling())?;
    if !report.passed {
        return Err(Error::NotElliptic(match report.witness {
            Some(w) => format!("λ + a⁰ singular at {w}"),
            None => format!("κ = {} exceeds the cap", report.kappa),
        }));
    }
    Ok(report.kappa)
}

/// Solve `u' + A(t) u = f`, `u(0) = u0` on each spatial mode.
pub fn solve_ivp(spec: &IvpSpec) -> Result<IvpSolution> {
    spec.validate()?;
    require_parabolic(&spec.symbol)?;
    if spec.symbol.is_time_constant() && spec.forcing.is_time_constant() {
        solve_exact(spec)
    } else {
        solve_implicit(spec, spec.steps)
    }
}

fn mode_set<'a>(polys: impl Iterator<Item = &'a TrigPolynomial>) -> Vec<LatticePoint> {
    let mut set = BTreeSet::new();
    for p in polys {
        set.extend(p.modes().map(|(k, _)| k.clone()));
    }
    set.into_iter().collect()
}

fn assemble(
    n: usize,
    dim: usize,
    modes: &[LatticePoint],
    values: &[Vec<CVec>],
    slot: usize,
) -> TrigPolynomial {
    let mut out = TrigPolynomial::zero(n, dim);
    for (k, v) in modes.iter().zip(values) {
        out.set(k.clone(), v[slot].clone());
    }
    out
}

fn solve_exact(spec: &IvpSpec) -> Result<IvpSolution> {
    let (n, dim) = (spec.symbol.n(), spec.symbol.dim());
    let f = spec.forcing.eval(0.0, n, dim)?;
    spec.check_modes(&f, "forcing")?;
    let modes = mode_set([&spec.initial, &f].into_iter());
    let times = spec.times();
    let values = par::map(&modes, |k| {
        let a = spec
            .symbol
            .eval_lattice(0.0, k.coords())
            .expect("t = 0 is in the domain");
        let (fk, uk) = (
            f.coefficient(k.coords()),
            spec.initial.coefficient(k.coords()),
        );
        times
            .iter()
            .map(|&t| exact_mode_solution(&a, &fk, &uk, t))
            .collect::<Vec<_>>()
    });
    let states = (0..times.len())
        .map(|i| assemble(n, dim, &modes, &values, i))
        .collect();
    Ok(IvpSolution {
        method: Method::Exact,
        times,
        states,
    })
}

/// Time grid: `steps` uniform points on `[0, T]` merged with the output times.
fn time_grid(final_time: f64, steps: usize, outputs: &[f64]) -> Vec<f64> {
    let h = final_time / steps as f64;
    let mut grid: Vec<f64> = (0..=steps).map(|i| i as f64 * h).collect();
    grid[steps] = final_time;
    for &t in outputs {
        let near = grid.iter().any(|&g| (g - t).abs() <= 1e-12 * final_time);
        if !near {
            grid.push(t);
        }
    }
    grid.sort_by(f64::total_cmp);
    grid
}

/// TR-BDF2 solve with `steps` uniform steps (output times inserted).
pub fn solve_implicit(spec: &IvpSpec, steps: usize) -> Result<IvpSolution> {
    spec.validate()?;
    let (n, dim) = (spec.symbol.n(), spec.symbol.dim());
    let outputs = spec.times();
    let grid = time_grid(spec.final_time, steps.max(1), &outputs);
    // forcing at every node and stage, shared by all modes
    let mut stage_points = Vec::with_capacity(3 * grid.len());
    for w in grid.windows(2) {
        let [mid, end] = stage_times(w[0], w[1] - w[0]);
        stage_points.extend([w[0], mid, end]);
    }
    let forcing: Vec<TrigPolynomial> = par::map(&stage_points, |&t| spec.forcing.eval(t, n, dim))
        .into_iter()
        .collect::<Result<_>>()?;
    for f in &forcing {
        spec.check_modes(f, "forcing")?;
    }
    let modes = mode_set(std::iter::once(&spec.initial).chain(forcing.iter()));
    let slot_of: Vec<Option<usize>> = grid
        .iter()
        .map(|&g| {
            outputs
                .iter()
                .position(|&t| (g - t).abs() <= 1e-12 * spec.final_time)
        })
        .collect();
    let results = par::map(&modes, |k| -> Result<Vec<CVec>> {
        let a = |t: f64| {
            spec.symbol
                .eval_lattice(t, k.coords())
                .expect("grid lies in the domain")
        };
        let mut u = spec.initial.coefficient(k.coords());
        let mut out = vec![CVec::zeros(dim); outputs.len()];
        if let Some(s) = slot_of[0] {
            out[s] = u.clone();
        }
        for (i, w) in grid.windows(2).enumerate() {
            let f: Vec<CVec> = (0..3)
                .map(|s| forcing[3 * i + s].coefficient(k.coords()))
                .collect();
            u = tr_bdf2_step(a, [&f[0], &f[1], &f[2]], &u, w[0], w[1] - w[0], k)?;
            if let Some(s) = slot_of[i + 1] {
                out[s] = u.clone();
            }
        }
        Ok(out)
    });
    let values: Vec<Vec<CVec>> = results.into_iter().collect::<Result<_>>()?;
    let states = (0..outputs.len())
        .map(|i| assemble(n, dim, &modes, &values, i))
        .collect();
    Ok(IvpSolution {
        method: Method::Implicit,
        times: outputs,
        states,
    })
}

/// Time-periodic problem data. `forcing` has `n + 1` variables, time first.
#[derive(Clone, Debug)]
pub struct PeriodicSpec {
    pub symbol: EllipticSymbol,
    pub omega: f64,
    /// Shift `ω₀` established for `symbol`; `omega` must not be below it.
    pub omega0: f64,
    pub forcing: TrigPolynomial,
}

impl PeriodicSpec {
    fn validate(&self) -> Result<()> {
        if !self.symbol.is_time_constant() {
            return Err(Error::invalid(
                "the periodic problem needs a time-independent symbol",
            ));
        }
        if !(self.omega >= self.omega0) {
            return Err(Error::invalid(format!(
                "ω = {} is below ω₀ = {}",
                self.omega, self.omega0
            )));
        }
        if self.forcing.n() != self.symbol.n() + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.symbol.n() + 1,
                found: self.forcing.n(),
            });
        }
        if self.forcing.dim() != self.symbol.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.symbol.dim(),
                found: self.forcing.dim(),
            });
        }
        Ok(())
    }

    /// `i l + ω + a(k)` at the joint frequency `(l, k)`.
    pub fn mode_matrix(&self, mode: &[i64]) -> Mat {
        let t0 = self.symbol.time_domain().0;
        let a = self
            .symbol
            .eval_lattice(t0, &mode[1..])
            .expect("time-independent symbol");
        a + linalg::scalar(self.symbol.dim(), C64::new(self.omega, mode[0] as f64))
    }
}

/// `û(l, k) = (i l + ω + a(k))⁻¹ f̂(l, k)` on the joint spectrum of `f`.
pub fn solve_periodic(spec: &PeriodicSpec) -> Result<TrigPolynomial> {
    spec.validate()?;
    let modes: Vec<(LatticePoint, CVec)> = spec
        .forcing
        .modes()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let solved = par::map(&modes, |(k, f)| {
        linalg::checked_solve(&spec.mode_matrix(k.coords()), f)
            .map(|u| (k.clone(), u))
            .ok_or_else(|| Error::Singular {
                witness: format!("(l, k)={k}, omega={}", spec.omega),
            })
    });
    let mut out = TrigPolynomial::zero(spec.forcing.n(), spec.forcing.dim());
    for r in solved {
        let (k, u) = r?;
        out.set(k, u);
    }
    Ok(out)
}

/// `max_{(l,k)} |(i l + ω + a(k)) û − f̂|` over the joint spectra of `u` and `f`.
pub fn periodic_residual(u: &TrigPolynomial, spec: &PeriodicSpec) -> f64 {
    let modes = mode_set([u, &spec.forcing].into_iter());
    let res = par::map(&modes, |k| {
        let r = spec.mode_matrix(k.coords()) * u.coefficient(k.coords())
            - spec.forcing.coefficient(k.coords());
        r.norm()
    });
    res.into_iter().fold(0.0, f64::max)
}

/// `u(t, ·)` from the joint coefficients.
pub fn periodic_slice(u: &TrigPolynomial, t: f64) -> TrigPolynomial {
    let mut out = TrigPolynomial::zero(u.n() - 1, u.dim());
    for (k, v) in u.modes() {
        let phase = C64::from_polar(1.0, k.coords()[0] as f64 * t);
        out.add_mode(LatticePoint::new(k.coords()[1..].to_vec()), &(v * phase));
    }
    out
}

/// Norms of a solution and its residual.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub residual_max: f64,
    pub residual_besov: f64,
    pub residual_lp: f64,
    pub solution_besov: f64,
    pub solution_lp: f64,
    /// `‖(|l| + |k|^m) û‖₂ / ‖f̂‖₂` for the periodic problem.
    pub regularity_ratio: Option<f64>,
}

fn norms(p: &TrigPolynomial, params: &BesovParams, res: &UnityResolution) -> Result<(f64, f64)> {
    if p.is_empty() {
        return Ok((0.0, 0.0));
    }
    let mut params = *params;
    if let Some(given) = params.levels {
        params.levels = Some(given.max(crate::besov::required_levels(p)));
    }
    Ok((besov_norm(p, &params, res)?, lp_norm(p, params.p)?.value))
}

/// Residual of an IVP solution at its output times: the gap to a solve with
/// twice as many steps on the implicit path, and the semigroup defect
/// `u(t_i) − e^{−a(t_i − t_{i−1})} u(t_{i−1}) − …` on the exact path.
pub fn ivp_residual(u: &IvpSolution, spec: &IvpSpec) -> Result<Vec<TrigPolynomial>> {
    let (n, dim) = (spec.symbol.n(), spec.symbol.dim());
    match u.method {
        Method::Implicit => {
            let fine = solve_implicit(spec, 2 * spec.steps)?;
            u.states
                .iter()
                .zip(&fine.states)
                .map(|(a, b)| a.sub(b))
                .collect()
        }
        Method::Exact => {
            let f = spec.forcing.eval(0.0, n, dim)?;
            let mut prev_t = 0.0;
            let mut prev = spec.initial.clone();
            let mut out = Vec::with_capacity(u.times.len());
            for (&t, state) in u.times.iter().zip(&u.states) {
                let modes = mode_set([&prev, &f, state].into_iter());
                let mut r = TrigPolynomial::zero(n, dim);
                for k in modes {
                    let a = spec.symbol.eval_lattice(0.0, k.coords())?;
                    let prop = exact_mode_solution(
                        &a,
                        &f.coefficient(k.coords()),
                        &prev.coefficient(k.coords()),
                        t - prev_t,
                    );
                    r.set(k.clone(), state.coefficient(k.coords()) - prop);
                }
                out.push(r);
                prev_t = t;
                prev = state.clone();
            }
            Ok(out)
        }
    }
}

/// Norms of the final IVP state and of its residual.
pub fn ivp_residual_norms(
    u: &IvpSolution,
    spec: &IvpSpec,
    params: &BesovParams,
) -> Result<ResidualReport> {
    let res = UnityResolution::standard(spec.symbol.n());
    let residuals = ivp_residual(u, spec)?;
    let last = residuals.last().expect("at least one output time");
    let (rb, rl) = norms(last, params, &res)?;
    let (sb, sl) = norms(u.last(), params, &res)?;
    Ok(ResidualReport {
        residual_max: residuals
            .iter()
            .map(|r| r.max_coefficient_norm())
            .fold(0.0, f64::max),
        residual_besov: rb,
        residual_lp: rl,
        solution_besov: sb,
        solution_lp: sl,
        regularity_ratio: None,
    })
}

/// Norms of the periodic solution and residual on the joint torus.
pub fn periodic_residual_norms(
    u: &TrigPolynomial,
    spec: &PeriodicSpec,
    params: &BesovParams,
) -> Result<ResidualReport> {
    let res = UnityResolution::standard(u.n());
    let modes = mode_set([u, &spec.forcing].into_iter());
    let mut residual = TrigPolynomial::zero(u.n(), u.dim());
    let m = spec.symbol.order() as i32;
    let (mut weighted, mut f_norm) = (0.0, 0.0);
    for k in &modes {
        let uk = u.coefficient(k.coords());
        residual.set(
            k.clone(),
            spec.mode_matrix(k.coords()) * &uk - spec.forcing.coefficient(k.coords()),
        );
        let w = (k.coords()[0] as f64).abs() + euclidean_norm(&k.coords()[1..]).powi(m);
        weighted += (w * uk.norm()).powi(2);
        f_norm += spec.forcing.coefficient(k.coords()).norm_squared();
    }
    let (rb, rl) = norms(&residual, params, &res)?;
    let (sb, sl) = norms(u, params, &res)?;
    Ok(ResidualReport {
        residual_max: residual.max_coefficient_norm(),
        residual_besov: rb,
        residual_lp: rl,
        solution_besov: sb,
        solution_lp: sl,
        regularity_ratio: (f_norm > 0.0).then(|| (weighted / f_norm).sqrt()),
    })
}
