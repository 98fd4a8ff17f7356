//! `tmk`: command-line front end. Every subcommand writes a UTF-8 CSV with a
//! header row to `--out` (stdout by default) and a short summary to stderr.
//!
//! Exit codes: 0 success, 1 numeric failure or failed check, 2 usage error.

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tmk::besov::{self, BesovParams};
use tmk::elliptic::{self, Sector, SectorSampling};
use tmk::io::{self as tio, fmt_f64, KeyValues};
use tmk::lattice::LatticeBox;
use tmk::pde;
use tmk::random;
use tmk::resolution::{verify_resolution, UnityResolution};
use tmk::suite::{self, Scale};
use tmk::symbol;
use tmk::{Error, TrigPolynomial};

#[derive(Parser, Debug)]
#[command(
    name = "tmk",
    version,
    about = "Discrete harmonic analysis and spectral solvers on the n-torus"
)]
struct Cli {
    /// Worker threads (TMK_THREADS takes precedence).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat key=value file supplying defaults for any long flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Resolution-of-unity checks.
    #[command(subcommand)]
    Lp(LpCommand),
    /// Besov norms and multiplier experiments.
    #[command(subcommand)]
    Besov(BesovCommand),
    /// Variation of operator-valued symbols.
    #[command(subcommand)]
    Symbol(SymbolCommand),
    /// Ellipticity, shift search and resolvent sweeps.
    #[command(subcommand)]
    Elliptic(EllipticCommand),
    /// Initial-value and periodic solvers.
    #[command(subcommand)]
    Solve(SolveCommand),
    /// Run the acceptance checks and print a pass/fail table.
    Suite(SuiteArgs),
}

#[derive(Subcommand, Debug)]
enum LpCommand {
    /// Partition, support and derivative checks of the standard resolution.
    Verify {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long = "J", default_value_t = 8)]
        levels: u32,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Use the shifted-radii resolution.
        #[arg(long)]
        shifted: bool,
    },
}

#[derive(Args, Debug, Clone)]
struct SpaceArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Coefficient dimension.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    s: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// `inf` for the supremum.
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    /// Frequency cube half-width of random inputs.
    #[arg(long = "K", default_value_t = 16)]
    k_max: i64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of random inputs.
    #[arg(long, default_value_t = 50)]
    count: usize,
    /// Fixed truncation level.
    #[arg(long = "J")]
    levels: Option<u32>,
}

impl SpaceArgs {
    fn params(&self) -> tmk::Result<BesovParams> {
        let p = BesovParams::new(self.s, self.p, self.q)?;
        match self.levels {
            Some(j) => p.with_levels(j),
            None => Ok(p),
        }
    }

    fn family(&self) -> Vec<TrigPolynomial> {
        random::structured_family(self.seed, self.count, self.n, self.k_max, self.dim)
    }
}

#[derive(Subcommand, Debug)]
enum BesovCommand {
    /// Block norms and the Besov norm of one polynomial.
    Norm {
        #[command(flatten)]
        space: SpaceArgs,
        /// Polynomial CSV; a random polynomial on `[-K, K]^n` otherwise.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Equivalence bracket between the standard and shifted resolutions.
    Equiv {
        #[command(flatten)]
        space: SpaceArgs,
    },
    /// Measured multiplier constant against the variation certificate.
    MultCert {
        #[command(flatten)]
        space: SpaceArgs,
        /// Registry key: identity, riesz, neg, segment:j, shift:k:<key>, resolvent:λ[:file], custom:file.
        #[arg(long, default_value = "riesz")]
        symbol: String,
    },
    /// Measured Riesz box constant in L^p.
    Riesz {
        #[command(flatten)]
        space: SpaceArgs,
    },
}

#[derive(Subcommand, Debug)]
enum SymbolCommand {
    /// Per-cell variation `Var_{D_d} M` for `d <= dmax`.
    Var {
        #[arg(long, default_value = "riesz")]
        symbol: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 8)]
        dmax: u64,
    },
    /// Bounded-variation certificate.
    Cert {
        #[arg(long, default_value = "riesz")]
        symbol: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 8)]
        dmax: u64,
    },
}

#[derive(Args, Debug, Clone)]
struct EllipticArgs {
    /// Symbol file (key-value format).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = PI / 2.0)]
    theta: f64,
    #[arg(long, default_value_t = 256)]
    sphere_points: usize,
}

impl EllipticArgs {
    fn sampling(&self) -> SectorSampling {
        SectorSampling {
            sphere_points: self.sphere_points,
            ..SectorSampling::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum EllipticCommand {
    /// Sectorial bound of the principal symbol.
    Check {
        #[command(flatten)]
        args: EllipticArgs,
    },
    /// Smallest admissible shift.
    Omega0 {
        #[command(flatten)]
        args: EllipticArgs,
        #[arg(long, default_value_t = 1e6)]
        cap: f64,
    },
    /// Certificates of the resolvent multiplier over sector samples.
    BvSweep {
        #[command(flatten)]
        args: EllipticArgs,
        #[arg(long, default_value_t = 8)]
        dmax: u64,
        /// Magnitudes of `λ − ω₀` per ray.
        #[arg(long, default_value_t = 5)]
        lambdas: usize,
        /// Number of sampled times.
        #[arg(long, default_value_t = 3)]
        times: usize,
        /// Flag certificates above this value.
        #[arg(long)]
        cap: Option<f64>,
    },
}

#[derive(Subcommand, Debug)]
enum SolveCommand {
    /// Initial-value problem; writes coefficients per output time.
    Ivp {
        #[arg(long)]
        spec: PathBuf,
        /// Norms summary CSV.
        #[arg(long)]
        norms: Option<PathBuf>,
    },
    /// Time-periodic problem; writes joint coefficients.
    Periodic {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides `omega` in the spec file.
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        norms: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SuiteArgs {
    /// Reduced sample sizes.
    #[arg(long)]
    quick: bool,
    /// Run a single criterion.
    #[arg(long)]
    only: Option<u32>,
}

/// Failure categories mapped to exit codes.
enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::InvalidParameter(_)
            | Error::DimensionMismatch { .. }
            | Error::Io(_)
            | Error::Csv(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Rows of CSV text.
struct Table {
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            rows: vec![header.iter().map(|s| s.to_string()).collect()],
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn kv(&mut self, key: &str, value: impl ToString) {
        self.rows.push(vec![key.to_string(), value.to_string()]);
    }

    fn num(&mut self, key: &str, value: f64) {
        self.kv(key, fmt_f64(value));
    }

    fn write(&self, out: &Option<PathBuf>) -> std::io::Result<()> {
        let mut buf = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            for r in &self.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        emit(&buf, out)
    }
}

fn emit(bytes: &[u8], out: &Option<PathBuf>) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes),
        None => std::io::stdout().write_all(bytes),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match with_config(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let threads = std::env::var("TMK_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .or(cli.threads);
    if let Some(t) = threads.filter(|&t| t > 0) {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("failure: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Flags that take no value.
const SWITCHES: [&str; 5] = ["--quick", "--shifted", "--help", "--version", "-h"];

/// Insert `--key value` for each config entry whose flag is not on the
/// command line, right after the subcommand words.
fn with_config(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(pos) = argv
        .iter()
        .position(|a| a == "--config" || a.starts_with("--config="))
    else {
        return Ok(argv);
    };
    let path = match argv[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => argv.get(pos + 1).cloned().ok_or("--config needs a path")?,
    };
    let kv = KeyValues::load(Path::new(&path)).map_err(|e| format!("config {path}: {e}"))?;
    let given: Vec<&str> = argv
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a))
        .collect();
    // end of the subcommand words: the last positional before any flag value
    let mut last_word = 0;
    let mut i = 1;
    while i < argv.len() {
        let a = &argv[i];
        if a.starts_with('-') {
            if !SWITCHES.contains(&a.as_str()) && !a.contains('=') {
                i += 1;
            }
        } else {
            last_word = i;
            if a == "suite" {
                break;
            }
            if i >= 2 && !argv[i - 1].starts_with('-') && last_word != 1 {
                break;
            }
        }
        i += 1;
    }
    let mut extra = Vec::new();
    for (k, v) in &kv.entries {
        if given.contains(&k.as_str()) || k == "config" {
            continue;
        }
        let flag = format!("--{k}");
        if SWITCHES.contains(&flag.as_str()) {
            if v == "true" {
                extra.push(flag);
            }
        } else {
            extra.push(flag);
            extra.push(v.clone());
        }
    }
    let mut out = argv[..=last_word].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[last_word + 1..]);
    Ok(out)
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Lp(LpCommand::Verify {
            n,
            levels,
            samples,
            seed,
            shifted,
        }) => {
            let res = if *shifted {
                UnityResolution::shifted(*n)
            } else {
                UnityResolution::standard(*n)
            };
            let rep = verify_resolution(&res, *levels, *samples, *seed)?;
            let mut t = Table::new(&["check", "max_deviation", "violations"]);
            for (name, dev, count) in rep.csv_rows() {
                t.push(vec![name, fmt_f64(dev), count.to_string()]);
            }
            t.write(&cli.out)?;
            eprintln!(
                "partition deviation {:e}, violations {}",
                rep.partition_deviation,
                rep.violations()
            );
            if rep.violations() > 0 || rep.partition_deviation > suite::PARTITION_TOL {
                return Err(Failure::Numeric(format!("{} violations", rep.violations())));
            }
            Ok(())
        }
        Command::Besov(cmd) => besov_command(cmd, &cli.out),
        Command::Symbol(cmd) => symbol_command(cmd, &cli.out),
        Command::Elliptic(cmd) => elliptic_command(cmd, &cli.out),
        Command::Solve(cmd) => solve_command(cmd, &cli.out),
        Command::Suite(args) => suite_command(args, &cli.out),
    }
}

fn besov_command(cmd: &BesovCommand, out: &Option<PathBuf>) -> Outcome {
    match cmd {
        BesovCommand::Norm { space, input } => {
            let f = match input {
                Some(p) => tio::load_polynomial(p)?,
                None => {
                    let mut rng = random::seeded(space.seed);
                    random::random_polynomial(
                        &mut rng,
                        &LatticeBox::cube(space.n, -space.k_max, space.k_max)?,
                        space.dim,
                    )
                }
            };
            let params = space.params()?;
            let res = UnityResolution::standard(f.n());
            let levels = params.levels.unwrap_or_else(|| besov::default_levels(&f));
            let norm = besov::besov_norm(&f, &params, &res)?;
            let blocks = besov::block_norms(&f, params.p, levels, &res)?;
            let mut t = Table::new(&["quantity", "value"]);
            t.kv("levels", levels);
            for (j, b) in blocks.iter().enumerate() {
                t.num(&format!("block_{j}"), *b);
            }
            t.num("norm", norm);
            t.write(out)?;
            eprintln!("norm {norm:e} with J = {levels}");
            Ok(())
        }
        BesovCommand::Equiv { space } => {
            let fs = space.family();
            let params = space.params()?;
            let (lo, hi) = besov::norm_equivalence_experiment(
                &fs,
                &params,
                &UnityResolution::standard(space.n),
                &UnityResolution::shifted(space.n),
            )?;
            let mut t = Table::new(&["quantity", "value"]);
            t.kv("count", fs.len());
            t.num("c_hat", lo);
            t.num("C_hat", hi);
            t.write(out)?;
            eprintln!("bracket [{lo:.6}, {hi:.6}]");
            Ok(())
        }
        BesovCommand::MultCert { space, symbol } => {
            let m = tio::symbol_from_key(symbol, space.n, space.dim)?;
            let fs = space.family();
            let params = space.params()?;
            let cert = besov::multiplier_bound_certificate(
                &m,
                &fs,
                &params,
                &UnityResolution::standard(space.n),
            )?;
            let mut t = Table::new(&[
                "symbol",
                "p",
                "q",
                "s",
                "operator_ratio",
                "bv_sup",
                "bv_argmax",
                "empirical_constant",
                "half_sample_ratio",
                "grows_with_sample",
            ]);
            t.push(vec![
                symbol.clone(),
                fmt_f64(space.p),
                fmt_f64(space.q),
                fmt_f64(space.s),
                fmt_f64(cert.operator_ratio),
                fmt_f64(cert.bv.sup),
                cert.bv.argmax.to_string(),
                fmt_f64(cert.empirical_constant),
                fmt_f64(cert.half_sample_ratio),
                cert.grows_with_sample.to_string(),
            ]);
            t.write(out)?;
            eprintln!(
                "measured constant {:.6} (ratio {:.6} / certificate {:.6})",
                cert.empirical_constant, cert.operator_ratio, cert.bv.sup
            );
            Ok(())
        }
        BesovCommand::Riesz { space } => {
            let constant = besov::riesz_box_experiment(&space.family(), space.p)?;
            let mut t = Table::new(&["p", "K", "count", "constant"]);
            t.push(vec![
                fmt_f64(space.p),
                space.k_max.to_string(),
                space.count.to_string(),
                fmt_f64(constant),
            ]);
            t.write(out)?;
            eprintln!("Riesz box constant {constant:.6}");
            Ok(())
        }
    }
}

fn symbol_command(cmd: &SymbolCommand, out: &Option<PathBuf>) -> Outcome {
    match cmd {
        SymbolCommand::Var {
            symbol: key,
            n,
            dim,
            dmax,
        } => {
            let m = tio::symbol_from_key(key, *n, *dim)?;
            let mut t = Table::new(&["d", "variation", "weighted_sup"]);
            for d in 0..=*dmax {
                let p = symbol::cell_profile(&m, d);
                t.push(vec![
                    d.to_string(),
                    fmt_f64(p.variation),
                    fmt_f64(p.weighted_sup),
                ]);
            }
            t.write(out)?;
            Ok(())
        }
        SymbolCommand::Cert {
            symbol: key,
            n,
            dim,
            dmax,
        } => {
            let m = tio::symbol_from_key(key, *n, *dim)?;
            let cert = symbol::bv_certificate(&m, *dmax);
            let mut t = Table::new(&["quantity", "value"]);
            t.num("sup", cert.sup);
            t.kv("argmax", cert.argmax);
            t.num("weighted_sup", cert.weighted_sup);
            t.num("tail_norm", cert.tail_norm);
            t.write(out)?;
            eprintln!("certificate {} at d = {}", cert.sup, cert.argmax);
            Ok(())
        }
    }
}

fn kappa_and_sector(a: &elliptic::EllipticSymbol, args: &EllipticArgs) -> Result<Sector, Failure> {
    let rep = elliptic::ellipticity_check(a, args.theta, &args.sampling())?;
    if !rep.passed {
        return Err(Failure::Numeric(format!(
            "not elliptic: kappa {}, witness {}",
            rep.kappa,
            rep.witness.unwrap_or_else(|| "none".into())
        )));
    }
    Ok(Sector::new(args.theta, 0.0, rep.kappa)?)
}

fn elliptic_command(cmd: &EllipticCommand, out: &Option<PathBuf>) -> Outcome {
    match cmd {
        EllipticCommand::Check { args } => {
            let a = tio::load_elliptic(&args.spec)?;
            let rep = elliptic::ellipticity_check(&a, args.theta, &args.sampling())?;
            let mut t = Table::new(&["quantity", "value"]);
            t.kv("passed", rep.passed);
            t.num("kappa", rep.kappa);
            t.num("scaled_kappa", rep.scaled_kappa);
            t.kv("witness", rep.witness.clone().unwrap_or_default());
            let holder = a.holder_estimate(1.0, 17);
            t.num("holder_estimate", holder);
            t.write(out)?;
            if !a.is_time_constant() && !holder.is_finite() {
                eprintln!("warning: coefficients do not look Hölder continuous");
            }
            if !rep.passed {
                return Err(Failure::Numeric(format!(
                    "ellipticity check failed: {}",
                    rep.witness.unwrap_or_default()
                )));
            }
            eprintln!("elliptic with kappa {:.6}", rep.kappa);
            Ok(())
        }
        EllipticCommand::Omega0 { args, cap } => {
            let a = tio::load_elliptic(&args.spec)?;
            let sector = kappa_and_sector(&a, args)?;
            let w = elliptic::omega0_search(&a, &sector, &args.sampling(), 1e-3, *cap)?;
            let mut t = Table::new(&["quantity", "value"]);
            t.num("kappa", sector.kappa);
            t.num("omega0", w);
            t.write(out)?;
            eprintln!("omega0 {w}");
            Ok(())
        }
        EllipticCommand::BvSweep {
            args,
            dmax,
            lambdas,
            times,
            cap,
        } => {
            let a = tio::load_elliptic(&args.spec)?;
            let base = kappa_and_sector(&a, args)?;
            let w = elliptic::omega0_search(&a, &base, &args.sampling(), 1e-3, 1e6)?;
            let sector = Sector::new(args.theta, w, base.kappa)?;
            let lams = sector.samples(&elliptic::log_magnitudes(1e-2, 1e4, (*lambdas).max(1)));
            let ts = if a.is_time_constant() {
                vec![a.time_domain().0]
            } else {
                elliptic::uniform_times(a.finite_domain(), (*times).max(1))
            };
            let rep = elliptic::resolvent_bv_sweep(&a, &sector, &lams, &ts, *dmax, *cap)?;
            let mut t = Table::new(&[
                "lambda_re",
                "lambda_im",
                "t",
                "in_sector",
                "bv_sup",
                "argmax",
                "weighted_sup",
                "tail_norm",
                "resolvent_bound",
            ]);
            for r in &rep.rows {
                t.push(vec![
                    fmt_f64(r.lambda.re),
                    fmt_f64(r.lambda.im),
                    fmt_f64(r.t),
                    r.in_sector.to_string(),
                    fmt_f64(r.bv_sup),
                    r.argmax.to_string(),
                    fmt_f64(r.weighted_sup),
                    fmt_f64(r.tail_norm),
                    fmt_f64(r.resolvent_bound),
                ]);
            }
            t.write(out)?;
            eprintln!(
                "omega0 {w}, cap {:.6}, refined {:.6}, soft bound {} ({})",
                rep.cap,
                rep.refined_cap,
                rep.soft_bound,
                if rep.within_soft_bound {
                    "within"
                } else {
                    "exceeded"
                }
            );
            if !rep.uniform || rep.cap_exceeded {
                return Err(Failure::Numeric(
                    "certificate cap is not uniform or exceeds --cap".into(),
                ));
            }
            Ok(())
        }
    }
}

fn write_norms(path: &Option<PathBuf>, rep: &pde::ResidualReport) -> std::io::Result<()> {
    if path.is_none() {
        return Ok(());
    }
    let mut t = Table::new(&["quantity", "value"]);
    t.num("residual_max", rep.residual_max);
    t.num("residual_besov", rep.residual_besov);
    t.num("residual_lp", rep.residual_lp);
    t.num("solution_besov", rep.solution_besov);
    t.num("solution_lp", rep.solution_lp);
    if let Some(r) = rep.regularity_ratio {
        t.num("regularity_ratio", r);
    }
    t.write(path)
}

fn solve_command(cmd: &SolveCommand, out: &Option<PathBuf>) -> Outcome {
    let params = BesovParams::new(0.0, 2.0, 2.0)?;
    match cmd {
        SolveCommand::Ivp { spec, norms } => {
            let s = tio::ivp_from_keys(&KeyValues::load(spec)?)?;
            let sol = pde::solve_ivp(&s)?;
            let (n, dim) = (s.symbol.n(), s.symbol.dim());
            let mut header = vec!["t".to_string()];
            header.extend((1..=n).map(|i| format!("k{i}")));
            for i in 1..=dim {
                header.push(format!("re{i}"));
                header.push(format!("im{i}"));
            }
            let mut t = Table { rows: vec![header] };
            for (time, state) in sol.times.iter().zip(&sol.states) {
                for (k, v) in state.modes() {
                    let mut row = vec![fmt_f64(*time)];
                    row.extend(k.coords().iter().map(|x| x.to_string()));
                    for z in v.iter() {
                        row.push(fmt_f64(z.re));
                        row.push(fmt_f64(z.im));
                    }
                    t.push(row);
                }
            }
            t.write(out)?;
            let rep = pde::ivp_residual_norms(&sol, &s, &params)?;
            write_norms(norms, &rep)?;
            eprintln!(
                "{:?} path, {} output times, residual {:e}",
                sol.method,
                sol.times.len(),
                rep.residual_max
            );
            Ok(())
        }
        SolveCommand::Periodic { spec, omega, norms } => {
            let mut s = tio::periodic_from_keys(&KeyValues::load(spec)?)?;
            if let Some(w) = omega {
                s.omega = *w;
            }
            let u = pde::solve_periodic(&s)?;
            let mut buf = Vec::new();
            tio::write_polynomial(&u, &mut buf, true)?;
            emit(&buf, out)?;
            let rep = pde::periodic_residual_norms(&u, &s, &params)?;
            write_norms(norms, &rep)?;
            eprintln!("{} modes, residual {:e}", u.len(), rep.residual_max);
            Ok(())
        }
    }
}

fn suite_command(args: &SuiteArgs, out: &Option<PathBuf>) -> Outcome {
    let scale = if args.quick {
        Scale::Quick
    } else {
        Scale::Full
    };
    let outcomes = match args.only {
        Some(id) if (1..=12).contains(&id) => vec![suite::run(id, scale)],
        Some(id) => return Err(Failure::Usage(format!("no criterion {id}"))),
        None => suite::run_all(scale),
    };
    let mut t = Table::new(&["criterion", "name", "passed", "metric", "value"]);
    for o in &outcomes {
        eprintln!("{}", o.line());
        for (k, v) in &o.metrics {
            t.push(vec![
                o.id.to_string(),
                o.name.to_string(),
                o.passed.to_string(),
                k.clone(),
                fmt_f64(*v),
            ]);
        }
    }
    t.write(out)?;
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.id.to_string())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numeric(format!(
            "failed criteria: {}",
            failed.join(", ")
        )))
    }
}
