//! File formats.
//!
//! * Polynomial CSV: header `k1,…,kn,re1,im1,…,re_m,im_m`, one row per mode.
//!   Joint space-time polynomials use the same layout with the time
//!   frequency first (header `l,k1,…,kn,…`).
//! * Custom symbol CSV: `n` integer columns then `2m²` reals, the matrix in
//!   row-major order with interleaved real and imaginary parts. Lattice
//!   points not listed map to zero.
//! * Key-value files: one `key = value` per line, `#` starts a comment.
//!   Keys may repeat (`term`).
//!
//! Symbol files for elliptic operators:
//!
//! ```text
//! order = 2
//! n = 2
//! dim = 1
//! time = 0 1            # optional, default [0, ∞)
//! term = 2,0 | 1 | 1    # multi-index | matrix | time function
//! term = 0,2 | 1
//! term = 0,0 | 0.5 0; 0 2+1i | poly 1 0.5
//! ```
//!
//! Matrices are rows separated by `;` with whitespace-separated complex
//! entries (`2`, `-1.5i`, `1+2i`), or `I` / `c*I`. Time functions are
//! `const c`, `poly c0 c1 …`, `exp r` or `table t0:v0 t1:v1 …`; omitted
//! means `const 1`. `laplacian = true` adds `|ξ|²` times the identity and
//! makes `order` default to 2.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::elliptic::{EllipticSymbol, TimeFunction};
use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, LatticePoint};
use crate::linalg::{self, CVec, Mat, C64};
use crate::pde::{Forcing, IvpSpec, PeriodicSpec};
use crate::symbol::{self, OperatorSymbol, Support};
use crate::transform::TrigPolynomial;

/// Shortest round-trip representation, so output is byte-stable.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn frequency_header(n: usize, joint: bool) -> Vec<String> {
    let mut h = Vec::with_capacity(n + 1);
    if joint {
        h.push("l".to_string());
    }
    h.extend((1..=n).map(|i| format!("k{i}")));
    h
}

/// Write `f` as polynomial CSV; `joint` labels the first frequency `l`.
pub fn write_polynomial<W: Write>(f: &TrigPolynomial, out: W, joint: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let spatial = if joint { f.n() - 1 } else { f.n() };
    let mut header = frequency_header(spatial, joint);
    for i in 1..=f.dim() {
        header.push(format!("re{i}"));
        header.push(format!("im{i}"));
    }
    w.write_record(&header)?;
    for (k, v) in f.modes() {
        let mut row: Vec<String> = k.coords().iter().map(|x| x.to_string()).collect();
        for z in v.iter() {
            row.push(fmt_f64(z.re));
            row.push(fmt_f64(z.im));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_field<T: FromStr>(s: &str, line: usize) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(format!("line {line}: cannot parse {s:?}")))
}

/// Read polynomial CSV; `n` and the coefficient size come from the header.
pub fn read_polynomial<R: Read>(input: R) -> Result<TrigPolynomial> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let header = r.headers()?.clone();
    let n = header.iter().take_while(|h| !h.starts_with("re")).count();
    let value_cols = header.len() - n;
    if n == 0 || value_cols == 0 || value_cols % 2 == 1 {
        return Err(Error::parse(format!(
            "bad polynomial header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut f = TrigPolynomial::zero(n, value_cols / 2);
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != header.len() {
            return Err(Error::parse(format!(
                "line {line}: expected {} fields, found {}",
                header.len(),
                rec.len()
            )));
        }
        let k: Vec<i64> = (0..n)
            .map(|c| parse_field(&rec[c], line))
            .collect::<Result<_>>()?;
        let mut x = CVec::zeros(value_cols / 2);
        for c in 0..value_cols / 2 {
            x[c] = C64::new(
                parse_field(&rec[n + 2 * c], line)?,
                parse_field(&rec[n + 2 * c + 1], line)?,
            );
        }
        f.add_mode(LatticePoint::new(k), &x);
    }
    Ok(f)
}

pub fn load_polynomial(path: &Path) -> Result<TrigPolynomial> {
    read_polynomial(std::fs::File::open(path)?)
}

/// Finitely supported symbol read from custom-symbol CSV.
pub fn read_symbol_table<R: Read>(input: R, n: usize) -> Result<OperatorSymbol> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(input);
    let mut table: BTreeMap<LatticePoint, Mat> = BTreeMap::new();
    let mut dim = None;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 1;
        // a header row is allowed
        if i == 0 && rec.get(0).is_some_and(|s| s.parse::<i64>().is_err()) {
            continue;
        }
        let reals = rec.len().checked_sub(n).filter(|&c| c > 0 && c % 2 == 0);
        let m = reals.map(|c| ((c / 2) as f64).sqrt().round() as usize);
        let m = match (reals, m) {
            (Some(c), Some(m)) if m * m * 2 == c => m,
            _ => {
                return Err(Error::parse(format!(
                    "line {line}: expected {n} indices and 2·m² reals"
                )))
            }
        };
        if *dim.get_or_insert(m) != m {
            return Err(Error::parse(format!(
                "line {line}: matrix size changed to {m}"
            )));
        }
        let k: Vec<i64> = (0..n)
            .map(|c| parse_field(&rec[c], line))
            .collect::<Result<_>>()?;
        let mut mat = linalg::zeros(m);
        for e in 0..m * m {
            mat[(e / m, e % m)] = C64::new(
                parse_field(&rec[n + 2 * e], line)?,
                parse_field(&rec[n + 2 * e + 1], line)?,
            );
        }
        table.insert(LatticePoint::new(k), mat);
    }
    let dim = dim.ok_or_else(|| Error::parse("symbol table is empty"))?;
    let mut lo = vec![i64::MAX; n];
    let mut hi = vec![i64::MIN; n];
    for k in table.keys() {
        for (a, (l, h)) in k.coords().iter().zip(lo.iter_mut().zip(hi.iter_mut())) {
            *l = (*l).min(*a);
            *h = (*h).max(*a);
        }
    }
    let support = Support::Box(LatticeBox::new(lo.into(), hi.into())?);
    Ok(OperatorSymbol::new(n, dim, support, move |k| {
        table.get(k).cloned().unwrap_or_else(|| linalg::zeros(dim))
    }))
}

/// Write the values of `m` on `window` as custom-symbol CSV.
pub fn write_symbol_table<W: Write>(m: &OperatorSymbol, window: &LatticeBox, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = frequency_header(m.n(), false);
    for r in 0..m.dim() {
        for c in 0..m.dim() {
            header.push(format!("re{}{}", r + 1, c + 1));
            header.push(format!("im{}{}", r + 1, c + 1));
        }
    }
    w.write_record(&header)?;
    for k in window.points() {
        let v = m.eval(k.coords());
        let mut row: Vec<String> = k.coords().iter().map(|x| x.to_string()).collect();
        for r in 0..m.dim() {
            for c in 0..m.dim() {
                row.push(fmt_f64(v[(r, c)].re));
                row.push(fmt_f64(v[(r, c)].im));
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Ordered `key = value` pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeyValues {
    pub entries: Vec<(String, String)>,
    /// Directory relative paths are resolved against.
    pub base: Option<PathBuf>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::parse(format!(
                    "line {}: expected key = value, got {line:?}",
                    i + 1
                ))
            })?;
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(KeyValues {
            entries,
            base: None,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut kv = KeyValues::parse(&std::fs::read_to_string(path)?)?;
        kv.base = path.parent().map(Path::to_path_buf);
        Ok(kv)
    }

    /// Last value for `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries
            .iter()
            .filter(move |(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::parse(format!("{key}: cannot parse {v:?}")))
            })
            .transpose()
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parsed(key)?
            .ok_or_else(|| Error::parse(format!("missing key {key:?}")))
    }

    pub fn path(&self, value: &str) -> PathBuf {
        let p = PathBuf::from(value);
        match &self.base {
            Some(base) if p.is_relative() => base.join(p),
            _ => p,
        }
    }
}

pub fn parse_complex(s: &str) -> Result<C64> {
    let t = s.trim();
    C64::from_str(t).map_err(|_| Error::parse(format!("cannot parse complex number {t:?}")))
}

/// `I`, `c*I`, or rows separated by `;`.
pub fn parse_matrix(s: &str, dim: usize) -> Result<Mat> {
    let t = s.trim();
    if t == "I" {
        return Ok(linalg::identity(dim));
    }
    if let Some(c) = t.strip_suffix("*I") {
        return Ok(linalg::scalar(dim, parse_complex(c)?));
    }
    if dim == 1 && !t.contains(';') && t.split_whitespace().count() == 1 {
        return Ok(linalg::scalar(1, parse_complex(t)?));
    }
    let rows: Vec<&str> = t.split(';').collect();
    if rows.len() != dim {
        return Err(Error::parse(format!(
            "matrix {t:?} has {} rows, expected {dim}",
            rows.len()
        )));
    }
    let mut m = linalg::zeros(dim);
    for (r, row) in rows.iter().enumerate() {
        let entries: Vec<&str> = row.split_whitespace().collect();
        if entries.len() != dim {
            return Err(Error::parse(format!(
                "matrix row {row:?} has {} entries, expected {dim}",
                entries.len()
            )));
        }
        for (c, e) in entries.iter().enumerate() {
            m[(r, c)] = parse_complex(e)?;
        }
    }
    Ok(m)
}

pub fn parse_time_function(s: &str) -> Result<TimeFunction> {
    let mut words = s.split_whitespace();
    let kind = words.next().unwrap_or("const");
    let nums = |w: std::str::SplitWhitespace| -> Result<Vec<f64>> {
        w.map(|x| {
            x.parse()
                .map_err(|_| Error::parse(format!("bad number {x:?} in time function {s:?}")))
        })
        .collect()
    };
    let g = match kind {
        "const" => TimeFunction::constant(*nums(words)?.first().unwrap_or(&1.0)),
        "poly" => TimeFunction::Polynomial(nums(words)?),
        "exp" => TimeFunction::Exp(
            *nums(words)?
                .first()
                .ok_or_else(|| Error::parse("exp needs a rate"))?,
        ),
        "table" => {
            let points = words
                .map(|w| {
                    let (t, v) = w
                        .split_once(':')
                        .ok_or_else(|| Error::parse(format!("table entry {w:?} is not t:v")))?;
                    Ok((parse_field(t, 0)?, parse_field(v, 0)?))
                })
                .collect::<Result<Vec<_>>>()?;
            TimeFunction::Table(points)
        }
        other => return Err(Error::parse(format!("unknown time function {other:?}"))),
    };
    match &g {
        TimeFunction::Polynomial(c) if c.is_empty() => Err(Error::parse("poly needs coefficients")),
        TimeFunction::Table(p) if p.is_empty() => Err(Error::parse("table needs entries")),
        _ => Ok(g),
    }
}

fn parse_multi_index(s: &str, n: usize) -> Result<Vec<u32>> {
    let alpha: Vec<u32> = s
        .split(',')
        .map(|x| parse_field(x, 0))
        .collect::<Result<_>>()?;
    if alpha.len() != n {
        return Err(Error::parse(format!(
            "multi-index {s:?} has length {}, expected {n}",
            alpha.len()
        )));
    }
    Ok(alpha)
}

/// Elliptic symbol from key-value entries (see the module docs).
pub fn elliptic_from_keys(kv: &KeyValues) -> Result<EllipticSymbol> {
    let laplacian = kv.get("laplacian").is_some_and(|v| v == "true");
    let order: u32 = match kv.parsed("order")? {
        Some(m) => m,
        None if laplacian => 2,
        None => return Err(Error::parse("missing key \"order\"")),
    };
    let n: usize = kv.required("n")?;
    let dim: usize = kv.parsed("dim")?.unwrap_or(1);
    let time = match kv.get("time") {
        Some(v) => {
            let t: Vec<f64> = v
                .split_whitespace()
                .map(|x| parse_field(x, 0))
                .collect::<Result<_>>()?;
            match t[..] {
                [a, b] => (a, b),
                _ => return Err(Error::parse(format!("time expects two numbers, got {v:?}"))),
            }
        }
        None => (0.0, f64::INFINITY),
    };
    let mut a = EllipticSymbol::new(order, n, dim, time)?;
    if laplacian {
        for i in 0..n {
            let mut alpha = vec![0; n];
            alpha[i] = 2;
            a.add_term(alpha, linalg::identity(dim), TimeFunction::constant(1.0))?;
        }
    }
    for term in kv.all("term") {
        let parts: Vec<&str> = term.split('|').collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(Error::parse(format!(
                "term {term:?} needs `alpha | matrix [| time]`"
            )));
        }
        let g = parts
            .get(2)
            .map_or(Ok(TimeFunction::constant(1.0)), |s| parse_time_function(s))?;
        a.add_term(
            parse_multi_index(parts[0], n)?,
            parse_matrix(parts[1], dim)?,
            g,
        )?;
    }
    if a.coefficients().is_empty() {
        return Err(Error::parse("symbol file has no terms"));
    }
    Ok(a)
}

pub fn load_elliptic(path: &Path) -> Result<EllipticSymbol> {
    elliptic_from_keys(&KeyValues::load(path)?)
}

fn parse_box(s: &str, n: usize) -> Result<LatticeBox> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| Error::parse(format!("box {s:?} is not lo..hi")))?;
    LatticeBox::cube(n, parse_field(a, 0)?, parse_field(b, 0)?)
}

/// IVP from a symbol file with extra keys:
/// `initial` (polynomial CSV), `forcing` (polynomial CSV, constant in time)
/// or repeated `forcing_at = t : path` (table), `final_time`, `steps`,
/// `box = lo..hi`, `outputs = t1 t2 …`.
pub fn ivp_from_keys(kv: &KeyValues) -> Result<IvpSpec> {
    let symbol = elliptic_from_keys(kv)?;
    let (n, dim) = (symbol.n(), symbol.dim());
    let initial = match kv.get("initial") {
        Some(p) => load_polynomial(&kv.path(p))?,
        None => TrigPolynomial::zero(n, dim),
    };
    let mut table = Vec::new();
    for entry in kv.all("forcing_at") {
        let (t, p) = entry
            .split_once(':')
            .ok_or_else(|| Error::parse(format!("forcing_at {entry:?} is not t : path")))?;
        table.push((
            parse_field::<f64>(t, 0)?,
            load_polynomial(&kv.path(p.trim()))?,
        ));
    }
    table.sort_by(|a, b| a.0.total_cmp(&b.0));
    let forcing = match (kv.get("forcing"), table.is_empty()) {
        (Some(_), false) => return Err(Error::parse("use either forcing or forcing_at, not both")),
        (Some(p), true) => Forcing::Constant(load_polynomial(&kv.path(p))?),
        (None, false) => Forcing::Table(table),
        (None, true) => Forcing::Zero,
    };
    let modes = match kv.get("box") {
        Some(b) => parse_box(b, n)?,
        None => {
            let k = initial.max_frequency().max(8);
            LatticeBox::cube(n, -k, k)?
        }
    };
    let outputs = match kv.get("outputs") {
        Some(v) => v
            .split_whitespace()
            .map(|x| parse_field(x, 0))
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    Ok(IvpSpec::new(
        symbol,
        initial,
        kv.required("final_time")?,
        kv.parsed("steps")?.unwrap_or(100),
        modes,
    )
    .with_forcing(forcing)
    .with_output_times(outputs))
}

/// Periodic problem from a symbol file with `forcing` (joint polynomial CSV),
/// `omega` and optional `omega0`.
pub fn periodic_from_keys(kv: &KeyValues) -> Result<PeriodicSpec> {
    let symbol = elliptic_from_keys(kv)?;
    let path = kv
        .get("forcing")
        .ok_or_else(|| Error::parse("missing key \"forcing\""))?;
    let forcing = load_polynomial(&kv.path(path))?;
    Ok(PeriodicSpec {
        symbol,
        omega: kv.parsed("omega")?.unwrap_or(1.0),
        omega0: kv.parsed("omega0")?.unwrap_or(0.0),
        forcing,
    })
}

/// Symbols by registry key: `identity`, `riesz`, `neg`, `segment:j`,
/// `shift:k1,…,kn:<key>`, `resolvent:<λ>[:<symbol file>]` (default `−Δ`),
/// `custom:<csv file>`.
pub fn symbol_from_key(key: &str, n: usize, dim: usize) -> Result<OperatorSymbol> {
    let (head, rest) = key
        .split_once(':')
        .map_or((key, None), |(a, b)| (a, Some(b)));
    match (head, rest) {
        ("identity", None) => Ok(OperatorSymbol::identity(n, dim)),
        ("riesz", None) => Ok(symbol::riesz_symbol(n, dim)),
        ("neg", None) => Ok(symbol::neg_symbol(n, dim)),
        ("segment", Some(j)) => symbol::segment_symbol(parse_field(j, 0)?, n, dim),
        ("shift", Some(r)) => {
            let (k, inner) = r
                .split_once(':')
                .ok_or_else(|| Error::parse("shift needs shift:k:<key>"))?;
            let alpha: Vec<i64> = k
                .split(',')
                .map(|x| parse_field(x, 0))
                .collect::<Result<_>>()?;
            if alpha.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: alpha.len(),
                });
            }
            Ok(symbol_from_key(inner, n, dim)?.shift(&alpha.into()))
        }
        ("resolvent", Some(r)) => {
            let (lam, file) = r.split_once(':').map_or((r, None), |(a, b)| (a, Some(b)));
            let lambda = parse_complex(lam)?;
            let a = match file {
                Some(f) => load_elliptic(Path::new(f))?,
                None => EllipticSymbol::negative_laplacian(n, dim),
            };
            if a.n() != n || a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.dim(),
                });
            }
            let window = LatticeBox::cube(n, -64, 64)?;
            crate::elliptic::resolvent_multiplier_unchecked(&a, lambda, a.time_domain().0, &window)
        }
        ("custom", Some(file)) => {
            let m = read_symbol_table(std::fs::File::open(file)?, n)?;
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
            Ok(m)
        }
        _ => Err(Error::parse(format!("unknown symbol key {key:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_polynomial, seeded};

    #[test]
    fn polynomial_round_trip() {
        let mut rng = seeded(1);
        let f = random_polynomial(&mut rng, &LatticeBox::cube(2, -2, 2).unwrap(), 3);
        let mut buf = Vec::new();
        write_polynomial(&f, &mut buf, false).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k1,k2,re1,im1,re2,im2,re3,im3\n"));
        assert_eq!(read_polynomial(&buf[..]).unwrap(), f);
        let mut joint = Vec::new();
        write_polynomial(&f, &mut joint, true).unwrap();
        assert!(String::from_utf8(joint).unwrap().starts_with("l,k1,"));
    }

    #[test]
    fn polynomial_errors() {
        assert!(read_polynomial("k1,re1\n1,2\n".as_bytes()).is_err());
        assert!(read_polynomial("k1,re1,im1\nx,2,0\n".as_bytes()).is_err());
        let f = read_polynomial("k1,re1,im1\n1,2,0\n1,1,1\n".as_bytes()).unwrap();
        assert_eq!(f.coefficient(&[1])[0], C64::new(3.0, 1.0));
    }

    #[test]
    fn symbol_table_round_trip() {
        let m = symbol::riesz_symbol(2, 2).scale(C64::new(0.5, -1.0));
        let window = LatticeBox::cube(2, -2, 2).unwrap();
        let mut buf = Vec::new();
        write_symbol_table(&m, &window, &mut buf).unwrap();
        let back = read_symbol_table(&buf[..], 2).unwrap();
        for k in window.points() {
            assert_eq!(back.eval(k.coords()), m.eval(k.coords()));
        }
        assert!(linalg::is_zero(&back.eval(&[5, 5])));
        assert!(read_symbol_table("0,1,0,0\n".as_bytes(), 1).is_err());
    }

    #[test]
    fn matrices_and_time_functions() {
        assert_eq!(parse_matrix("I", 2).unwrap(), linalg::identity(2));
        assert_eq!(
            parse_matrix("2*I", 2).unwrap(),
            linalg::scalar(2, C64::new(2.0, 0.0))
        );
        let m = parse_matrix("1 2i; -1+1i 0", 2).unwrap();
        assert_eq!(m[(0, 1)], C64::new(0.0, 2.0));
        assert_eq!(m[(1, 0)], C64::new(-1.0, 1.0));
        assert!(parse_matrix("1 2", 2).is_err());
        assert_eq!(parse_time_function("poly 1 2").unwrap().eval(2.0), 5.0);
        assert_eq!(parse_time_function("table 0:0 2:4").unwrap().eval(1.0), 2.0);
        assert!(parse_time_function("sin 1").is_err());
    }

    #[test]
    fn elliptic_file() {
        let text = "order = 2\nn = 2\ndim = 2\ntime = 0 1\n# comment\nterm = 2,0 | I\nterm = 0,2 | I\nterm = 1,0 | 0 1; -1 0 | poly 0 1\n";
        let a = elliptic_from_keys(&KeyValues::parse(text).unwrap()).unwrap();
        let v = a.eval(0.5, &[1.0, 2.0]).unwrap();
        assert_eq!(v[(0, 0)], C64::new(5.0, 0.0));
        assert_eq!(v[(0, 1)], C64::new(0.5, 0.0));
        assert!(!a.is_time_constant());
        let lap =
            elliptic_from_keys(&KeyValues::parse("order=2\nn=3\nlaplacian=true").unwrap()).unwrap();
        assert_eq!(lap, EllipticSymbol::negative_laplacian(3, 1));
        assert!(
            elliptic_from_keys(&KeyValues::parse("order=2\nn=2\nterm = 3,0 | 1").unwrap()).is_err()
        );
        assert!(KeyValues::parse("no equals sign").is_err());
    }

    #[test]
    fn registry() {
        assert_eq!(
            symbol_from_key("riesz", 1, 1).unwrap().eval(&[3])[(0, 0)].re,
            1.0
        );
        assert_eq!(
            symbol_from_key("segment:3", 1, 1).unwrap().eval(&[7])[(0, 0)].re,
            1.0
        );
        let r = symbol_from_key("resolvent:1", 2, 1).unwrap();
        assert!((r.eval(&[1, 2])[(0, 0)].re - 1.0 / 6.0).abs() < 1e-15);
        let s = symbol_from_key("shift:2:riesz", 1, 1).unwrap();
        assert_eq!(s.eval(&[1])[(0, 0)].re, 0.0);
        assert!(symbol_from_key("bogus", 1, 1).is_err());
    }

    #[test]
    fn solver_specs_from_files() {
        let dir = tempfile::tempdir().unwrap();
        let init = dir.path().join("u0.csv");
        std::fs::write(&init, "k1,re1,im1\n1,1,0\n").unwrap();
        let joint = dir.path().join("f.csv");
        std::fs::write(&joint, "l,k1,re1,im1\n2,1,1,0\n").unwrap();
        let spec_path = dir.path().join("ivp.txt");
        std::fs::write(
            &spec_path,
            "order=2\nn=1\nlaplacian=true\ninitial=u0.csv\nfinal_time=1\nbox=-4..4\n",
        )
        .unwrap();
        let ivp = ivp_from_keys(&KeyValues::load(&spec_path).unwrap()).unwrap();
        let sol = crate::pde::solve_ivp(&ivp).unwrap();
        assert!((sol.last().coefficient(&[1])[0].re - (-1.0f64).exp()).abs() < 1e-12);
        let per_path = dir.path().join("per.txt");
        std::fs::write(
            &per_path,
            "order=2\nn=1\nlaplacian=true\nforcing=f.csv\nomega=1\n",
        )
        .unwrap();
        let per = periodic_from_keys(&KeyValues::load(&per_path).unwrap()).unwrap();
        let u = crate::pde::solve_periodic(&per).unwrap();
        assert!((u.coefficient(&[2, 1])[0] - C64::new(2.0, 2.0).inv()).norm() < 1e-15);
    }
}
