//! Hecke coefficient tables of plusforms: file format, base change of rational
//! elliptic curves, and multiplicative extension from prime values.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadfield::{divisors, factor, is_prime, split_type, Field, QuadInt, SplitType};

/// `y² + a1·xy + a3·y = x³ + a2·x² + a4·x + a6`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipticCurveQ {
    pub a: [i64; 5],
    pub conductor_hint: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduction {
    Good,
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

impl EllipticCurveQ {
    pub fn new(a: [i64; 5]) -> Result<EllipticCurveQ> {
        let e = EllipticCurveQ { a, conductor_hint: None };
        if e.discriminant() == 0 {
            return Err(Error::InvalidInput(format!("curve {a:?} is singular")));
        }
        Ok(e)
    }

    fn b_invariants(&self) -> (i128, i128, i128, i128) {
        let [a1, a2, a3, a4, a6] = self.a.map(|v| v as i128);
        let b2 = a1 * a1 + 4 * a2;
        let b4 = 2 * a4 + a1 * a3;
        let b6 = a3 * a3 + 4 * a6;
        let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        (b2, b4, b6, b8)
    }

    pub fn discriminant(&self) -> i128 {
        let (b2, b4, b6, b8) = self.b_invariants();
        -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    }

    pub fn bad_primes(&self) -> Vec<u64> {
        crate::quadfield::rational_prime_factors(self.discriminant().unsigned_abs() as u64)
    }

    pub fn reduction(&self, p: u64) -> Reduction {
        if self.discriminant() % p as i128 != 0 {
            return Reduction::Good;
        }
        match trace_of_frobenius(self, p) {
            1 => Reduction::SplitMultiplicative,
            -1 => Reduction::NonsplitMultiplicative,
            _ => Reduction::Additive,
        }
    }
}

/// `p + 1 − #E(F_p)` counting every point of the (possibly singular) reduction.
fn trace_of_frobenius(e: &EllipticCurveQ, p: u64) -> i64 {
    let pi = p as i64;
    if p < 50 {
        let [a1, a2, a3, a4, a6] = e.a.map(|v| v.rem_euclid(pi));
        let mut count = 1i64;
        for x in 0..pi {
            for y in 0..pi {
                let lhs = (y * y + a1 * x * y + a3 * y).rem_euclid(pi);
                let rhs = (x * x * x + a2 * x * x + a4 * x + a6).rem_euclid(pi);
                if lhs == rhs {
                    count += 1;
                }
            }
        }
        return pi + 1 - count;
    }
    // #affine points = Σ_x (1 + (D(x)/p)) with D = 4x³ + b2x² + 2b4x + b6
    let (b2, b4, b6, _) = e.b_invariants();
    let m = p as i128;
    let poly = |x: i128| (((4 * x + b2) * x + 2 * b4) * x + b6).rem_euclid(m) as u64;
    let mut legendre = vec![-1i8; p as usize];
    legendre[0] = 0;
    for y in 1..=(p / 2) {
        legendre[((y * y) % p) as usize] = 1;
    }
    let sub = |a: u64, b: u64| if a >= b { a - b } else { a + p - b };
    let add = |a: u64, b: u64| {
        let s = a + b;
        if s >= p {
            s - p
        } else {
            s
        }
    };
    let (f0, f1, f2, f3) = (poly(0), poly(1), poly(2), poly(3));
    let mut v = f0;
    let mut d1 = sub(f1, f0);
    let mut d2 = sub(sub(f2, f1), d1);
    let d3 = sub(sub(sub(f3, f2), sub(f2, f1)), d2);
    let mut s: i64 = 0;
    for _ in 0..p {
        s += legendre[v as usize] as i64;
        v = add(v, d1);
        d1 = add(d1, d2);
        d2 = add(d2, d3);
    }
    -s
}

/// `a_p = p + 1 − #E(F_p)` at a prime of good reduction.
pub fn ap_point_count(e: &EllipticCurveQ, p: u64) -> Result<i64> {
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    if e.discriminant() % p as i128 == 0 {
        return Err(Error::BadReduction(p));
    }
    Ok(trace_of_frobenius(e, p))
}

/// Coefficients `c(α)` keyed by the canonical generator of `(α)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable {
    pub field: Field,
    pub level: QuadInt,
    pub norm_bound: u64,
    map: HashMap<(i64, i64), i64>,
}

impl CoeffTable {
    pub fn new(field: Field, level: QuadInt, norm_bound: u64) -> CoeffTable {
        CoeffTable { field, level: level.canonical(), norm_bound, map: HashMap::new() }
    }

    pub fn insert(&mut self, alpha: QuadInt, c: i64) {
        let g = alpha.canonical();
        self.map.insert((g.a, g.b), c);
    }

    /// `c(α)`, or `None` when `(α)` is outside the table.
    pub fn get(&self, alpha: QuadInt) -> Option<i64> {
        if alpha.is_zero() {
            return None;
        }
        let g = alpha.canonical();
        self.map.get(&(g.a, g.b)).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Entries sorted by norm, then generator.
    pub fn entries(&self) -> Vec<(QuadInt, i64)> {
        let mut v: Vec<(QuadInt, i64)> = self.map.iter().map(|(&(a, b), &c)| (self.field.elem(a, b), c)).collect();
        v.sort();
        v
    }

    /// Every coefficient multiplied by `k`.
    pub fn scaled(&self, k: i64) -> CoeffTable {
        let mut t = self.clone();
        for v in t.map.values_mut() {
            *v *= k;
        }
        t
    }

    /// Warnings for good primes whose coefficient breaks `|c(π)| ≤ 2√N(π)`.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (g, c) in self.entries() {
            let n = g.norm() as u64;
            let is_prime_ideal = factor(g).map(|f| f.primes.len() == 1 && f.primes[0].1 == 1).unwrap_or(false);
            if is_prime_ideal && !g.divides(self.level) && (c * c) as f64 > 4.0 * n as f64 {
                out.push(format!("coefficient {c} at prime {g} (norm {n}) violates the Ramanujan bound"));
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(fs::File::create(path)?);
        writeln!(w, "# field={}", self.field.d())?;
        writeln!(w, "# level={}", self.level)?;
        writeln!(w, "# norm_bound={}", self.norm_bound)?;
        writeln!(w, "gen_a,gen_b,coeff")?;
        for (g, c) in self.entries() {
            writeln!(w, "{},{},{}", g.a, g.b, c)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<CoeffTable> {
        let r = BufReader::new(fs::File::open(path)?);
        let mut field = None;
        let mut level = None;
        let mut bound = None;
        let mut rows = Vec::new();
        let mut header_seen = false;
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let perr = |msg: String| Error::Parse { line: lineno, msg };
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(h) = t.strip_prefix('#') {
                let (k, v) = h.trim().split_once('=').ok_or_else(|| perr(format!("malformed header '{t}'")))?;
                match k.trim() {
                    "field" => {
                        let d: i64 = v.trim().parse().map_err(|_| perr(format!("bad field '{v}'")))?;
                        field = Some(Field::new(d)?);
                    }
                    "level" => level = Some((v.trim().to_string(), lineno)),
                    "norm_bound" => bound = Some(v.trim().parse::<u64>().map_err(|_| perr(format!("bad norm bound '{v}'")))?),
                    _ => {}
                }
                continue;
            }
            if !header_seen && t.starts_with("gen_a") {
                header_seen = true;
                continue;
            }
            let cols: Vec<&str> = t.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(perr(format!("expected 3 columns, found {}", cols.len())));
            }
            let nums: std::result::Result<Vec<i64>, _> = cols.iter().map(|c| c.parse::<i64>()).collect();
            let nums = nums.map_err(|_| perr(format!("non-integer entry in '{t}'")))?;
            rows.push((lineno, nums[0], nums[1], nums[2]));
        }
        let field = field.ok_or_else(|| Error::Parse { line: 1, msg: "missing '# field=' header".into() })?;
        let (lv, lline) = level.ok_or_else(|| Error::Parse { line: 1, msg: "missing '# level=' header".into() })?;
        let level = field.parse_int(&lv).map_err(|e| Error::Parse { line: lline, msg: e.to_string() })?;
        let bound = bound.ok_or_else(|| Error::Parse { line: 1, msg: "missing '# norm_bound=' header".into() })?;
        let mut t = CoeffTable::new(field, level, bound);
        for (lineno, a, b, c) in rows {
            let g = field.elem(a, b);
            if g.is_zero() {
                return Err(Error::Parse { line: lineno, msg: "zero generator".into() });
            }
            t.insert(g, c);
        }
        match t.get(field.one()) {
            Some(1) => Ok(t),
            Some(v) => Err(Error::Parse { line: 0, msg: format!("c(1) must be 1, found {v}") }),
            None => Err(Error::Parse { line: 0, msg: "missing the row for c(1)".into() }),
        }
    }
}

/// All prime ideals of norm at most `bound`, as canonical generators sorted by norm.
pub fn prime_ideals_up_to(f: Field, bound: u64) -> Vec<QuadInt> {
    let mut out = Vec::new();
    if bound < 2 {
        return out;
    }
    let sieve = sieve_primes(bound);
    for p in sieve {
        match split_type(f, p) {
            SplitType::Split(a, b) => {
                out.push(a);
                out.push(b);
            }
            SplitType::Ramified(a) => out.push(a),
            SplitType::Inert => {
                if p.saturating_mul(p) <= bound {
                    out.push(f.int(p as i64));
                }
            }
        }
    }
    out.sort();
    out
}

pub(crate) fn sieve_primes(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut is = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if is[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                is[j] = false;
                j += i;
            }
        }
    }
    out
}

/// Fills in `c` on every ideal of norm at most `norm_bound` from the prime values
/// via `c(π^{k+1}) = c(π)c(π^k) − χ(π)N(π)c(π^{k−1})` and multiplicativity.
pub fn extend_multiplicative(table: &CoeffTable, norm_bound: u64) -> Result<CoeffTable> {
    let f = table.field;
    let primes: Vec<(QuadInt, u64, i64, i64)> = prime_ideals_up_to(f, norm_bound)
        .into_iter()
        .map(|p| {
            let c = table.get(p).ok_or_else(|| Error::IncompleteTable(p.to_string()))?;
            let chi = if p.divides(table.level) { 0 } else { 1 };
            Ok((p, p.norm() as u64, c, chi))
        })
        .collect::<Result<_>>()?;
    let mut out = CoeffTable::new(f, table.level, norm_bound);
    out.insert(f.one(), 1);
    let mut stack = vec![(0usize, f.one(), 1u64, 1i64)];
    while let Some((start, g, n, c)) = stack.pop() {
        for (j, &(p, np, cp, chi)) in primes.iter().enumerate().skip(start) {
            if n * np > norm_bound {
                break;
            }
            let (mut prev2, mut prev) = (1i64, cp);
            let mut gk = g * p;
            let mut nk = n * np;
            loop {
                out.insert(gk, c * prev);
                stack.push((j + 1, gk.canonical(), nk, c * prev));
                if nk * np > norm_bound {
                    break;
                }
                let next = cp * prev - chi * np as i64 * prev2;
                prev2 = prev;
                prev = next;
                gk = gk * p;
                nk *= np;
            }
        }
    }
    Ok(out)
}

/// Base change of `E` to `K`, extended to every ideal of norm at most `norm_bound`.
/// Primes above bad primes of `E` form the level and must be of multiplicative type.
pub fn base_change_table(e: &EllipticCurveQ, f: Field, norm_bound: u64) -> Result<CoeffTable> {
    if norm_bound < 2 {
        return Err(Error::InvalidInput("norm bound must be at least 2".into()));
    }
    let level = base_change_level(e, f)?;
    let mut primes = CoeffTable::new(f, level, norm_bound);
    primes.insert(f.one(), 1);
    for p in sieve_primes(norm_bound) {
        let st = split_type(f, p);
        if matches!(st, SplitType::Inert) && p * p > norm_bound {
            continue;
        }
        let ap = trace_of_frobenius(e, p);
        let good = e.reduction(p) == Reduction::Good;
        match st {
            SplitType::Split(a, b) => {
                primes.insert(a, ap);
                primes.insert(b, ap);
            }
            SplitType::Ramified(a) => primes.insert(a, ap),
            SplitType::Inert => primes.insert(f.int(p as i64), if good { ap * ap - 2 * p as i64 } else { ap * ap }),
        }
    }
    extend_multiplicative(&primes, norm_bound)
}

/// Product of the primes of `K` above the bad primes of `E`.
pub fn base_change_level(e: &EllipticCurveQ, f: Field) -> Result<QuadInt> {
    let mut level = f.one();
    for p in e.bad_primes() {
        if e.reduction(p) == Reduction::Additive {
            return Err(Error::UnsupportedLevel {
                level: format!("conductor divisible by {p}²"),
                reason: format!("additive reduction at {p}; only squarefree levels are supported"),
            });
        }
        for pi in crate::quadfield::primes_above(f, p) {
            level = level * pi;
        }
    }
    Ok(level.canonical())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SourceConfig {
    BaseChange { curve: [i64; 5] },
    Table { path: String },
}

/// The JSON form of a [`FormSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormConfig {
    pub field: i64,
    pub level: String,
    pub w: BTreeMap<String, i32>,
    pub source: SourceConfig,
    pub norm_bound: u64,
}

/// A plusform: level, Atkin–Lehner signs and Hecke coefficients.
#[derive(Clone, Debug)]
pub struct FormSpec {
    pub field: Field,
    pub level: QuadInt,
    /// Atkin–Lehner sign per canonical divisor of the level.
    pub w: BTreeMap<(i64, i64), i32>,
    pub table: CoeffTable,
    pub config: FormConfig,
}

impl FormSpec {
    pub fn from_config(cfg: &FormConfig, base_dir: Option<&Path>) -> Result<FormSpec> {
        let field = Field::new(cfg.field)?;
        let level = field.parse_int(&cfg.level)?.canonical();
        if level.is_zero() || !factor(level)?.is_squarefree() {
            return Err(Error::UnsupportedLevel { level: cfg.level.clone(), reason: "level must be nonzero and squarefree".into() });
        }
        let table = match &cfg.source {
            SourceConfig::BaseChange { curve } => {
                let e = EllipticCurveQ::new(*curve)?;
                let derived = base_change_level(&e, field)?;
                if derived != level {
                    return Err(Error::Config(format!(
                        "level {} does not match the base-change level {} of the curve",
                        level, derived
                    )));
                }
                base_change_table(&e, field, cfg.norm_bound)?
            }
            SourceConfig::Table { path } => {
                let p = Path::new(path);
                let p = match base_dir {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.to_path_buf(),
                };
                let t = CoeffTable::load(&p)?;
                if t.field != field || t.level != level {
                    return Err(Error::Config("table field or level does not match the form".into()));
                }
                t
            }
        };
        FormSpec::new(table, &cfg.w, cfg.clone())
    }

    pub fn new(table: CoeffTable, w: &BTreeMap<String, i32>, config: FormConfig) -> Result<FormSpec> {
        let field = table.field;
        let level = table.level;
        let divs = divisors(level)?;
        let mut wmap = BTreeMap::new();
        for (k, &v) in w {
            let d = field.parse_int(k)?.canonical();
            if !divs.contains(&d) {
                return Err(Error::InvalidDivisor { divisor: k.clone(), level: level.to_string() });
            }
            if v != 1 && v != -1 {
                return Err(Error::Config(format!("Atkin-Lehner sign for {k} must be +1 or -1, got {v}")));
            }
            wmap.insert((d.a, d.b), v);
        }
        Ok(FormSpec { field, level, w: wmap, table, config })
    }

    pub fn load(path: &Path) -> Result<FormSpec> {
        let cfg: FormConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
        FormSpec::from_config(&cfg, path.parent())
    }

    /// Atkin–Lehner sign `w_𝔢` for the divisor `(e)`.
    pub fn atkin_lehner(&self, e: QuadInt) -> Result<i32> {
        let g = e.canonical();
        if g.is_unit() {
            return Ok(1);
        }
        self.w
            .get(&(g.a, g.b))
            .copied()
            .ok_or_else(|| Error::Config(format!("no Atkin-Lehner sign configured for the divisor {g}")))
    }

    /// Same form with every coefficient scaled by `k`.
    pub fn scaled(&self, k: i64) -> FormSpec {
        FormSpec { table: self.table.scaled(k), ..self.clone() }
    }
}
