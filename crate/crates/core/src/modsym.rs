//! Modular symbols `⟨a/c⟩ = Λ(F, 1, a/c)` of a plusform, evaluated from the
//! Fourier–Bessel expansion by splitting the vertical path at the fixed height of
//! the Atkin–Lehner involution and summing both closed-form tails.
//!
//! For `r = a/c` and `α ∈ O_K` write `α·a·c̄ = u + vω`; the additive character is
//! then exactly `ψ(αr/√d_K) = e(v / N(c))`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::coeffs::FormSpec;
use crate::enumerate::CuspFraction;
use crate::error::{Error, Result};
use crate::quad::{self, GaussLegendre};
use crate::quadfield::{inverse_mod, qi_gcd, Field, QuadInt, Residues};
use crate::special::{gamma_real, k0, k1, weighted_k0_tail};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    TwoTail,
    Quadrature,
    /// The cusp at infinity, whose symbol is zero by convention.
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolValue {
    pub a: QuadInt,
    pub c: QuadInt,
    pub value: f64,
    pub err: f64,
    pub terms: u64,
    pub method: Method,
}

/// Coefficients `c(α)` on every element of norm at most the table bound, stored
/// by rows of constant `ω`-coordinate.
#[derive(Clone, Debug)]
pub struct ElementGrid {
    field: Field,
    pub max_norm: i64,
    bmax: i64,
    rows: Vec<(i64, Vec<i32>)>,
}

fn isqrt(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

impl ElementGrid {
    pub fn new(form: &FormSpec) -> ElementGrid {
        let f = form.field;
        let max_norm = form.table.norm_bound as i64;
        let dk = f.disc().abs();
        let bmax = isqrt(4 * max_norm / dk);
        let mut rows = Vec::with_capacity((2 * bmax + 1) as usize);
        for b in -bmax..=bmax {
            let (lo, hi) = Self::row_range(f, max_norm, b);
            let coeffs = (lo..=hi)
                .map(|a| {
                    let x = f.elem(a, b);
                    if x.is_zero() || x.norm() > max_norm {
                        0
                    } else {
                        form.table.get(x).unwrap_or(0) as i32
                    }
                })
                .collect();
            rows.push((lo, coeffs));
        }
        ElementGrid { field: f, max_norm, bmax, rows }
    }

    /// `a`-range of the row `b` inside the disc `N(a + bω) ≤ r2`.
    fn row_range(f: Field, r2: i64, b: i64) -> (i64, i64) {
        let t = f.disc();
        let disc = 4 * r2 - b * b * t.abs();
        if disc < 0 {
            return (1, 0);
        }
        let s = isqrt(disc);
        let mut lo = (-b * t - s).div_euclid(2);
        let mut hi = (-b * t + s + 1).div_euclid(2);
        while f.elem(lo, b).norm() > r2 {
            lo += 1;
        }
        while lo > i64::MIN + 1 && f.elem(lo - 1, b).norm() <= r2 {
            lo -= 1;
        }
        while hi >= lo && f.elem(hi, b).norm() > r2 {
            hi -= 1;
        }
        while f.elem(hi + 1, b).norm() <= r2 {
            hi += 1;
        }
        (lo, hi)
    }

    /// Visits every nonzero `α` with `N(α) ≤ r2`, row by row, as
    /// `(b, first a, coefficients along the row)`.
    pub(crate) fn rows_within(&self, r2: i64) -> impl Iterator<Item = (i64, i64, &[i32])> + '_ {
        let f = self.field;
        let dk = f.disc().abs();
        let bm = isqrt(4 * r2 / dk).min(self.bmax);
        (-bm..=bm).filter_map(move |b| {
            let (lo, hi) = Self::row_range(f, r2, b);
            if hi < lo {
                return None;
            }
            let (row_lo, coeffs) = &self.rows[(b + self.bmax) as usize];
            let s = (lo - row_lo) as usize;
            let e = (hi - row_lo) as usize;
            Some((b, lo, &coeffs[s..=e]))
        })
    }
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::TwoTail => "two_tail",
            Method::Quadrature => "quadrature",
            Method::Infinity => "infinity",
        }
    }
}

/// Per-form evaluation context.
pub struct SymbolEvaluator<'a> {
    pub form: &'a FormSpec,
    pub grid: ElementGrid,
    pub tol: f64,
    /// `G` in `|c(α)| ≤ G·|α|^{1.25}` over the table.
    pub growth: f64,
    /// `4π / √|d_K|`.
    kappa: f64,
}

/// `∫_X^∞ t^{1.25} K₁(t) dt`.
fn growth_tail(x: f64) -> f64 {
    quad::adaptive_to_infinity(|t| t.powf(1.25) * k1(t), x, 4.0, 1e-300, 1e-8).0
}

/// Denominator-level data shared by all numerators: `e`, `w_e` and the product
/// `|e|·|c|²` of the two split heights' reciprocals.
#[derive(Clone, Copy, Debug)]
pub struct SplitData {
    pub e: QuadInt,
    pub w: i32,
    pub k: f64,
}

pub fn split_data(form: &FormSpec, c: QuadInt) -> Result<SplitData> {
    let g = qi_gcd(c, form.level);
    let e = form.level.div_exact(g).expect("gcd divides the level").canonical();
    let w = form.atkin_lehner(e)?;
    let k = e.abs() * c.norm() as f64;
    Ok(SplitData { e, w, k })
}

/// `−(e·a)⁻¹ mod c`, the partner numerator in the functional equation.
pub fn partner_numerator(a: QuadInt, c: QuadInt, e: QuadInt) -> Result<QuadInt> {
    let inv = inverse_mod(e * a, c).ok_or_else(|| Error::InvalidInput(format!("{a} is not a unit mod {c}")))?;
    Ok(-inv)
}

/// Tail values `T(a/c, Y)` for a set of numerators mod `c`, indexed by residue.
pub struct TailBatch {
    pub res: Residues,
    pub values: Vec<f64>,
    pub err: f64,
    pub terms: u64,
}

impl TailBatch {
    pub fn get(&self, a: QuadInt) -> f64 {
        self.values[self.res.index(a)]
    }
}

impl<'a> SymbolEvaluator<'a> {
    pub fn new(form: &'a FormSpec, tol: f64) -> Result<SymbolEvaluator<'a>> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
        }
        let grid = ElementGrid::new(form);
        let mut growth: f64 = 1.0;
        for (g, c) in form.table.entries() {
            growth = growth.max(c.unsigned_abs() as f64 / (g.norm() as f64).powf(0.625));
        }
        let kappa = 4.0 * PI / form.field.sqrt_abs_disc();
        Ok(SymbolEvaluator { form, grid, tol, growth, kappa })
    }

    pub fn field(&self) -> Field {
        self.form.field
    }

    /// Bound on `Σ_{|α|>R} |c(α)|·(Y/a)K₁(aY)` from the lattice-point density.
    pub fn truncation_bound(&self, r: f64, y: f64) -> f64 {
        let covol = self.field().covol();
        let pre = TAU * self.growth / (covol * self.kappa * self.kappa) * (self.kappa * y).powf(-1.25);
        pre * growth_tail(self.kappa * r * y)
    }

    /// Smallest radius whose truncation bound is below `budget`.
    pub fn truncation_radius(&self, y: f64, budget: f64) -> (f64, f64) {
        let covol = self.field().covol();
        let pre = TAU * self.growth / (covol * self.kappa * self.kappa) * (self.kappa * y).powf(-1.25);
        let (mut lo, mut hi) = (0.5f64, 700.0f64);
        if pre * growth_tail(lo) <= budget {
            hi = lo;
        }
        while hi - lo > 1e-3 {
            let mid = 0.5 * (lo + hi);
            if pre * growth_tail(mid) <= budget {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (hi / (self.kappa * y), pre * growth_tail(hi))
    }

    fn check_coverage(&self, r: f64) -> Result<i64> {
        let r2 = (r * r).ceil() as i64;
        if r2 > self.grid.max_norm {
            return Err(Error::InsufficientCoverage { required: r2 as u64, available: self.grid.max_norm as u64 });
        }
        Ok(r2)
    }

    /// `W[β] = Σ_{α ≡ β mod c, N(α) ≤ r2} c(α)·h(N(α))`.
    fn accumulate<H: FnMut(i64) -> f64>(&self, res: &Residues, r2: i64, mut h: H) -> (Vec<f64>, u64) {
        let f = self.field();
        let t = f.disc();
        let n = res.len();
        let (big_a, big_b, big_d) = res.hnf();
        let mut w = vec![0.0; n];
        let mut terms = 0u64;
        for (b, lo, coeffs) in self.grid.rows_within(r2) {
            let k = b.rem_euclid(big_d);
            let q = (b - k) / big_d;
            let mut x = (lo - q * big_b).rem_euclid(big_a);
            let base = (big_a * k) as usize;
            let mut norm = f.elem(lo, b).norm();
            for (a, &cf) in (lo..).zip(coeffs) {
                if cf != 0 {
                    w[base + x as usize] += cf as f64 * h(norm);
                    terms += 1;
                }
                norm += 2 * a + 1 + b * t;
                x += 1;
                if x == big_a {
                    x = 0;
                }
            }
        }
        (w, terms)
    }

    /// `T(a/c, Y) = Σ_α c(α)·e(v/N(c))·(Y/a_α)·K₁(a_α Y)` for every numerator in
    /// `numerators` and its unit multiples.
    pub fn tail_batch(&self, c: QuadInt, y: f64, numerators: &[QuadInt]) -> Result<TailBatch> {
        let res = Residues::new(c)?;
        let (r, bound) = self.truncation_radius(y, 0.5 * self.tol);
        let r2 = self.check_coverage(r)?;
        let kappa = self.kappa;
        let mut cache = vec![f64::NAN; r2 as usize + 1];
        let (w, terms) = self.accumulate(&res, r2, |n| {
            let v = cache[n as usize];
            if v.is_nan() {
                let a = kappa * (n as f64).sqrt();
                let h = y / a * k1(a * y);
                cache[n as usize] = h;
                h
            } else {
                v
            }
        });
        let values = self.phase_sums(c, &res, &w, numerators);
        Ok(TailBatch { res, values, err: bound, terms })
    }

    /// `Σ_β W[β]·cos(2π v_β(a)/N(c))` for each numerator orbit under units.
    fn phase_sums(&self, c: QuadInt, res: &Residues, w: &[f64], numerators: &[QuadInt]) -> Vec<f64> {
        let f = self.field();
        let t = f.disc();
        let n = c.norm();
        let nn = n as u64;
        let cos_table: Vec<f64> = (0..n).map(|k| (TAU * k as f64 / n as f64).cos()).collect();
        let beta: Vec<(u64, u64, f64)> = w
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, &v)| {
                let e = res.element(i);
                (e.b.rem_euclid(n) as u64, (e.a + e.b * t).rem_euclid(n) as u64, v)
            })
            .collect();
        let mut values = vec![f64::NAN; res.len()];
        let cbar = c.conj();
        let units = f.units();
        for &a in numerators {
            let idx = res.index(a);
            if !values[idx].is_nan() {
                continue;
            }
            let x = a * cbar;
            let (x1, x2) = (x.a.rem_euclid(n) as u64, x.b.rem_euclid(n) as u64);
            let mut s = 0.0;
            for &(v1, v2, wv) in &beta {
                s += wv * cos_table[((x1 * v1 + x2 * v2) % nn) as usize];
            }
            for &u in &units {
                values[res.index(u * a)] = s;
            }
        }
        values
    }

    /// Symbols for numerators over one denominator, with split heights
    /// `y* = split/(|c|·|e|^{1/2})` and `y** = 1/(split·|c|·|e|^{1/2})`.
    pub fn symbols_for_denominator(&self, c: QuadInt, numerators: &[QuadInt], split: f64) -> Result<Vec<SymbolValue>> {
        if c.is_zero() {
            return Ok(numerators
                .iter()
                .map(|&a| SymbolValue { a, c, value: 0.0, err: 0.0, terms: 0, method: Method::Infinity })
                .collect());
        }
        let sd = split_data(self.form, c)?;
        let base = 1.0 / (c.abs() * sd.e.abs().sqrt());
        let (y1, y2) = (split * base, base / split);
        let partners: Vec<QuadInt> =
            numerators.iter().map(|&a| partner_numerator(a, c, sd.e)).collect::<Result<_>>()?;
        let first = self.tail_batch(c, y1, numerators)?;
        let second = if split == 1.0 { None } else { Some(self.tail_batch(c, y2, &partners)?) };
        let second_ref = second.as_ref().unwrap_or(&first);
        if second.is_none() {
            // the same batch must also hold the partners
            let missing: Vec<QuadInt> =
                partners.iter().copied().filter(|p| first.values[first.res.index(*p)].is_nan()).collect();
            if !missing.is_empty() {
                let extra = self.tail_batch(c, y1, &partners)?;
                return self.combine(c, numerators, &partners, &first, &extra, sd.w);
            }
        }
        self.combine(c, numerators, &partners, &first, second_ref, sd.w)
    }

    fn combine(
        &self,
        c: QuadInt,
        numerators: &[QuadInt],
        partners: &[QuadInt],
        first: &TailBatch,
        second: &TailBatch,
        w: i32,
    ) -> Result<Vec<SymbolValue>> {
        Ok(numerators
            .iter()
            .zip(partners)
            .map(|(&a, &p)| SymbolValue {
                a,
                c,
                value: first.get(a) - w as f64 * second.get(p),
                err: first.err + second.err,
                terms: first.terms + second.terms,
                method: Method::TwoTail,
            })
            .collect())
    }

    pub fn symbol(&self, a: QuadInt, c: QuadInt) -> Result<SymbolValue> {
        Ok(self.symbols_for_denominator(c, &[a], 1.0)?[0])
    }

    /// Single tail `T(a/c, Y)` with its truncation bound and term count.
    pub fn tail_sum(&self, a: QuadInt, c: QuadInt, y: f64) -> Result<(f64, f64, u64)> {
        if y.is_nan() || y <= 0.0 {
            return Err(Error::Domain(format!("height must be positive, got {y}")));
        }
        let b = self.tail_batch(c, y, &[a])?;
        Ok((b.get(a), b.err, b.terms))
    }
}

/// Symbols for a fraction list, in input order; runs of equal denominators are
/// evaluated as one batch, batches in parallel.
pub fn evaluate_fractions(ev: &SymbolEvaluator, items: &[CuspFraction], split: f64) -> Result<Vec<SymbolValue>> {
    let mut groups: Vec<&[CuspFraction]> = Vec::new();
    let mut start = 0;
    for i in 1..=items.len() {
        if i == items.len() || items[i].c != items[start].c {
            groups.push(&items[start..i]);
            start = i;
        }
    }
    let out: Vec<Vec<SymbolValue>> = groups
        .par_iter()
        .map(|g| {
            let nums: Vec<QuadInt> = g.iter().map(|r| r.a).collect();
            ev.symbols_for_denominator(g[0].c, &nums, split)
        })
        .collect::<Result<_>>()?;
    Ok(out.into_iter().flatten().collect())
}

pub fn tail_sum(form: &FormSpec, a: QuadInt, c: QuadInt, y: f64, tol: f64) -> Result<(f64, f64, u64)> {
    SymbolEvaluator::new(form, tol)?.tail_sum(a, c, y)
}

pub fn eval_symbol(form: &FormSpec, a: QuadInt, c: QuadInt, tol: f64) -> Result<SymbolValue> {
    SymbolEvaluator::new(form, tol)?.symbol(a, c)
}

/// Composite Gauss–Legendre nodes in `u = log y` on `[log lo, log hi]`.
fn log_nodes(gl: &GaussLegendre, lo: f64, hi: f64, panel_width: f64) -> Vec<(f64, f64)> {
    let (u0, u1) = (lo.ln(), hi.ln());
    let panels = ((u1 - u0) / panel_width).ceil().max(1.0) as usize;
    gl.composite_points(u0, u1, panels).into_iter().map(|(u, w)| (u.exp(), w)).collect()
}

/// Precomputed `y²·K₀(a_n y)` on a node set, for all norms `n` that matter at each node.
struct NodeTable {
    weights: Vec<f64>,
    /// Per node: number of leading entries of `norms` that are included.
    counts: Vec<usize>,
    values: Vec<Vec<f64>>,
}

fn node_table(nodes: &[(f64, f64)], norms: &[i64], kappa: f64, cut: f64) -> NodeTable {
    let mut weights = Vec::with_capacity(nodes.len());
    let mut counts = Vec::with_capacity(nodes.len());
    let mut values = Vec::with_capacity(nodes.len());
    for &(y, w) in nodes {
        let nmax = (cut / (kappa * y)).powi(2);
        let cnt = norms.partition_point(|&n| (n as f64) <= nmax);
        let row: Vec<f64> = norms[..cnt].iter().map(|&n| y * y * k0(kappa * (n as f64).sqrt() * y)).collect();
        weights.push(w);
        counts.push(cnt);
        values.push(row);
    }
    NodeTable { weights, counts, values }
}

impl NodeTable {
    fn integrate(&self, s: &[f64]) -> f64 {
        let mut total = 0.0;
        for ((w, &cnt), row) in self.weights.iter().zip(&self.counts).zip(&self.values) {
            let mut v = 0.0;
            for (k, s) in row.iter().zip(&s[..cnt]) {
                v += k * s;
            }
            total += w * v;
        }
        total
    }
}

/// Oracle evaluator: integrates `F₁(r, y)/y` numerically over `[y_lo, ∞)` with
/// `y_lo = √2·y*`, and the reflected piece from `y*/√2`, so that neither the
/// closed-form tail nor the evaluator's split height is reused.
pub fn quadrature_symbols_for_denominator(
    form: &FormSpec,
    c: QuadInt,
    numerators: &[QuadInt],
    tol: f64,
) -> Result<Vec<SymbolValue>> {
    let f = form.field;
    let sd = split_data(form, c)?;
    let kappa = 4.0 * PI / f.sqrt_abs_disc();
    let base = 1.0 / (c.abs() * sd.e.abs().sqrt());
    let (y1, y2) = (base * 2f64.sqrt(), base / 2f64.sqrt());
    let cut = (1.0 / tol).ln() + 14.0;
    let y_hi = cut / kappa;
    let nmax = (cut / (kappa * y2)).powi(2).ceil() as i64;
    if nmax > form.table.norm_bound as i64 {
        return Err(Error::InsufficientCoverage { required: nmax as u64, available: form.table.norm_bound });
    }
    let grid = ElementGrid::new(form);
    let n = c.norm();
    let t = f.disc();

    // distinct norms up to nmax, and the residue class of every element
    let mut present = vec![false; nmax as usize + 1];
    let mut elems: Vec<(usize, i64, i64, f64)> = Vec::new(); // (norm, v1, v2, coeff)
    for (b, lo, coeffs) in grid.rows_within(nmax) {
        for (k, &cf) in coeffs.iter().enumerate() {
            if cf == 0 {
                continue;
            }
            let a = lo + k as i64;
            let x = f.elem(a, b);
            let nm = x.norm() as usize;
            present[nm] = true;
            elems.push((nm, b.rem_euclid(n), (a + b * t).rem_euclid(n), cf as f64));
        }
    }
    let norms: Vec<i64> = (1..=nmax).filter(|&k| present[k as usize]).collect();
    let mut slot = vec![usize::MAX; nmax as usize + 1];
    for (i, &k) in norms.iter().enumerate() {
        slot[k as usize] = i;
    }
    let cos_table: Vec<f64> = (0..n).map(|k| (TAU * k as f64 / n as f64).cos()).collect();
    let s_of = |a: QuadInt| -> Vec<f64> {
        let x = a * c.conj();
        let (x1, x2) = (x.a.rem_euclid(n), x.b.rem_euclid(n));
        let mut s = vec![0.0; norms.len()];
        for &(nm, v1, v2, cf) in &elems {
            s[slot[nm]] += cf * cos_table[((x1 * v1 + x2 * v2) % n) as usize];
        }
        s
    };

    let gl = GaussLegendre::new(16);
    let width = 0.25;
    let tabs: Vec<[NodeTable; 2]> = [y1, y2]
        .iter()
        .map(|&lo| {
            [
                node_table(&log_nodes(&gl, lo, y_hi, width), &norms, kappa, cut),
                node_table(&log_nodes(&gl, lo, y_hi, width / 2.0), &norms, kappa, cut),
            ]
        })
        .collect();
    let mut out = Vec::with_capacity(numerators.len());
    for &a in numerators {
        let p = partner_numerator(a, c, sd.e)?;
        let (sa, sp) = (s_of(a), s_of(p));
        let coarse = tabs[0][0].integrate(&sa) - sd.w as f64 * tabs[1][0].integrate(&sp);
        let fine = tabs[0][1].integrate(&sa) - sd.w as f64 * tabs[1][1].integrate(&sp);
        let err = (fine - coarse).abs() + tol;
        if err > 1e3 * tol.max(1e-12) {
            return Err(Error::Quadrature { achieved: err });
        }
        out.push(SymbolValue { a, c, value: fine, err, terms: elems.len() as u64, method: Method::Quadrature });
    }
    Ok(out)
}

pub fn eval_symbol_quadrature(form: &FormSpec, a: QuadInt, c: QuadInt, tol: f64) -> Result<SymbolValue> {
    Ok(quadrature_symbols_for_denominator(form, c, &[a], tol)?[0])
}

/// `T_s(a/c, Y) = Σ_α c(α)·e(v/N(c))·a_α^{−2s}·∫_{a_α Y}^∞ t^{2s−1}K₀(t) dt`.
fn weighted_tail(ev: &SymbolEvaluator, s: f64, a: QuadInt, c: QuadInt, y: f64) -> Result<f64> {
    let res = Residues::new(c)?;
    let (r, _) = ev.truncation_radius(y, 0.5 * ev.tol);
    let margin = 1.0 + (2.0 * (s - 1.0).abs() * (ev.kappa * r * y).ln().max(1.0) + 6.0) / (ev.kappa * r * y);
    let r2 = ev.check_coverage(r * margin)?;
    let kappa = ev.kappa;
    let mut cache = vec![f64::NAN; r2 as usize + 1];
    let (w, _) = ev.accumulate(&res, r2, |n| {
        let v = cache[n as usize];
        if v.is_nan() {
            let al = kappa * (n as f64).sqrt();
            let h = al.powf(-2.0 * s) * weighted_k0_tail(s, al * y);
            cache[n as usize] = h;
            h
        } else {
            v
        }
    });
    Ok(ev.phase_sums(c, &res, &w, &[a])[res.index(a)])
}

/// `Λ(F, s, a/c)` from the two-tail formula with `y^{2s−2}` weights:
/// `Λ(s, r) = T_s(r, y*) − w_e·(|e||c|²)^{2−2s}·T_{2−s}(r', y**)`.
pub fn lambda_completed_split(ev: &SymbolEvaluator, s: f64, a: QuadInt, c: QuadInt, split: f64) -> Result<f64> {
    let sd = split_data(ev.form, c)?;
    let base = 1.0 / (c.abs() * sd.e.abs().sqrt());
    let p = partner_numerator(a, c, sd.e)?;
    let t1 = weighted_tail(ev, s, a, c, split * base)?;
    let t2 = weighted_tail(ev, 2.0 - s, p, c, base / split)?;
    Ok(t1 - sd.w as f64 * sd.k.powf(2.0 - 2.0 * s) * t2)
}

pub fn lambda_completed(form: &FormSpec, s: f64, a: QuadInt, c: QuadInt, tol: f64) -> Result<f64> {
    lambda_completed_split(&SymbolEvaluator::new(form, tol)?, s, a, c, 1.0)
}

/// `(1/4)(√|d_K|/2π)^{2s} Γ(s)²`, the factor relating `Λ(F, s, r)` to `L(F, s, r)`.
pub fn gamma_factor(f: Field, s: f64) -> Result<f64> {
    Ok(0.25 * (f.sqrt_abs_disc() / TAU).powf(2.0 * s) * gamma_real(s)?.powi(2))
}

/// `L(F, s, a/c) = Σ_{α≠0} c(α)·ψ(αr/√d_K)·N(α)^{−s}` for `s > 3/2`, by Riesz
/// means of order 8 at cut-offs `M, 2M, 4M` combined by Richardson extrapolation.
pub fn dirichlet_l(form: &FormSpec, s: f64, a: QuadInt, c: QuadInt) -> Result<f64> {
    if s <= 1.5 {
        return Err(Error::Domain(format!("the Dirichlet series needs s > 3/2, got {s}")));
    }
    let m4 = form.table.norm_bound as i64;
    let m = m4 / 4;
    if m < 100 {
        return Err(Error::InsufficientCoverage { required: 400, available: form.table.norm_bound });
    }
    let f = form.field;
    let grid = ElementGrid::new(form);
    let n = c.norm();
    let t = f.disc();
    let x = a * c.conj();
    let (x1, x2) = (x.a.rem_euclid(n), x.b.rem_euclid(n));
    let mut by_norm = vec![0.0; m4 as usize + 1];
    for (b, lo, coeffs) in grid.rows_within(m4) {
        for (k, &cf) in coeffs.iter().enumerate() {
            if cf == 0 {
                continue;
            }
            let aa = lo + k as i64;
            let nm = f.elem(aa, b).norm();
            let v = (x1 * b.rem_euclid(n) + x2 * (aa + b * t).rem_euclid(n)) % n;
            by_norm[nm as usize] += cf as f64 * (TAU * v as f64 / n as f64).cos();
        }
    }
    let riesz = |mm: i64| -> f64 {
        (1..=mm).map(|k| by_norm[k as usize] * (k as f64).powf(-s) * (1.0 - k as f64 / mm as f64).powi(8)).sum()
    };
    let (l1, l2, l4) = (riesz(m), riesz(2 * m), riesz(4 * m));
    // eliminate the M^{-1} and M^{-2} terms
    Ok((8.0 * l4 - 6.0 * l2 + l1) / 3.0)
}

/// Positive generator `Ω` of the smallest lattice `ΩZ` containing the values, and
/// the largest distance of a value to it.
pub fn period_lattice_estimate(values: &[f64]) -> Result<(f64, f64)> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if values.is_empty() || scale < 1e-12 {
        return Err(Error::DegenerateLattice("all values are zero".into()));
    }
    let eps = 1e-6 * scale;
    let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).filter(|v| *v > eps).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut g = mags[0];
    for &v in &mags[1..] {
        let (mut a, mut b) = (g.max(v), g.min(v));
        while b > eps {
            let r = (a - b * (a / b).round()).abs();
            a = b;
            b = r;
        }
        g = a;
    }
    if g < 100.0 * eps {
        return Err(Error::DegenerateLattice(format!("generator collapsed to {g:e}")));
    }
    let ks: Vec<f64> = values.iter().map(|v| (v / g).round()).collect();
    let num: f64 = ks.iter().zip(values).map(|(k, v)| k * v).sum();
    let den: f64 = ks.iter().map(|k| k * k).sum();
    let omega = num / den;
    let resid = ks.iter().zip(values).map(|(k, v)| (v - k * omega).abs()).fold(0.0, f64::max);
    Ok((omega.abs(), resid))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isqrt_exact() {
        for n in [0, 1, 2, 3, 4, 15, 16, 17, 99_980_001, 1 << 40] {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
    }

    #[test]
    fn lattice_fit_recovers_planted_generator() {
        let omega = 0.7312;
        let vals: Vec<f64> = [3, -1, 0, 7, 2, -5, 4].iter().map(|&k| k as f64 * omega).collect();
        let (o, r) = period_lattice_estimate(&vals).unwrap();
        assert!((o - omega).abs() < 1e-12 && r < 1e-12);
        assert!(period_lattice_estimate(&[0.0, 0.0]).is_err());
    }
}
