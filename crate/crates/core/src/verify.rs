//! Measurements behind the acceptance suite. Each function returns the measured
//! quantities; [`run_all`] compares them against the published thresholds.

use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::Serialize;

use crate::coeffs::FormSpec;
use crate::constants::{self, CovolumeVariant};
use crate::enumerate::{count_q, enumerate_q, smallest_dual_vectors, weyl_sum, CuspFraction, FareySet};
use crate::error::{Error, Result};
use crate::modsym::{
    evaluate_fractions, partner_numerator, period_lattice_estimate, quadrature_symbols_for_denominator, split_data,
    SymbolEvaluator, SymbolValue,
};
use crate::quad;
use crate::quadfield::{divisors, zeta_k2, Field, QuadInt};
use crate::special::{k0, k1, tail_integral};
use crate::stats::{
    bound_diagnostic, ks_test, mgf_scan, moments, variance_regression, windowed_slopes, LinearFit, MgfReport,
    Normalization, SymbolSample,
};

pub const DEFAULT_XGRID: [f64; 5] = [10.0, 14.0, 20.0, 28.0, 40.0];

/// Symbols of every divisor class at the largest X of the grid.
pub struct Study<'a> {
    pub form: &'a FormSpec,
    pub ev: SymbolEvaluator<'a>,
    pub xgrid: Vec<f64>,
    pub classes: Vec<ClassData>,
}

pub struct ClassData {
    pub klass: QuadInt,
    pub fractions: Vec<CuspFraction>,
    pub symbols: Vec<SymbolValue>,
}

impl ClassData {
    pub fn sample(&self, x: f64) -> SymbolSample {
        let (values, absc) = self
            .fractions
            .iter()
            .zip(&self.symbols)
            .filter(|(r, _)| r.absc < x)
            .map(|(r, s)| (s.value, r.absc))
            .unzip();
        SymbolSample { values, absc }
    }
}

impl<'a> Study<'a> {
    pub fn new(form: &'a FormSpec, xgrid: &[f64], tol: f64) -> Result<Study<'a>> {
        let mut xgrid = xgrid.to_vec();
        xgrid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let xmax = *xgrid.last().ok_or_else(|| Error::InsufficientData("empty X grid".into()))?;
        let ev = SymbolEvaluator::new(form, tol)?;
        let mut classes = Vec::new();
        for d in divisors(form.level)? {
            let set = enumerate_q(form.level, d, xmax)?;
            let symbols = evaluate_fractions(&ev, &set.items, 1.0)?;
            classes.push(ClassData { klass: d, fractions: set.items, symbols });
        }
        Ok(Study { form, ev, xgrid, classes })
    }

    pub fn class(&self, d: QuadInt) -> Option<&ClassData> {
        let d = d.canonical();
        self.classes.iter().find(|c| c.klass == d)
    }

    /// The class `(c) + (n) = (1)`, which carries the bulk of every fraction set.
    pub fn main_class(&self) -> &ClassData {
        self.class(self.form.field.one()).expect("the unit ideal divides every level")
    }

    pub fn xmin(&self) -> f64 {
        self.xgrid[0]
    }

    pub fn xmax(&self) -> f64 {
        *self.xgrid.last().unwrap()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// `K_ν(x) = ∫_0^∞ e^{−x cosh t} cosh(νt) dt` by the trapezoidal rule, which
/// converges geometrically for this entire, rapidly decaying integrand.
pub fn bessel_k_integral(nu: f64, x: f64) -> f64 {
    let h = 0.01;
    let mut s = 0.5 * (-x).exp();
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        let v = (-x * t.cosh()).exp() * (nu * t).cosh();
        s += v;
        if v < 1e-300 || v < s * 1e-18 {
            break;
        }
        k += 1;
    }
    s * h
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpecialFidelity {
    pub bessel_max_rel: f64,
    pub tail_max_rel: f64,
}

pub fn special_function_fidelity() -> SpecialFidelity {
    let mut bessel: f64 = 0.0;
    for i in 0..=240 {
        let x = 1e-4 * 10f64.powf(6.0 * i as f64 / 240.0);
        for (nu, v) in [(0.0, k0(x)), (1.0, k1(x))] {
            let o = bessel_k_integral(nu, x);
            bessel = bessel.max(((v - o) / o).abs());
        }
    }
    let mut tail: f64 = 0.0;
    for &(a, y) in &[(0.5, 0.01), (2.0, 0.3), (6.0, 0.05), (12.0, 1.5), (40.0, 0.02)] {
        let closed = tail_integral(a, y).expect("positive arguments");
        let q = quad::adaptive_to_infinity(|t| t * k0(a * t), y, 1.0 / a, 1e-300, 1e-13).0;
        tail = tail.max(((closed - q) / q).abs());
    }
    SpecialFidelity { bessel_max_rel: bessel, tail_max_rel: tail }
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub klass: String,
    pub checked: usize,
    /// Largest `|⟨a/c⟩ + w_e⟨a'/c⟩| / (err + err')`.
    pub worst_ratio: f64,
}

/// Functional-equation symmetry with the partner evaluated at a different split
/// height, so the identity is not built into the evaluation.
pub fn symmetry(study: &Study, per_class: usize, seed: u64) -> Result<Vec<SymmetryReport>> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    for cd in &study.classes {
        let idx: Vec<usize> = (0..cd.fractions.len()).collect();
        let pick: Vec<usize> = idx.choose_multiple(&mut rng, per_class.min(idx.len())).copied().collect();
        let mut worst: f64 = 0.0;
        for &i in &pick {
            let (r, s) = (cd.fractions[i], cd.symbols[i]);
            let sd = split_data(study.form, r.c)?;
            let p = partner_numerator(r.a, r.c, sd.e)?;
            let t = study.ev.symbols_for_denominator(r.c, &[p], 2.0)?[0];
            let resid = (s.value + sd.w as f64 * t.value).abs();
            worst = worst.max(resid / (s.err + t.err));
        }
        out.push(SymmetryReport { klass: cd.klass.to_string(), checked: pick.len(), worst_ratio: worst });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OracleReport {
    pub fractions: usize,
    pub max_abs_diff: f64,
    pub seconds: f64,
}

/// Two-tail evaluator against the quadrature evaluator on every fraction with `|c| ≤ cmax`.
pub fn oracle_equivalence(form: &FormSpec, ev: &SymbolEvaluator, cmax: f64) -> Result<OracleReport> {
    let start = std::time::Instant::now();
    let mut n = 0;
    let mut worst: f64 = 0.0;
    for d in divisors(form.level)? {
        let set = enumerate_q(form.level, d, cmax * (1.0 + 1e-12))?;
        let fast = evaluate_fractions(ev, &set.items, 1.0)?;
        let mut i = 0;
        while i < set.items.len() {
            let c = set.items[i].c;
            let j = set.items[i..].iter().position(|r| r.c != c).map_or(set.items.len(), |k| i + k);
            let nums: Vec<QuadInt> = set.items[i..j].iter().map(|r| r.a).collect();
            let slow = quadrature_symbols_for_denominator(form, c, &nums, 1e-10)?;
            for (a, b) in fast[i..j].iter().zip(&slow) {
                worst = worst.max((a.value - b.value).abs());
            }
            n += j - i;
            i = j;
        }
    }
    Ok(OracleReport { fractions: n, max_abs_diff: worst, seconds: start.elapsed().as_secs_f64() })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SplitReport {
    pub fractions: usize,
    pub max_change: f64,
    pub tol: f64,
}

/// Re-evaluates every fraction with `|c| < xsmall` and `random` further fractions
/// at split factors `1/2` and `2`.
pub fn split_invariance(study: &Study, xsmall: f64, random: usize, seed: u64) -> Result<SplitReport> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for cd in &study.classes {
        let mut pick: Vec<usize> = (0..cd.fractions.len()).filter(|&i| cd.fractions[i].absc < xsmall).collect();
        let rest: Vec<usize> = (0..cd.fractions.len()).filter(|&i| cd.fractions[i].absc >= xsmall).collect();
        pick.extend(rest.choose_multiple(&mut rng, random.min(rest.len())));
        pick.sort_unstable();
        let items: Vec<CuspFraction> = pick.iter().map(|&i| cd.fractions[i]).collect();
        for factor in [0.5, 2.0] {
            let vals = evaluate_fractions(&study.ev, &items, factor)?;
            for (&i, v) in pick.iter().zip(&vals) {
                worst = worst.max((v.value - cd.symbols[i].value).abs());
            }
        }
        n += items.len();
    }
    Ok(SplitReport { fractions: n, max_change: worst, tol: study.ev.tol })
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeReport {
    pub fractions: usize,
    pub omega: f64,
    pub max_residual: f64,
    /// Fit after adding fractions with `n ∤ c`: `None` when it degenerates.
    pub control_omega: Option<f64>,
    pub control_residual: Option<f64>,
    /// Largest distance of a control symbol to `ΩZ`.
    pub control_distance: f64,
}

impl LatticeReport {
    pub fn control_breaks_fit(&self) -> bool {
        match (self.control_omega, self.control_residual) {
            (Some(o), Some(r)) => (o - self.omega).abs() > 1e-4 * self.omega || r > 1e-4 * o,
            _ => true,
        }
    }
}

pub fn period_lattice(study: &Study, controls: usize) -> Result<LatticeReport> {
    let cd = study
        .class(study.form.level)
        .ok_or_else(|| Error::InsufficientData("no fractions with n | c".into()))?;
    let vals: Vec<f64> = cd.symbols.iter().map(|s| s.value).collect();
    if vals.len() < 20 {
        return Err(Error::InsufficientData(format!("only {} fractions with n | c; need 20", vals.len())));
    }
    let (omega, resid) = period_lattice_estimate(&vals)?;
    let ctrl: Vec<f64> = study.main_class().symbols.iter().take(controls).map(|s| s.value).collect();
    let control_distance = ctrl.iter().map(|v| (v - omega * (v / omega).round()).abs()).fold(0.0, f64::max);
    let mut mixed = vals.clone();
    mixed.extend(&ctrl);
    let (co, cr) = match period_lattice_estimate(&mixed) {
        Ok((o, r)) => (Some(o), Some(r)),
        Err(_) => (None, None),
    };
    Ok(LatticeReport {
        fractions: vals.len(),
        omega,
        max_residual: resid,
        control_omega: co,
        control_residual: cr,
        control_distance,
    })
}

pub fn count_slope(level: QuadInt, d: QuadInt, xgrid: &[f64]) -> Result<(f64, Vec<u64>)> {
    let counts = xgrid.iter().map(|&x| count_q(level, d, x)).collect::<Result<Vec<_>>>()?;
    Ok((crate::enumerate::count_fit(level, d, xgrid)?, counts))
}

/// `max |⟨r⟩|/(log|c| + 1)` at each X of the grid.
pub fn bound_trend(study: &Study) -> Result<Vec<f64>> {
    let cd = study.main_class();
    study.xgrid.iter().map(|&x| Ok(bound_diagnostic(&cd.sample(x))?.0)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct VarianceReport {
    pub points: Vec<(f64, f64)>,
    pub fit: LinearFit,
    pub windowed: Vec<f64>,
    pub means: Vec<f64>,
}

pub fn variance_law(study: &Study) -> Result<VarianceReport> {
    let cd = study.main_class();
    let mut points = Vec::new();
    let mut means = Vec::new();
    for &x in &study.xgrid {
        let s = cd.sample(x);
        let (m, v) = moments(&s.values)?;
        points.push((x, v));
        means.push(m);
    }
    let fit = variance_regression(&points)?;
    Ok(VarianceReport { windowed: windowed_slopes(&points, 3), points, fit, means })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantReport {
    pub c_fit: f64,
    pub report: constants::ConstantsReport,
    pub rel_gap: Option<f64>,
    pub rel_gap_disc_squared: Option<f64>,
}

pub fn constant_cross_check(form: &FormSpec, c_fit: f64) -> Result<ConstantReport> {
    let report = constants::constants_report(form, 4)?;
    let rel_gap = report.c_f.map(|c| (c - c_fit).abs() / c);
    let rel_gap_disc_squared = report.c_f_disc_squared.map(|c| (c - c_fit).abs() / c);
    Ok(ConstantReport { c_fit, report, rel_gap, rel_gap_disc_squared })
}

/// KS distance of the normalized main-class sample at each X.
pub fn normality(study: &Study, c: f64) -> Result<Vec<f64>> {
    let cd = study.main_class();
    study
        .xgrid
        .iter()
        .map(|&x| ks_test(&cd.sample(x), &Normalization { c, x, center: false, per_denominator: false }))
        .collect()
}

/// `|Σ e(⟨μ, r⟩)|/N` for the four shortest dual vectors, per X.
pub fn equidistribution(study: &Study) -> Result<Vec<[f64; 4]>> {
    let f = study.form.field;
    let mus = smallest_dual_vectors(f, 4);
    let cd = study.main_class();
    study
        .xgrid
        .iter()
        .map(|&x| {
            let items: Vec<CuspFraction> = cd.fractions.iter().filter(|r| r.absc < x).copied().collect();
            let set = FareySet { level: study.form.level, divisor: cd.klass, x, items };
            let n = set.len() as f64;
            let mut out = [0.0; 4];
            for (o, mu) in out.iter_mut().zip(&mus) {
                *o = weyl_sum(&set, *mu)?.norm() / n;
            }
            Ok(out)
        })
        .collect()
}

pub fn mgf(study: &Study, c: f64) -> Result<MgfReport> {
    let x = study.xmax();
    let s = study.main_class().sample(x);
    let scale = (c * x.ln()).sqrt();
    let emax = 0.5 / scale;
    let grid: Vec<f64> = (-20..=20).map(|k| k as f64 * emax / 20.0).collect();
    mgf_scan(&s.values, x, c, &grid, 1e-3 / scale, false)
}

/// `ζ_K(2) = (1/w) Σ_{α≠0} N(α)^{−2}` summed directly over `N(α) ≤ M`, with the
/// Abel-summation tail `2κ/M − A(M)/M²`, `A(M) = #{N(α) ≤ M}/w`, `κ = 2π/(w√|d_K|)`.
pub fn zeta_lattice_sum(f: Field, m: i64) -> f64 {
    let t = f.disc();
    let dk = t.abs();
    let w = f.unit_count() as f64;
    let bmax = ((4 * m / dk) as f64).sqrt() as i64 + 1;
    let mut sum = 0.0;
    let mut count = 0u64;
    for b in -bmax..=bmax {
        let disc = 4 * m - b * b * dk;
        if disc < 0 {
            continue;
        }
        let s = (disc as f64).sqrt();
        let lo = ((-(b * t) as f64 - s) / 2.0).floor() as i64 - 1;
        let hi = ((-(b * t) as f64 + s) / 2.0).ceil() as i64 + 1;
        let mut row = 0.0;
        for a in lo..=hi {
            let n = f.elem(a, b).norm();
            if n > 0 && n <= m {
                row += 1.0 / (n as f64 * n as f64);
                count += 1;
            }
        }
        sum += row;
    }
    let kappa = 2.0 * PI / (w * f.sqrt_abs_disc());
    let big_a = count as f64 / w;
    sum / w + 2.0 * kappa / m as f64 - big_a / (m as f64 * m as f64)
}

pub fn zeta_oracle() -> Vec<(i64, f64, f64)> {
    Field::all()
        .into_iter()
        .map(|f| (f.d(), zeta_k2(f, 1e-15), zeta_lattice_sum(f, 1_000_000)))
        .collect()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CovolumeReport {
    pub fundamental_domain: f64,
    pub humbert: f64,
    pub disc_squared: f64,
}

pub fn covolume_oracle() -> Result<CovolumeReport> {
    let f = Field::gaussian();
    Ok(CovolumeReport {
        fundamental_domain: constants::fundamental_domain_volume(f)?,
        humbert: constants::covolume(f, CovolumeVariant::Humbert),
        disc_squared: constants::covolume(f, CovolumeVariant::DiscSquared),
    })
}

fn check(id: u8, name: &'static str, passed: bool, detail: String) -> Check {
    Check { id, name, passed, detail }
}

fn failed(id: u8, name: &'static str, e: Error) -> Check {
    check(id, name, false, format!("error: {e}"))
}

/// Runs every criterion against the form on the given X grid.
pub fn run_all(form: &FormSpec, xgrid: &[f64], tol: f64, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let sf = special_function_fidelity();
    out.push(check(
        1,
        "special-function fidelity",
        sf.bessel_max_rel <= 1e-10 && sf.tail_max_rel <= 1e-10,
        format!("K0/K1 max rel err {:.2e}, tail integral {:.2e}", sf.bessel_max_rel, sf.tail_max_rel),
    ));

    let study = Study::new(form, xgrid, tol)?;

    out.push(match symmetry(&study, 50, seed) {
        Ok(r) => check(
            2,
            "functional-equation symmetry",
            r.iter().all(|c| c.worst_ratio <= 2.0),
            r.iter().map(|c| format!("class {}: {} fractions, worst {:.3}x err", c.klass, c.checked, c.worst_ratio)).collect::<Vec<_>>().join("; "),
        ),
        Err(e) => failed(2, "functional-equation symmetry", e),
    });

    out.push(match oracle_equivalence(form, &study.ev, 10.0) {
        Ok(r) => check(
            3,
            "oracle equivalence",
            r.max_abs_diff <= 1e-6 && r.seconds <= 120.0,
            format!("{} fractions, max |diff| {:.2e}, {:.1}s", r.fractions, r.max_abs_diff, r.seconds),
        ),
        Err(e) => failed(3, "oracle equivalence", e),
    });

    out.push(match split_invariance(&study, 14.0, 200, seed) {
        Ok(r) => check(
            4,
            "split invariance",
            r.max_change <= 2.0 * r.tol,
            format!("{} fractions, max change {:.2e} (tol {:.0e})", r.fractions, r.max_change, r.tol),
        ),
        Err(e) => failed(4, "split invariance", e),
    });

    out.push(match period_lattice(&study, 10) {
        Ok(r) => check(
            5,
            "period lattice",
            r.max_residual <= 1e-4 * r.omega && r.control_breaks_fit(),
            format!(
                "{} fractions, omega {:.8}, residual {:.2e}; control distance {:.3e}, control fit {:?}",
                r.fractions, r.omega, r.max_residual, r.control_distance, r.control_omega
            ),
        ),
        Err(e) => failed(5, "period lattice", e),
    });

    out.push(match count_slope(form.level, form.field.one(), &study.xgrid) {
        Ok((s, c)) => check(6, "counting", (3.8..=4.2).contains(&s), format!("slope {s:.4}, counts {c:?}")),
        Err(e) => failed(6, "counting", e),
    });

    out.push(match bound_trend(&study) {
        Ok(b) => {
            let ratio = b[b.len() - 1] / b[0];
            check(7, "symbol bound", ratio <= 1.5, format!("max ratio per X {b:.4?}, growth {ratio:.3}"))
        }
        Err(e) => failed(7, "symbol bound", e),
    });

    let var = variance_law(&study);
    let c_fit = var.as_ref().map(|v| v.fit.slope).unwrap_or(f64::NAN);
    out.push(match &var {
        Ok(v) => {
            let spread = v.windowed.iter().map(|s| (s - v.fit.slope).abs() / v.fit.slope).fold(0.0, f64::max);
            check(
                8,
                "variance law",
                v.fit.r2 >= 0.98 && spread <= 0.15,
                format!(
                    "C_fit {:.5}, D_fit {:.5}, R^2 {:.4}, windowed slopes {:.5?} (max dev {:.1}%)",
                    v.fit.slope,
                    v.fit.intercept,
                    v.fit.r2,
                    v.windowed,
                    100.0 * spread
                ),
            )
        }
        Err(e) => check(8, "variance law", false, format!("error: {e}")),
    });

    out.push(match constant_cross_check(form, c_fit) {
        Ok(r) => match (r.report.c_f, r.rel_gap) {
            (Some(cf), Some(g)) => check(
                9,
                "constant cross-check",
                g <= 0.25,
                format!(
                    "C_F {:.5} ({:?} covolume), C_fit {:.5}, gap {:.1}%; |d_K|^2-covolume C_F {:.5} gap {:.1}%",
                    cf,
                    r.report.covolume_used,
                    c_fit,
                    100.0 * g,
                    r.report.c_f_disc_squared.unwrap_or(f64::NAN),
                    100.0 * r.rel_gap_disc_squared.unwrap_or(f64::NAN)
                ),
            ),
            _ => check(9, "constant cross-check", false, format!("C_F unavailable: {:?}", r.report.notes)),
        },
        Err(e) => failed(9, "constant cross-check", e),
    });

    out.push(match normality(&study, c_fit) {
        Ok(ks) => {
            let last = ks[ks.len() - 1];
            let steps_ok = ks.windows(2).all(|w| w[1] <= 1.1 * w[0]);
            check(10, "normality", last <= 0.05 && steps_ok, format!("KS per X {ks:.4?}"))
        }
        Err(e) => failed(10, "normality", e),
    });

    out.push(match equidistribution(&study) {
        Ok(w) => {
            let maxes: Vec<f64> = w.iter().map(|r| r.iter().fold(0.0f64, |m, v| m.max(*v))).collect();
            let last = maxes[maxes.len() - 1];
            let decreasing = maxes.windows(2).all(|p| p[1] <= p[0]);
            check(
                11,
                "equidistribution",
                last <= 0.05 && decreasing,
                format!("max |W|/N per X {maxes:.4?}"),
            )
        }
        Err(e) => failed(11, "equidistribution", e),
    });

    out.push(match mgf(&study, c_fit) {
        Ok(m) => check(
            12,
            "MGF consistency",
            m.second_difference_rel_err <= 0.05 && m.max_rel_dev <= 0.10,
            format!(
                "second difference rel err {:.2e}; max rel dev {:.3}, max abs dev {:.4}",
                m.second_difference_rel_err, m.max_rel_dev, m.max_abs_dev
            ),
        ),
        Err(e) => failed(12, "MGF consistency", e),
    });

    let z = zeta_oracle();
    let zworst = z.iter().map(|(_, a, b)| ((a - b) / b).abs()).fold(0.0, f64::max);
    out.push(check(13, "zeta_K(2)", zworst <= 1e-9, format!("max rel diff {zworst:.2e} over {} fields", z.len())));

    out.push(match covolume_oracle() {
        Ok(c) => {
            let lit = (c.humbert - c.fundamental_domain).abs() / c.fundamental_domain;
            let ratio = c.disc_squared / c.fundamental_domain;
            check(
                14,
                "covolume oracle",
                lit <= 0.01 && (ratio - Field::gaussian().sqrt_abs_disc()).abs() <= 0.01,
                format!(
                    "fundamental domain {:.6}, Humbert {:.6} ({:.1e} rel), |d_K|^2 variant {:.6} (ratio {:.4} = |d_K|^(1/2))",
                    c.fundamental_domain, c.humbert, lit, c.disc_squared, ratio
                ),
            )
        }
        Err(e) => failed(14, "covolume oracle", e),
    });

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_bessel_matches_known_values() {
        assert!((bessel_k_integral(0.0, 1.0) - 0.421_024_438_240_708_3).abs() < 1e-15);
        assert!((bessel_k_integral(1.0, 1.0) - 0.601_907_230_197_234_6).abs() < 1e-15);
    }

    #[test]
    fn lattice_sum_for_gaussian_field() {
        let z = zeta_lattice_sum(Field::gaussian(), 200_000);
        assert!((z - 1.506_703_009_9).abs() < 1e-7);
    }
}
