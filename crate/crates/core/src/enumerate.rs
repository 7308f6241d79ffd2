//! The fraction sets `Q_𝔡(X)`: reduced `a/c` with `(c) + (n) = 𝔡` and `0 < |c| < X`,
//! one numerator per invertible class mod `(c)` and one `c` per associate class.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadfield::{dual_basis, euler_phi, factor, pairing, qi_gcd, residues_coprime, Field, QuadInt};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuspFraction {
    pub a: QuadInt,
    pub c: QuadInt,
    pub absc: f64,
    /// Canonical generator of `(c) + (n)`.
    pub klass: QuadInt,
}

impl CuspFraction {
    pub fn to_complex(&self) -> Complex64 {
        self.a.to_complex() / self.c.to_complex()
    }
}

#[derive(Clone, Debug)]
pub struct FareySet {
    pub level: QuadInt,
    pub divisor: QuadInt,
    pub x: f64,
    pub items: Vec<CuspFraction>,
}

impl FareySet {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

fn check_level_and_divisor(n: QuadInt, d: QuadInt) -> Result<QuadInt> {
    if n.is_zero() {
        return Err(Error::InvalidInput("level must be nonzero".into()));
    }
    if !factor(n)?.is_squarefree() {
        return Err(Error::UnsupportedLevel { level: n.to_string(), reason: "level must be squarefree".into() });
    }
    if d.is_zero() || !d.divides(n) {
        return Err(Error::InvalidDivisor { divisor: d.to_string(), level: n.to_string() });
    }
    Ok(d.canonical())
}

/// Canonical `c` with `N(c) < X²`, sorted by `|c|`, then real part, then imaginary part.
pub fn canonical_elements_below(f: Field, x: f64) -> Vec<QuadInt> {
    let t = f.disc();
    let h = f.sqrt_abs_disc() / 2.0;
    let x2 = x * x;
    let bmax = (x / h).ceil() as i64;
    let mut out = Vec::new();
    for b in 0..=bmax {
        let shift = b as f64 * t as f64 / 2.0;
        let lo = (-x - shift).floor() as i64;
        let hi = (x - shift).ceil() as i64;
        for a in lo..=hi {
            let c = f.elem(a, b);
            if !c.is_zero() && (c.norm() as f64) < x2 && c.is_canonical() {
                out.push(c);
            }
        }
    }
    out.sort_by_key(|c| (c.norm(), 2 * c.a + c.b * t, c.b));
    out
}

/// Denominators of `Q_𝔡(X)` in enumeration order.
pub fn denominators(n: QuadInt, d: QuadInt, x: f64) -> Result<Vec<QuadInt>> {
    let d = check_level_and_divisor(n, d)?;
    Ok(canonical_elements_below(n.field, x).into_iter().filter(|&c| qi_gcd(c, n) == d).collect())
}

/// Streams the members of `Q_𝔡(X)` in enumeration order.
pub fn for_each_fraction<F: FnMut(CuspFraction)>(n: QuadInt, d: QuadInt, x: f64, mut sink: F) -> Result<()> {
    let klass = d.canonical();
    for c in denominators(n, d, x)? {
        let absc = c.abs();
        for a in residues_coprime(c)? {
            sink(CuspFraction { a, c, absc, klass });
        }
    }
    Ok(())
}

pub fn enumerate_q(n: QuadInt, d: QuadInt, x: f64) -> Result<FareySet> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::InvalidInput(format!("X must be positive, got {x}")));
    }
    let mut items = Vec::new();
    for_each_fraction(n, d, x, |r| items.push(r))?;
    Ok(FareySet { level: n, divisor: d.canonical(), x, items })
}

/// `#Q_𝔡(X)` without materializing the set.
pub fn count_q(n: QuadInt, d: QuadInt, x: f64) -> Result<u64> {
    denominators(n, d, x)?.into_iter().map(euler_phi).sum()
}

/// True when `⟨μ, λ⟩ ∈ Z` for the lattice basis `{1, ω}`.
pub fn is_dual_vector(f: Field, mu: Complex64) -> bool {
    [Complex64::new(1.0, 0.0), f.omega()].iter().all(|l| {
        let p = pairing(mu, *l);
        (p - p.round()).abs() < 1e-9
    })
}

/// `Σ_{r ∈ S} e(⟨μ, r⟩)`.
pub fn weyl_sum(s: &FareySet, mu: Complex64) -> Result<Complex64> {
    let f = s.level.field;
    if !is_dual_vector(f, mu) {
        return Err(Error::InvalidInput(format!("{mu} is not in the dual lattice")));
    }
    if mu == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(s.len() as f64, 0.0));
    }
    let tau = std::f64::consts::TAU;
    Ok(s.items.iter().map(|r| Complex64::from_polar(1.0, tau * pairing(mu, r.to_complex()))).sum())
}

/// The `k` shortest nonzero dual vectors up to sign, sorted by length.
pub fn smallest_dual_vectors(f: Field, k: usize) -> Vec<Complex64> {
    let db = dual_basis(f);
    let mut v: Vec<(f64, i64, i64, Complex64)> = Vec::new();
    for m1 in -6..=6i64 {
        for m2 in -6..=6i64 {
            if (m1, m2) <= (0, 0) {
                continue;
            }
            let mu = db.vector(m1, m2);
            v.push((mu.norm(), m1, m2, mu));
        }
    }
    v.sort_by(|a, b| (a.0, a.1, a.2).partial_cmp(&(b.0, b.1, b.2)).unwrap());
    v.into_iter().take(k).map(|t| t.3).collect()
}

/// Least-squares slope of `log #Q_𝔡(X)` against `log X`.
pub fn count_fit(n: QuadInt, d: QuadInt, xs: &[f64]) -> Result<f64> {
    let mut xs: Vec<f64> = xs.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    if xs.len() < 3 || xs[xs.len() - 1] < 2.0 * xs[0] {
        return Err(Error::InsufficientData(
            "count fit needs at least 3 distinct X values with the largest at least twice the smallest".into(),
        ));
    }
    let mut pts = Vec::with_capacity(xs.len());
    for &x in &xs {
        let c = count_q(n, d, x)?;
        if c == 0 {
            return Err(Error::InsufficientData(format!("Q(X) is empty at X = {x}")));
        }
        pts.push((x.ln(), (c as f64).ln()));
    }
    Ok(crate::stats::linear_fit(&pts).slope)
}
