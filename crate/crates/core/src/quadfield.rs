//! Exact arithmetic in the ring of integers of a norm-Euclidean imaginary
//! quadratic field, written in the basis `{1, ω}` with `ω = (d_K + √d_K)/2`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One of the five norm-Euclidean imaginary quadratic fields `Q(√d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Field {
    d: i64,
    disc: i64,
}

impl Field {
    pub const SUPPORTED: [i64; 5] = [-1, -2, -3, -7, -11];

    pub fn new(d: i64) -> Result<Field> {
        match d {
            -1 | -2 => Ok(Field { d, disc: 4 * d }),
            -3 | -7 | -11 => Ok(Field { d, disc: d }),
            -19 | -43 | -67 | -163 => Err(Error::UnsupportedField {
                d,
                reason: "class number one but not norm-Euclidean; only d in {-1,-2,-3,-7,-11} are supported".into(),
            }),
            _ => Err(Error::UnsupportedField {
                d,
                reason: "only the norm-Euclidean fields d in {-1,-2,-3,-7,-11} are supported".into(),
            }),
        }
    }

    pub fn gaussian() -> Field {
        Field { d: -1, disc: -4 }
    }

    pub fn all() -> Vec<Field> {
        Self::SUPPORTED.iter().map(|&d| Field::new(d).unwrap()).collect()
    }

    pub fn d(self) -> i64 {
        self.d
    }

    /// The discriminant `d_K`; also the trace of `ω`.
    pub fn disc(self) -> i64 {
        self.disc
    }

    /// `N(ω) = (d_K² − d_K)/4`.
    pub fn omega_norm(self) -> i64 {
        (self.disc * self.disc - self.disc) / 4
    }

    pub fn unit_count(self) -> usize {
        match self.d {
            -1 => 4,
            -3 => 6,
            _ => 2,
        }
    }

    pub fn sqrt_abs_disc(self) -> f64 {
        (self.disc.unsigned_abs() as f64).sqrt()
    }

    /// Area of the fundamental parallelogram of `O_K` in `C`.
    pub fn covol(self) -> f64 {
        self.sqrt_abs_disc() / 2.0
    }

    pub fn omega(self) -> Complex64 {
        Complex64::new(self.disc as f64 / 2.0, self.sqrt_abs_disc() / 2.0)
    }

    pub fn elem(self, a: i64, b: i64) -> QuadInt {
        QuadInt { a, b, field: self }
    }

    pub fn int(self, a: i64) -> QuadInt {
        self.elem(a, 0)
    }

    pub fn zero(self) -> QuadInt {
        self.elem(0, 0)
    }

    pub fn one(self) -> QuadInt {
        self.elem(1, 0)
    }

    /// All units, as powers of a generator of the unit group.
    pub fn units(self) -> Vec<QuadInt> {
        let gen = match self.d {
            // i = ω + 2 and (1 + √−3)/2 = ω + 2
            -1 | -3 => self.elem(2, 1),
            _ => self.elem(-1, 0),
        };
        let mut out = Vec::with_capacity(self.unit_count());
        let mut u = self.one();
        for _ in 0..self.unit_count() {
            out.push(u);
            u = u * gen;
        }
        out
    }

    /// Kronecker symbol `(d_K / n)`, the quadratic character of the field.
    pub fn chi(self, n: i64) -> i32 {
        kronecker(self.disc, n)
    }

    /// Shift `s` with `ω = ω₀ + s`, where `ω₀ = (δ + √d_K)/2` has real part 0 or 1/2.
    fn reduced_shift(self) -> i64 {
        let delta = self.disc.rem_euclid(2);
        (self.disc - delta) / 2
    }

    /// Parses `"a+b*w"`, `"3"`, `"-w"`, `"2-5*w"` and similar.
    pub fn parse_int(self, s: &str) -> Result<QuadInt> {
        let bad = || Error::InvalidInput(format!("cannot parse '{s}' as a+b*w"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(bad());
        }
        let (mut a, mut b) = (0i64, 0i64);
        let bytes = t.as_bytes();
        let mut start = 0;
        let mut i = 1;
        let mut terms = Vec::new();
        while i <= bytes.len() {
            if i == bytes.len() || ((bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'e') {
                terms.push(&t[start..i]);
                start = i;
            }
            i += 1;
        }
        for term in terms {
            let (sign, body) = match term.as_bytes()[0] {
                b'+' => (1, &term[1..]),
                b'-' => (-1, &term[1..]),
                _ => (1, term),
            };
            if let Some(coef) = body.strip_suffix('w') {
                let coef = coef.strip_suffix('*').unwrap_or(coef);
                let k: i64 = if coef.is_empty() { 1 } else { coef.parse().map_err(|_| bad())? };
                b += sign * k;
            } else {
                let k: i64 = body.parse().map_err(|_| bad())?;
                a += sign * k;
            }
        }
        Ok(self.elem(a, b))
    }
}

/// An element `a + b·ω` of `O_K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadInt {
    pub a: i64,
    pub b: i64,
    pub field: Field,
}

impl QuadInt {
    pub fn norm(self) -> i64 {
        let f = self.field;
        self.a * self.a + self.a * self.b * f.disc + self.b * self.b * f.omega_norm()
    }

    pub fn trace(self) -> i64 {
        2 * self.a + self.b * self.field.disc
    }

    pub fn conj(self) -> QuadInt {
        self.field.elem(self.a + self.b * self.field.disc, -self.b)
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn is_unit(self) -> bool {
        self.norm() == 1
    }

    pub fn to_complex(self) -> Complex64 {
        let f = self.field;
        Complex64::new(
            self.a as f64 + self.b as f64 * f.disc as f64 / 2.0,
            self.b as f64 * f.sqrt_abs_disc() / 2.0,
        )
    }

    pub fn abs(self) -> f64 {
        (self.norm() as f64).sqrt()
    }

    /// True when the argument lies in `[0, 2π/w)`, `w` the number of units.
    pub fn is_canonical(self) -> bool {
        let (a, b) = (self.a, self.b);
        let re2 = 2 * a + b * self.field.disc;
        match self.field.unit_count() {
            4 => re2 > 0 && b >= 0,
            6 => re2 > 0 && b >= 0 && b < re2,
            _ => b > 0 || (b == 0 && a > 0),
        }
    }

    /// The unique associate with argument in `[0, 2π/w)`; zero maps to zero.
    pub fn canonical(self) -> QuadInt {
        if self.is_zero() {
            return self;
        }
        for u in self.field.units() {
            let v = self * u;
            if v.is_canonical() {
                return v;
            }
        }
        unreachable!("every nonzero element has a canonical associate")
    }

    /// `self / y` when the quotient lies in `O_K`.
    pub fn div_exact(self, y: QuadInt) -> Option<QuadInt> {
        let n = y.norm();
        if n == 0 {
            return None;
        }
        let num = self * y.conj();
        if num.a % n == 0 && num.b % n == 0 {
            Some(self.field.elem(num.a / n, num.b / n))
        } else {
            None
        }
    }

    pub fn divides(self, x: QuadInt) -> bool {
        if self.is_zero() {
            return x.is_zero();
        }
        x.div_exact(self).is_some()
    }

    /// Euclidean division: `self = q·y + r` with `N(r) < N(y)`, `q` the nearest lattice point.
    pub fn div_rem(self, y: QuadInt) -> (QuadInt, QuadInt) {
        let f = self.field;
        let n = y.norm();
        assert!(n > 0, "division by zero");
        let num = self * y.conj();
        let s = f.reduced_shift();
        let round = |p: i64| (2 * p + n).div_euclid(2 * n);
        let qa0 = round(num.a + num.b * s);
        let qb0 = round(num.b);
        let mut best: Option<(i64, QuadInt, QuadInt)> = None;
        for da in -1..=1 {
            for db in -1..=1 {
                let (qa, qb) = (qa0 + da, qb0 + db);
                let q = f.elem(qa - qb * s, qb);
                let r = self - q * y;
                let nr = r.norm();
                if best.as_ref().is_none_or(|(bn, _, _)| nr < *bn) {
                    best = Some((nr, q, r));
                }
            }
        }
        let (nr, q, r) = best.unwrap();
        debug_assert!(nr < n);
        (q, r)
    }
}

impl Add for QuadInt {
    type Output = QuadInt;
    fn add(self, o: QuadInt) -> QuadInt {
        self.field.elem(self.a + o.a, self.b + o.b)
    }
}

impl Sub for QuadInt {
    type Output = QuadInt;
    fn sub(self, o: QuadInt) -> QuadInt {
        self.field.elem(self.a - o.a, self.b - o.b)
    }
}

impl Neg for QuadInt {
    type Output = QuadInt;
    fn neg(self) -> QuadInt {
        self.field.elem(-self.a, -self.b)
    }
}

impl Mul for QuadInt {
    type Output = QuadInt;
    fn mul(self, o: QuadInt) -> QuadInt {
        debug_assert_eq!(self.field, o.field);
        let f = self.field;
        let bd = self.b * o.b;
        f.elem(
            self.a * o.a - bd * f.omega_norm(),
            self.a * o.b + self.b * o.a + bd * f.disc,
        )
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}*w", self.a, self.b)
    }
}

impl PartialOrd for QuadInt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by norm, then by `(a, b)`.
impl Ord for QuadInt {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.norm(), self.a, self.b).cmp(&(other.norm(), other.a, other.b))
    }
}

/// Canonical greatest common divisor; `gcd(0, 0) = 0`.
pub fn qi_gcd(x: QuadInt, y: QuadInt) -> QuadInt {
    let (mut x, mut y) = (x, y);
    while !y.is_zero() {
        let (_, r) = x.div_rem(y);
        x = y;
        y = r;
    }
    x.canonical()
}

/// Returns `(g, s, t)` with `s·x + t·y = g = qi_gcd(x, y)`.
pub fn qi_xgcd(x: QuadInt, y: QuadInt) -> (QuadInt, QuadInt, QuadInt) {
    let f = x.field;
    let (mut r0, mut r1) = (x, y);
    let (mut s0, mut s1) = (f.one(), f.zero());
    let (mut t0, mut t1) = (f.zero(), f.one());
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(r1);
        r0 = r1;
        r1 = r;
        let s = s0 - q * s1;
        s0 = s1;
        s1 = s;
        let t = t0 - q * t1;
        t0 = t1;
        t1 = t;
    }
    if r0.is_zero() {
        return (r0, f.zero(), f.zero());
    }
    let g = r0.canonical();
    let u = g.div_exact(r0).expect("associates differ by a unit");
    (g, s0 * u, t0 * u)
}

/// Inverse of `x` modulo `c`, if `x` is a unit there.
pub fn inverse_mod(x: QuadInt, c: QuadInt) -> Option<QuadInt> {
    let (g, s, _) = qi_xgcd(x, c);
    if g.is_unit() {
        Some(Residues::new(c).ok()?.reduce(s))
    } else {
        None
    }
}

pub(crate) fn int_egcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// A complete residue system modulo `(c)`, from the Hermite normal form
/// `{(A, 0), (B, D)}` of the lattice `c·O_K` in `{1, ω}` coordinates.
#[derive(Clone, Debug)]
pub struct Residues {
    c: QuadInt,
    big_a: i64,
    big_b: i64,
    big_d: i64,
}

impl Residues {
    pub fn new(c: QuadInt) -> Result<Residues> {
        if c.is_zero() {
            return Err(Error::InvalidInput("modulus must be nonzero".into()));
        }
        let f = c.field;
        let v1 = (c.a, c.b);
        let v2 = (-c.b * f.omega_norm(), c.a + c.b * f.disc);
        let (d, x, y) = int_egcd(v1.1, v2.1);
        let b0 = x * v1.0 + y * v2.0;
        let big_a = c.norm() / d;
        Ok(Residues { c, big_a, big_b: b0.rem_euclid(big_a), big_d: d })
    }

    pub fn modulus(&self) -> QuadInt {
        self.c
    }

    /// `(A, B, D)` with `(c) = {(A, 0), (B, D)}·Z²`.
    pub fn hnf(&self) -> (i64, i64, i64) {
        (self.big_a, self.big_b, self.big_d)
    }

    pub fn len(&self) -> usize {
        (self.big_a * self.big_d) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn reduce_coords(&self, x: i64, y: i64) -> (i64, i64) {
        let k = y.rem_euclid(self.big_d);
        let q = (y - k) / self.big_d;
        ((x - q * self.big_b).rem_euclid(self.big_a), k)
    }

    pub fn reduce(&self, x: QuadInt) -> QuadInt {
        let (a, b) = self.reduce_coords(x.a, x.b);
        self.c.field.elem(a, b)
    }

    pub fn index(&self, x: QuadInt) -> usize {
        let (a, b) = self.reduce_coords(x.a, x.b);
        (a + self.big_a * b) as usize
    }

    pub fn index_ab(&self, a: i64, b: i64) -> usize {
        let (a, b) = self.reduce_coords(a, b);
        (a + self.big_a * b) as usize
    }

    pub fn element(&self, i: usize) -> QuadInt {
        let i = i as i64;
        self.c.field.elem(i % self.big_a, i / self.big_a)
    }

    pub fn iter(&self) -> impl Iterator<Item = QuadInt> + '_ {
        (0..self.len()).map(move |i| self.element(i))
    }
}

/// The representative `a'` of `a mod c` with `a'/c` in the half-open
/// parallelogram `[0,1)·1 + [0,1)·ω`.
pub fn canonical_numerator(a: QuadInt, c: QuadInt) -> QuadInt {
    let n = c.norm();
    let m = a * c.conj();
    let p = m.field.elem(m.a.rem_euclid(n), m.b.rem_euclid(n));
    (p * c).div_exact(c.field.int(n)).expect("p·c is divisible by N(c)")
}

/// Position of `a/c` in the fundamental parallelogram, as integer coordinates
/// of `a·c̄` modulo `N(c)`.
pub fn parallelogram_coords(a: QuadInt, c: QuadInt) -> (i64, i64) {
    let n = c.norm();
    let m = a * c.conj();
    (m.a.rem_euclid(n), m.b.rem_euclid(n))
}

/// One representative per invertible class mod `(c)`, each normalized by
/// [`canonical_numerator`] and sorted by position in the parallelogram.
pub fn residues_coprime(c: QuadInt) -> Result<Vec<QuadInt>> {
    let res = Residues::new(c)?;
    if c.is_unit() {
        return Ok(vec![c.field.zero()]);
    }
    let primes: Vec<QuadInt> = factor(c)?.primes.into_iter().map(|(p, _)| p).collect();
    let mut out: Vec<((i64, i64), QuadInt)> = res
        .iter()
        .filter(|x| primes.iter().all(|p| !p.divides(*x)))
        .map(|x| {
            let a = canonical_numerator(x, c);
            let (u, v) = parallelogram_coords(a, c);
            ((v, u), a)
        })
        .collect();
    out.sort_by_key(|t| t.0);
    Ok(out.into_iter().map(|t| t.1).collect())
}

/// Multiplicative Euler phi of the ideal `(c)`.
pub fn euler_phi(c: QuadInt) -> Result<u64> {
    let fac = factor(c)?;
    Ok(fac
        .primes
        .iter()
        .map(|(p, k)| {
            let q = p.norm() as u64;
            q.pow(k - 1) * (q - 1)
        })
        .product())
}

/// How a rational prime decomposes in `O_K`. Primes are canonical associates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitType {
    Split(QuadInt, QuadInt),
    Inert,
    Ramified(QuadInt),
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Tonelli–Shanks square root of a quadratic residue `n` mod an odd prime `p`.
fn sqrt_mod(n: u64, p: u64) -> u64 {
    let n = n % p;
    if n == 0 {
        return 0;
    }
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(n, q, p);
    let mut r = pow_mod(n, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}

/// Kronecker symbol `(a / n)`.
pub fn kronecker(a: i64, n: i64) -> i32 {
    if n == 0 {
        return if a.abs() == 1 { 1 } else { 0 };
    }
    let mut result = 1;
    let mut n = n;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    while n % 2 == 0 {
        n /= 2;
        match a.rem_euclid(8) {
            0 | 2 | 4 | 6 => return 0,
            3 | 5 => result = -result,
            _ => {}
        }
    }
    // Jacobi symbol for odd n
    let mut a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

fn small_element_of_norm(f: Field, p: i64) -> QuadInt {
    for a in -4..=4 {
        for b in -4..=4 {
            let x = f.elem(a, b);
            if x.norm() == p {
                return x.canonical();
            }
        }
    }
    unreachable!("a prime above 2 has a small generator")
}

/// Decomposition of the rational prime `p` in `O_K`.
pub fn split_type(f: Field, p: u64) -> SplitType {
    let dk = f.disc();
    if p == 2 {
        if dk % 2 == 0 {
            return SplitType::Ramified(small_element_of_norm(f, 2));
        }
        if dk.rem_euclid(8) == 5 {
            return SplitType::Inert;
        }
        let pi = small_element_of_norm(f, 2);
        let pibar = pi.conj().canonical();
        return split_pair(pi, pibar);
    }
    let pi_ = p as i64;
    let dmod = dk.rem_euclid(pi_) as u64;
    let s = if dmod == 0 {
        0
    } else if pow_mod(dmod, (p - 1) / 2, p) == 1 {
        sqrt_mod(dmod, p) as i64
    } else {
        return SplitType::Inert;
    };
    let s = if (s - dk).rem_euclid(2) == 0 { s } else { s + pi_ };
    let x = f.elem((s - dk) / 2, 1);
    let pi = qi_gcd(x, f.int(pi_));
    debug_assert_eq!(pi.norm(), pi_);
    if dmod == 0 {
        SplitType::Ramified(pi)
    } else {
        split_pair(pi, pi.conj().canonical())
    }
}

fn split_pair(x: QuadInt, y: QuadInt) -> SplitType {
    let key = |q: QuadInt| (q.b, q.a);
    if key(x) <= key(y) {
        SplitType::Split(x, y)
    } else {
        SplitType::Split(y, x)
    }
}

/// Prime ideals above `p`, as canonical generators.
pub fn primes_above(f: Field, p: u64) -> Vec<QuadInt> {
    match split_type(f, p) {
        SplitType::Split(a, b) => vec![a, b],
        SplitType::Inert => vec![f.int(p as i64)],
        SplitType::Ramified(a) => vec![a],
    }
}

/// `x = unit · ∏ πᵢ^{kᵢ}` with canonical primes sorted by norm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: QuadInt,
    pub primes: Vec<(QuadInt, u32)>,
}

impl Factorization {
    pub fn is_squarefree(&self) -> bool {
        self.primes.iter().all(|&(_, k)| k == 1)
    }
}

pub(crate) fn rational_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && rational_prime_factors(n) == vec![n]
}

/// Factorization by trial division over the rational primes dividing `N(x)`.
pub fn factor(x: QuadInt) -> Result<Factorization> {
    if x.is_zero() {
        return Err(Error::InvalidInput("cannot factor zero".into()));
    }
    let f = x.field;
    let mut rest = x;
    let mut primes = Vec::new();
    for p in rational_prime_factors(x.norm() as u64) {
        for pi in primes_above(f, p) {
            let mut k = 0;
            while let Some(q) = rest.div_exact(pi) {
                rest = q;
                k += 1;
            }
            if k > 0 {
                primes.push((pi, k));
            }
        }
    }
    debug_assert!(rest.is_unit());
    primes.sort();
    Ok(Factorization { unit: rest, primes })
}

/// All canonical generators of ideal divisors of `(n)`, sorted by norm.
pub fn divisors(n: QuadInt) -> Result<Vec<QuadInt>> {
    let fac = factor(n)?;
    let f = n.field;
    let mut out = vec![f.one()];
    for (p, k) in fac.primes {
        let mut next = Vec::new();
        for d in &out {
            let mut pk = f.one();
            for _ in 0..=k {
                next.push((*d * pk).canonical());
                pk = pk * p;
            }
        }
        out = next;
    }
    out.sort();
    Ok(out)
}

/// Basis `μ₁, μ₂` of the dual lattice with `⟨μᵢ, λⱼ⟩ = δᵢⱼ` for `λ = (1, ω)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualLatticeBasis {
    pub mu1: Complex64,
    pub mu2: Complex64,
}

impl DualLatticeBasis {
    pub fn vector(&self, m1: i64, m2: i64) -> Complex64 {
        self.mu1 * m1 as f64 + self.mu2 * m2 as f64
    }
}

pub fn pairing(mu: Complex64, z: Complex64) -> f64 {
    mu.re * z.re + mu.im * z.im
}

pub fn dual_basis(f: Field) -> DualLatticeBasis {
    let h = f.sqrt_abs_disc() / 2.0;
    let t = f.disc() as f64;
    DualLatticeBasis {
        mu1: Complex64::new(1.0, -t / (2.0 * h)),
        mu2: Complex64::new(0.0, 1.0 / h),
    }
}

/// Hurwitz `ζ(2, x)` by Euler–Maclaurin with `n` direct terms.
fn hurwitz_zeta2(x: f64, n: usize) -> f64 {
    // B_2, B_4, ..., B_16
    const B: [f64; 8] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
    ];
    let mut s: f64 = (0..n).map(|k| (k as f64 + x).powi(-2)).sum();
    let m = n as f64 + x;
    s += 1.0 / m + 0.5 / (m * m);
    let mut p = m.powi(-3);
    let m2 = m * m;
    for b in B {
        s += b * p;
        p /= m2;
    }
    s
}

/// `ζ_K(2) = ζ(2)·L(2, χ_{d_K})`, with the L-value as a character sum of
/// Hurwitz zeta values.
pub fn zeta_k2(f: Field, tol: f64) -> f64 {
    let q = f.disc().unsigned_abs() as i64;
    // The Euler–Maclaurin remainder after n terms is below |B_18|/(n^19) and
    // is far under 1e-16 once n ≥ 10; more terms only when a looser tol is ok.
    let n = if tol < 1e-12 { 20 } else { 12 };
    let l: f64 = (1..q)
        .map(|a| f.chi(a) as f64 * hurwitz_zeta2(a as f64 / q as f64, n))
        .sum::<f64>()
        / (q * q) as f64;
    std::f64::consts::PI.powi(2) / 6.0 * l
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zi() -> Field {
        Field::gaussian()
    }

    #[test]
    fn units_have_norm_one_and_are_distinct() {
        for f in Field::all() {
            let us = f.units();
            assert_eq!(us.len(), f.unit_count());
            for (i, u) in us.iter().enumerate() {
                assert!(u.is_unit());
                for v in &us[..i] {
                    assert_ne!(u, v);
                }
            }
        }
    }

    #[test]
    fn omega_satisfies_its_minimal_polynomial() {
        for f in Field::all() {
            let w = f.elem(0, 1);
            let lhs = w * w;
            let rhs = f.elem(-f.omega_norm(), f.disc());
            assert_eq!(lhs, rhs);
            let z = w.to_complex();
            let zz = z * z;
            let r = rhs.to_complex();
            assert!((zz - r).norm() < 1e-12);
        }
    }

    #[test]
    fn exactly_one_canonical_associate() {
        for f in Field::all() {
            for a in -6..=6 {
                for b in -6..=6 {
                    let x = f.elem(a, b);
                    if x.is_zero() {
                        continue;
                    }
                    let n = f.units().iter().filter(|u| (x * **u).is_canonical()).count();
                    assert_eq!(n, 1, "{x} in d={}", f.d());
                    let arg = x.canonical().to_complex().arg().rem_euclid(std::f64::consts::TAU);
                    assert!(arg < std::f64::consts::TAU / f.unit_count() as f64 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_non_euclidean_fields() {
        for d in [-19, -43, -67, -163, -5, 3] {
            let err = Field::new(d).unwrap_err().to_string();
            assert!(err.contains("-1,-2,-3,-7,-11"), "{err}");
        }
    }

    #[test]
    fn gcd_examples() {
        let f = zi();
        let i = f.elem(2, 1);
        let one_plus_i = f.one() + i;
        assert_eq!(qi_gcd(f.int(2), one_plus_i), one_plus_i.canonical());
        let x = f.elem(5, 0);
        assert_eq!(qi_gcd(x, f.zero()), x.canonical());
        // 3+i = (1+i)(2-i) and 1+2i = i(2-i)
        let g = qi_gcd(f.int(3) + i, f.one() + i * f.int(2));
        assert_eq!(g.norm(), 5);
        assert!(g.divides(f.int(3) + i));
    }

    #[test]
    fn xgcd_bezout() {
        for f in Field::all() {
            for (x, y) in [((7, 3), (2, -5)), ((11, 0), (3, 1)), ((4, 4), (6, 0))] {
                let x = f.elem(x.0, x.1);
                let y = f.elem(y.0, y.1);
                let (g, s, t) = qi_xgcd(x, y);
                assert_eq!(s * x + t * y, g);
                assert_eq!(g, qi_gcd(x, y));
            }
        }
    }

    #[test]
    fn residues_examples() {
        let f = zi();
        assert_eq!(residues_coprime(f.one()).unwrap(), vec![f.zero()]);
        let i = f.elem(2, 1);
        assert_eq!(residues_coprime(f.one() + i).unwrap().len(), 1);
        assert_eq!(residues_coprime(f.int(3)).unwrap().len(), 8);
        assert!(residues_coprime(f.zero()).is_err());
    }

    #[test]
    fn residue_system_is_complete() {
        for f in Field::all() {
            for (a, b) in [(3, 1), (5, -2), (0, 4), (7, 0), (1, 1)] {
                let c = f.elem(a, b);
                let r = Residues::new(c).unwrap();
                assert_eq!(r.len() as i64, c.norm());
                let mut seen = vec![false; r.len()];
                for x in r.iter() {
                    let i = r.index(x);
                    assert!(!seen[i]);
                    seen[i] = true;
                    assert_eq!(r.index(x + c * f.elem(2, -3)), i);
                }
            }
        }
    }

    #[test]
    fn split_type_examples() {
        let f = zi();
        assert_eq!(split_type(f, 3), SplitType::Inert);
        match split_type(f, 2) {
            SplitType::Ramified(p) => assert_eq!(p.norm(), 2),
            other => panic!("{other:?}"),
        }
        match split_type(f, 5) {
            SplitType::Split(p, q) => {
                assert_eq!(p.to_complex(), Complex64::new(2.0, 1.0));
                assert!((p * q).div_exact(f.int(5)).unwrap().is_unit());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn split_type_matches_norm_search() {
        for f in Field::all() {
            for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 101, 997] {
                let has_norm_p = (-40..=40i64)
                    .flat_map(|a| (-40..=40i64).map(move |b| (a, b)))
                    .any(|(a, b)| f.elem(a, b).norm() == p as i64);
                match split_type(f, p) {
                    SplitType::Inert => assert!(!has_norm_p),
                    SplitType::Ramified(pi) => {
                        assert_eq!(pi.norm(), p as i64);
                        assert_eq!((pi * pi).norm(), (p * p) as i64);
                        assert!(pi.divides(f.int(p as i64)));
                        assert!(pi.conj().canonical() == pi);
                    }
                    SplitType::Split(a, b) => {
                        assert_eq!(a.norm(), p as i64);
                        assert_eq!(b.norm(), p as i64);
                        assert_ne!(a, b);
                        assert!((a * b).div_exact(f.int(p as i64)).unwrap().is_unit());
                    }
                }
            }
        }
    }

    #[test]
    fn factor_roundtrip() {
        for f in Field::all() {
            for (a, b) in [(12, 5), (30, 0), (7, 7), (1, 0), (-9, 4)] {
                let x = f.elem(a, b);
                let fac = factor(x).unwrap();
                let mut prod = fac.unit;
                for (p, k) in &fac.primes {
                    for _ in 0..*k {
                        prod = prod * *p;
                    }
                }
                assert_eq!(prod, x);
            }
        }
    }

    #[test]
    fn divisors_of_three_times_one_plus_i() {
        let f = zi();
        let n = f.int(3) * f.elem(3, 1);
        let ds = divisors(n).unwrap();
        assert_eq!(ds.len(), 4);
        assert!(ds.iter().all(|d| d.divides(n) && d.is_canonical() || d.is_unit()));
    }

    #[test]
    fn kronecker_small_table() {
        // (−4 / n) for n = 1..8
        let v: Vec<i32> = (1..=8).map(|n| kronecker(-4, n)).collect();
        assert_eq!(v, vec![1, 0, -1, 0, 1, 0, -1, 0]);
        let v: Vec<i32> = (1..=7).map(|n| kronecker(-7, n)).collect();
        assert_eq!(v, vec![1, 1, -1, 1, -1, -1, 0]);
        assert_eq!(kronecker(-3, 2), -1);
    }

    #[test]
    fn dual_basis_pairs_to_identity() {
        for f in Field::all() {
            let db = dual_basis(f);
            let l = [Complex64::new(1.0, 0.0), f.omega()];
            let m = [db.mu1, db.mu2];
            for (i, mu) in m.iter().enumerate() {
                for (j, la) in l.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((pairing(*mu, *la) - want).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn parse_and_display() {
        let f = zi();
        for s in ["3+2*w", "-1-5*w", "0+0*w", "7-1*w"] {
            assert_eq!(f.parse_int(s).unwrap().to_string(), s);
        }
        assert_eq!(f.parse_int("w").unwrap(), f.elem(0, 1));
        assert_eq!(f.parse_int("-w").unwrap(), f.elem(0, -1));
        assert_eq!(f.parse_int(" 4 ").unwrap(), f.int(4));
        assert_eq!(f.parse_int("2w+1").unwrap(), f.elem(1, 2));
        assert!(f.parse_int("x").is_err());
        assert!(f.parse_int("").is_err());
    }

    #[test]
    fn zeta_gaussian_value() {
        let z = zeta_k2(zi(), 1e-12);
        assert!((z - 1.506_703_04).abs() < 1e-7, "{z}");
    }
}
