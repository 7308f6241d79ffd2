//! Upper half-space `H³`, the action of `PSL₂(C)`, and cusps of `Γ₀(n)`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadfield::{divisors, factor, inverse_mod, qi_gcd, Field, QuadInt};

/// A point `z + y·j` with `y > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointH3 {
    pub z: Complex64,
    pub y: f64,
}

impl PointH3 {
    pub fn new(z: Complex64, y: f64) -> Result<PointH3> {
        if y > 0.0 && y.is_finite() && z.is_finite() {
            Ok(PointH3 { z, y })
        } else {
            Err(Error::InvalidInput(format!("height must be positive, got {y}")))
        }
    }

    /// Hyperbolic distance via `cosh d = 1 + (|z−z'|² + (y−y')²)/(2yy')`.
    pub fn distance(&self, o: &PointH3) -> f64 {
        let num = (self.z - o.z).norm_sqr() + (self.y - o.y).powi(2);
        (1.0 + num / (2.0 * self.y * o.y)).acosh()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mat2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Mat2 {
        Mat2 { a, b, c, d }
    }

    pub fn from_quad(a: QuadInt, b: QuadInt, c: QuadInt, d: QuadInt) -> Mat2 {
        Mat2::new(a.to_complex(), b.to_complex(), c.to_complex(), d.to_complex())
    }

    pub fn identity() -> Mat2 {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Mat2::new(o, z, z, o)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    /// Scales by `det^{-1/2}` so that the determinant becomes 1.
    pub fn normalized(&self) -> Result<Mat2> {
        let det = self.det();
        if det.norm() < 1e-300 || !det.is_finite() {
            return Err(Error::InvalidInput("singular matrix".into()));
        }
        let s = det.sqrt().inv();
        Ok(Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s))
    }
}

/// Action of `g` on `H³`; `g` is normalized to determinant 1 first.
pub fn act(g: &Mat2, p: &PointH3) -> Result<PointH3> {
    let g = g.normalized()?;
    let czd = g.c * p.z + g.d;
    let y2 = p.y * p.y;
    let denom = czd.norm_sqr() + g.c.norm_sqr() * y2;
    let z = ((g.a * p.z + g.b) * czd.conj() + g.a * g.c.conj() * y2) / denom;
    Ok(PointH3 { z, y: p.y / denom })
}

/// A cusp `p/q` in lowest terms; `q = 0` is the cusp at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cusp {
    pub p: QuadInt,
    pub q: QuadInt,
}

impl Cusp {
    pub fn new(p: QuadInt, q: QuadInt) -> Result<Cusp> {
        let f = p.field;
        if q.is_zero() {
            if p.is_zero() {
                return Err(Error::InvalidInput("0/0 is not a cusp".into()));
            }
            return Ok(Cusp::infinity(f));
        }
        let g = qi_gcd(p, q);
        let (p, q) = (p.div_exact(g).unwrap(), q.div_exact(g).unwrap());
        let qc = q.canonical();
        let u = qc.div_exact(q).unwrap();
        Ok(Cusp { p: p * u, q: qc })
    }

    pub fn infinity(f: Field) -> Cusp {
        Cusp { p: f.one(), q: f.zero() }
    }

    pub fn is_infinity(&self) -> bool {
        self.q.is_zero()
    }

    pub fn to_complex(&self) -> Option<Complex64> {
        (!self.is_infinity()).then(|| self.p.to_complex() / self.q.to_complex())
    }
}

impl fmt::Display for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// `s` with `p·s ≡ 1 (mod q)`; for `q = 0` the cusp is `1/0` and `s = 1`.
fn cusp_inverse(c: &Cusp) -> QuadInt {
    let f = c.p.field;
    if c.q.is_zero() {
        return f.one();
    }
    if c.q.is_unit() {
        return f.zero();
    }
    inverse_mod(c.p, c.q).expect("cusp in lowest terms")
}

/// Decides `Γ₀(n)`-equivalence by the congruence
/// `s₁q₂ ≡ u² s₂q₁ (mod (q₁q₂) + (n))` over all units `u`.
pub fn cusp_equivalent(r1: &Cusp, r2: &Cusp, n: QuadInt) -> bool {
    let m = qi_gcd(r1.q * r2.q, n);
    if m.is_unit() {
        return true;
    }
    let (s1, s2) = (cusp_inverse(r1), cusp_inverse(r2));
    let lhs = s1 * r2.q;
    let rhs = s2 * r1.q;
    n.field.units().iter().any(|&u| m.divides(lhs - u * u * rhs))
}

/// Representatives `1/d`, one per ideal divisor `(d)` of a squarefree level `(n)`.
pub fn inequivalent_cusps(n: QuadInt) -> Result<Vec<Cusp>> {
    let fac = factor(n)?;
    if !fac.is_squarefree() {
        return Err(Error::UnsupportedLevel {
            level: n.to_string(),
            reason: "level must be squarefree".into(),
        });
    }
    let f = n.field;
    if n.is_unit() {
        return Ok(vec![Cusp::infinity(f)]);
    }
    divisors(n)?.into_iter().map(|d| Cusp::new(f.one(), d)).collect()
}

/// `[Γ_𝔡 : Γ_𝔡'] = |O_K^*|/2`.
pub fn stabilizer_index(f: Field) -> usize {
    f.unit_count() / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basic_actions() {
        let p = PointH3::new(c(0.3, -0.2), 0.7).unwrap();
        let q = act(&Mat2::identity(), &p).unwrap();
        assert!((q.z - p.z).norm() < 1e-15 && (q.y - p.y).abs() < 1e-15);
        let s = Mat2::new(c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let j = PointH3::new(c(0.0, 0.0), 1.0).unwrap();
        let sj = act(&s, &j).unwrap();
        assert!(sj.z.norm() < 1e-15 && (sj.y - 1.0).abs() < 1e-15);
        let t = Mat2::new(c(1.0, 0.0), c(0.5, 2.0), c(0.0, 0.0), c(1.0, 0.0));
        let tp = act(&t, &p).unwrap();
        assert!((tp.z - p.z - c(0.5, 2.0)).norm() < 1e-15 && (tp.y - p.y).abs() < 1e-15);
        let zero = Mat2::new(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0));
        assert!(act(&zero, &p).is_err());
    }

    #[test]
    fn stabilizer_indices() {
        assert_eq!(stabilizer_index(Field::new(-1).unwrap()), 2);
        assert_eq!(stabilizer_index(Field::new(-7).unwrap()), 1);
        assert_eq!(stabilizer_index(Field::new(-3).unwrap()), 3);
    }

    #[test]
    fn cusps_for_small_levels() {
        let f = Field::gaussian();
        assert_eq!(inequivalent_cusps(f.one()).unwrap(), vec![Cusp::infinity(f)]);
        let n = f.elem(3, 1); // 1 + i
        let cs = inequivalent_cusps(n).unwrap();
        assert_eq!(cs.len(), 2);
        assert!(cusp_equivalent(&cs[1], &Cusp::infinity(f), n));
        assert!(!cusp_equivalent(&cs[0], &cs[1], n));
        assert!(inequivalent_cusps(f.int(9)).is_err());
    }

    #[test]
    fn level_three_examples() {
        let f = Field::gaussian();
        let n = f.int(3);
        let inf = Cusp::infinity(f);
        let third = Cusp::new(f.one(), n).unwrap();
        let zero = Cusp::new(f.zero(), f.one()).unwrap();
        assert!(cusp_equivalent(&third, &inf, n));
        assert!(!cusp_equivalent(&zero, &inf, n));
        assert!(cusp_equivalent(&zero, &zero, n));
    }
}
