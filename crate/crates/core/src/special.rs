//! Modified Bessel functions `K₀`, `K₁`, their tail integrals, and `Γ` on the real line.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Beyond this argument `K₀` and `K₁` are below the smallest normal double.
pub const UNDERFLOW_X: f64 = 705.0;

const SERIES_MAX_X: f64 = 2.0;

fn series(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let l = (0.5 * x).ln();
    // K0 pieces
    let mut term = 1.0; // t^k / (k!)^2
    let mut i0 = 0.0;
    let mut hsum = 0.0;
    let mut h = 0.0;
    // K1 pieces, term1 = t^k / (k! (k+1)!)
    let mut term1 = 1.0;
    let mut i1s = 0.0;
    let mut psum = 0.0;
    let mut psi1 = -EULER_GAMMA; // ψ(k+1)
    for k in 0..60 {
        let kf = k as f64;
        i0 += term;
        hsum += h * term;
        let psi2 = psi1 + 1.0 / (kf + 1.0); // ψ(k+2)
        i1s += term1;
        psum += (psi1 + psi2) * term1;
        if term < 1e-18 * i0 && k > 2 {
            break;
        }
        let k1 = kf + 1.0;
        term *= t / (k1 * k1);
        term1 *= t / (k1 * (k1 + 1.0));
        h += 1.0 / k1;
        psi1 = psi2;
    }
    let k0 = -(l + EULER_GAMMA) * i0 + hsum;
    let i1 = 0.5 * x * i1s;
    let k1 = 1.0 / x + l * i1 - 0.25 * x * psum;
    (k0, k1)
}

/// Steed's continued fraction (Temme's CF2) for `e^x K₀(x)` and `e^x K₁(x)`, `x ≥ 2`.
fn cf2_scaled(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// `(K₀(x), K₁(x))` for `x > 0`; zero past [`UNDERFLOW_X`].
pub fn k0_k1(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x <= SERIES_MAX_X {
        series(x)
    } else if x > UNDERFLOW_X {
        (0.0, 0.0)
    } else {
        let (a, b) = cf2_scaled(x);
        let e = (-x).exp();
        (a * e, b * e)
    }
}

/// `(e^x K₀(x), e^x K₁(x))`.
pub fn k0_k1_scaled(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x <= SERIES_MAX_X {
        let (a, b) = series(x);
        let e = x.exp();
        (a * e, b * e)
    } else {
        cf2_scaled(x)
    }
}

pub fn k0(x: f64) -> f64 {
    k0_k1(x).0
}

pub fn k1(x: f64) -> f64 {
    k0_k1(x).1
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() || x == f64::INFINITY {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} requires a positive argument, got {x}")))
    }
}

pub fn bessel_k0(x: f64) -> Result<f64> {
    check_positive("K0", x)?;
    Ok(if x.is_infinite() { 0.0 } else { k0(x) })
}

pub fn bessel_k1(x: f64) -> Result<f64> {
    check_positive("K1", x)?;
    Ok(if x.is_infinite() { 0.0 } else { k1(x) })
}

/// `∫_Y^∞ y K₀(a y) dy = (Y/a) K₁(aY)`.
pub fn tail_integral(a: f64, y: f64) -> Result<f64> {
    check_positive("tail_integral (a)", a)?;
    check_positive("tail_integral (Y)", y)?;
    Ok(y / a * k1(a * y))
}

/// `Γ(s)` for real `s` off the non-positive integers.
pub fn gamma_real(s: f64) -> Result<f64> {
    if s.is_nan() || (s <= 0.0 && s == s.floor()) {
        return Err(Error::Domain(format!("Gamma has a pole at {s}")));
    }
    Ok(gamma(s))
}

fn gamma(s: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if s < 0.5 {
        return PI / ((PI * s).sin() * gamma(1.0 - s));
    }
    let z = s - 1.0;
    let mut acc = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
}

/// `∫_X^∞ t^{2s−1} K₀(t) dt` by composite Gauss–Legendre quadrature: on a
/// logarithmic scale below `t = 2` and in unit panels above it.
pub fn weighted_k0_tail(s: f64, x: f64) -> f64 {
    thread_local! {
        static GL: GaussLegendre = GaussLegendre::new(16);
    }
    GL.with(|gl| {
        let p = 2.0 * s - 1.0;
        let mut total = 0.0;
        let mut lo = x;
        if lo < 2.0 {
            let (u0, u1) = (lo.ln(), 2f64.ln());
            let panels = ((u1 - u0) / 0.5).ceil().max(1.0) as usize;
            total += gl.composite(|u| {
                let t = u.exp();
                t.powf(p + 1.0) * k0(t)
            }, u0, u1, panels);
            lo = 2.0;
        }
        let mut k = 0;
        loop {
            let v = gl.integrate(|t| t.powf(p) * k0(t), lo, lo + 2.0);
            total += v;
            lo += 2.0;
            k += 1;
            if v.abs() < 1e-18 * total.abs() || lo > UNDERFLOW_X || k > 400 {
                break;
            }
        }
        total
    })
}
