//! Covolume, index, Petersson norm and the variance constant `C_F`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::coeffs::FormSpec;
use crate::error::{Error, Result};
use crate::hyperbolic::PointH3;
use crate::modsym::ElementGrid;
use crate::quad::GaussLegendre;
use crate::quadfield::{factor, qi_gcd, zeta_k2, Field, QuadInt, Residues};
use crate::special::k0_k1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CovolumeVariant {
    /// `|d_K|²·ζ_K(2)/(4π²)`.
    DiscSquared,
    /// Humbert's `|d_K|^{3/2}·ζ_K(2)/(4π²)`.
    Humbert,
}

pub fn covolume(f: Field, variant: CovolumeVariant) -> f64 {
    let dk = f.disc().abs() as f64;
    let e = match variant {
        CovolumeVariant::DiscSquared => 2.0,
        CovolumeVariant::Humbert => 1.5,
    };
    dk.powf(e) * zeta_k2(f, 1e-15) / (4.0 * PI * PI)
}

/// Volume of `{|x₁| ≤ ½, 0 ≤ x₂ ≤ ½, |z|² + y² ≥ 1}`, a fundamental domain of
/// `PSL₂(Z[i])`, as `∫ dz / (2(1 − |z|²))`.
pub fn fundamental_domain_volume(f: Field) -> Result<f64> {
    if f.d() != -1 {
        return Err(Error::UnsupportedField { d: f.d(), reason: "fundamental domain only implemented for d = -1".into() });
    }
    let gl = GaussLegendre::new(24);
    Ok(gl.composite(|x1| gl.composite(|x2| 0.5 / (1.0 - x1 * x1 - x2 * x2), 0.0, 0.5, 4), -0.5, 0.5, 4))
}

/// `[PSL₂(O_K) : Γ₀(n)] = ∏_{𝔭|n} (N𝔭 + 1)` for squarefree `n`.
pub fn index_gamma0(n: QuadInt) -> Result<u64> {
    let fac = factor(n)?;
    if !fac.is_squarefree() {
        return Err(Error::UnsupportedLevel { level: n.to_string(), reason: "level must be squarefree".into() });
    }
    Ok(fac.primes.iter().map(|(p, _)| p.norm() as u64 + 1).product())
}

/// Points `(c : d)` of `P¹(O/n)`, with `d` normalized to 1 when it is a unit mod `n`.
pub fn projective_line(n: QuadInt) -> Result<Vec<(QuadInt, QuadInt)>> {
    let res = Residues::new(n)?;
    let elems: Vec<QuadInt> = res.iter().collect();
    let mut seen = vec![false; res.len() * res.len()];
    let units: Vec<QuadInt> = elems.iter().copied().filter(|&u| qi_gcd(u, n).is_unit()).collect();
    let mut out = Vec::new();
    for &c in &elems {
        for &d in &elems {
            let (ic, id) = (res.index(c), res.index(d));
            if seen[ic * res.len() + id] || !qi_gcd(qi_gcd(c, d), n).is_unit() {
                continue;
            }
            for &u in &units {
                seen[res.index(u * c) * res.len() + res.index(u * d)] = true;
            }
            out.push((c, d));
        }
    }
    Ok(out)
}

/// Pointwise norm `2|F₀|² + |F₁|² + 2|F₂|²` of the Fourier–Bessel expansion.
pub struct PeterssonDensity<'a> {
    form: &'a FormSpec,
    grid: ElementGrid,
    kappa: f64,
    cut: f64,
}

impl<'a> PeterssonDensity<'a> {
    pub fn new(form: &'a FormSpec) -> PeterssonDensity<'a> {
        PeterssonDensity { form, grid: ElementGrid::new(form), kappa: 4.0 * PI / form.field.sqrt_abs_disc(), cut: 30.0 }
    }

    /// Components `(F₀, F₁, F₂)` at `p`, with `F₀ ∝ −(i/2)(α/|α|)K₁` and
    /// `F₂ ∝ (i/2)(ᾱ/|α|)K₁`.
    pub fn components(&self, p: &PointH3) -> Result<[Complex64; 3]> {
        let f = self.form.field;
        let rmax = self.cut / (self.kappa * p.y);
        let r2 = (rmax * rmax).ceil() as i64;
        if r2 > self.grid.max_norm {
            return Err(Error::InsufficientCoverage { required: r2 as u64, available: self.grid.max_norm as u64 });
        }
        let h = f.sqrt_abs_disc();
        let om = f.omega();
        // ψ(αz/√d_K) = e(2·Im(αz)/√|d_K|) = e(a·θ₁ + b·θ₂)
        let th1 = 2.0 * p.z.im / h;
        let th2 = 2.0 * (om * p.z).im / h;
        let step = Complex64::from_polar(1.0, TAU * th1);
        let y2 = p.y * p.y;
        let mut kc: Vec<(f64, f64)> = vec![(f64::NAN, 0.0); r2 as usize + 1];
        let mut out = [Complex64::new(0.0, 0.0); 3];
        let t = f.disc();
        for (b, lo, coeffs) in self.grid.rows_within(r2) {
            let mut e = Complex64::from_polar(1.0, TAU * (lo as f64 * th1 + b as f64 * th2));
            let mut norm = f.elem(lo, b).norm();
            for (k, &cf) in coeffs.iter().enumerate() {
                if cf != 0 {
                    let slot = &mut kc[norm as usize];
                    if slot.0.is_nan() {
                        *slot = k0_k1(self.kappa * (norm as f64).sqrt() * p.y);
                    }
                    let (kk0, kk1) = *slot;
                    let alpha = f.elem(lo + k as i64, b).to_complex();
                    let unit = alpha / alpha.norm();
                    let base = e * (cf as f64 * y2);
                    out[0] += base * unit * Complex64::new(0.0, -0.5 * kk1);
                    out[1] += base * kk0;
                    out[2] += base * unit.conj() * Complex64::new(0.0, 0.5 * kk1);
                }
                let a = lo + k as i64;
                norm += 2 * a + 1 + b * t;
                e *= step;
            }
        }
        Ok(out)
    }

    pub fn density(&self, p: &PointH3) -> Result<f64> {
        let [f0, f1, f2] = self.components(p)?;
        Ok(2.0 * f0.norm_sqr() + f1.norm_sqr() + 2.0 * f2.norm_sqr())
    }

    /// `½·Σ_α |c(α)|²·a_α^{−2}·X K₀(X)K₁(X)` with `X = a_α·y₀`: the integral of
    /// the density over half a period parallelogram times `[y₀, ∞)`.
    fn upper_region(&self, y0: f64) -> f64 {
        let f = self.form.field;
        let rmax = self.cut / (self.kappa * y0);
        let r2 = ((rmax * rmax).ceil() as i64).min(self.grid.max_norm);
        let mut total = 0.0;
        for (b, lo, coeffs) in self.grid.rows_within(r2) {
            for (k, &cf) in coeffs.iter().enumerate() {
                if cf != 0 {
                    let a = self.kappa * f.elem(lo + k as i64, b).abs();
                    let x = a * y0;
                    let (kk0, kk1) = k0_k1(x);
                    total += (cf as f64).powi(2) * x * kk0 * kk1 / (a * a);
                }
            }
        }
        0.5 * f.covol() * total
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PeterssonEstimate {
    pub value: f64,
    pub err: f64,
    pub cosets: u64,
}

/// Nodes `(x₁, x₂, y, weight·y⁻³)` on `{|z|² + y² ≥ 1, y ≤ 1}` over the half square.
fn lower_nodes(m: usize, k: usize) -> Vec<(f64, f64, f64, f64)> {
    let gz = GaussLegendre::new(m);
    let gy = GaussLegendre::new(k);
    let mut out = Vec::new();
    for (x1, w1) in gz.composite_points(-0.5, 0.5, 2) {
        for (x2, w2) in gz.composite_points(0.0, 0.5, 1) {
            let y0 = (1.0 - x1 * x1 - x2 * x2).sqrt();
            for (y, wy) in gy.composite_points(y0, 1.0, 1) {
                out.push((x1, x2, y, w1 * w2 * wy / (y * y * y)));
            }
        }
    }
    out
}

/// `‖F‖²` over `Γ₀(n)\H³` for `K = Q(i)` and `n` a unit or a prime.
///
/// The cosets `S·T^β` are folded back to the cusp at infinity by the Fricke
/// involution, under which the density is invariant.
pub fn petersson_norm(form: &FormSpec, mesh: usize) -> Result<PeterssonEstimate> {
    let f = form.field;
    if f.d() != -1 {
        return Err(Error::UnsupportedField { d: f.d(), reason: "Petersson quadrature needs d = -1".into() });
    }
    let n = form.level;
    let fac = factor(n)?;
    let prime = match (n.is_unit(), fac.primes.as_slice()) {
        (true, _) => None,
        (false, [(p, 1)]) => Some(*p),
        _ => {
            return Err(Error::UnsupportedLevel {
                level: n.to_string(),
                reason: "Petersson quadrature supports unit or prime level".into(),
            })
        }
    };
    let dens = PeterssonDensity::new(form);
    let run = |m: usize, k: usize| -> Result<f64> {
        let nodes = lower_nodes(m, k);
        let mut total = dens.upper_region(1.0);
        for &(x1, x2, y, w) in &nodes {
            total += w * dens.density(&PointH3 { z: Complex64::new(x1, x2), y })?;
        }
        if let Some(p) = prime {
            let pc = p.to_complex();
            let ap = p.abs();
            total += dens.upper_region(1.0 / ap);
            for beta in Residues::new(p)?.iter() {
                let bc = beta.to_complex();
                for &(x1, x2, y, w) in &nodes {
                    let q = PointH3 { z: (Complex64::new(x1, x2) + bc) / pc, y: y / ap };
                    total += w * dens.density(&q)?;
                }
            }
        }
        Ok(total)
    };
    let coarse = run(mesh, mesh.div_ceil(2).max(2))?;
    let fine = run(mesh + mesh / 2, (mesh + mesh / 2).div_ceil(2).max(3))?;
    let cosets = prime.map_or(1, |p| p.norm() as u64 + 1);
    Ok(PeterssonEstimate { value: fine, err: (fine - coarse).abs(), cosets })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantsReport {
    pub field: i64,
    pub level: String,
    pub zeta_k2: f64,
    pub covolume_disc_squared: f64,
    pub covolume_humbert: f64,
    pub fundamental_domain_volume: Option<f64>,
    /// The variant matching the fundamental-domain volume, used for `c_f`.
    pub covolume_used: CovolumeVariant,
    pub index: u64,
    pub petersson_norm: Option<PeterssonEstimate>,
    /// `4π²‖F‖² / (|d_K|²·ζ_K(2)·index)`.
    pub c_f_disc_squared: Option<f64>,
    /// `4‖F‖² / (vol·index)` with the Humbert covolume.
    pub c_f_humbert: Option<f64>,
    pub c_f: Option<f64>,
    pub notes: Vec<String>,
}

pub fn c_f(f: Field, norm: f64, index: u64, variant: CovolumeVariant) -> f64 {
    4.0 * norm / (covolume(f, variant) * index as f64)
}

pub fn constants_report(form: &FormSpec, mesh: usize) -> Result<ConstantsReport> {
    let f = form.field;
    let z = zeta_k2(f, 1e-15);
    let (vp, vl) = (covolume(f, CovolumeVariant::DiscSquared), covolume(f, CovolumeVariant::Humbert));
    let fd = fundamental_domain_volume(f).ok();
    let mut notes = Vec::new();
    let used = match fd {
        Some(v) if (vp - v).abs() < (vl - v).abs() => CovolumeVariant::DiscSquared,
        _ => CovolumeVariant::Humbert,
    };
    if let Some(v) = fd {
        notes.push(format!(
            "fundamental-domain volume {v:.6}; |d_K|^2 variant {vp:.6} (ratio {:.4}), Humbert variant {vl:.6} (ratio {:.4})",
            vp / v,
            vl / v
        ));
    } else {
        notes.push("no fundamental-domain oracle for this field; Humbert covolume assumed".into());
    }
    let index = index_gamma0(form.level)?;
    let pn = match petersson_norm(form, mesh) {
        Ok(p) => Some(p),
        Err(e) => {
            notes.push(format!("Petersson norm unavailable: {e}"));
            None
        }
    };
    let cp = pn.map(|p| c_f(f, p.value, index, CovolumeVariant::DiscSquared));
    let cl = pn.map(|p| c_f(f, p.value, index, CovolumeVariant::Humbert));
    let c = match used {
        CovolumeVariant::DiscSquared => cp,
        CovolumeVariant::Humbert => cl,
    };
    Ok(ConstantsReport {
        field: f.d(),
        level: form.level.to_string(),
        zeta_k2: z,
        covolume_disc_squared: vp,
        covolume_humbert: vl,
        fundamental_domain_volume: fd,
        covolume_used: used,
        index,
        petersson_norm: pn,
        c_f_disc_squared: cp,
        c_f_humbert: cl,
        c_f: c,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covolume_variants() {
        let f = Field::gaussian();
        let lit = covolume(f, CovolumeVariant::Humbert);
        let pap = covolume(f, CovolumeVariant::DiscSquared);
        assert!((lit - 0.305_32).abs() < 1e-4);
        assert!((pap - 0.610_64).abs() < 1e-4);
        assert!((pap / lit - 2.0).abs() < 1e-12);
        let fd = fundamental_domain_volume(f).unwrap();
        assert!((fd - lit).abs() / lit < 1e-6);
    }

    #[test]
    fn indices() {
        let f = Field::gaussian();
        assert_eq!(index_gamma0(f.one()).unwrap(), 1);
        assert_eq!(index_gamma0(f.int(3)).unwrap(), 10);
        assert_eq!(index_gamma0(f.elem(3, 1)).unwrap(), 3);
        assert_eq!(index_gamma0(f.int(11)).unwrap(), 122);
        assert_eq!(projective_line(f.int(3)).unwrap().len(), 10);
        assert_eq!(projective_line(f.int(15)).unwrap().len() as u64, index_gamma0(f.int(15)).unwrap());
        assert!(index_gamma0(f.int(9)).is_err());
    }

    #[test]
    fn closed_form_bessel_square_integral() {
        for x in [0.05, 0.7, 3.0] {
            let (a, b) = k0_k1(x);
            let direct = crate::quad::adaptive_to_infinity(
                |t| t * (crate::special::k0(t).powi(2) + crate::special::k1(t).powi(2)),
                x,
                2.0,
                1e-300,
                1e-12,
            )
            .0;
            assert!((direct - x * a * b).abs() < 1e-10 * direct);
        }
    }
}
