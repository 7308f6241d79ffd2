use std::collections::BTreeMap;
use std::sync::OnceLock;

use bianchi::coeffs::{FormConfig, FormSpec, SourceConfig};
use bianchi::constants::PeterssonDensity;
use bianchi::hyperbolic::{act, Mat2, PointH3};
use bianchi::modsym::{
    dirichlet_l, eval_symbol, eval_symbol_quadrature, gamma_factor, lambda_completed_split, partner_numerator,
    period_lattice_estimate, split_data, SymbolEvaluator,
};
use bianchi::quadfield::{residues_coprime, zeta_k2, Field, QuadInt};
use bianchi::verify::zeta_lattice_sum;
use num_complex::Complex64;
use proptest::prelude::*;

const TOL: f64 = 1e-8;

fn form() -> &'static FormSpec {
    static FORM: OnceLock<FormSpec> = OnceLock::new();
    FORM.get_or_init(|| {
        let cfg = FormConfig {
            field: -1,
            level: "11".into(),
            w: BTreeMap::from([("11".to_string(), -1)]),
            source: SourceConfig::BaseChange { curve: [0, -1, 1, -10, -20] },
            norm_bound: 250_000,
        };
        FormSpec::from_config(&cfg, None).unwrap()
    })
}

fn small_fractions() -> Vec<(QuadInt, QuadInt)> {
    let f = Field::gaussian();
    let mut out = Vec::new();
    for c in [f.one(), f.elem(3, 1), f.int(3), f.elem(4, 1), f.elem(5, 2), f.int(11), f.elem(14, 3)] {
        for a in residues_coprime(c).unwrap().into_iter().take(4) {
            out.push((a, c));
        }
    }
    out
}

#[test]
fn two_tail_matches_quadrature() {
    let form = form();
    for (a, c) in small_fractions() {
        let fast = eval_symbol(form, a, c, TOL).unwrap();
        let slow = eval_symbol_quadrature(form, a, c, 1e-10).unwrap();
        assert!((fast.value - slow.value).abs() < 1e-7, "{a}/{c}: {} vs {}", fast.value, slow.value);
    }
}

#[test]
fn symbol_at_zero_is_a_fifth_period_multiple() {
    // the conductor-11 curve has rational 5-torsion, so 5⟨0⟩ lies in ΩZ
    let f = Field::gaussian();
    let zero = eval_symbol(form(), f.zero(), f.one(), 1e-10).unwrap().value;
    let c = f.int(11) * f.elem(2, 1);
    let ev = SymbolEvaluator::new(form(), 1e-10).unwrap();
    let vals: Vec<f64> = ev
        .symbols_for_denominator(c, &residues_coprime(c).unwrap(), 1.0)
        .unwrap()
        .iter()
        .map(|s| s.value)
        .collect();
    let (omega, _) = period_lattice_estimate(&vals).unwrap();
    let k = 5.0 * zero / omega;
    assert!((k - k.round()).abs() < 1e-6 && k.round() != 0.0, "5<0>/omega = {k}");
}

#[test]
fn symbols_at_multiples_of_the_level_lie_on_a_lattice() {
    let f = Field::gaussian();
    let ev = SymbolEvaluator::new(form(), TOL).unwrap();
    let mut vals = Vec::new();
    for k in [f.elem(1, 1), f.elem(2, 1), f.elem(3, 2), f.int(2)] {
        let c = f.int(11) * k;
        let nums = residues_coprime(c).unwrap();
        vals.extend(ev.symbols_for_denominator(c, &nums, 1.0).unwrap().iter().map(|s| s.value));
    }
    let (omega, resid) = period_lattice_estimate(&vals).unwrap();
    assert!(vals.len() >= 20);
    assert!(resid <= 1e-4 * omega, "residual {resid} for omega {omega}");
    assert!((omega - 0.046_900_15).abs() < 1e-7, "{omega}");

    let doubled = form().scaled(2);
    let ev2 = SymbolEvaluator::new(&doubled, TOL).unwrap();
    let c = f.int(11) * f.elem(2, 1);
    let nums = residues_coprime(c).unwrap();
    let v2: Vec<f64> = ev2.symbols_for_denominator(c, &nums, 1.0).unwrap().iter().map(|s| s.value).collect();
    let (omega2, _) = period_lattice_estimate(&v2).unwrap();
    let v1: Vec<f64> = ev.symbols_for_denominator(c, &nums, 1.0).unwrap().iter().map(|s| s.value).collect();
    let (omega1, _) = period_lattice_estimate(&v1).unwrap();
    assert!((omega2 - 2.0 * omega1).abs() < 1e-7 * omega1);
}

#[test]
fn completed_lambda_matches_the_dirichlet_series() {
    let form = form();
    let ev = SymbolEvaluator::new(form, 1e-12).unwrap();
    let f = form.field;
    let s = 1.8;
    for (a, c) in [(f.zero(), f.one()), (f.one(), f.elem(3, 1)), (f.elem(1, 1), f.int(3))] {
        let lam = lambda_completed_split(&ev, s, a, c, 1.0).unwrap();
        let l = dirichlet_l(form, s, a, c).unwrap();
        let g = gamma_factor(f, s).unwrap();
        assert!((lam - g * l).abs() <= 1e-6 * lam.abs(), "{a}/{c}: {lam} vs {}", g * l);
    }
}

#[test]
fn functional_equation_at_the_cusp_zero() {
    // c = 1: Λ(s, 0) = −w·N(n)^{1−s}·Λ(2−s, 0)
    let form = form();
    let ev = SymbolEvaluator::new(form, 1e-12).unwrap();
    let f = form.field;
    let s = 1.3;
    let lhs = lambda_completed_split(&ev, s, f.zero(), f.one(), 1.0).unwrap();
    let rhs = lambda_completed_split(&ev, 2.0 - s, f.zero(), f.one(), 2.0).unwrap();
    let w = -1.0;
    let expect = -w * 121f64.powf(1.0 - s) * rhs;
    assert!((lhs - expect).abs() <= 1e-6 * lhs.abs(), "{lhs} vs {expect}");
}

#[test]
fn functional_equation_for_general_denominators() {
    // Λ(s, a/c) = −w_e·(|e||c|²)^{2−2s}·Λ(2−s, a'/c) with a' = −(ea)⁻¹ mod c
    let form = form();
    let ev = SymbolEvaluator::new(form, 1e-12).unwrap();
    let f = form.field;
    let s = 1.3;
    for (a, c) in [(f.one(), f.elem(3, 1)), (f.elem(1, 1), f.int(3)), (f.elem(2, 1), f.int(11))] {
        let sd = split_data(form, c).unwrap();
        let p = partner_numerator(a, c, sd.e).unwrap();
        let lhs = lambda_completed_split(&ev, s, a, c, 1.0).unwrap();
        let rhs = lambda_completed_split(&ev, 2.0 - s, p, c, 2.0).unwrap();
        let expect = -(sd.w as f64) * sd.k.powf(2.0 - 2.0 * s) * rhs;
        assert!((lhs - expect).abs() <= 1e-6 * lhs.abs(), "{a}/{c}: {lhs} vs {expect}");
    }
}

#[test]
fn zeta_matches_the_lattice_sum_for_every_field() {
    for f in Field::all() {
        let a = zeta_k2(f, 1e-15);
        let b = zeta_lattice_sum(f, 400_000);
        assert!(((a - b) / b).abs() < 1e-9, "d={}: {a} vs {b}", f.d());
    }
    assert!((zeta_k2(Field::gaussian(), 1e-15) - 1.506_703_009_922_985).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn petersson_density_is_gamma0_invariant((dx, dy, dt) in (-0.02..0.02f64, -0.02..0.02f64, -0.005..0.005f64)) {
        // points near the isometric sphere |11z + d| = 1 keep both heights near 1/11
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let gens = [
            (Mat2::new(c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(1.0, 0.0)), 0.0),
            (Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(11.0, 0.0), c(1.0, 0.0)), 1.0),
            (Mat2::new(c(3.0, 0.0), c(1.0, 0.0), c(11.0, 0.0), c(4.0, 0.0)), 4.0),
            (Mat2::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)), 0.0),
        ];
        let dens = PeterssonDensity::new(form());
        for (g, d) in &gens {
            let p = PointH3::new(c(-d / 11.0 + dx, dy), 1.0 / 11.0 + dt).unwrap();
            let g0 = dens.density(&p).unwrap();
            let g1 = dens.density(&act(g, &p).unwrap()).unwrap();
            prop_assert!((g1 - g0).abs() <= 1e-9 * g0.abs(), "{} vs {}", g0, g1);
        }
    }

    #[test]
    fn symbols_are_periodic((i, la, lb) in (0usize..28, -5i64..=5, -5i64..=5)) {
        let fr = small_fractions();
        let (a, c) = fr[i % fr.len()];
        let f = Field::gaussian();
        let shifted = a + f.elem(la, lb) * c;
        let v1 = eval_symbol(form(), a, c, TOL).unwrap().value;
        let v2 = eval_symbol(form(), shifted, c, TOL).unwrap().value;
        prop_assert!((v1 - v2).abs() < 2.0 * TOL);
    }

    #[test]
    fn scaling_coefficients_scales_symbols_and_density((i, x, y, t) in (0usize..28, -0.5..0.5f64, 0.0..0.5f64, 0.3..2.0f64)) {
        let fr = small_fractions();
        let (a, c) = fr[i % fr.len()];
        let doubled = form().scaled(2);
        let v1 = eval_symbol(form(), a, c, TOL).unwrap().value;
        let v2 = eval_symbol(&doubled, a, c, TOL).unwrap().value;
        prop_assert!((v2 - 2.0 * v1).abs() < 4.0 * TOL);
        let p = PointH3::new(Complex64::new(x, y), t).unwrap();
        let g1 = PeterssonDensity::new(form()).density(&p).unwrap();
        let g2 = PeterssonDensity::new(&doubled).density(&p).unwrap();
        prop_assert!((g2 - 4.0 * g1).abs() <= 1e-12 * g2.abs().max(1e-300));
    }
}
