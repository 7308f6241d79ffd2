//! WebAssembly bindings for the static demo page in `www/`.

use std::cell::OnceCell;
use std::collections::BTreeMap;

use bianchi::coeffs::{FormConfig, FormSpec, SourceConfig};
use bianchi::enumerate::{count_q, enumerate_q};
use bianchi::modsym::SymbolEvaluator;
use bianchi::quadfield::{factor, residues_coprime, Field};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Coefficients of the demo form only reach this norm, which bounds the denominators.
pub const DEMO_NORM_BOUND: u64 = 40_000;

thread_local! {
    static FORM: OnceCell<FormSpec> = const { OnceCell::new() };
}

fn js(e: bianchi::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Norm, canonical associate and prime factorization of `a+b*w` in `Q(√d)`.
#[wasm_bindgen]
pub fn factorize(d: i32, x: &str) -> Result<String, JsError> {
    let f = Field::new(d as i64).map_err(js)?;
    let x = f.parse_int(x).map_err(js)?;
    let fac = factor(x).map_err(js)?;
    let primes: Vec<_> = fac.primes.iter().map(|(p, k)| json!({ "prime": p.to_string(), "norm": p.norm(), "exp": k })).collect();
    Ok(json!({
        "element": x.to_string(),
        "norm": x.norm(),
        "canonical": x.canonical().to_string(),
        "unit": fac.unit.to_string(),
        "primes": primes,
    })
    .to_string())
}

/// `#Q_d(X)` for `X` in `xs`, plus the first few fractions at the largest `X`.
#[wasm_bindgen]
pub fn count_fractions(d: i32, level: &str, divisor: &str, xs: &[f64]) -> Result<String, JsError> {
    let f = Field::new(d as i64).map_err(js)?;
    let n = f.parse_int(level).map_err(js)?;
    let dv = f.parse_int(divisor).map_err(js)?;
    let counts = xs.iter().map(|&x| count_q(n, dv, x)).collect::<bianchi::Result<Vec<_>>>().map_err(js)?;
    let xmax = xs.iter().copied().fold(0.0, f64::max).min(12.0);
    let sample: Vec<String> = enumerate_q(n, dv, xmax).map_err(js)?.items.iter().take(24).map(|r| format!("({})/({})", r.a, r.c)).collect();
    Ok(json!({ "x": xs, "counts": counts, "sample": sample }).to_string())
}

fn demo_form() -> bianchi::Result<FormSpec> {
    let cfg = FormConfig {
        field: -1,
        level: "11".into(),
        w: BTreeMap::from([("11".to_string(), -1)]),
        source: SourceConfig::BaseChange { curve: [0, -1, 1, -10, -20] },
        norm_bound: DEMO_NORM_BOUND,
    };
    FormSpec::from_config(&cfg, None)
}

/// Modular symbols `⟨a/c⟩` of the Q(i) level-11 base-change form for every
/// numerator `a` invertible mod `c`.
#[wasm_bindgen]
pub fn symbols(c: &str, tol: f64) -> Result<String, JsError> {
    FORM.with(|cell| {
        if cell.get().is_none() {
            let _ = cell.set(demo_form().map_err(js)?);
        }
        let form = cell.get().expect("initialized above");
        let c = form.field.parse_int(c).map_err(js)?;
        if c.is_zero() {
            return Err(JsError::new("denominator must be nonzero"));
        }
        let nums = residues_coprime(c).map_err(js)?;
        let ev = SymbolEvaluator::new(form, tol).map_err(js)?;
        let vals = ev.symbols_for_denominator(c, &nums, 1.0).map_err(js)?;
        let rows: Vec<_> = nums
            .iter()
            .zip(&vals)
            .map(|(a, v)| json!({ "a": a.to_string(), "value": v.value, "err": v.err }))
            .collect();
        Ok(json!({ "c": c.to_string(), "symbols": rows }).to_string())
    })
}
