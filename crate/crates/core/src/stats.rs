//! Sample statistics for symbol distributions: moments, variance regression,
//! Kolmogorov–Smirnov distance, moment generating function and the growth bound.

use num_complex::Complex64;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn linear_fit(pts: &[(f64, f64)]) -> LinearFit {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    LinearFit { slope, intercept, r2 }
}

/// Symbol values together with the `|c|` of each fraction.
#[derive(Clone, Debug, Default)]
pub struct SymbolSample {
    pub values: Vec<f64>,
    pub absc: Vec<f64>,
}

impl SymbolSample {
    pub fn new(values: Vec<f64>, absc: Vec<f64>) -> SymbolSample {
        assert_eq!(values.len(), absc.len());
        SymbolSample { values, absc }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The members with `|c| < x`.
    pub fn below(&self, x: f64) -> SymbolSample {
        let (values, absc) = self.values.iter().zip(&self.absc).filter(|(_, c)| **c < x).map(|(v, c)| (*v, *c)).unzip();
        SymbolSample { values, absc }
    }
}

/// Mean and population variance.
pub fn moments(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var))
}

/// Least squares of variance against `log X`; needs four `X` values spanning a factor of four.
pub fn variance_regression(points: &[(f64, f64)]) -> Result<LinearFit> {
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(0.0, f64::max);
    if points.len() < 4 || hi < 4.0 * lo {
        return Err(Error::InsufficientData(
            "variance regression needs at least 4 X values spanning a factor of 4".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, v)| (x.ln(), v)).collect();
    Ok(linear_fit(&pts))
}

/// Slopes of the variance law fitted over consecutive windows of `width` grid points.
pub fn windowed_slopes(points: &[(f64, f64)], width: usize) -> Vec<f64> {
    points
        .windows(width)
        .map(|w| linear_fit(&w.iter().map(|&(x, v)| (x.ln(), v)).collect::<Vec<_>>()).slope)
        .collect()
}

/// Exact sup-distance between the empirical CDF of `values` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Normalization {
    pub c: f64,
    pub x: f64,
    /// Subtract the sample mean first.
    pub center: bool,
    /// Use `√(C log |c|)` per fraction instead of `√(C log X)`.
    pub per_denominator: bool,
}

pub fn normalized_values(sample: &SymbolSample, norm: &Normalization) -> Result<Vec<f64>> {
    if norm.c.is_nan() || norm.c <= 0.0 {
        return Err(Error::InvalidInput(format!("normalization constant must be positive, got {}", norm.c)));
    }
    let (mean, _) = moments(&sample.values)?;
    let shift = if norm.center { mean } else { 0.0 };
    let global = (norm.c * norm.x.ln()).sqrt();
    Ok(sample
        .values
        .iter()
        .zip(&sample.absc)
        .map(|(v, c)| {
            let s = if norm.per_denominator { (norm.c * c.ln().max(1e-300)).sqrt() } else { global };
            (v - shift) / s
        })
        .collect())
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

/// KS distance of the normalized sample against the standard normal.
pub fn ks_test(sample: &SymbolSample, norm: &Normalization) -> Result<f64> {
    let z = normalized_values(sample, norm)?;
    Ok(ks_distance(&z, normal_cdf))
}

#[derive(Clone, Debug, Serialize)]
pub struct MgfReport {
    pub eps: Vec<f64>,
    pub empirical_re: Vec<f64>,
    pub empirical_im: Vec<f64>,
    pub predicted: Vec<f64>,
    /// Largest `| |M(ε)| − P(ε) | / P(ε)` over the grid.
    pub max_rel_dev: f64,
    /// Largest `| |M(ε)| − P(ε) |` over the grid.
    pub max_abs_dev: f64,
    pub second_difference: f64,
    pub minus_4pi2_variance: f64,
    pub second_difference_rel_err: f64,
}

/// `(1/N) Σ exp(2πi ε v)`.
pub fn empirical_mgf(values: &[f64], eps: f64) -> Complex64 {
    let tau = std::f64::consts::TAU;
    let n = values.len() as f64;
    if eps == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    values.iter().map(|v| Complex64::from_polar(1.0, tau * eps * v)).sum::<Complex64>() / n
}

/// Compares the empirical MGF with `exp(−2π² C ε² log X)` on `eps_grid`; the
/// second difference at zero uses step `h`.
pub fn mgf_scan(values: &[f64], x: f64, c: f64, eps_grid: &[f64], h: f64, center: bool) -> Result<MgfReport> {
    let (mean, var) = moments(values)?;
    let vals: Vec<f64> = if center { values.iter().map(|v| v - mean).collect() } else { values.to_vec() };
    let pi2 = std::f64::consts::PI.powi(2);
    let mut rep = MgfReport {
        eps: eps_grid.to_vec(),
        empirical_re: Vec::new(),
        empirical_im: Vec::new(),
        predicted: Vec::new(),
        max_rel_dev: 0.0,
        max_abs_dev: 0.0,
        second_difference: 0.0,
        minus_4pi2_variance: -4.0 * pi2 * var,
        second_difference_rel_err: 0.0,
    };
    for &e in eps_grid {
        let m = empirical_mgf(&vals, e);
        let p = (-2.0 * pi2 * c * e * e * x.ln()).exp();
        rep.empirical_re.push(m.re);
        rep.empirical_im.push(m.im);
        rep.predicted.push(p);
        let d = (m.norm() - p).abs();
        rep.max_abs_dev = rep.max_abs_dev.max(d);
        rep.max_rel_dev = rep.max_rel_dev.max(d / p);
    }
    let mp = empirical_mgf(&vals, h);
    let mm = empirical_mgf(&vals, -h);
    rep.second_difference = ((mp + mm).re - 2.0) / (h * h);
    rep.second_difference_rel_err = if var > 0.0 {
        ((rep.second_difference - rep.minus_4pi2_variance) / rep.minus_4pi2_variance).abs()
    } else {
        rep.second_difference.abs()
    };
    Ok(rep)
}

/// `max |⟨r⟩| / (log|c| + 1)` and the index attaining it.
pub fn bound_diagnostic(sample: &SymbolSample) -> Result<(f64, usize)> {
    if sample.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, (v, c)) in sample.values.iter().zip(&sample.absc).enumerate() {
        let r = v.abs() / (c.ln() + 1.0);
        if r > best.0 {
            best = (r, i);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct StatsSummary {
    pub x: f64,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub ks_distance: f64,
    pub bound_ratio: f64,
    pub normalization: Normalization,
}

pub fn summarize(sample: &SymbolSample, norm: &Normalization) -> Result<StatsSummary> {
    let (mean, variance) = moments(&sample.values)?;
    Ok(StatsSummary {
        x: norm.x,
        n: sample.len(),
        mean,
        variance,
        ks_distance: ks_test(sample, norm)?,
        bound_ratio: bound_diagnostic(sample)?.0,
        normalization: *norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_examples() {
        assert_eq!(moments(&[2.5; 7]).unwrap(), (2.5, 0.0));
        assert_eq!(moments(&[-1.0, 1.0]).unwrap(), (0.0, 1.0));
        assert!(moments(&[]).is_err());
    }

    #[test]
    fn planted_variance_law() {
        let pts: Vec<(f64, f64)> = [10.0, 14.0, 20.0, 28.0, 40.0].iter().map(|&x: &f64| (x, 3.0 * x.ln() + 1.0)).collect();
        let fit = variance_regression(&pts).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!(variance_regression(&pts[..3]).is_err());
    }

    #[test]
    fn ks_on_step_functions() {
        let s = SymbolSample::new(vec![0.0; 10], vec![2.0; 10]);
        let norm = Normalization { c: 1.0, x: 10.0, center: false, per_denominator: false };
        assert!((ks_test(&s, &norm).unwrap() - 0.5).abs() < 1e-15);
        // ECDF of {0, 1} against the uniform CDF on [0, 1]
        let d = ks_distance(&[0.0, 1.0], |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5).abs() < 1e-15);
        let bad = Normalization { c: 0.0, ..norm };
        assert!(ks_test(&s, &bad).is_err());
    }

    #[test]
    fn mgf_basics() {
        let v = [0.3, -1.2, 2.0, 0.7];
        assert_eq!(empirical_mgf(&v, 0.0), Complex64::new(1.0, 0.0));
        let a = empirical_mgf(&v, 0.17);
        let b = empirical_mgf(&v, -0.17);
        assert!((a - b.conj()).norm() < 1e-15);
        assert!(a.norm() <= 1.0);
    }

    #[test]
    fn bound_singleton_and_scaling() {
        let s = SymbolSample::new(vec![1.5], vec![3.0]);
        assert_eq!(bound_diagnostic(&s).unwrap().1, 0);
        let s = SymbolSample::new(vec![1.0, -4.0, 2.0], vec![2.0, 5.0, 9.0]);
        let s2 = SymbolSample::new(s.values.iter().map(|v| 2.0 * v).collect(), s.absc.clone());
        let (r1, _) = bound_diagnostic(&s).unwrap();
        let (r2, _) = bound_diagnostic(&s2).unwrap();
        assert!((r2 - 2.0 * r1).abs() < 1e-15);
    }
}
