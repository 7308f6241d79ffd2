//! Gauss–Legendre and adaptive Gauss–Kronrod quadrature on finite and
//! half-infinite intervals.

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> GaussLegendre {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                if n == 1 {
                    p0 = 1.0;
                    p1 = x;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
    }

    /// Composite rule over `panels` equal subintervals of `[a, b]`.
    pub fn composite<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels).map(|k| self.integrate(&mut f, a + k as f64 * h, a + (k + 1) as f64 * h)).sum()
    }

    /// Points and weights of the composite rule, for callers that tabulate the integrand.
    pub fn composite_points(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * self.nodes.len());
        for k in 0..panels {
            let lo = a + k as f64 * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
            }
        }
        out
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod (7, 15) on `[a, b]`; returns the estimate and its error bound.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> (f64, f64) {
    let mut stack = vec![(a, b, gk15(&mut f, a, b))];
    let mut done_val = 0.0;
    let mut done_err = 0.0;
    let mut evals = 0usize;
    while let Some((lo, hi, (v, e))) = stack.pop() {
        let total: f64 = done_val + v + stack.iter().map(|s| s.2 .0).sum::<f64>();
        let budget = abs_tol.max(rel_tol * total.abs());
        let width_frac = (hi - lo) / (b - a);
        if e <= budget * width_frac || evals > 200_000 || hi - lo < 1e-14 * (b - a).abs() {
            done_val += v;
            done_err += e;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let l = gk15(&mut f, lo, mid);
        let r = gk15(&mut f, mid, hi);
        evals += 30;
        stack.push((lo, mid, l));
        stack.push((mid, hi, r));
    }
    (done_val, done_err)
}

/// Integral of a function decaying at infinity, over `[a, ∞)`, summed panel
/// by panel until a panel contributes less than the tolerance.
pub fn adaptive_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, panel: f64, abs_tol: f64, rel_tol: f64) -> (f64, f64) {
    let mut total = 0.0;
    let mut err = 0.0;
    let mut lo = a;
    let mut small_runs = 0;
    for _ in 0..100_000 {
        let (v, e) = adaptive(&mut f, lo, lo + panel, abs_tol * 1e-3, rel_tol * 1e-2);
        total += v;
        err += e;
        lo += panel;
        if v.abs() <= abs_tol.max(rel_tol * total.abs()) * 1e-3 {
            small_runs += 1;
            if small_runs >= 3 {
                break;
            }
        } else {
            small_runs = 0;
        }
    }
    (total, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        for n in [1, 2, 5, 10, 20] {
            let gl = GaussLegendre::new(n);
            let sw: f64 = gl.weights.iter().sum();
            assert!((sw - 2.0).abs() < 1e-14);
            let deg = 2 * n - 1;
            let v = gl.integrate(|x| x.powi(deg as i32 - 1), 0.0, 1.0);
            assert!((v - 1.0 / deg as f64).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_log_singularity() {
        let (v, e) = adaptive(|x: f64| x.ln(), 1e-300_f64.max(0.0), 1.0, 1e-12, 1e-12);
        assert!((v + 1.0).abs() < 1e-9, "{v} {e}");
    }

    #[test]
    fn infinite_tail_of_exponential() {
        let (v, _) = adaptive_to_infinity(|x: f64| (-x).exp(), 1.0, 4.0, 1e-14, 1e-13);
        assert!((v - (-1.0f64).exp()).abs() < 1e-13, "{v}");
    }
}
