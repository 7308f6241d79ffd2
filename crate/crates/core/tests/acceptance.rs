//! End-to-end acceptance run on the Q(i) level-11 base-change form over the X grid
//! {10, 14, 20, 28, 40}. Prints one PASS/FAIL line per criterion and fails if any
//! criterion fails.

use std::path::PathBuf;
use std::time::Instant;

use bianchi::coeffs::FormSpec;
use bianchi::verify::{self, Study};

const XGRID: [f64; 5] = [10.0, 14.0, 20.0, 28.0, 40.0];
const TOL: f64 = 1e-7;
const SEED: u64 = 20240611;

struct Board {
    lines: Vec<(u8, bool, String)>,
}

impl Board {
    fn record(&mut self, id: u8, name: &str, passed: bool, detail: String) {
        let line = format!("[{}] {id:>2} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((id, passed, line));
    }

    fn error(&mut self, id: u8, name: &str, e: bianchi::Error) {
        self.record(id, name, false, format!("error: {e}"));
    }
}

fn reference_form() -> FormSpec {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../forms/qi-11.json");
    FormSpec::load(&path).expect("reference form config")
}

#[test]
fn acceptance() {
    let mut b = Board { lines: Vec::new() };
    println!();

    let t = Instant::now();
    let sf = verify::special_function_fidelity();
    let secs = t.elapsed().as_secs_f64();
    b.record(
        1,
        "special-function fidelity",
        sf.bessel_max_rel <= 1e-10 && sf.tail_max_rel <= 1e-10 && secs <= 10.0,
        format!("K0/K1 rel {:.2e}, tail integral rel {:.2e}, {secs:.2}s", sf.bessel_max_rel, sf.tail_max_rel),
    );

    let form = reference_form();
    let study = Study::new(&form, &XGRID, TOL).expect("symbol evaluation");

    match verify::symmetry(&study, 50, SEED) {
        Ok(r) => b.record(
            2,
            "functional-equation symmetry",
            r.iter().all(|c| c.checked == 50 && c.worst_ratio <= 2.0),
            r.iter().map(|c| format!("class {} worst {:.3}x err", c.klass, c.worst_ratio)).collect::<Vec<_>>().join(", "),
        ),
        Err(e) => b.error(2, "functional-equation symmetry", e),
    }

    match verify::oracle_equivalence(&form, &study.ev, 10.0) {
        Ok(r) => b.record(
            3,
            "oracle equivalence",
            r.max_abs_diff <= 1e-6 && r.seconds <= 120.0,
            format!("{} fractions, max |diff| {:.2e}, {:.1}s", r.fractions, r.max_abs_diff, r.seconds),
        ),
        Err(e) => b.error(3, "oracle equivalence", e),
    }

    match verify::split_invariance(&study, 14.0, 200, SEED) {
        Ok(r) => b.record(
            4,
            "split invariance",
            r.max_change <= 2.0 * TOL,
            format!("{} fractions, max change {:.2e}", r.fractions, r.max_change),
        ),
        Err(e) => b.error(4, "split invariance", e),
    }

    match verify::period_lattice(&study, 10) {
        Ok(r) => b.record(
            5,
            "period lattice",
            r.fractions >= 20 && r.max_residual <= 1e-4 * r.omega && r.control_breaks_fit(),
            format!(
                "{} fractions, omega {:.8}, residual {:.2e}, control fit {:?}",
                r.fractions, r.omega, r.max_residual, r.control_omega
            ),
        ),
        Err(e) => b.error(5, "period lattice", e),
    }

    match verify::count_slope(form.level, form.field.one(), &XGRID) {
        Ok((s, counts)) => b.record(6, "counting", (3.8..=4.2).contains(&s), format!("slope {s:.4}, counts {counts:?}")),
        Err(e) => b.error(6, "counting", e),
    }

    match verify::bound_trend(&study) {
        Ok(m) => {
            let g = m[m.len() - 1] / m[0];
            b.record(7, "symbol bound", g <= 1.5, format!("max ratio per X {m:.4?}, growth {g:.3}"))
        }
        Err(e) => b.error(7, "symbol bound", e),
    }

    let var = verify::variance_law(&study).expect("variance regression");
    let c_fit = var.fit.slope;
    let spread = var.windowed.iter().map(|s| (s - c_fit).abs() / c_fit).fold(0.0, f64::max);
    b.record(
        8,
        "variance law",
        var.fit.r2 >= 0.98 && spread <= 0.15,
        format!("C_fit {c_fit:.5}, R^2 {:.4}, windowed {:.5?}, max dev {:.1}%", var.fit.r2, var.windowed, 100.0 * spread),
    );

    match verify::constant_cross_check(&form, c_fit) {
        Ok(r) => {
            let gap = r.rel_gap.unwrap_or(f64::INFINITY);
            b.record(
                9,
                "constant cross-check",
                gap <= 0.25,
                format!(
                    "C_F {:.5} ({:?}), C_fit {c_fit:.5}, gap {:.1}%; |d_K|^2 variant {:.5} gap {:.1}%",
                    r.report.c_f.unwrap_or(f64::NAN),
                    r.report.covolume_used,
                    100.0 * gap,
                    r.report.c_f_disc_squared.unwrap_or(f64::NAN),
                    100.0 * r.rel_gap_disc_squared.unwrap_or(f64::NAN)
                ),
            )
        }
        Err(e) => b.error(9, "constant cross-check", e),
    }

    match verify::normality(&study, c_fit) {
        Ok(ks) => b.record(
            10,
            "normality",
            ks[ks.len() - 1] <= 0.05 && ks.windows(2).all(|w| w[1] <= 1.1 * w[0]),
            format!("KS per X {ks:.4?}"),
        ),
        Err(e) => b.error(10, "normality", e),
    }

    match verify::equidistribution(&study) {
        Ok(w) => {
            let m: Vec<f64> = w.iter().map(|r| r.iter().fold(0.0f64, |a, v| a.max(*v))).collect();
            b.record(
                11,
                "equidistribution",
                m[m.len() - 1] <= 0.05 && m.windows(2).all(|p| p[1] <= p[0]),
                format!("max |W|/N per X {m:.4?}"),
            )
        }
        Err(e) => b.error(11, "equidistribution", e),
    }

    match verify::mgf(&study, c_fit) {
        Ok(m) => b.record(
            12,
            "MGF consistency",
            m.second_difference_rel_err <= 0.05 && m.max_rel_dev <= 0.10,
            format!(
                "second difference rel err {:.2e}, max rel dev {:.3} (abs {:.4})",
                m.second_difference_rel_err, m.max_rel_dev, m.max_abs_dev
            ),
        ),
        Err(e) => b.error(12, "MGF consistency", e),
    }

    let t = Instant::now();
    let z = verify::zeta_oracle();
    let secs = t.elapsed().as_secs_f64();
    let worst = z.iter().map(|(_, a, o)| ((a - o) / o).abs()).fold(0.0, f64::max);
    b.record(
        13,
        "zeta_K(2)",
        z.len() == 5 && worst <= 1e-9 && secs <= 30.0,
        format!("max rel diff {worst:.2e} over {} fields, {secs:.2}s", z.len()),
    );

    match verify::covolume_oracle() {
        Ok(c) => {
            let rel = (c.humbert - c.fundamental_domain).abs() / c.fundamental_domain;
            let ratio = c.disc_squared / c.fundamental_domain;
            b.record(
                14,
                "covolume oracle",
                rel <= 0.01 && (ratio - 2.0).abs() <= 0.01,
                format!("Humbert rel {rel:.1e}; |d_K|^2 variant off by factor {ratio:.4}"),
            )
        }
        Err(e) => b.error(14, "covolume oracle", e),
    }

    let failed: Vec<u8> = b.lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    println!("{}/{} criteria passed", b.lines.len() - failed.len(), b.lines.len());
    assert_eq!(b.lines.len(), 14);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
