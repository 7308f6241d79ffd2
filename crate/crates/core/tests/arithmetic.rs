use bianchi::enumerate::{count_q, enumerate_q};
use bianchi::hyperbolic::{act, cusp_equivalent, inequivalent_cusps, Cusp, Mat2, PointH3};
use bianchi::quadfield::{dual_basis, inverse_mod, pairing, qi_gcd, Field, QuadInt, Residues};
use num_complex::Complex64;
use proptest::prelude::*;

fn field() -> impl Strategy<Value = Field> {
    prop::sample::select(Field::SUPPORTED.to_vec()).prop_map(|d| Field::new(d).unwrap())
}

fn elem(f: Field, r: i64) -> impl Strategy<Value = QuadInt> {
    (-r..=r, -r..=r).prop_map(move |(a, b)| f.elem(a, b))
}

fn nonzero(f: Field, r: i64) -> impl Strategy<Value = QuadInt> {
    elem(f, r).prop_filter("nonzero", |x| !x.is_zero())
}

/// Every element of norm at most `m`, by direct search.
fn all_up_to_norm(f: Field, m: i64) -> Vec<QuadInt> {
    let t = f.disc();
    let s = (m as f64).sqrt() as i64 + 1;
    let bmax = 2 * s;
    let mut v = Vec::new();
    for b in -bmax..=bmax {
        let mid = -b * t / 2;
        for a in mid - s - 1..=mid + s + 1 {
            let x = f.elem(a, b);
            if !x.is_zero() && x.norm() <= m {
                v.push(x);
            }
        }
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn norm_is_multiplicative((x, y) in field().prop_flat_map(|f| (elem(f, 1000), elem(f, 1000)))) {
        prop_assert_eq!((x * y).norm(), x.norm() * y.norm());
        prop_assert_eq!(x.norm(), (x * x.conj()).a);
        prop_assert_eq!((x * x.conj()).b, 0);
    }

    #[test]
    fn gcd_matches_common_divisor_search((x, y) in field().prop_flat_map(|f| (nonzero(f, 12), nonzero(f, 12)))) {
        let g = qi_gcd(x, y);
        prop_assert!(g.divides(x) && g.divides(y));
        let best = all_up_to_norm(x.field, x.norm().min(y.norm()))
            .into_iter()
            .filter(|z| z.divides(x) && z.divides(y))
            .map(|z| z.norm())
            .max()
            .unwrap();
        prop_assert_eq!(g.norm(), best);
    }

    #[test]
    fn residues_form_a_complete_system((c, x) in field().prop_flat_map(|f| (nonzero(f, 8), elem(f, 500)))) {
        let res = Residues::new(c).unwrap();
        prop_assert_eq!(res.len() as i64, c.norm());
        let r = res.reduce(x);
        prop_assert!(c.divides(x - r));
        prop_assert_eq!(res.reduce(r), r);
        prop_assert_eq!(res.element(res.index(x)), r);
        if let Some(inv) = inverse_mod(x, c) {
            prop_assert!(c.divides(x * inv - x.field.one()));
        } else {
            prop_assert!(!qi_gcd(x, c).is_unit());
        }
    }

    #[test]
    fn dual_pairing_is_integral_on_the_lattice((f, m1, m2, a, b) in (field(), -20i64..=20, -20i64..=20, -50i64..=50, -50i64..=50)) {
        let mu = dual_basis(f).vector(m1, m2);
        let p = pairing(mu, f.elem(a, b).to_complex());
        prop_assert!((p - (m1 * a + m2 * b) as f64).abs() < 1e-9);
    }

    #[test]
    fn action_is_a_group_action_by_isometries(
        (f, g, h, x, y, t) in field().prop_flat_map(|f| (Just(f), unimodular(f), unimodular(f), -2.0..2.0f64, -2.0..2.0f64, 0.1..3.0f64))
    ) {
        let p = PointH3::new(Complex64::new(x, y), t).unwrap();
        let q = PointH3::new(Complex64::new(-y, 0.5 * x), 2.0 * t).unwrap();
        let (gh_p, g_h_p) = (act(&g.mul(&h), &p).unwrap(), act(&g, &act(&h, &p).unwrap()).unwrap());
        // rounding in z is amplified by 1/y near the boundary
        let cond = |u: &PointH3| (1.0 + u.z.norm()) / u.y;
        prop_assert!(gh_p.distance(&g_h_p) < 1e-13 * cond(&gh_p) + 1e-10);
        let d0 = p.distance(&q);
        let (gp, gq) = (act(&g, &p).unwrap(), act(&g, &q).unwrap());
        let d1 = gp.distance(&gq);
        prop_assert!((d0 - d1).abs() < 1e-13 * (cond(&gp) + cond(&gq)) + 1e-9 * (1.0 + d0), "{} vs {} in {:?}", d0, d1, f);
    }
}

/// Integer matrices of determinant one: products of elementary matrices.
fn unimodular(f: Field) -> impl Strategy<Value = Mat2> {
    prop::collection::vec((elem(f, 3), any::<bool>()), 1..4).prop_map(move |steps| {
        let (one, zero) = (f.one().to_complex(), f.zero().to_complex());
        steps.into_iter().fold(Mat2::identity(), |m, (t, upper)| {
            let t = t.to_complex();
            let e = if upper { Mat2::new(one, t, zero, one) } else { Mat2::new(one, zero, t, one) };
            m.mul(&e)
        })
    })
}

/// Exact `γ = [[a, b], [c, d]] ∈ Γ₀(n)` built from elementary moves.
fn gamma0_words(f: Field, n: QuadInt) -> Vec<[QuadInt; 4]> {
    let (one, zero) = (f.one(), f.zero());
    let mut gens = Vec::new();
    for t in [one, f.elem(0, 1), -one, f.elem(0, -1)] {
        gens.push([one, t, zero, one]);
        gens.push([one, zero, n * t, one]);
    }
    for u in f.units() {
        gens.push([u, zero, zero, u.conj()]);
    }
    let mul = |x: &[QuadInt; 4], y: &[QuadInt; 4]| {
        [x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]]
    };
    let mut words = vec![[one, zero, zero, one]];
    let mut frontier = words.clone();
    for _ in 0..3 {
        let mut next = Vec::new();
        for w in &frontier {
            for g in &gens {
                next.push(mul(w, g));
            }
        }
        words.extend(next.iter().copied());
        frontier = next;
    }
    words
}

fn apply(g: &[QuadInt; 4], r: &Cusp) -> Cusp {
    Cusp::new(g[0] * r.p + g[1] * r.q, g[2] * r.p + g[3] * r.q).unwrap()
}

#[test]
fn cusp_equivalence_agrees_with_orbits() {
    for (d, level) in [(-1, (2, 1)), (-1, (3, 0)), (-2, (1, 1)), (-3, (2, 0)), (-7, (3, 0))] {
        let f = Field::new(d).unwrap();
        let n = f.elem(level.0, level.1);
        let reps = inequivalent_cusps(n).unwrap();
        for (i, r) in reps.iter().enumerate() {
            for (j, s) in reps.iter().enumerate() {
                assert_eq!(cusp_equivalent(r, s, n), i == j, "{r} vs {s} at level {n} over d={d}");
            }
        }
        let words = gamma0_words(f, n);
        let mut samples = Vec::new();
        for (a, b) in [(1, 0), (0, 1), (2, 1), (1, 3), (3, 2), (-2, 5)] {
            for c in [f.int(1), f.elem(1, 1), n, f.int(5), n * f.elem(2, 1)] {
                if qi_gcd(f.elem(a, b), c).is_unit() {
                    samples.push(Cusp::new(f.elem(a, b), c).unwrap());
                }
            }
        }
        samples.push(Cusp::infinity(f));
        for r in &samples {
            let hits: Vec<bool> = reps.iter().map(|s| cusp_equivalent(r, s, n)).collect();
            assert_eq!(hits.iter().filter(|&&h| h).count(), 1, "{r} must match exactly one class at level {n}");
            for w in words.iter().step_by(7) {
                let img = apply(w, r);
                assert!(cusp_equivalent(r, &img, n), "{r} and its image {img} at level {n} over d={d}");
            }
        }
    }
}

#[test]
fn fraction_sets_are_reduced_and_distinct() {
    let f = Field::gaussian();
    let n = f.int(11);
    for d in [f.one(), n] {
        let set = enumerate_q(n, d, 12.0).unwrap();
        assert_eq!(set.len() as u64, count_q(n, d, 12.0).unwrap());
        let mut seen = std::collections::HashSet::new();
        for r in &set.items {
            assert!(qi_gcd(r.a, r.c).is_unit());
            assert_eq!(qi_gcd(r.c, n).canonical(), d.canonical());
            assert!(r.absc < 12.0);
            assert!(seen.insert((r.a, r.c)));
        }
    }
}
