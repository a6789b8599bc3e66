use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wedge_core::norms::{
    edge_distance, scaling_checks, weighted_norm, Field, NormSpec, NormVariant, PlanSpec, SamplePlan,
};

fn plan(seed: u64, r_max: f64) -> SamplePlan {
    SamplePlan::new(&PlanSpec { theta0: 0.4, r_min: 1e-5, r_max, points: 600, pairs: 1500, seed }).unwrap()
}

/// A seeded trigonometric polynomial in Cartesian coordinates.
fn trig_poly(seed: u64) -> impl Fn([f64; 3]) -> f64 + Sync {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(f64, [f64; 3], f64)> = (0..6)
        .map(|_| {
            let k = [rng.gen_range(-2.0..2.0), rng.gen_range(0..3) as f64, rng.gen_range(-2.0..2.0)];
            (rng.gen_range(-1.0..1.0), k, rng.gen_range(0.0..6.28))
        })
        .collect();
    move |x| terms.iter().map(|(c, k, ph)| c * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + ph).cos()).sum()
}

fn scaled<'a>(c: f64, f: &'a (dyn Fn([f64; 3]) -> f64 + Sync)) -> impl Fn([f64; 3]) -> f64 + Sync + 'a {
    move |x| c * f(x)
}

#[test]
fn splitting_matches_edge_and_far_parts_term_by_term() {
    let p = plan(4, 40.0);
    let u = trig_poly(9);
    for order in 0..=2u8 {
        let full = weighted_norm(&u, &NormSpec::full(order, 0.4, -0.6, 0.3).unwrap(), &p);
        let edge = weighted_norm(&u, &NormSpec::new(order, 0.4, NormVariant::Edge { k: -0.6 }).unwrap(), &p);
        let far = weighted_norm(&u, &NormSpec::new(order, 0.4, NormVariant::Far { l: 0.3 }).unwrap(), &p);
        for j in 0..=order as usize {
            assert_eq!(full.sup_terms[j], edge.sup_terms[j].max(far.sup_terms[j]));
        }
        assert_eq!(full.holder_term, edge.holder_term.max(far.holder_term));
        assert!(full.total >= edge.total.max(far.total) && full.total <= edge.total + far.total);
    }
}

#[test]
fn plan_pairs_never_straddle_the_unit_circle() {
    let p = plan(5, 100.0);
    assert_eq!(p.points.len(), 600);
    assert_eq!(p.pairs.len(), 1500);
    for (a, b) in &p.pairs {
        assert_eq!(edge_distance(*a) < 1.0, edge_distance(*b) < 1.0);
    }
    assert_eq!(p, plan(5, 100.0));
    assert_ne!(p, plan(6, 100.0));
}

#[test]
fn scaling_zero_field() {
    let report = scaling_checks(&|_: [f64; 3]| 0.0, 0.5, 0.3, 0.2, &plan(1, 1.0)).unwrap();
    assert_eq!(report.norm_a, 0.0);
    assert_eq!(report.edge_norm, 0.0);
    assert_eq!(report.constant_ii, 0.0);
    assert!(report.chains_hold);
}

#[test]
fn scaling_power_field_chains_hold_with_unit_constant() {
    let b = 0.3;
    let u = move |x: [f64; 3]| edge_distance(x).powf(b);
    let report = scaling_checks(&u, 0.5, b, 0.25, &plan(2, 1.0)).unwrap();
    assert!(report.chains_hold, "{report:?}");
    // sup r^b·r^b = 1 on r < 1, approached from below.
    assert!(report.chain_sup.1 <= 1.0 && report.chain_sup.1 > 0.99);
    assert!(report.chain_sup.0 <= report.chain_sup.1);
    assert!(report.constant_iii.is_finite() && report.constant_iii <= 1.0 + 1e-12);
}

#[test]
fn scaling_random_trig_polynomial_has_finite_constants() {
    for seed in 0..3 {
        let u = trig_poly(100 + seed);
        let report = scaling_checks(&u, 0.6, 0.4, 0.3, &plan(seed, 1.0)).unwrap();
        assert!(report.chains_hold, "{report:?}");
        assert!(report.constant_ii.is_finite() && report.constant_ii > 0.0);
        assert!(report.constant_iii.is_finite() && report.constant_iii > 0.0);
    }
}

#[test]
fn finite_difference_and_closure_agree_for_smooth_fields() {
    struct Exact;
    impl Field for Exact {
        fn value(&self, x: [f64; 3]) -> f64 {
            x[0] * x[2] + x[1].sin()
        }
        fn jet(&self, x: [f64; 3], _order: u8) -> wedge_core::norms::CartesianJet {
            wedge_core::norms::CartesianJet {
                value: self.value(x),
                gradient: [x[2], x[1].cos(), x[0]],
                hessian: [[0.0, 0.0, 1.0], [0.0, -x[1].sin(), 0.0], [1.0, 0.0, 0.0]],
            }
        }
    }
    let p = plan(8, 4.0);
    let spec = NormSpec::full(2, 0.5, 0.0, -1.0).unwrap();
    let exact = weighted_norm(&Exact, &spec, &p);
    let fd = weighted_norm(&|x: [f64; 3]| Exact.value(x), &spec, &p);
    for (a, b) in exact.sup_terms.iter().zip(&fd.sup_terms) {
        assert!((a - b).abs() < 1e-5 * a.max(1.0), "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn norm_is_absolutely_homogeneous(seed in 0u64..1000, exp in -4i32..5, negative in any::<bool>(), c in -5.0f64..5.0) {
        let u = trig_poly(seed);
        let p = plan(seed, 20.0);
        let spec = NormSpec::full(1, 0.5, -0.5, 0.2).unwrap();
        let base = weighted_norm(&u, &spec, &p);
        // Powers of two scale without rounding.
        let two = if negative { -(2f64.powi(exp)) } else { 2f64.powi(exp) };
        let scaled_two = weighted_norm(&scaled(two, &u), &spec, &p);
        prop_assert_eq!(scaled_two.total, two.abs() * base.total);
        let general = weighted_norm(&scaled(c, &u), &spec, &p);
        // Rounding in c·u(x) passes through difference quotients with h ≈ 1e-4,
        // so the bound is a few ε/h rather than a few ε.
        let rel = (general.total - c.abs() * base.total).abs() / base.total.max(1e-300);
        prop_assert!(rel <= 1e-11, "relative deviation {}", rel);
    }

    #[test]
    fn norm_satisfies_triangle_inequality(s1 in 0u64..1000, s2 in 0u64..1000) {
        let (u, v) = (trig_poly(s1), trig_poly(s2));
        let p = plan(s1 ^ s2, 20.0);
        for spec in [NormSpec::full(0, 0.3, 0.0, 0.5).unwrap(), NormSpec::full(2, 0.7, -1.0, -0.2).unwrap()] {
            let sum = weighted_norm(&|x: [f64; 3]| u(x) + v(x), &spec, &p).total;
            let bound = weighted_norm(&u, &spec, &p).total + weighted_norm(&v, &spec, &p).total;
            prop_assert!(sum <= bound * (1.0 + 1e-12) + 1e-12);
        }
    }
}
