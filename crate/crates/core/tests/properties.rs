//! Randomized invariants, 1000 cases per property.

use proptest::prelude::*;

use qpf_core::families::{FamilySpec, QpfLift};
use qpf_core::graphs::{
    lsc_envelope, push_graph, strip_gap, strip_order, usc_envelope, GraphOverTheta, Strip, StripOrder,
};
use qpf_core::rotnum::{deviations, rational_dependence};
use qpf_core::GOLDEN_MEAN;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(1000)
}

/// Translation, Arnold with α ∈ [0, 1] and almost-Mathieu Harper maps.
fn any_family() -> impl Strategy<Value = FamilySpec> {
    prop_oneof![
        (-2.0..2.0f64).prop_map(FamilySpec::translation),
        (0.0..=1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, t, b)| FamilySpec::arnold(a, t, b)),
        (0.0..3.0f64, -5.0..5.0f64).prop_map(|(l, e)| FamilySpec::almost_mathieu(l, e)),
    ]
}

fn strictly_monotone_family() -> impl Strategy<Value = FamilySpec> {
    prop_oneof![
        (-2.0..2.0f64).prop_map(FamilySpec::translation),
        (0.0..0.99f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, t, b)| FamilySpec::arnold(a, t, b)),
        (0.0..3.0f64, -5.0..5.0f64).prop_map(|(l, e)| FamilySpec::almost_mathieu(l, e)),
    ]
}

fn arnold_lift() -> impl Strategy<Value = QpfLift> {
    (0.0..=1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, t, b)| FamilySpec::arnold(a, t, b).build().unwrap())
}

fn graph(grid: usize) -> impl Strategy<Value = GraphOverTheta> {
    prop::collection::vec(-3.0..3.0f64, grid).prop_map(|v| GraphOverTheta::new(v).unwrap())
}

fn strip(grid: usize) -> impl Strategy<Value = Strip> {
    (prop::collection::vec(0.0..0.5f64, grid), prop::collection::vec(0.0..0.5f64, grid), -2.0..2.0f64).prop_map(
        |(lo, w, shift)| {
            let lower: Vec<f64> = lo.iter().map(|v| v + shift).collect();
            let upper: Vec<f64> = lower.iter().zip(&w).map(|(a, b)| a + b).collect();
            Strip::new(GraphOverTheta::new(lower).unwrap(), GraphOverTheta::new(upper).unwrap()).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn lift_periodicity(spec in any_family(), theta in 0.0..1.0f64, x in -50.0..50.0f64) {
        let f = spec.build().unwrap();
        prop_assert!((f.eval(theta, x + 1.0) - f.eval(theta, x) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn lift_periodicity_of_iterates(spec in any_family(), theta in 0.0..1.0f64, x in 0.0..1.0f64, n in 0u64..=1000) {
        let f = spec.build().unwrap();
        let a = f.advance(theta, x, n).unwrap();
        let b = f.advance(theta, x + 1.0, n).unwrap();
        prop_assert!((b - a - 1.0).abs() <= 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn fiber_monotonicity(spec in strictly_monotone_family(), theta in 0.0..1.0f64, x in -5.0..5.0f64, dx in 1e-6..1.0f64) {
        let f = spec.build().unwrap();
        prop_assert!(f.eval(theta, x) < f.eval(theta, x + dx));
    }

    #[test]
    fn fiber_monotonicity_weak(spec in any_family(), theta in 0.0..1.0f64, x in -5.0..5.0f64, dx in 0.0..1.0f64, n in 0u64..=1000) {
        let f = spec.build().unwrap();
        prop_assert!(f.advance(theta, x, n).unwrap() <= f.advance(theta, x + dx, n).unwrap());
    }

    #[test]
    fn deviation_spread_within_fiber(f in arnold_lift(), theta in 0.0..1.0f64, x in 0.0..1.0f64, y in 0.0..1.0f64, n in 0u64..=10_000) {
        let rho = 0.3;
        let a = deviations(&f, rho, (theta, x), &[n]).unwrap()[0].value;
        let b = deviations(&f, rho, (theta, y), &[n]).unwrap()[0].value;
        prop_assert!((a - b).abs() <= 1.0 + 1e-9);
    }

    #[test]
    fn push_preserves_order(f in arnold_lift(), g in graph(64), bump in prop::collection::vec(0.0..1.0f64, 64)) {
        let h = GraphOverTheta::new(g.values().iter().zip(&bump).map(|(a, b)| a + b).collect()).unwrap();
        prop_assert!(push_graph(&f, &g).le(&push_graph(&f, &h)).unwrap());
    }

    #[test]
    fn envelopes_sandwich_and_idempotent(g in graph(97), radius in 0usize..6) {
        let up = usc_envelope(&g, radius);
        let down = lsc_envelope(&g, radius);
        prop_assert!(down.le(&g).unwrap());
        prop_assert!(g.le(&up).unwrap());
        prop_assert_eq!(usc_envelope(&up, radius), up);
        prop_assert_eq!(lsc_envelope(&down, radius), down);
    }

    #[test]
    fn strip_order_matches_gap(a in strip(32), b in strip(32)) {
        let order = strip_order(&a, &b).unwrap();
        let gap = strip_gap(&a, &b).unwrap();
        if a == b {
            prop_assert_eq!(order, StripOrder::Precsim);
        }
        prop_assert_eq!(order == StripOrder::Prec, gap > 0.0);
        if order == StripOrder::Prec {
            prop_assert!(strip_order(&b, &a).unwrap() == StripOrder::Incomparable);
        }
    }

    #[test]
    fn rational_witness_ignores_integer_shifts(k in -20i64..=20, l in 0i64..40, m in -3i64..=3) {
        let rho = k as f64 * GOLDEN_MEAN / 4.0 + l as f64 / 40.0;
        let a = rational_dependence(rho, GOLDEN_MEAN, 1e-9, 20, 20);
        let b = rational_dependence(rho + m as f64, GOLDEN_MEAN, 1e-9, 20, 20);
        prop_assert!(a.is_some());
        let (a, b) = (a.unwrap(), b.unwrap());
        prop_assert_eq!((a.k, a.l, a.p, a.q), (b.k, b.l, b.p, b.q));
    }
}

#[test]
fn strip_generator_reaches_every_order() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    let mut seen = [false; 3];
    for _ in 0..1000 {
        let a = strip(32).new_tree(&mut runner).unwrap().current();
        let b = strip(32).new_tree(&mut runner).unwrap().current();
        let slot = match strip_order(&a, &b).unwrap() {
            StripOrder::Prec => 0,
            StripOrder::Precsim => 1,
            StripOrder::Incomparable => 2,
        };
        seen[slot] = true;
        let self_order = strip_order(&a, &a).unwrap();
        assert_eq!(self_order, StripOrder::Precsim);
    }
    assert_eq!(seen, [true, true, true]);
}
