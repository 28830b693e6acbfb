use infostab::entropy::{degree_alpha, recursive_build, two_symbol_entropy};
use infostab::stability::lift_f;
use infostab::{
    extract_candidate, residual, Alpha, CanonicalSolution, ProbabilityVector, UnitIntervalFunction,
};
use proptest::prelude::*;

fn admissible_alpha() -> impl Strategy<Value = f64> {
    (-5.0..5.0f64).prop_filter("guard bands", |a| (a - 1.0).abs() > 0.1 && a.abs() > 0.01)
}

fn inner_point() -> impl Strategy<Value = (f64, f64)> {
    (0.01..0.98f64, 0.01..0.98f64).prop_filter("open triangle", |(x, y)| x + y < 0.99)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn power_round_trip(a in -10.0..10.0f64, b in -10.0..10.0f64, alpha in admissible_alpha()) {
        let al = Alpha::new(alpha).unwrap();
        let f = UnitIntervalFunction::power(a, b, al);
        match extract_candidate(&f, al).unwrap() {
            CanonicalSolution::Power { a: ea, b: eb } => {
                prop_assert!((ea - a).abs() <= 1e-8, "a {a} -> {ea}");
                prop_assert!((eb - b).abs() <= 1e-8, "b {b} -> {eb}");
            }
            other => prop_assert!(false, "wrong family {other:?}"),
        }
    }

    #[test]
    fn log_round_trip(lambda in -10.0..10.0f64, c in -10.0..10.0f64) {
        let al = Alpha::new(0.0).unwrap();
        let f = UnitIntervalFunction::log(lambda, c);
        match extract_candidate(&f, al).unwrap() {
            CanonicalSolution::LogPlusConst { lambda: el, c: ec } => {
                prop_assert!((el - lambda).abs() <= 1e-8);
                prop_assert!((ec - c).abs() <= 1e-8);
            }
            other => prop_assert!(false, "wrong family {other:?}"),
        }
    }

    #[test]
    fn residual_is_antisymmetric(alpha in admissible_alpha(), (x, y) in inner_point()) {
        let al = Alpha::new(alpha).unwrap();
        let f = UnitIntervalFunction::power(1.5, -0.5, al);
        let g = infostab::FromFn(|t: f64| f_eval(&f, t) + t * t);
        let r1 = residual(&g, al, x, y).unwrap();
        let r2 = residual(&g, al, y, x).unwrap();
        prop_assert!((r1 + r2).abs() <= 1e-9 * (1.0 + r1.abs()));
    }

    #[test]
    fn exact_solutions_have_no_residual(
        a in -10.0..10.0f64, b in -10.0..10.0f64, alpha in admissible_alpha(), (x, y) in inner_point()
    ) {
        let al = Alpha::new(alpha).unwrap();
        let f = UnitIntervalFunction::power(a, b, al);
        let scale = 1.0 + (a.abs() + b.abs()) * (x.min(y).powf(alpha) + (0.01f64).powf(alpha));
        prop_assert!(residual(&f, al, x, y).unwrap().abs() <= 1e-12 * scale);
    }

    #[test]
    fn lift_is_homogeneous(alpha in admissible_alpha(), u in 0.1..10.0f64, v in 0.1..10.0f64, t in 0.2..5.0f64) {
        let al = Alpha::new(alpha).unwrap();
        let f = UnitIntervalFunction::power(2.0, -3.0, al);
        let base = lift_f(&f, al, u, v).unwrap();
        let scaled = lift_f(&f, al, t * u, t * v).unwrap();
        prop_assert!((scaled - t.powf(alpha) * base).abs() <= 1e-10 * (1.0 + scaled.abs()));
    }

    #[test]
    fn degree_alpha_recursion_is_order_free(
        w in prop::collection::vec(0.05..1.0f64, 3..=6),
        alpha in prop_oneof![-0.5..0.9f64, 1.1..4.0f64],
        rot in 0usize..6,
    ) {
        let al = Alpha::new(alpha).unwrap();
        let total: f64 = w.iter().sum();
        let mut comps: Vec<f64> = w.iter().map(|x| x / total).collect();
        let p = ProbabilityVector::new(comps.clone()).unwrap();
        let n = comps.len();
        comps.rotate_left(rot % n);
        let q = ProbabilityVector::new(comps).unwrap();
        let h2 = two_symbol_entropy(al);
        let hp = recursive_build(&h2, al, &p).unwrap();
        let hq = recursive_build(&h2, al, &q).unwrap();
        prop_assert!((hp - hq).abs() <= 1e-10 * (1.0 + hp.abs()));
        prop_assert!((hp - degree_alpha(&p, al).unwrap()).abs() <= 1e-10 * (1.0 + hp.abs()));
    }
}

fn f_eval(f: &UnitIntervalFunction, t: f64) -> f64 {
    use infostab::Evaluate;
    f.eval(t).unwrap()
}
