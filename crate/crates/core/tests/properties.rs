use proptest::prelude::*;

use symkdv::field::{transform_solution, ExactFamily, Sampler};
use symkdv::lie::{
    adjoint_closed_form, commutator, flow, is_canonical, reduce_to_optimal, AlgebraElement, Generator, OptimalClass,
    Point,
};
use symkdv::spectral::{cgl_nodes, diff_matrix, NodeValues};
use symkdv::Rational;

fn generator() -> impl Strategy<Value = Generator> {
    prop_oneof![Just(Generator::X1), Just(Generator::X2), Just(Generator::X3)]
}

fn element(range: f64) -> impl Strategy<Value = AlgebraElement<f64>> {
    prop::array::uniform3(-range..range).prop_map(AlgebraElement)
}

fn max_diff(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn differentiation_is_exact_on_polynomials(
        n in 1usize..=32,
        coeffs in prop::collection::vec(-1.0f64..1.0, 33),
    ) {
        let grid = cgl_nodes::<f64>(n).unwrap();
        let d = diff_matrix(&grid);
        let c = &coeffs[..=n];
        let p = |x: f64| c.iter().rev().fold(0.0, |acc, &a| acc * x + a);
        let dp = |x: f64| (1..=n).rev().fold(0.0, |acc, k| acc * x + k as f64 * c[k]);
        let samples: Vec<f64> = grid.nodes().iter().map(|&x| p(x)).collect();
        let out = d.apply(&samples).unwrap();
        for (&x, &o) in grid.nodes().iter().zip(&out) {
            prop_assert!((o - dp(x)).abs() <= 1e-9 * (n * n) as f64, "N = {n}, x = {x}: {o} vs {}", dp(x));
        }
    }

    #[test]
    fn interpolant_reproduces_node_data(n in 1usize..=40, seed in prop::collection::vec(-5.0f64..5.0, 41)) {
        let grid = cgl_nodes::<f64>(n).unwrap();
        let vals = NodeValues::new(grid.clone(), seed[..=n].to_vec()).unwrap();
        for (j, &z) in grid.nodes().iter().enumerate() {
            prop_assert_eq!(vals.interpolate(z).unwrap(), seed[j]);
        }
    }

    #[test]
    fn adjoint_group_law(g in generator(), a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let lhs = adjoint_closed_form(g, a).compose(&adjoint_closed_form(g, b));
        let rhs = adjoint_closed_form(g, a + b).entries;
        for r in 0..3 {
            prop_assert!(max_diff(lhs[r], rhs[r]) <= 1e-12);
        }
    }

    #[test]
    fn adjoint_preserves_brackets(g in generator(), eps in -1.0f64..1.0, y in element(3.0), z in element(3.0)) {
        let ad = adjoint_closed_form(g, eps);
        let lhs = ad.apply(&commutator(&y, &z));
        let rhs = commutator(&ad.apply(&y), &ad.apply(&z));
        prop_assert!(max_diff(lhs.0, rhs.0) <= 1e-10 * (1.0 + lhs.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
    }

    #[test]
    fn flow_group_law(g in generator(), a in -1.0f64..1.0, b in -1.0f64..1.0,
                      x in -2.0f64..2.0, t in 0.5f64..4.0, u in -2.0f64..2.0) {
        let p = Point::new(x, t, u);
        let two = flow(g, b, flow(g, a, p).unwrap()).unwrap();
        let one = flow(g, a + b, p).unwrap();
        prop_assert!(max_diff([two.x, two.t, two.u], [one.x, one.t, one.u]) <= 1e-12 * (1.0 + one.x.abs() + one.t));
    }

    #[test]
    fn transform_round_trip(g in generator(), eps in -1.0f64..1.0, b in -3.0f64..3.0,
                            x in -2.0f64..2.0, t in 1.0f64..3.0) {
        let u = ExactFamily { b };
        let back = transform_solution(u, &[(g, eps), (g, -eps)]);
        prop_assert!((back.sample(x, t).unwrap() - u.sample(x, t).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn optimal_reduction_invariant(x in element(10.0), zero_a1 in any::<bool>()) {
        let mut x = x;
        if zero_a1 {
            x.0[0] = 0.0;
        }
        prop_assume!(x.0.iter().any(|v| v.abs() > 1e-6));
        let r = reduce_to_optimal(&x, 1e-12).unwrap();
        prop_assert!(r.replay_error() <= 1e-10);
        prop_assert!(is_canonical(&r.representative));
        if zero_a1 {
            prop_assert_eq!(r.class, OptimalClass::Translation);
            prop_assert_eq!(r.representative.0[0], 0.0);
        } else {
            prop_assert_eq!(r.representative, AlgebraElement::basis(Generator::X1));
        }
    }

    #[test]
    fn exact_optimal_reduction(a in -20i64..20, b in -20i64..20, c in -20i64..20, d in 1i64..9) {
        prop_assume!(a != 0 || b != 0 || c != 0);
        let x = AlgebraElement([Rational::new(a, d), Rational::new(b, d), Rational::new(c, d)]);
        let r = reduce_to_optimal(&x, Rational::from_integer(0)).unwrap();
        prop_assert_eq!(r.replay(), r.representative);
        prop_assert!(is_canonical(&r.representative));
    }
}
