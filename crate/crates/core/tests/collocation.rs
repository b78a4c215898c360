use std::cell::RefCell;

use symkdv::reductions::{
    solve_collocation, solve_reduced, CollocationOperator, Problem1Operator, Problem2Operator, ReducedProblem,
    SpectralOperators, Variant,
};
use symkdv::solver::NewtonConfig;
use symkdv::spectral::DiagonalRule;
use symkdv::Result;

/// Forwards to an inner operator and records every vector it is handed.
struct Spy<'a> {
    inner: &'a dyn CollocationOperator<f64>,
    seen: RefCell<Vec<Vec<f64>>>,
}

impl CollocationOperator<f64> for Spy<'_> {
    fn evaluate(&self, values: &[f64], ops: &SpectralOperators<f64>) -> Result<Vec<f64>> {
        self.seen.borrow_mut().push(values.to_vec());
        self.inner.evaluate(values, ops)
    }

    fn admissible(&self, values: &[f64]) -> bool {
        self.inner.admissible(values)
    }
}

fn all_problems(n: usize) -> Vec<ReducedProblem<f64>> {
    Variant::ALL
        .into_iter()
        .flat_map(|v| {
            [
                ReducedProblem::problem1(n, v).unwrap(),
                ReducedProblem::problem2(n, 2.0, v).unwrap(),
            ]
        })
        .collect()
}

#[test]
fn boundary_handling_does_not_depend_on_the_variant() {
    let n = 16;
    let ops = SpectralOperators::new(n, DiagonalRule::default()).unwrap();
    let cfg = NewtonConfig::default();
    let mut first_calls = Vec::new();
    for v in Variant::ALL {
        let ops_list: [Box<dyn CollocationOperator<f64>>; 2] = [
            Box::new(Problem1Operator { variant: v }),
            Box::new(Problem2Operator { variant: v, t: 2.0 }),
        ];
        for inner in &ops_list {
            let spy = Spy {
                inner: inner.as_ref(),
                seen: RefCell::new(Vec::new()),
            };
            let (values, _) = solve_collocation(&spy, &ops, &cfg, None).unwrap();
            let seen = spy.seen.into_inner();
            assert!(!seen.is_empty());
            for vec in &seen {
                assert_eq!(vec.len(), n + 1);
                assert_eq!((vec[0], vec[n]), (1.0, 1.0));
            }
            assert_eq!((values[0], values[n]), (1.0, 1.0));
            first_calls.push(seen[0].clone());
        }
    }
    // every variant starts from the same pinned, all-ones guess
    assert!(first_calls.iter().all(|c| c == &vec![1.0; n + 1]));
}

#[test]
fn solutions_satisfy_boundary_conditions() {
    let cfg = NewtonConfig::default();
    for p in all_problems(25) {
        let sol = solve_reduced(&p, &cfg).unwrap();
        assert_eq!(sol.values[0], 1.0);
        assert_eq!(sol.values[25], 1.0);
        if sol.converged() {
            assert!(
                (sol.boundary_derivative - 1.0).abs() <= cfg.abs_tol,
                "{p:?}: {}",
                sol.boundary_derivative
            );
        }
    }
}

#[test]
fn reported_residuals_match_a_fresh_evaluation() {
    let cfg = NewtonConfig::default();
    for p in all_problems(20) {
        let sol = solve_reduced(&p, &cfg).unwrap();
        assert_eq!(sol.residuals.len(), 19);
        assert_eq!(sol.recompute_residuals().unwrap(), sol.residuals);
    }
}

#[test]
fn problem2_residual_improves_with_resolution() {
    let cfg = NewtonConfig::default();
    let max_at = |n| {
        let sol = solve_reduced(
            &ReducedProblem::problem2(n, 1.0, Variant::PrintedDiscrete).unwrap(),
            &cfg,
        )
        .unwrap();
        assert!(sol.converged());
        sol.max_residual()
    };
    let (coarse, fine) = (max_at(20), max_at(30));
    assert!(fine <= 2.0 * coarse, "N = 30: {fine:e}, N = 20: {coarse:e}");
}

#[test]
fn solves_are_deterministic() {
    let cfg = NewtonConfig::default();
    let p = ReducedProblem::problem2(25, 3.0, Variant::PrintedDiscrete).unwrap();
    let a = solve_reduced(&p, &cfg).unwrap();
    let b = solve_reduced(&p, &cfg).unwrap();
    assert_eq!(a.values, b.values);
    assert_eq!(a.newton.step_history, b.newton.step_history);
}

#[test]
fn single_precision_solve() {
    let cfg = NewtonConfig::<f32> {
        abs_tol: 1e-5,
        step_tol: 1e-6,
        floor_tol: 1e-1,
        fd_step: 1e-3,
        ..Default::default()
    };
    let sol = solve_reduced(
        &ReducedProblem::<f32>::problem2(12, 1.0, Variant::PrintedDiscrete).unwrap(),
        &cfg,
    )
    .unwrap();
    assert!(sol.values.iter().all(|v| v.is_finite() && *v > 0.0));
    assert_eq!(sol.values[0], 1.0);
}
