//! Self-check suites run by `symkdv verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::field::{pde_residual, reconstruct_problem1, reconstruct_problem2, transform_solution, ExactFamily};
use crate::lie::{
    adjoint_closed_form, adjoint_lie_series, commutator, is_canonical, reduce_to_optimal, AlgebraElement, Generator,
    OptimalClass,
};
use crate::reductions::{solve_reduced, ReducedProblem, Variant};
use crate::solver::NewtonConfig;
use crate::spectral::{cgl_nodes, diff_matrix, diff_matrix_power, NodeValues};
use crate::Rational;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Spectral,
    Lie,
    Reductions,
    Field,
}

impl std::str::FromStr for Suite {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "spectral" => Ok(Suite::Spectral),
            "lie" => Ok(Suite::Lie),
            "reductions" => Ok(Suite::Reductions),
            "field" => Ok(Suite::Field),
            _ => Err(crate::Error::InvalidParameter(format!("unknown suite {s:?}"))),
        }
    }
}

pub fn run(suite: Suite, seed: u64) -> Vec<Check> {
    match suite {
        Suite::Spectral => spectral(),
        Suite::Lie => lie(seed),
        Suite::Reductions => reductions(),
        Suite::Field => field(),
    }
}

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn spectral() -> Vec<Check> {
    let n = 20;
    let grid = cgl_nodes::<f64>(n).expect("valid resolution");
    let d = diff_matrix(&grid);
    let z = grid.nodes();
    let mut worst: f64 = 0.0;
    for m in 0..=n as i32 {
        let samples: Vec<f64> = z.iter().map(|x| x.powi(m)).collect();
        let out = d.apply(&samples).expect("length matches");
        let exact = |x: f64| if m == 0 { 0.0 } else { m as f64 * x.powi(m - 1) };
        let err = max_abs(z.iter().zip(&out).map(|(&x, o)| o - exact(x)));
        worst = worst.max(err);
    }
    let d3 = diff_matrix_power(&d, 3).expect("order 3");
    let cubic: Vec<f64> = z.iter().map(|x| 2.0 * x * x * x - x * x + 0.5).collect();
    let third = max_abs(d3.apply(&cubic).expect("length matches").into_iter().map(|v| v - 12.0));
    let data: Vec<f64> = (0..=n).map(|j| (0.3 * j as f64).cos()).collect();
    let vals = NodeValues::new(grid.clone(), data.clone()).expect("length matches");
    let delta = z.iter().zip(&data).all(|(&x, &v)| vals.interpolate(x) == Ok(v));
    vec![
        Check::new(
            "monomial derivatives, N = 20",
            worst <= 1e-7,
            format!("max error {worst:e}"),
        ),
        Check::new(
            "third derivative of a cubic, N = 20",
            third <= 1e-7,
            format!("max error {third:e}"),
        ),
        Check::new("interpolation reproduces node data", delta, String::new()),
    ]
}

/// Pseudo-random elements; every fourth has `a1 = 0`.
pub fn random_elements(seed: u64, count: usize) -> Vec<AlgebraElement<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let mut c: [f64; 3] = std::array::from_fn(|_| rng.random_range(-10.0..10.0));
            if k % 4 == 3 {
                c[0] = 0.0;
            }
            AlgebraElement(c)
        })
        .collect()
}

pub fn lie(seed: u64) -> Vec<Check> {
    use Generator::*;
    let e = AlgebraElement::<Rational>::basis;
    let table_ok = commutator(&e(X1), &e(X2)) == e(X2) * Rational::new(-1, 3)
        && commutator(&e(X1), &e(X3)) == e(X3) * Rational::new(-7, 6)
        && commutator(&e(X2), &e(X3)) == AlgebraElement::zero();
    let mut jacobi = true;
    for a in Generator::ALL {
        for b in Generator::ALL {
            for c in Generator::ALL {
                let (x, y, z) = (e(a), e(b), e(c));
                let s = commutator(&x, &commutator(&y, &z))
                    + commutator(&y, &commutator(&z, &x))
                    + commutator(&z, &commutator(&x, &y));
                jacobi &= s == AlgebraElement::zero();
            }
        }
    }
    let mut series_err: f64 = 0.0;
    for i in Generator::ALL {
        for j in Generator::ALL {
            for s in [-1.0, -0.4, 0.3, 1.0] {
                let series = adjoint_lie_series(i, j, s, 20).expect("terms >= 1");
                let closed = adjoint_closed_form(i, s).apply(&AlgebraElement::basis(j));
                series_err = series_err.max(max_abs((series - closed).0));
            }
        }
    }
    let elements = random_elements(seed, 1000);
    let mut optimal_ok = true;
    let mut worst: f64 = 0.0;
    for x in &elements {
        match reduce_to_optimal(x, 1e-12) {
            Ok(r) => {
                worst = worst.max(r.replay_error());
                let expected = if x.0[0] != 0.0 {
                    OptimalClass::Dilation
                } else {
                    OptimalClass::Translation
                };
                optimal_ok &= r.class == expected && is_canonical(&r.representative);
            }
            Err(_) => optimal_ok = false,
        }
    }
    vec![
        Check::new("commutator table exact", table_ok, String::new()),
        Check::new("Jacobi identity exact", jacobi, String::new()),
        Check::new(
            "Lie series (20 terms) vs closed form",
            series_err <= 1e-9,
            format!("max deviation {series_err:e}"),
        ),
        Check::new(
            "optimal-system reduction of 1000 seeded elements",
            optimal_ok && worst <= 1e-10,
            format!("seed {seed}, max replay error {worst:e}"),
        ),
    ]
}

pub fn reductions() -> Vec<Check> {
    let cfg = NewtonConfig::default();
    let mut out = Vec::new();
    match solve_reduced(
        &ReducedProblem::problem1(25, Variant::PrintedDiscrete).expect("valid"),
        &cfg,
    ) {
        Ok(sol) => {
            let collocated = max_abs(sol.residuals[..23].iter().copied());
            let small = sol.residuals.iter().filter(|&&r| r <= 1e-5).count();
            out.push(Check::new(
                "problem 1, N = 25: converged, collocated rows <= 1e-4",
                sol.converged() && collocated <= 1e-4,
                format!(
                    "rows 1..23 max {collocated:e}; uncollocated row 24 = {:e}",
                    sol.residuals[23]
                ),
            ));
            out.push(Check::new(
                "problem 1, N = 25: >= 18 rows <= 1e-5",
                small >= 18,
                format!("{small} of 24"),
            ));
        }
        Err(e) => out.push(Check::new("problem 1, N = 25", false, e.to_string())),
    }
    for t in [1.0, 2.0, 3.0] {
        let name = format!("problem 2, N = 25, t = {t}: converged, all rows <= 1e-4");
        match solve_reduced(
            &ReducedProblem::problem2(25, t, Variant::PrintedDiscrete).expect("valid"),
            &cfg,
        ) {
            Ok(sol) => {
                let m = sol.max_residual();
                out.push(Check::new(&name, sol.converged() && m <= 1e-4, format!("max {m:e}")));
            }
            Err(e) => out.push(Check::new(&name, false, e.to_string())),
        }
    }
    out
}

pub fn field() -> Vec<Check> {
    let probes: Vec<(f64, f64)> = [-2.0, -1.0, 0.0, 1.0, 2.0]
        .iter()
        .flat_map(|&x| [1.0, 2.0, 3.0].map(|t| (x, t)))
        .collect();
    let mut exact: f64 = 0.0;
    let mut flowed = [0.0f64; 3];
    for b in [0.0, 1.0, -3.0] {
        let u = ExactFamily { b };
        for &(x, t) in &probes {
            exact = exact.max(
                pde_residual(&u, x, t, 1e-2, 1e-4)
                    .map(f64::abs)
                    .unwrap_or(f64::INFINITY),
            );
        }
        for g in Generator::ALL {
            for eps in [-1.0, 0.5, 1.0] {
                let v = transform_solution(u, &[(g, eps)]);
                for &(x, t) in &probes {
                    let r = pde_residual(&v, x, t, 1e-3, 1e-3)
                        .map(f64::abs)
                        .unwrap_or(f64::INFINITY);
                    flowed[g.index() - 1] = flowed[g.index() - 1].max(r);
                }
            }
        }
    }
    let cfg = NewtonConfig::default();
    let mut consistency: f64 = 0.0;
    let mut ok = true;
    if let Ok(sol) = solve_reduced::<f64>(
        &ReducedProblem::problem1(25, Variant::PrintedDiscrete).expect("valid"),
        &cfg,
    ) {
        let t = 2.0;
        for (k, &z) in sol.grid.nodes().iter().enumerate() {
            let z: f64 = z;
            let x = (z * t).cbrt();
            if x.abs() < 0.2 {
                continue;
            }
            match reconstruct_problem1(&sol, &[x], t, 0.2) {
                Ok(f) => consistency = consistency.max((x * x * f.value(0, 0) - sol.values[k]).abs()),
                Err(_) => ok = false,
            }
        }
    } else {
        ok = false;
    }
    if let Ok(sol) = solve_reduced::<f64>(
        &ReducedProblem::problem2(25, 2.0, Variant::PrintedDiscrete).expect("valid"),
        &cfg,
    ) {
        // field grids increase, nodes decrease
        let xs: Vec<f64> = sol.grid.nodes().iter().rev().copied().collect();
        match reconstruct_problem2(&sol, &xs, 2.0) {
            Ok(f) => {
                let n = sol.values.len();
                for (k, &v) in sol.values.iter().enumerate() {
                    let v: f64 = v;
                    consistency = consistency.max((f.value(n - 1 - k, 0) - (v.ln() - 2.0f64.ln() / 4.0)).abs());
                }
            }
            Err(_) => ok = false,
        }
    } else {
        ok = false;
    }
    vec![
        Check::new(
            "exact family satisfies the PDE",
            exact <= 1e-6,
            format!("max residual {exact:e}"),
        ),
        Check::new(
            "exact family flowed along X1 satisfies the PDE",
            flowed[0] <= 1e-5,
            format!("max residual {:e}", flowed[0]),
        ),
        Check::new(
            "exact family flowed along X2 satisfies the PDE",
            flowed[1] <= 1e-5,
            format!("max residual {:e}", flowed[1]),
        ),
        // the X3 field leaves a residual of ε/(4√t) on any solution
        Check::new(
            "exact family flowed along X3 satisfies the PDE",
            flowed[2] <= 1e-5,
            format!("max residual {:e}", flowed[2]),
        ),
        Check::new(
            "reconstruction matches node values",
            ok && consistency <= 1e-13,
            format!("max deviation {consistency:e}"),
        ),
    ]
}
