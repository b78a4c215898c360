//! Damped Newton iteration for small square nonlinear systems.
//!
//! The Jacobian is built column by column from forward differences and the
//! Newton step comes from a dense LU factorization with partial pivoting.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig<T> {
    pub max_iters: usize,
    /// Target for the residual max-norm.
    pub abs_tol: T,
    /// Relative step size `‖Δx‖∞ / max(1, ‖x‖∞)` at which the iteration is
    /// considered to have reached the rounding floor.
    pub step_tol: T,
    /// Largest residual max-norm accepted together with `step_tol`.
    pub floor_tol: T,
    /// Forward-difference step, scaled per column by `max(1, |x_j|)`.
    pub fd_step: T,
    pub backtracking: bool,
    pub max_halvings: usize,
}

impl<T: Real> Default for NewtonConfig<T> {
    fn default() -> Self {
        Self {
            max_iters: 50,
            abs_tol: real(1e-12),
            step_tol: real(1e-12),
            floor_tol: real(1e-6),
            fd_step: real(1e-7),
            backtracking: true,
            max_halvings: 20,
        }
    }
}

impl<T: Real> NewtonConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        if !(positive(self.abs_tol) && positive(self.step_tol) && positive(self.floor_tol) && positive(self.fd_step)) {
            return Err(Error::InvalidParameter(
                "Newton tolerances and fd_step must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// Residual max-norm fell below `abs_tol`.
    ResidualTolerance,
    /// Newton step below `step_tol` with residual below `floor_tol`.
    StepTolerance,
    MaxIterations,
    SingularJacobian,
    /// No acceptable step length was found.
    LineSearchFailed,
    /// The residual was not finite at the initial guess.
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonReport<T> {
    pub solution: Vec<T>,
    pub iterations: usize,
    pub final_residual_norm: T,
    pub converged: bool,
    pub singular_jacobian: bool,
    pub termination: Termination,
    /// Residual max-norm at the initial guess and after every accepted step.
    pub step_history: Vec<T>,
}

fn max_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| {
        let a = x.abs();
        if a > m || !a.is_finite() {
            a
        } else {
            m
        }
    })
}

fn finite<T: Real>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Forward-difference Jacobian of `f` at `x`, given `fx = f(x)`.
pub fn fd_jacobian<T, F>(f: &F, x: &[T], fx: &[T], step: T) -> Result<DMatrix<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    let m = x.len();
    let mut jac = DMatrix::<T>::zeros(fx.len(), m);
    let mut probe = x.to_vec();
    for j in 0..m {
        let h = step * x[j].abs().max(T::one());
        probe[j] = x[j] + h;
        let fp = f(&probe)?;
        if fp.len() != fx.len() {
            return Err(Error::DimensionMismatch {
                input: m,
                output: fp.len(),
            });
        }
        // use the representable increment
        let dh = probe[j] - x[j];
        for (i, (&a, &b)) in fp.iter().zip(fx).enumerate() {
            jac[(i, j)] = (a - b) / dh;
        }
        probe[j] = x[j];
    }
    Ok(jac)
}

/// Solves `F(x) = 0` from `x0`.
pub fn newton_solve<T, F>(residual: F, x0: &[T], cfg: &NewtonConfig<T>) -> Result<NewtonReport<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    newton_solve_guarded(residual, |_: &[T]| true, x0, cfg)
}

/// Like [`newton_solve`], but every trial iterate must satisfy `guard`; steps
/// are halved until it does.
pub fn newton_solve_guarded<T, F, G>(residual: F, guard: G, x0: &[T], cfg: &NewtonConfig<T>) -> Result<NewtonReport<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<Vec<T>>,
    G: Fn(&[T]) -> bool,
{
    cfg.validate()?;
    if !finite(x0) {
        return Err(Error::InvalidParameter("initial guess must be finite".into()));
    }
    let m = x0.len();
    let mut x = x0.to_vec();
    let mut fx = residual(&x)?;
    if fx.len() != m {
        return Err(Error::DimensionMismatch {
            input: m,
            output: fx.len(),
        });
    }
    let mut norm = max_norm(&fx);
    let mut history = vec![norm];
    let report = |x: Vec<T>, iterations, norm: T, termination, history| NewtonReport {
        solution: x,
        iterations,
        final_residual_norm: norm,
        converged: matches!(termination, Termination::ResidualTolerance | Termination::StepTolerance),
        singular_jacobian: termination == Termination::SingularJacobian,
        termination,
        step_history: history,
    };
    if !norm.is_finite() {
        return Ok(report(x, 0, norm, Termination::NonFinite, history));
    }
    if norm <= cfg.abs_tol {
        return Ok(report(x, 0, norm, Termination::ResidualTolerance, history));
    }

    let half: T = real(0.5);
    for iter in 1..=cfg.max_iters {
        let jac = fd_jacobian(&residual, &x, &fx, cfg.fd_step)?;
        let rhs = DVector::from_iterator(m, fx.iter().map(|&v| -v));
        let dx = match jac.lu().solve(&rhs) {
            Some(dx) if finite(dx.as_slice()) => dx,
            _ => return Ok(report(x, iter - 1, norm, Termination::SingularJacobian, history)),
        };
        let dx = dx.as_slice();

        let scale = max_norm(&x).max(T::one());
        if max_norm(dx) <= cfg.step_tol * scale {
            // at the rounding floor; keep whichever iterate has the smaller residual
            let trial: Vec<T> = x.iter().zip(dx).map(|(&a, &d)| a + d).collect();
            if guard(&trial) {
                if let Ok(ft) = residual(&trial) {
                    let nt = max_norm(&ft);
                    if nt.is_finite() && nt <= norm {
                        x = trial;
                        norm = nt;
                        history.push(norm);
                    }
                }
            }
            let term = if norm <= cfg.abs_tol {
                Termination::ResidualTolerance
            } else if norm <= cfg.floor_tol {
                Termination::StepTolerance
            } else {
                Termination::LineSearchFailed
            };
            return Ok(report(x, iter, norm, term, history));
        }

        let mut lambda = T::one();
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<T> = x.iter().zip(dx).map(|(&a, &d)| a + lambda * d).collect();
            if guard(&trial) {
                if let Ok(ft) = residual(&trial) {
                    let nt = max_norm(&ft);
                    if nt.is_finite() && (!cfg.backtracking || nt < norm) {
                        accepted = Some((trial, ft, nt));
                        break;
                    }
                }
            }
            lambda *= half;
        }
        let Some((trial, ft, nt)) = accepted else {
            let term = if norm <= cfg.floor_tol {
                // no decrease possible at the rounding floor
                Termination::StepTolerance
            } else {
                Termination::LineSearchFailed
            };
            return Ok(report(x, iter, norm, term, history));
        };
        x = trial;
        fx = ft;
        norm = nt;
        history.push(norm);
        if norm <= cfg.abs_tol {
            return Ok(report(x, iter, norm, Termination::ResidualTolerance, history));
        }
    }
    let iters = cfg.max_iters;
    Ok(report(x, iters, norm, Termination::MaxIterations, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn scalar_quadratic() {
        let r = newton_solve(
            |x: &[f64]| Ok(vec![x[0] * x[0] - 4.0]),
            &[3.0],
            &NewtonConfig::default(),
        )
        .unwrap();
        assert!(r.converged);
        assert_abs_diff_eq!(r.solution[0], 2.0, epsilon = 1e-12);
        assert!(r.final_residual_norm <= 1e-12);
    }

    #[test]
    fn affine_system_one_step() {
        let a = [[4.0, 1.0, 0.0], [1.0, 3.0, -1.0], [0.0, 2.0, 5.0]];
        let b = [1.0, -2.0, 3.0];
        let f = move |x: &[f64]| {
            Ok((0..3)
                .map(|i| a[i][0] * x[0] + a[i][1] * x[1] + a[i][2] * x[2] - b[i])
                .collect())
        };
        let r = newton_solve(f, &[0.0; 3], &NewtonConfig::default()).unwrap();
        assert!(r.converged);
        // one step up to FD rounding, at most one cleanup step
        assert!(r.iterations <= 2, "iterations = {}", r.iterations);
        assert!(r.step_history[1] < 1e-8);
    }

    #[test]
    fn circle_meets_diagonal() {
        let f = |x: &[f64]| Ok(vec![x[0] * x[0] + x[1] * x[1] - 1.0, x[0] - x[1]]);
        let r = newton_solve(f, &[1.0, 0.5], &NewtonConfig::default()).unwrap();
        assert!(r.converged);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(r.solution[0], s, epsilon = 1e-10);
        assert_abs_diff_eq!(r.solution[1], s, epsilon = 1e-10);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let f = |x: &[f64]| Ok(vec![x[0], x[1], 0.0]);
        assert_eq!(
            newton_solve(f, &[1.0, 1.0], &NewtonConfig::default()),
            Err(Error::DimensionMismatch { input: 2, output: 3 })
        );
    }

    #[test]
    fn singular_jacobian_is_reported() {
        // F(x, y) = (x + y - 1, 2x + 2y + 1) has a rank-one Jacobian everywhere
        let f = |x: &[f64]| Ok(vec![x[0] + x[1] - 1.0, 2.0 * x[0] + 2.0 * x[1] + 1.0]);
        let r = newton_solve(f, &[0.0, 0.0], &NewtonConfig::default()).unwrap();
        assert!(!r.converged);
        assert!(r.singular_jacobian);
        assert_eq!(r.termination, Termination::SingularJacobian);
    }

    #[test]
    fn no_real_root_is_not_converged() {
        let f = |x: &[f64]| Ok(vec![x[0] * x[0] + 1.0]);
        let r = newton_solve(f, &[0.5], &NewtonConfig::default()).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn residual_norm_never_increases() {
        let f = |x: &[f64]| Ok(vec![x[0].atan(), x[1] * x[1] * x[1] - 8.0]);
        let r = newton_solve(f, &[1.2, 10.0], &NewtonConfig::default()).unwrap();
        assert!(r.converged, "{r:?}");
        assert!(r.step_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn guard_keeps_iterates_positive() {
        // ln x = 0 from a guess whose raw Newton step would overshoot below zero
        let f = |x: &[f64]| {
            if x[0] <= 0.0 {
                return Err(Error::Domain("log of non-positive".into()));
            }
            Ok(vec![x[0].ln()])
        };
        let seen = std::cell::RefCell::new(Vec::new());
        let guard = |x: &[f64]| {
            seen.borrow_mut().push(x[0]);
            x[0] > 0.0
        };
        let r = newton_solve_guarded(f, guard, &[5.0], &NewtonConfig::default()).unwrap();
        assert!(r.converged);
        assert_abs_diff_eq!(r.solution[0], 1.0, epsilon = 1e-12);
        assert!(seen.borrow().iter().any(|&v| v <= 0.0));
    }

    #[test]
    fn fd_jacobian_of_quadratic_map() {
        let f = |x: &[f64]| Ok(vec![x[0] * x[0] + 3.0 * x[0] * x[1], x[1] * x[1] - x[0]]);
        let x = [0.7, -1.3];
        let fx = f(&x).unwrap();
        let j = fd_jacobian(&f, &x, &fx, 1e-7).unwrap();
        let exact = [[2.0 * x[0] + 3.0 * x[1], 3.0 * x[0]], [-1.0, 2.0 * x[1]]];
        for r in 0..2 {
            for c in 0..2 {
                assert_abs_diff_eq!(j[(r, c)], exact[r][c], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn deterministic_iterates() {
        let f = |x: &[f64]| Ok(vec![x[0].exp() - 2.0 - x[1], x[0] * x[1] - 0.25]);
        let a = newton_solve(f, &[1.0, 1.0], &NewtonConfig::default()).unwrap();
        let b = newton_solve(f, &[1.0, 1.0], &NewtonConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = NewtonConfig {
            max_iters: 0,
            ..NewtonConfig::<f64>::default()
        };
        assert!(newton_solve(|x: &[f64]| Ok(x.to_vec()), &[1.0], &cfg).is_err());
    }
}
