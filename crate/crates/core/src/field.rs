//! Space-time fields `u(x, t)`: reconstruction from reduced solutions,
//! a finite-difference residual of `u_t + 6uu_x + u_xxx + u/(2t)`, and
//! push-forward of solutions along the symmetry flows.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{Generator, PointFlow};
use crate::reductions::{CollocationSolution, ProblemKind, Variant};
use crate::scalar::{real, to_f64, Real};
use crate::spectral::NodeValues;

/// Default lower bound on `|x|` when reconstructing Problem 1 (`u = g/x²`).
pub const DEFAULT_X_MIN: f64 = 0.2;
/// Default finite-difference steps for [`pde_residual`].
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// Anything that can be evaluated as `u(x, t)`.
pub trait Sampler<T> {
    fn sample(&self, x: T, t: T) -> Result<T>;
}

impl<T, F> Sampler<T> for F
where
    F: Fn(T, T) -> Result<T>,
{
    fn sample(&self, x: T, t: T) -> Result<T> {
        self(x, t)
    }
}

impl<T> Sampler<T> for Box<dyn Sampler<T> + '_> {
    fn sample(&self, x: T, t: T) -> Result<T> {
        (**self).sample(x, t)
    }
}

/// `u = x/(12t) + b/t`, an exact solution for every `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactFamily<T> {
    pub b: T,
}

impl<T: Real> Sampler<T> for ExactFamily<T> {
    fn sample(&self, x: T, t: T) -> Result<T> {
        if t == T::zero() {
            return Err(Error::Domain("exact family is singular at t = 0".into()));
        }
        Ok(x / (real::<T>(12.0) * t) + self.b / t)
    }
}

/// `u(x, t) = g(x³/t) / x²` from a Problem 1 solution.
#[derive(Debug, Clone)]
pub struct Problem1Sampler<T> {
    pub g: NodeValues<T>,
    pub x_min: T,
}

impl<T: Real> Sampler<T> for Problem1Sampler<T> {
    fn sample(&self, x: T, t: T) -> Result<T> {
        if !(t > T::zero()) {
            return Err(Error::Domain(format!("t must be positive, got {}", to_f64(t))));
        }
        if !(x.abs() >= self.x_min) {
            return Err(Error::Domain(format!(
                "x = {} is inside the singularity guard |x| < {}",
                to_f64(x),
                to_f64(self.x_min)
            )));
        }
        let mut r = x * x * x / t;
        let slack: T = real(1e-14);
        if r.abs() > T::one() {
            if r.abs() <= T::one() + slack {
                r = r.signum();
            } else {
                return Err(Error::Domain(format!(
                    "x = {} maps to r = x³/t = {} outside [-1, 1] at t = {}",
                    to_f64(x),
                    to_f64(r),
                    to_f64(t)
                )));
            }
        }
        Ok(self.g.interpolate(r)? / (x * x))
    }
}

/// Where a field's values came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Provenance {
    Problem1 {
        n: usize,
        variant: Variant,
    },
    Problem2 {
        n: usize,
        variant: Variant,
    },
    ExactFamily {
        b: f64,
    },
    /// Pushed forward along `(generator index, ε)` steps.
    Transformed {
        chain: Vec<(usize, f64)>,
    },
    Sampled,
}

/// Samples `u[x][t]` on a rectangular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField<T> {
    x_grid: Vec<T>,
    t_values: Vec<T>,
    values: Vec<Vec<T>>,
    pub provenance: Provenance,
}

impl<T: Real> SpaceTimeField<T> {
    pub fn new(x_grid: Vec<T>, t_values: Vec<T>, values: Vec<Vec<T>>, provenance: Provenance) -> Result<Self> {
        if x_grid.is_empty() || t_values.is_empty() {
            return Err(Error::InvalidParameter("field needs at least one x and one t".into()));
        }
        if !x_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter("x grid must be strictly increasing".into()));
        }
        if let Some(&t) = t_values.iter().find(|&&t| !(t > T::zero())) {
            return Err(Error::InvalidParameter(format!(
                "t values must be positive, got {}",
                to_f64(t)
            )));
        }
        if values.len() != x_grid.len() || values.iter().any(|row| row.len() != t_values.len()) {
            return Err(Error::InvalidParameter(format!(
                "values must be {} x {}",
                x_grid.len(),
                t_values.len()
            )));
        }
        Ok(Self {
            x_grid,
            t_values,
            values,
            provenance,
        })
    }

    /// Evaluates `sampler` on the grid.
    pub fn from_sampler<S: Sampler<T> + ?Sized>(
        sampler: &S,
        x_grid: Vec<T>,
        t_values: Vec<T>,
        provenance: Provenance,
    ) -> Result<Self> {
        let values = x_grid
            .iter()
            .map(|&x| {
                t_values
                    .iter()
                    .map(|&t| sampler.sample(x, t))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(x_grid, t_values, values, provenance)
    }

    /// Joins fields that share an x grid along the time axis.
    pub fn stack_times(fields: Vec<Self>) -> Result<Self> {
        let mut iter = fields.into_iter();
        let mut acc = iter
            .next()
            .ok_or_else(|| Error::InvalidParameter("nothing to stack".into()))?;
        for f in iter {
            if f.x_grid != acc.x_grid {
                return Err(Error::InvalidParameter("stacked fields must share the x grid".into()));
            }
            acc.t_values.extend(f.t_values);
            for (row, extra) in acc.values.iter_mut().zip(f.values) {
                row.extend(extra);
            }
        }
        Ok(acc)
    }

    pub fn x_grid(&self) -> &[T] {
        &self.x_grid
    }

    pub fn t_values(&self) -> &[T] {
        &self.t_values
    }

    /// `u(x_grid[ix], t_values[it])`.
    pub fn value(&self, ix: usize, it: usize) -> T {
        self.values[ix][it]
    }

    pub fn len(&self) -> usize {
        self.x_grid.len() * self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(x, t, u)` triples sorted by `t`, then `x`.
    pub fn rows(&self) -> Vec<(T, T, T)> {
        let mut order: Vec<usize> = (0..self.t_values.len()).collect();
        order.sort_by(|&a, &b| self.t_values[a].partial_cmp(&self.t_values[b]).expect("finite times"));
        order
            .into_iter()
            .flat_map(|it| {
                self.x_grid
                    .iter()
                    .enumerate()
                    .map(move |(ix, &x)| (x, self.t_values[it], self.values[ix][it]))
            })
            .collect()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }
}

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn linspace<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let step = (b - a) / real::<T>((n - 1) as f64);
            (0..n)
                .map(|k| if k == n - 1 { b } else { a + step * real::<T>(k as f64) })
                .collect()
        }
    }
}

/// `u(x, t) = g(x³/t) / x²` on `x_grid` from Problem 1 node values.
pub fn reconstruct_problem1_values<T: Real>(
    g: &NodeValues<T>,
    x_grid: &[T],
    t: T,
    x_min: T,
) -> Result<SpaceTimeField<T>> {
    let sampler = Problem1Sampler { g: g.clone(), x_min };
    SpaceTimeField::from_sampler(&sampler, x_grid.to_vec(), vec![t], Provenance::Sampled)
}

pub fn reconstruct_problem1<T: Real>(
    sol: &CollocationSolution<T>,
    x_grid: &[T],
    t: T,
    x_min: T,
) -> Result<SpaceTimeField<T>> {
    expect_kind(sol, ProblemKind::Problem1)?;
    let mut field = reconstruct_problem1_values(&sol.node_values(), x_grid, t, x_min)?;
    field.provenance = Provenance::Problem1 {
        n: sol.problem.n,
        variant: sol.problem.variant,
    };
    Ok(field)
}

/// `u(x, t) = ln f(x) - ln(t)/4` on `x_grid ⊆ [-1, 1]` from Problem 2 node values.
pub fn reconstruct_problem2_values<T: Real>(f: &NodeValues<T>, x_grid: &[T], t: T) -> Result<SpaceTimeField<T>> {
    if !(t > T::zero()) {
        return Err(Error::Domain(format!("t must be positive, got {}", to_f64(t))));
    }
    if let Some((j, &v)) = f.values().iter().enumerate().find(|(_, &v)| !(v > T::zero())) {
        return Err(Error::Domain(format!("f must be positive, got f[{j}] = {}", to_f64(v))));
    }
    let shift = t.ln() / real(4.0);
    let sampler = |x: T, _t: T| -> Result<T> {
        let fx = f.interpolate(x)?;
        if !(fx > T::zero()) {
            return Err(Error::Domain(format!(
                "interpolated f({}) = {} is not positive",
                to_f64(x),
                to_f64(fx)
            )));
        }
        Ok(fx.ln() - shift)
    };
    SpaceTimeField::from_sampler(&sampler, x_grid.to_vec(), vec![t], Provenance::Sampled)
}

pub fn reconstruct_problem2<T: Real>(sol: &CollocationSolution<T>, x_grid: &[T], t: T) -> Result<SpaceTimeField<T>> {
    expect_kind(sol, ProblemKind::Problem2)?;
    let mut field = reconstruct_problem2_values(&sol.node_values(), x_grid, t)?;
    field.provenance = Provenance::Problem2 {
        n: sol.problem.n,
        variant: sol.problem.variant,
    };
    Ok(field)
}

fn expect_kind<T: Real>(sol: &CollocationSolution<T>, kind: ProblemKind) -> Result<()> {
    if sol.problem.kind != kind {
        return Err(Error::InvalidParameter(format!(
            "expected a Problem {} solution, got Problem {}",
            kind.number(),
            sol.problem.kind.number()
        )));
    }
    Ok(())
}

/// `u_t + 6uu_x + u_xxx + u/(2t)` at `(x, t)` with second-order central
/// differences; `u_xxx` uses the five-point stencil
/// `(u(x+2h) - 2u(x+h) + 2u(x-h) - u(x-2h)) / (2h³)`.
pub fn pde_residual<T: Real, S: Sampler<T> + ?Sized>(u: &S, x: T, t: T, h_x: T, h_t: T) -> Result<T> {
    if !(h_x > T::zero() && h_t > T::zero()) {
        return Err(Error::InvalidParameter(
            "finite-difference steps must be positive".into(),
        ));
    }
    if !(t - h_t > T::zero()) {
        return Err(Error::Domain(format!(
            "time stencil [{}, {}] leaves t > 0",
            to_f64(t - h_t),
            to_f64(t + h_t)
        )));
    }
    let two: T = real(2.0);
    let u0 = u.sample(x, t)?;
    let ut = (u.sample(x, t + h_t)? - u.sample(x, t - h_t)?) / (two * h_t);
    let up1 = u.sample(x + h_x, t)?;
    let um1 = u.sample(x - h_x, t)?;
    let up2 = u.sample(x + two * h_x, t)?;
    let um2 = u.sample(x - two * h_x, t)?;
    let ux = (up1 - um1) / (two * h_x);
    let uxxx = (up2 - two * up1 + two * um1 - um2) / (two * h_x * h_x * h_x);
    Ok(ut + real::<T>(6.0) * u0 * ux + uxxx + u0 / (two * t))
}

/// A solution pushed forward along a chain of symmetry flows.
pub struct Transformed<'a, T> {
    inner: Box<dyn Sampler<T> + 'a>,
    chain: Vec<PointFlow<T>>,
}

impl<'a, T: Real> Transformed<'a, T> {
    pub fn chain(&self) -> &[PointFlow<T>] {
        &self.chain
    }

    pub fn provenance(&self) -> Provenance {
        Provenance::Transformed {
            chain: self
                .chain
                .iter()
                .map(|s| (s.generator.index(), to_f64(s.epsilon)))
                .collect(),
        }
    }

    fn eval(&self, level: usize, x: T, t: T) -> Result<T> {
        if level == 0 {
            return self.inner.sample(x, t);
        }
        let step = self.chain[level - 1];
        let eps = step.epsilon;
        match step.generator {
            Generator::X1 => {
                let scale = (-eps * real::<T>(2.0) / real::<T>(3.0)).exp();
                Ok(scale * self.eval(level - 1, (-eps / real::<T>(3.0)).exp() * x, (-eps).exp() * t)?)
            }
            Generator::X2 => self.eval(level - 1, x - eps, t),
            Generator::X3 => {
                if t < T::zero() {
                    return Err(Error::Domain(format!("X3 flow needs t >= 0, got t = {}", to_f64(t))));
                }
                let rt = t.sqrt();
                Ok(self.eval(level - 1, x - eps * t * rt, t)? + eps * rt / real::<T>(4.0))
            }
        }
    }
}

impl<T: Real> Sampler<T> for Transformed<'_, T> {
    fn sample(&self, x: T, t: T) -> Result<T> {
        self.eval(self.chain.len(), x, t)
    }
}

/// Maps the graph of `u` through `exp(ε_k X_{i_k}) ∘ … ∘ exp(ε_1 X_{i_1})`.
pub fn transform_solution<'a, T: Real, S: Sampler<T> + 'a>(u: S, chain: &[(Generator, T)]) -> Transformed<'a, T> {
    Transformed {
        inner: Box::new(u),
        chain: chain.iter().map(|&(g, eps)| PointFlow::new(g, eps)).collect(),
    }
}

/// `%g`-style rendering with 15 significant digits.
pub fn format_g15(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.14e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        let fixed = format!("{v:.decimals$}");
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV with header `x,t,u`, sorted by `(t, x)`.
pub fn emit_plot_data<T: Real>(field: &SpaceTimeField<T>) -> String {
    let mut out = String::from("x,t,u\n");
    for (x, t, u) in field.rows() {
        out.push_str(&format!(
            "{},{},{}\n",
            format_g15(to_f64(x)),
            format_g15(to_f64(t)),
            format_g15(to_f64(u))
        ));
    }
    out
}

/// JSON mirror of [`emit_plot_data`]: parallel `x`, `t`, `u` arrays.
pub fn plot_data_json<T: Real>(field: &SpaceTimeField<T>) -> serde_json::Value {
    let rows = field.rows();
    let col = |k: usize| -> Vec<f64> {
        rows.iter()
            .map(|r| {
                to_f64(match k {
                    0 => r.0,
                    1 => r.1,
                    _ => r.2,
                })
            })
            .collect()
    };
    serde_json::json!({
        "x": col(0),
        "t": col(1),
        "u": col(2),
        "provenance": field.provenance,
    })
}
