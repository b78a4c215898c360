//! The two symmetry-reduced boundary-value problems and their Chebyshev
//! collocation solution.
//!
//! **Problem 1** comes from the dilation `X1`: with `r = x³/t` and
//! `u = g(r)/x²` the PDE becomes a third-order ODE for `g` on `r ∈ [-1, 1]`.
//! **Problem 2** comes from `X3`: with `u = ln(f(x)/t^{1/4})` the PDE becomes a
//! third-order ODE for `f` on `x ∈ [-1, 1]`, parametrized by `t`.
//!
//! Both are solved with `value(1) = value(-1) = 1` and `value'(-1) = 1`. The
//! unknowns are the interior node values; the ODE is collocated at rows
//! `1..=N-2` and the derivative condition (row `N` of `D`) closes the system.
//! Residuals are reported at every interior row `1..=N-1`, so the last one is
//! an uncollocated check.
//!
//! # Sign variants
//!
//! Three residual operators are available.
//!
//! * [`Variant::PrintedDiscrete`]:
//!   `54r³g''' + (84rg - 2r²)g' + 24g² - (48 + r)g` and
//!   `4tf²f''' - 12tff'f'' + 8tf'³ + 24tf²Lf' - 2f³L - f³`, `L = ln(f/t^{1/4})`.
//! * [`Variant::PrintedContinuous`]: as above but with `-24g²` in Problem 1.
//!   Problem 2 is identical to the discrete form.
//! * [`Variant::Derived`]: the reductions recomputed from the PDE.
//!
//! ## Derivation used by [`Variant::Derived`]
//!
//! Problem 1. With `r = x³/t`, `r_t = -r/t`, `r_x = 3x²/t` and `u = x⁻² g(r)`:
//!
//! ```text
//! u_t   = -x⁻² r g'/t
//! u_x   = -2x⁻³ g + 3g'/t
//! u_xxx = -24x⁻⁵ g + 24 x⁻² g'/t + 27 x⁴ g'''/t³
//! ```
//!
//! Substituting into `u_t + 6uu_x + u_xxx + u/(2t)` and multiplying by `2x⁵`
//! (using `x³/t = r`) gives
//!
//! ```text
//! 54r³g''' + (36rg + 48r - 2r²)g' - 24g² - (48 - r)g = 0.
//! ```
//!
//! Problem 2. With `u = ln f - ln(t)/4`: `u_t = -1/(4t)`, `u_x = f'/f`,
//! `u_xxx = f'''/f - 3f'f''/f² + 2f'³/f³`. Multiplying the PDE by `4tf³`:
//!
//! ```text
//! 4tf²f''' - 12tff'f'' + 8tf'³ + 24tf²Lf' + 2f³L - f³ = 0.
//! ```
//!
//! The integration tests check both identities against a finite-difference
//! evaluation of the PDE.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};
use crate::solver::{newton_solve_guarded, NewtonConfig, NewtonReport};
use crate::spectral::{
    cgl_nodes, diff_matrix_power, diff_matrix_with, ChebyshevGrid, DiagonalRule, DiffMatrix, NodeValues,
};

/// Smallest resolution accepted for a reduced problem.
pub const MIN_RESOLUTION: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// `X1` reduction for `g(r)`.
    Problem1,
    /// `X3` reduction for `f(x)` at fixed `t`.
    Problem2,
}

impl ProblemKind {
    pub fn number(self) -> u8 {
        match self {
            ProblemKind::Problem1 => 1,
            ProblemKind::Problem2 => 2,
        }
    }
}

/// Which residual operator to use; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    PrintedDiscrete,
    PrintedContinuous,
    Derived,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::PrintedDiscrete, Variant::PrintedContinuous, Variant::Derived];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::PrintedDiscrete => "printed-discrete",
            Variant::PrintedContinuous => "printed-continuous",
            Variant::Derived => "derived",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown variant {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedProblem<T> {
    pub kind: ProblemKind,
    pub variant: Variant,
    /// Time parameter of Problem 2; ignored by Problem 1.
    pub t: T,
    pub n: usize,
    pub diagonal: DiagonalRule,
}

impl<T: Real> ReducedProblem<T> {
    pub fn problem1(n: usize, variant: Variant) -> Result<Self> {
        Self::new(ProblemKind::Problem1, n, T::one(), variant)
    }

    pub fn problem2(n: usize, t: T, variant: Variant) -> Result<Self> {
        Self::new(ProblemKind::Problem2, n, t, variant)
    }

    pub fn new(kind: ProblemKind, n: usize, t: T, variant: Variant) -> Result<Self> {
        if n < MIN_RESOLUTION {
            return Err(Error::InvalidResolution(n, MIN_RESOLUTION));
        }
        if kind == ProblemKind::Problem2 && !(t > T::zero() && t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Problem 2 needs t > 0, got t = {}",
                to_f64(t)
            )));
        }
        Ok(Self {
            kind,
            variant,
            t,
            n,
            diagonal: DiagonalRule::default(),
        })
    }

    pub fn with_diagonal(mut self, diagonal: DiagonalRule) -> Self {
        self.diagonal = diagonal;
        self
    }

    pub fn operator(&self) -> Box<dyn CollocationOperator<T>> {
        match self.kind {
            ProblemKind::Problem1 => Box::new(Problem1Operator { variant: self.variant }),
            ProblemKind::Problem2 => Box::new(Problem2Operator {
                variant: self.variant,
                t: self.t,
            }),
        }
    }
}

/// A grid with its first three differentiation matrices.
#[derive(Debug, Clone)]
pub struct SpectralOperators<T: Real> {
    pub grid: ChebyshevGrid<T>,
    pub d1: DiffMatrix<T>,
    pub d2: DiffMatrix<T>,
    pub d3: DiffMatrix<T>,
}

impl<T: Real> SpectralOperators<T> {
    pub fn new(n: usize, rule: DiagonalRule) -> Result<Self> {
        let grid = cgl_nodes(n)?;
        let d1 = diff_matrix_with(&grid, rule);
        let d2 = diff_matrix_power(&d1, 2)?;
        let d3 = diff_matrix_power(&d1, 3)?;
        Ok(Self { grid, d1, d2, d3 })
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }
}

/// An ODE operator evaluated pointwise at the collocation nodes.
pub trait CollocationOperator<T: Real> {
    /// Residual at every node `0..=N`; `values` has `N + 1` entries.
    fn evaluate(&self, values: &[T], ops: &SpectralOperators<T>) -> Result<Vec<T>>;

    /// Whether an iterate is inside the operator's domain.
    fn admissible(&self, _values: &[T]) -> bool {
        true
    }
}

fn problem1_row<T: Real>(variant: Variant, r: T, g: T, g1: T, g3: T) -> T {
    let c = |v: f64| real::<T>(v);
    let lead = c(54.0) * r * r * r * g3;
    match variant {
        Variant::PrintedDiscrete => {
            lead + (c(84.0) * r * g - c(2.0) * r * r) * g1 + c(24.0) * g * g - (c(48.0) + r) * g
        }
        Variant::PrintedContinuous => {
            lead + (c(84.0) * r * g - c(2.0) * r * r) * g1 - c(24.0) * g * g - (c(48.0) + r) * g
        }
        Variant::Derived => {
            lead + (c(36.0) * r * g + c(48.0) * r - c(2.0) * r * r) * g1 - c(24.0) * g * g - (c(48.0) - r) * g
        }
    }
}

fn problem2_row<T: Real>(variant: Variant, t: T, f: T, f1: T, f2: T, f3: T) -> T {
    let c = |v: f64| real::<T>(v);
    let log = f.ln() - t.ln() / c(4.0);
    let f_cubed = f * f * f;
    let common = c(4.0) * t * f * f * f3 - c(12.0) * t * f * f1 * f2
        + c(8.0) * t * f1 * f1 * f1
        + c(24.0) * t * f * f * log * f1
        - f_cubed;
    match variant {
        Variant::PrintedDiscrete | Variant::PrintedContinuous => common - c(2.0) * f_cubed * log,
        Variant::Derived => common + c(2.0) * f_cubed * log,
    }
}

/// Problem 1 residual operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Problem1Operator {
    pub variant: Variant,
}

impl<T: Real> CollocationOperator<T> for Problem1Operator {
    fn evaluate(&self, values: &[T], ops: &SpectralOperators<T>) -> Result<Vec<T>> {
        let z = ops.grid.nodes();
        check_len(values, z.len())?;
        Ok((0..z.len())
            .map(|i| {
                problem1_row(
                    self.variant,
                    z[i],
                    values[i],
                    ops.d1.row_dot(i, values),
                    ops.d3.row_dot(i, values),
                )
            })
            .collect())
    }
}

/// Problem 2 residual operator at a fixed time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Problem2Operator<T> {
    pub variant: Variant,
    pub t: T,
}

impl<T: Real> CollocationOperator<T> for Problem2Operator<T> {
    fn evaluate(&self, values: &[T], ops: &SpectralOperators<T>) -> Result<Vec<T>> {
        check_len(values, ops.grid.len())?;
        check_positive(values)?;
        if !(self.t > T::zero()) {
            return Err(Error::Domain(format!("t must be positive, got {}", to_f64(self.t))));
        }
        Ok((0..values.len())
            .map(|i| {
                problem2_row(
                    self.variant,
                    self.t,
                    values[i],
                    ops.d1.row_dot(i, values),
                    ops.d2.row_dot(i, values),
                    ops.d3.row_dot(i, values),
                )
            })
            .collect())
    }

    fn admissible(&self, values: &[T]) -> bool {
        values.iter().all(|&v| v > T::zero())
    }
}

fn check_len<T>(values: &[T], expected: usize) -> Result<()> {
    if values.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: values.len(),
        });
    }
    Ok(())
}

fn check_positive<T: Real>(values: &[T]) -> Result<()> {
    if let Some((j, &v)) = values.iter().enumerate().find(|(_, &v)| !(v > T::zero())) {
        return Err(Error::Domain(format!(
            "f must be positive for the logarithm, got f[{j}] = {}",
            to_f64(v)
        )));
    }
    Ok(())
}

fn check_grid<T: Real>(values: &NodeValues<T>, d: &DiffMatrix<T>) -> Result<()> {
    if d.n() != values.grid().n() {
        return Err(Error::GridMismatch {
            left: values.grid().n(),
            right: d.n(),
        });
    }
    Ok(())
}

/// Problem 1 residual at the interior rows `1..=N-1`.
pub fn problem1_residual<T: Real>(
    values: &NodeValues<T>,
    d1: &DiffMatrix<T>,
    d3: &DiffMatrix<T>,
    variant: Variant,
) -> Result<Vec<T>> {
    check_grid(values, d1)?;
    check_grid(values, d3)?;
    let z = values.grid().nodes();
    let v = values.values();
    let n = values.grid().n();
    Ok((1..n)
        .map(|i| problem1_row(variant, z[i], v[i], d1.row_dot(i, v), d3.row_dot(i, v)))
        .collect())
}

/// Problem 2 residual at the interior rows `1..=N-1`.
pub fn problem2_residual<T: Real>(
    values: &NodeValues<T>,
    t: T,
    d1: &DiffMatrix<T>,
    d2: &DiffMatrix<T>,
    d3: &DiffMatrix<T>,
    variant: Variant,
) -> Result<Vec<T>> {
    for d in [d1, d2, d3] {
        check_grid(values, d)?;
    }
    let v = values.values();
    check_positive(v)?;
    if !(t > T::zero()) {
        return Err(Error::Domain(format!("t must be positive, got {}", to_f64(t))));
    }
    let n = values.grid().n();
    Ok((1..n)
        .map(|i| problem2_row(variant, t, v[i], d1.row_dot(i, v), d2.row_dot(i, v), d3.row_dot(i, v)))
        .collect())
}

/// Solves the boundary-value problem for `op` with the boundary data
/// `value(ζ_0) = value(ζ_N) = 1`, `(D value)(ζ_N) = 1`.
///
/// Returns the full node vector and the Newton report.
pub fn solve_collocation<T: Real>(
    op: &dyn CollocationOperator<T>,
    ops: &SpectralOperators<T>,
    cfg: &NewtonConfig<T>,
    interior_guess: Option<&[T]>,
) -> Result<(Vec<T>, NewtonReport<T>)> {
    let n = ops.n();
    if n < MIN_RESOLUTION {
        return Err(Error::InvalidResolution(n, MIN_RESOLUTION));
    }
    let boundary = T::one();
    let full = |interior: &[T]| {
        let mut v = Vec::with_capacity(n + 1);
        v.push(boundary);
        v.extend_from_slice(interior);
        v.push(boundary);
        v
    };
    let guess = match interior_guess {
        Some(g) => {
            check_len(g, n - 1)?;
            g.to_vec()
        }
        None => vec![T::one(); n - 1],
    };
    let system = |interior: &[T]| -> Result<Vec<T>> {
        let v = full(interior);
        let rows = op.evaluate(&v, ops)?;
        check_len(&rows, n + 1)?;
        let mut eqs = rows[1..n - 1].to_vec();
        eqs.push(ops.d1.row_dot(n, &v) - T::one());
        Ok(eqs)
    };
    let guard = |interior: &[T]| op.admissible(&full(interior));
    let report = newton_solve_guarded(system, guard, &guess, cfg)?;
    let values = full(&report.solution);
    Ok((values, report))
}

/// A solved reduced problem with its residual table.
#[derive(Debug, Clone)]
pub struct CollocationSolution<T: Real> {
    pub problem: ReducedProblem<T>,
    pub grid: ChebyshevGrid<T>,
    /// Values at all `N + 1` nodes.
    pub values: Vec<T>,
    /// `|L[value](ζ_i)|` for `i = 1..=N-1`.
    pub residuals: Vec<T>,
    pub newton: NewtonReport<T>,
    /// `Σ_j d_{Nj} value_j`, the imposed derivative at `-1`.
    pub boundary_derivative: T,
}

impl<T: Real> CollocationSolution<T> {
    pub fn node_values(&self) -> NodeValues<T> {
        NodeValues::new(self.grid.clone(), self.values.clone()).expect("lengths agree by construction")
    }

    pub fn converged(&self) -> bool {
        self.newton.converged
    }

    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |m, &r| m.max(r))
    }

    /// Residuals recomputed from the stored values.
    pub fn recompute_residuals(&self) -> Result<Vec<T>> {
        let ops = SpectralOperators::new(self.problem.n, self.problem.diagonal)?;
        interior_residuals(self.problem.operator().as_ref(), &ops, &self.values)
    }
}

fn interior_residuals<T: Real>(
    op: &dyn CollocationOperator<T>,
    ops: &SpectralOperators<T>,
    values: &[T],
) -> Result<Vec<T>> {
    let rows = op.evaluate(values, ops)?;
    Ok(rows[1..ops.n()].iter().map(|r| r.abs()).collect())
}

pub fn solve_reduced<T: Real>(problem: &ReducedProblem<T>, cfg: &NewtonConfig<T>) -> Result<CollocationSolution<T>> {
    solve_reduced_from(problem, cfg, None)
}

/// As [`solve_reduced`] with an explicit interior initial guess (`N - 1` values).
pub fn solve_reduced_from<T: Real>(
    problem: &ReducedProblem<T>,
    cfg: &NewtonConfig<T>,
    interior_guess: Option<&[T]>,
) -> Result<CollocationSolution<T>> {
    let ops = SpectralOperators::new(problem.n, problem.diagonal)?;
    let op = problem.operator();
    let (values, newton) = solve_collocation(op.as_ref(), &ops, cfg, interior_guess)?;
    let residuals = interior_residuals(op.as_ref(), &ops, &values)?;
    let boundary_derivative = ops.d1.row_dot(problem.n, &values);
    Ok(CollocationSolution {
        problem: *problem,
        grid: ops.grid,
        values,
        residuals,
        newton,
        boundary_derivative,
    })
}

/// `(i, |residual_i|)` rows for `i = 1..=N-1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualTable {
    pub rows: Vec<(usize, f64)>,
}

pub fn residual_table<T: Real>(sol: &CollocationSolution<T>) -> ResidualTable {
    ResidualTable::from_residuals(&sol.residuals)
}

impl ResidualTable {
    /// `residuals[k]` becomes row `k + 1`.
    pub fn from_residuals<T: Real>(residuals: &[T]) -> Self {
        Self {
            rows: residuals
                .iter()
                .enumerate()
                .map(|(k, &r)| (k + 1, to_f64(r).abs()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,residual\n");
        for &(i, r) in &self.rows {
            out.push_str(&format!("{i},{}\n", format_scientific(r)));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<_> = self
            .rows
            .iter()
            .map(|&(i, r)| serde_json::json!({ "i": i, "residual": r }))
            .collect();
        serde_json::Value::Array(rows)
    }
}

/// Scientific notation with 15 significant digits; exact zero prints as `0`.
pub fn format_scientific(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.14e}")
    }
}
