//! Lie symmetries and Chebyshev pseudo-spectral solution of the cylindrical
//! KdV equation `u_t + 6uu_x + u_xxx + u/(2t) = 0`.
//!
//! * [`spectral`]: Chebyshev–Gauss–Lobatto grids, interpolation and
//!   differentiation matrices.
//! * [`lie`]: the three-dimensional symmetry algebra, its adjoint action,
//!   the one-dimensional optimal system and the point flows.
//! * [`solver`]: damped Newton iteration with finite-difference Jacobians.
//! * [`reductions`]: the two symmetry-reduced boundary-value problems.
//! * [`field`]: reconstruction of `u(x, t)`, a PDE residual checker and
//!   push-forward of solutions along the flows.
//! * [`verify`]: self-check suites used by the command-line tool.
//!
//! The numerical code is generic over [`Real`] (`f32`, `f64`); the bracket and
//! optimal-system bookkeeping is generic over [`Field`], so it also runs over
//! [`Rational`].

// `!(a > b)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod lie;
pub mod reductions;
pub mod scalar;
pub mod solver;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{Field, Real};

/// Exact rational scalar for the structure-constant computations.
pub type Rational = num_rational::Rational64;

pub type ChebyshevGrid = spectral::ChebyshevGrid<f64>;
pub type DiffMatrix = spectral::DiffMatrix<f64>;
pub type NodeValues = spectral::NodeValues<f64>;
pub type AlgebraElement = lie::AlgebraElement<f64>;
pub type ExactAlgebraElement = lie::AlgebraElement<Rational>;
pub type AdjointMatrix = lie::AdjointMatrix<f64>;
pub type OptimalReduction = lie::OptimalReduction<f64>;
pub type Point = lie::Point<f64>;
pub type NewtonConfig = solver::NewtonConfig<f64>;
pub type NewtonReport = solver::NewtonReport<f64>;
pub type ReducedProblem = reductions::ReducedProblem<f64>;
pub type CollocationSolution = reductions::CollocationSolution<f64>;
pub type SpaceTimeField = field::SpaceTimeField<f64>;
