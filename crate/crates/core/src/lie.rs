//! The three-dimensional symmetry algebra of `u_t + 6uu_x + u_xxx + u/(2t) = 0`.
//!
//! Basis:
//!
//! ```text
//! X1 = (x/3) ∂x + t ∂t - (2/3) u ∂u
//! X2 = ∂x
//! X3 = t^{3/2} ∂x + (t^{1/2}/4) ∂u
//! ```
//!
//! with `[X1, X2] = -X2/3`, `[X1, X3] = -7 X3/6`, `[X2, X3] = 0`.
//!
//! `X1` and `X2` map solutions to solutions. `X3` does not: pushing a solution
//! along its flow adds `ε/(4√t)` to the residual. The field of that form that
//! is a symmetry is `√t ∂x + 1/(12√t) ∂u`. `X3` is kept as listed because the
//! bracket table, adjoint action and optimal system are all built on it.
//!
//! Elements are coefficient triples over this basis. The adjoint action
//! `Ad(exp(εX_i))` acts on triples by the matrices obtained from summing the
//! Lie series `Y - ε[X_i, Y] + ε²/2 [X_i, [X_i, Y]] - …`:
//!
//! ```text
//! i = 1:  (a1, a2, a3) ↦ (a1, e^{ε/3} a2, e^{7ε/6} a3)
//! i = 2:  (a1, a2, a3) ↦ (a1, a2 - (ε/3) a1, a3)
//! i = 3:  (a1, a2, a3) ↦ (a1, a2, a3 - (7ε/6) a1)
//! ```

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ratio, real, to_f64, Field, Real};

/// One of the basis generators `X1`, `X2`, `X3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "usize", try_from = "usize")]
pub enum Generator {
    X1,
    X2,
    X3,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::X1, Generator::X2, Generator::X3];

    /// 1-based index.
    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Generator::X1),
            2 => Ok(Generator::X2),
            3 => Ok(Generator::X3),
            _ => Err(Error::InvalidGenerator(i)),
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl From<Generator> for usize {
    fn from(g: Generator) -> usize {
        g.index()
    }
}

impl TryFrom<usize> for Generator {
    type Error = Error;
    fn try_from(i: usize) -> Result<Self> {
        Generator::from_index(i)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.index())
    }
}

/// `a1 X1 + a2 X2 + a3 X3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraElement<T>(pub [T; 3]);

impl<T: Field> AlgebraElement<T> {
    pub fn new(a1: T, a2: T, a3: T) -> Self {
        Self([a1, a2, a3])
    }

    pub fn zero() -> Self {
        Self([T::zero(); 3])
    }

    pub fn basis(g: Generator) -> Self {
        let mut c = [T::zero(); 3];
        c[g.slot()] = T::one();
        Self(c)
    }

    pub fn coeffs(&self) -> [T; 3] {
        self.0
    }

    pub fn coeff(&self, g: Generator) -> T {
        self.0[g.slot()]
    }

    pub fn scale(self, s: T) -> Self {
        Self(self.0.map(|a| a * s))
    }
}

impl<T: Field> Add for AlgebraElement<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl<T: Field> Sub for AlgebraElement<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Field> Neg for AlgebraElement<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|a| -a))
    }
}

impl<T: Field> Mul<T> for AlgebraElement<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// Structure constants `C[i][j][k]`, `[X_i, X_j] = Σ_k C[i][j][k] X_k`,
/// stored as exact numerator/denominator pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureConstants {
    table: [[[(i64, i64); 3]; 3]; 3],
}

impl StructureConstants {
    pub fn new() -> Self {
        let mut table = [[[(0i64, 1i64); 3]; 3]; 3];
        // [X1, X2] = -1/3 X2
        table[0][1][1] = (-1, 3);
        table[1][0][1] = (1, 3);
        // [X1, X3] = -7/6 X3
        table[0][2][2] = (-7, 6);
        table[2][0][2] = (7, 6);
        Self { table }
    }

    pub fn rational(&self, i: Generator, j: Generator, k: Generator) -> (i64, i64) {
        self.table[i.slot()][j.slot()][k.slot()]
    }

    pub fn get<T: Field>(&self, i: Generator, j: Generator, k: Generator) -> T {
        let (n, d) = self.rational(i, j, k);
        ratio(n, d)
    }
}

impl Default for StructureConstants {
    fn default() -> Self {
        Self::new()
    }
}

/// Lie bracket, extended bilinearly from the structure constants.
pub fn commutator<T: Field>(x: &AlgebraElement<T>, y: &AlgebraElement<T>) -> AlgebraElement<T> {
    let c = StructureConstants::new();
    let mut out = [T::zero(); 3];
    for i in Generator::ALL {
        for j in Generator::ALL {
            let xy = x.coeff(i) * y.coeff(j);
            if xy == T::zero() {
                continue;
            }
            for k in Generator::ALL {
                out[k.slot()] = out[k.slot()] + xy * c.get::<T>(i, j, k);
            }
        }
    }
    AlgebraElement(out)
}

/// Matrix of `Ad(exp(ε X_i))` acting on coefficient triples (column vectors).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointMatrix<T> {
    pub generator: Generator,
    pub epsilon: T,
    pub entries: [[T; 3]; 3],
}

impl<T: Field> AdjointMatrix<T> {
    pub fn apply(&self, x: &AlgebraElement<T>) -> AlgebraElement<T> {
        let m = &self.entries;
        let a = x.0;
        AlgebraElement(std::array::from_fn(|r| {
            m[r][0] * a[0] + m[r][1] * a[1] + m[r][2] * a[2]
        }))
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Self) -> [[T; 3]; 3] {
        let (a, b) = (&self.entries, &rhs.entries);
        std::array::from_fn(|r| std::array::from_fn(|c| a[r][0] * b[0][c] + a[r][1] * b[1][c] + a[r][2] * b[2][c]))
    }

    pub fn determinant(&self) -> T {
        let m = &self.entries;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

fn identity<T: Field>() -> [[T; 3]; 3] {
    std::array::from_fn(|r| std::array::from_fn(|c| if r == c { T::one() } else { T::zero() }))
}

/// Adjoint matrix of the nilpotent generators `X2`, `X3`; exact over any field.
pub fn translation_adjoint<T: Field>(g: Generator, eps: T) -> Result<AdjointMatrix<T>> {
    let mut m = identity::<T>();
    match g {
        Generator::X1 => return Err(Error::InvalidGenerator(1)),
        Generator::X2 => m[1][0] = -eps * ratio(1, 3),
        Generator::X3 => m[2][0] = -eps * ratio(7, 6),
    }
    Ok(AdjointMatrix {
        generator: g,
        epsilon: eps,
        entries: m,
    })
}

/// Closed-form `Ad(exp(ε X_i))` for any generator.
pub fn adjoint_closed_form<T: Real + Field>(g: Generator, eps: T) -> AdjointMatrix<T> {
    match g {
        Generator::X1 => {
            let mut m = identity::<T>();
            m[1][1] = (eps / real(3.0)).exp();
            m[2][2] = (eps * real(7.0) / real(6.0)).exp();
            AdjointMatrix {
                generator: g,
                epsilon: eps,
                entries: m,
            }
        }
        _ => translation_adjoint(g, eps).expect("nilpotent generator"),
    }
}

/// Partial sum with `terms` terms of `Σ_k (-s)^k/k! ad_{X_i}^k X_j`.
pub fn adjoint_lie_series<T: Field>(i: Generator, j: Generator, s: T, terms: usize) -> Result<AlgebraElement<T>> {
    if terms == 0 {
        return Err(Error::InvalidParameter("series needs at least one term".into()));
    }
    let xi = AlgebraElement::basis(i);
    let mut term = AlgebraElement::basis(j);
    let mut sum = term;
    for k in 1..terms {
        let kf = T::from_usize(k).expect("small integer representable");
        term = commutator(&xi, &term) * (-s / kf);
        if term == AlgebraElement::zero() {
            break;
        }
        sum = sum + term;
    }
    Ok(sum)
}

/// Which member of the one-dimensional optimal system an element reduces to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimalClass {
    /// `⟨X1⟩`: any element with a nonzero `X1` component.
    Dilation,
    /// `⟨a X2 + b X3⟩`: the abelian ideal spanned by `X2`, `X3`.
    Translation,
}

/// Result of bringing an element to its optimal-system representative.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalReduction<T> {
    pub input: AlgebraElement<T>,
    pub representative: AlgebraElement<T>,
    pub chain: Vec<(Generator, T)>,
    pub scale: T,
    pub class: OptimalClass,
}

impl<T: Field> OptimalReduction<T> {
    /// Applies the chain in order, then the scale.
    pub fn replay(&self) -> AlgebraElement<T> {
        let mut x = self.input;
        for &(g, eps) in &self.chain {
            let m = translation_adjoint(g, eps).expect("chains only use X2 and X3");
            x = m.apply(&x);
        }
        x * self.scale
    }
}

impl<T: Field + Signed + PartialOrd> OptimalReduction<T> {
    /// Largest coordinate deviation between the replayed chain and the representative.
    pub fn replay_error(&self) -> T {
        let diff = self.replay() - self.representative;
        diff.0
            .iter()
            .fold(T::zero(), |m, v| if v.abs() > m { v.abs() } else { m })
    }
}

/// Reduces `X` to `⟨X1⟩` (when `|a1| > tol`) or to a normalized element of
/// `span{X2, X3}`.
///
/// In the first case `Ad(exp(s X2))` with `s = 3a2/a1` and `Ad(exp(s X3))` with
/// `s = 6a3/(7a1)` clear the `X2`, `X3` components and the result is divided by
/// `a1`. In the second case the element is scaled so that its largest
/// coefficient has magnitude one and its first nonzero coefficient is positive.
pub fn reduce_to_optimal<T>(x: &AlgebraElement<T>, tol: T) -> Result<OptimalReduction<T>>
where
    T: Field + Signed + PartialOrd + ToPrimitive,
{
    let [a1, a2, a3] = x.0;
    if a1.abs() <= tol && a2.abs() <= tol && a3.abs() <= tol {
        return Err(Error::DegenerateElement(tol.to_f64().unwrap_or(f64::NAN)));
    }
    if a1.abs() > tol {
        let mut chain = Vec::new();
        if a2 != T::zero() {
            chain.push((Generator::X2, ratio::<T>(3, 1) * a2 / a1));
        }
        if a3 != T::zero() {
            chain.push((Generator::X3, ratio::<T>(6, 7) * a3 / a1));
        }
        return Ok(OptimalReduction {
            input: *x,
            representative: AlgebraElement::basis(Generator::X1),
            chain,
            scale: T::one() / a1,
            class: OptimalClass::Dilation,
        });
    }
    let max = if a2.abs() >= a3.abs() { a2.abs() } else { a3.abs() };
    let leading = if a2 != T::zero() { a2 } else { a3 };
    let scale = leading.signum() / max;
    let mut rep = [T::zero(), a2 * scale, a3 * scale];
    // pin the dominant coefficient so it is exactly ±1
    let dom = if a2.abs() >= a3.abs() { 1 } else { 2 };
    rep[dom] = rep[dom].signum();
    Ok(OptimalReduction {
        input: *x,
        representative: AlgebraElement(rep),
        chain: Vec::new(),
        scale,
        class: OptimalClass::Translation,
    })
}

/// Whether `x` has the canonical shape of an optimal-system representative.
pub fn is_canonical<T: Field + Signed + PartialOrd>(x: &AlgebraElement<T>) -> bool {
    let [a1, a2, a3] = x.0;
    if a1 != T::zero() {
        return a1 == T::one() && a2 == T::zero() && a3 == T::zero();
    }
    let max = if a2.abs() >= a3.abs() { a2.abs() } else { a3.abs() };
    let first = if a2 != T::zero() { a2 } else { a3 };
    max == T::one() && first > T::zero()
}

/// A point `(x, t, u)` of the space of independent and dependent variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub t: T,
    pub u: T,
}

impl<T> Point<T> {
    pub fn new(x: T, t: T, u: T) -> Self {
        Self { x, t, u }
    }
}

/// Coefficients `(ξ, τ, φ)` of the generator's vector field at `p`.
pub fn generator_field<T: Real>(g: Generator, p: Point<T>) -> Result<Point<T>> {
    Ok(match g {
        Generator::X1 => Point::new(p.x / real(3.0), p.t, -p.u * real(2.0) / real(3.0)),
        Generator::X2 => Point::new(T::one(), T::zero(), T::zero()),
        Generator::X3 => {
            check_time(p.t)?;
            let rt = p.t.sqrt();
            Point::new(p.t * rt, T::zero(), rt / real(4.0))
        }
    })
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if t < T::zero() || !t.is_finite() {
        return Err(Error::Domain(format!("X3 flow needs t >= 0, got t = {}", to_f64(t))));
    }
    Ok(())
}

/// The one-parameter group `exp(ε X_i)` acting on points.
pub fn flow<T: Real>(g: Generator, eps: T, p: Point<T>) -> Result<Point<T>> {
    Ok(match g {
        Generator::X1 => Point::new(
            (eps / real(3.0)).exp() * p.x,
            eps.exp() * p.t,
            (-eps * real(2.0) / real(3.0)).exp() * p.u,
        ),
        Generator::X2 => Point::new(p.x + eps, p.t, p.u),
        Generator::X3 => {
            check_time(p.t)?;
            let rt = p.t.sqrt();
            Point::new(p.x + eps * p.t * rt, p.t, p.u + eps * rt / real(4.0))
        }
    })
}

/// A flow with fixed generator and parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointFlow<T> {
    pub generator: Generator,
    pub epsilon: T,
}

impl<T: Real> PointFlow<T> {
    pub fn new(generator: Generator, epsilon: T) -> Self {
        Self { generator, epsilon }
    }

    pub fn apply(&self, p: Point<T>) -> Result<Point<T>> {
        flow(self.generator, self.epsilon, p)
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.generator, -self.epsilon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use approx::assert_abs_diff_eq;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn commutation_relations() {
        let e = |g| AlgebraElement::<Rational>::basis(g);
        use Generator::*;
        assert_eq!(
            commutator(&e(X1), &e(X2)),
            AlgebraElement::new(q(0, 1), q(-1, 3), q(0, 1))
        );
        assert_eq!(
            commutator(&e(X1), &e(X3)),
            AlgebraElement::new(q(0, 1), q(0, 1), q(-7, 6))
        );
        assert_eq!(commutator(&e(X2), &e(X3)), AlgebraElement::zero());
        let x = AlgebraElement::new(q(2, 3), q(-5, 1), q(1, 7));
        assert_eq!(commutator(&x, &x), AlgebraElement::zero());

        let f = commutator(&AlgebraElement::new(1.0, 0.0, 0.0), &AlgebraElement::new(0.0, 1.0, 0.0));
        assert_eq!(f, AlgebraElement::new(0.0, -1.0 / 3.0, 0.0));
    }

    #[test]
    fn structure_constants_are_antisymmetric() {
        let c = StructureConstants::new();
        for i in Generator::ALL {
            for j in Generator::ALL {
                for k in Generator::ALL {
                    assert_eq!(c.get::<Rational>(i, j, k), -c.get::<Rational>(j, i, k));
                }
            }
        }
    }

    #[test]
    fn generator_index_round_trip() {
        for g in Generator::ALL {
            assert_eq!(Generator::from_index(g.index()).unwrap(), g);
        }
        assert_eq!(Generator::from_index(0), Err(Error::InvalidGenerator(0)));
        assert_eq!(Generator::from_index(4), Err(Error::InvalidGenerator(4)));
    }

    #[test]
    fn closed_form_examples() {
        let eps = 0.7f64;
        let m = adjoint_closed_form(Generator::X1, eps);
        let out = m.apply(&AlgebraElement::new(0.0, 1.0, 0.0));
        assert_abs_diff_eq!(out.0[1], (eps / 3.0).exp(), epsilon = 1e-15);
        assert_eq!(out.0[0], 0.0);
        assert_eq!(out.0[2], 0.0);

        let m = adjoint_closed_form(Generator::X2, eps);
        assert_eq!(
            m.apply(&AlgebraElement::new(1.0, 0.0, 0.0)),
            AlgebraElement::new(1.0, -eps / 3.0, 0.0)
        );

        for g in Generator::ALL {
            assert_eq!(adjoint_closed_form(g, 0.0).entries, identity::<f64>());
            for eps in [-3.0, -0.5, 0.5, 3.0] {
                assert!(adjoint_closed_form(g, eps).determinant() > 0.0);
            }
        }
        assert_eq!(
            translation_adjoint::<f64>(Generator::X1, 1.0),
            Err(Error::InvalidGenerator(1))
        );
    }

    #[test]
    fn lie_series_examples() {
        use Generator::*;
        for s in [-2.0, 0.3, 5.0] {
            assert_eq!(
                adjoint_lie_series(X2, X3, s, 10).unwrap(),
                AlgebraElement::new(0.0, 0.0, 1.0)
            );
        }
        let v = adjoint_lie_series(X1, X2, 1.0, 12).unwrap();
        assert_abs_diff_eq!(v.0[1], (1.0f64 / 3.0).exp(), epsilon = 1e-9);

        // exact termination after the linear term
        let s = q(2, 5);
        let two = adjoint_lie_series(X3, X1, s, 2).unwrap();
        let many = adjoint_lie_series(X3, X1, s, 30).unwrap();
        assert_eq!(two, many);
        assert_eq!(two, AlgebraElement::new(q(1, 1), q(0, 1), -s * q(7, 6)));

        assert!(adjoint_lie_series(X1, X1, 1.0, 0).is_err());
    }

    #[test]
    fn reduction_examples() {
        let r = reduce_to_optimal(&AlgebraElement::new(1.0, 0.0, 0.0), 1e-12).unwrap();
        assert_eq!(r.representative, AlgebraElement::new(1.0, 0.0, 0.0));
        assert_eq!(r.class, OptimalClass::Dilation);
        assert!(r.chain.is_empty());

        let r = reduce_to_optimal(&AlgebraElement::new(0.0, 2.0, 0.0), 1e-12).unwrap();
        assert_eq!(r.representative, AlgebraElement::new(0.0, 1.0, 0.0));
        assert_eq!(r.class, OptimalClass::Translation);
        assert_eq!(r.scale, 0.5);

        let r = reduce_to_optimal(&AlgebraElement::new(1.0, 1.0, 0.0), 1e-12).unwrap();
        assert_eq!(r.representative, AlgebraElement::new(1.0, 0.0, 0.0));
        assert_eq!(r.chain, vec![(Generator::X2, 3.0)]);
        assert_eq!(r.replay(), r.representative);

        let r = reduce_to_optimal(&AlgebraElement::new(0.0, 0.5, -1.0), 1e-12).unwrap();
        assert_eq!(r.representative, AlgebraElement::new(0.0, 0.5, -1.0));
        let r = reduce_to_optimal(&AlgebraElement::new(0.0, -0.5, 2.0), 1e-12).unwrap();
        assert_eq!(r.representative, AlgebraElement::new(0.0, 0.25, -1.0));
        assert!(is_canonical(&r.representative));

        assert_eq!(
            reduce_to_optimal(&AlgebraElement::new(0.0, 1e-14, 0.0), 1e-12),
            Err(Error::DegenerateElement(1e-12))
        );
    }

    #[test]
    fn exact_reduction_over_rationals() {
        let x = AlgebraElement::new(q(-2, 3), q(5, 4), q(7, 2));
        let r = reduce_to_optimal(&x, q(0, 1)).unwrap();
        assert_eq!(r.replay(), AlgebraElement::new(q(1, 1), q(0, 1), q(0, 1)));
        assert_eq!(r.replay_error(), q(0, 1));
    }

    #[test]
    fn flow_examples() {
        let p = flow(Generator::X2, 5.0, Point::new(0.0, 1.0, 7.0)).unwrap();
        assert_eq!(p, Point::new(5.0, 1.0, 7.0));
        let p = flow(Generator::X1, 3.0, Point::new(1.0, 1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(p.x, std::f64::consts::E, epsilon = 1e-15);
        assert_abs_diff_eq!(p.t, 3.0f64.exp(), epsilon = 1e-13);
        assert_abs_diff_eq!(p.u, (-2.0f64).exp(), epsilon = 1e-15);
        let p = flow(Generator::X3, 2.0, Point::new(0.0, 4.0, 0.0)).unwrap();
        assert_eq!(p, Point::new(16.0, 4.0, 1.0));
        assert!(matches!(
            flow(Generator::X3, 1.0, Point::new(0.0, -1.0, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(generator_field(Generator::X3, Point::new(0.0, -1.0, 0.0)).is_err());
    }

    #[test]
    fn flow_inverse() {
        let f = PointFlow::new(Generator::X3, 0.75);
        let p = Point::new(0.3, 2.0, -1.0);
        let back = f.inverse().apply(f.apply(p).unwrap()).unwrap();
        assert_abs_diff_eq!(back.x, p.x, epsilon = 1e-15);
        assert_abs_diff_eq!(back.u, p.u, epsilon = 1e-15);
    }
}
