//! Scalar abstractions.
//!
//! Floating-point code is written against [`Real`], which is satisfied by
//! `f32` and `f64`. Lie-algebra bookkeeping that never needs a transcendental
//! function is written against the weaker [`Field`], so it also runs over
//! exact rationals ([`crate::Rational`]).

use std::fmt::Debug;
use std::ops::Neg;

use nalgebra::RealField;
use num_traits::{FromPrimitive, Num};

/// Floating point: f32 or f64.
pub trait Real: RealField + Copy {}

impl Real for f32 {}
impl Real for f64 {}

/// A field with small-integer literals; `f32`, `f64` and `Ratio<i64>` qualify.
pub trait Field: Num + Copy + Neg<Output = Self> + FromPrimitive + PartialEq + Debug {}

impl<T> Field for T where T: Num + Copy + Neg<Output = T> + FromPrimitive + PartialEq + Debug {}

#[inline]
pub(crate) fn real<T: Real>(v: f64) -> T {
    nalgebra::convert(v)
}

#[inline]
pub(crate) fn to_f64<T: Real>(v: T) -> f64 {
    v.to_subset().unwrap_or(f64::NAN)
}

/// `n / d` in `T`. Panics only if the type cannot represent small integers.
#[inline]
pub(crate) fn ratio<T: Field>(n: i64, d: i64) -> T {
    let n = T::from_i64(n).expect("small integer representable");
    let d = T::from_i64(d).expect("small integer representable");
    n / d
}
