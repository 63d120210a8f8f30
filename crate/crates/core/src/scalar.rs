//! Scalar abstractions.
//!
//! Two layers: [`Field`] is an ordered field with an (approximate) square
//! root, enough for the exact piecewise analysis and implemented for exact
//! rationals. [`Scalar`] adds floating-point behavior and is what every
//! sampling estimator runs on.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_rational::Rational64;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Ordered field used by the piecewise breakpoint analysis.
pub trait Field:
    Clone + PartialOrd + Num + Neg<Output = Self> + ToPrimitive + Debug + Send + Sync + 'static
{
    fn integer(v: i64) -> Self;

    /// `numer / denom`, exact for rationals.
    fn ratio(numer: i64, denom: i64) -> Self;

    /// Square root of a nonnegative value. Exact for perfect-square rationals,
    /// rounded through `f64` otherwise.
    fn sqrt_nonneg(&self) -> Self;
}

impl Field for f64 {
    fn integer(v: i64) -> Self {
        v as f64
    }
    fn ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }
    fn sqrt_nonneg(&self) -> Self {
        self.sqrt()
    }
}

impl Field for f32 {
    fn integer(v: i64) -> Self {
        v as f32
    }
    fn ratio(numer: i64, denom: i64) -> Self {
        numer as f32 / denom as f32
    }
    fn sqrt_nonneg(&self) -> Self {
        self.sqrt()
    }
}

impl Field for Rational64 {
    fn integer(v: i64) -> Self {
        Rational64::from_integer(v)
    }
    fn ratio(numer: i64, denom: i64) -> Self {
        Rational64::new(numer, denom)
    }
    fn sqrt_nonneg(&self) -> Self {
        let (n, d) = (*self.numer(), *self.denom());
        match (isqrt_exact(n), isqrt_exact(d)) {
            (Some(rn), Some(rd)) => Rational64::new(rn, rd),
            _ => {
                let approx = (n as f64 / d as f64).sqrt();
                Rational64::approximate_float(approx).unwrap_or_else(|| Rational64::from_integer(0))
            }
        }
    }
}

fn isqrt_exact(v: i64) -> Option<i64> {
    if v < 0 {
        return None;
    }
    let r = (v as f64).sqrt().round() as i64;
    (r.max(0) - 1..=r + 1).find(|c| *c >= 0 && c.checked_mul(*c) == Some(v))
}

/// Floating-point scalar driving the estimators. Implemented for `f32` and `f64`.
pub trait Scalar: Float + Field + FromPrimitive + Display + Default {}

impl<T> Scalar for T where T: Float + Field + FromPrimitive + Display + Default {}

/// Converts an `f64` literal into `S`.
#[inline]
pub fn lit<S: Scalar>(v: f64) -> S {
    <S as num_traits::NumCast>::from(v).expect("literal representable in scalar type")
}

/// Converts a count into `S`.
#[inline]
pub fn count<S: Scalar>(n: usize) -> S {
    <S as num_traits::NumCast>::from(n).expect("count representable in scalar type")
}

/// `max(tol, tol·|value|)`: relative-or-absolute tolerance.
#[inline]
pub fn rel_abs_tol<S: Scalar>(tol: S, value: S) -> S {
    tol.max(tol * value.abs())
}
