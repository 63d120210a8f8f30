//! Extended reals `ℝ ∪ {−∞, +∞}` with a total order.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A real number or one of the two infinities.
///
/// `Finite` never holds NaN; constructors reject it. Ordering is total:
/// `MinusInfinity < Finite(_) < PlusInfinity`.
#[derive(Debug, Clone, Copy)]
pub enum ExtendedReal<S> {
    MinusInfinity,
    Finite(S),
    PlusInfinity,
}

impl<S: Scalar> ExtendedReal<S> {
    /// Classifies a float: ±inf map to the infinities, NaN is a fault.
    pub fn from_scalar(v: S) -> Result<Self> {
        if v.is_nan() {
            Err(Error::EvaluationFault {
                node: "value".into(),
                reason: "NaN".into(),
            })
        } else if v == S::infinity() {
            Ok(Self::PlusInfinity)
        } else if v == S::neg_infinity() {
            Ok(Self::MinusInfinity)
        } else {
            Ok(Self::Finite(v))
        }
    }

    pub fn zero() -> Self {
        Self::Finite(S::zero())
    }

    /// Float view: infinities become `±inf`.
    pub fn to_scalar(&self) -> S {
        match self {
            Self::Finite(v) => *v,
            Self::PlusInfinity => S::infinity(),
            Self::MinusInfinity => S::neg_infinity(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Self::Finite(v) => v.to_f64().unwrap_or(f64::NAN),
            Self::PlusInfinity => f64::INFINITY,
            Self::MinusInfinity => f64::NEG_INFINITY,
        }
    }

    /// `(self − base) / t` for `t > 0` and finite `base`.
    pub fn quotient(self, base: S, t: S) -> Self {
        match self {
            Self::Finite(v) => {
                let q = (v - base) / t;
                // overflow of the division saturates to the matching infinity
                Self::from_scalar(q).unwrap_or(Self::PlusInfinity)
            }
            other => other,
        }
    }

    /// Multiplication by a positive scalar.
    pub fn scale(self, lambda: S) -> Self {
        match self {
            Self::Finite(v) => Self::Finite(v * lambda),
            other => other,
        }
    }

}

impl<S: PartialOrd + Clone> ExtendedReal<S> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    pub fn finite(&self) -> Option<S> {
        match self {
            Self::Finite(v) => Some(v.clone()),
            _ => None,
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Self::MinusInfinity => 0,
            Self::Finite(_) => 1,
            Self::PlusInfinity => 2,
        }
    }
}

impl<S: PartialEq> PartialEq for ExtendedReal<S> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Finite(a), Self::Finite(b)) => a == b,
            (Self::PlusInfinity, Self::PlusInfinity) | (Self::MinusInfinity, Self::MinusInfinity) => true,
            _ => false,
        }
    }
}

impl<S: PartialOrd + Clone> Eq for ExtendedReal<S> {}

impl<S: PartialOrd + Clone> PartialOrd for ExtendedReal<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: PartialOrd + Clone> Ord for ExtendedReal<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Self::Finite(a), Self::Finite(b)) => a.partial_cmp(b).unwrap_or(Ordering::Equal),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl<S: Scalar> From<S> for ExtendedReal<S> {
    /// Panics on NaN; use [`ExtendedReal::from_scalar`] for untrusted values.
    fn from(v: S) -> Self {
        Self::from_scalar(v).expect("NaN is not an extended real")
    }
}

impl<S: fmt::Display> fmt::Display for ExtendedReal<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::PlusInfinity => f.write_str("+inf"),
            Self::MinusInfinity => f.write_str("-inf"),
        }
    }
}
