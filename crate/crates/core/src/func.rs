//! Points, directions and the function-evaluation contract.

use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::exact1d::PiecewiseFn1D;
use crate::expr::Expr;
use crate::extended::ExtendedReal;
use crate::scalar::Scalar;

/// A point of `ℝⁿ`, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<S> {
    coords: Vec<S>,
}

impl<S: Scalar> Point<S> {
    pub fn new(coords: Vec<S>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("a point needs at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("point coordinates must be finite".into()));
        }
        Ok(Self { coords })
    }

    pub fn scalar(x: S) -> Self {
        Self { coords: vec![x] }
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    /// `self + t·d`.
    pub fn offset(&self, t: S, d: &[S]) -> Vec<S> {
        self.coords.iter().zip(d).map(|(x, h)| *x + t * *h).collect()
    }
}

/// Norm attached to a direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormKind {
    #[default]
    L2,
    L1,
}

impl NormKind {
    pub fn norm<S: Scalar>(self, v: &[S]) -> S {
        match self {
            NormKind::L2 => v.iter().fold(S::zero(), |acc, x| acc + *x * *x).sqrt(),
            NormKind::L1 => v.iter().fold(S::zero(), |acc, x| acc + x.abs()),
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::L2 => "l2",
            NormKind::L1 => "l1",
        })
    }
}

/// A direction `h` together with the norm used to measure it.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction<S> {
    coords: Vec<S>,
    norm: NormKind,
}

impl<S: Scalar> Direction<S> {
    pub fn new(coords: Vec<S>, norm: NormKind) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("a direction needs at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("direction coordinates must be finite".into()));
        }
        Ok(Self { coords, norm })
    }

    pub fn l2(coords: Vec<S>) -> Result<Self> {
        Self::new(coords, NormKind::L2)
    }

    pub fn scalar(h: S) -> Self {
        Self {
            coords: vec![h],
            norm: NormKind::L2,
        }
    }

    /// The zero direction, used only for the `h = 0` identity.
    pub fn zero(dimension: usize) -> Self {
        Self {
            coords: vec![S::zero(); dimension],
            norm: NormKind::L2,
        }
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| *c == S::zero())
    }

    pub fn norm(&self) -> S {
        self.norm.norm(&self.coords)
    }

    pub fn scaled(&self, lambda: S) -> Self {
        Self {
            coords: self.coords.iter().map(|c| *c * lambda).collect(),
            norm: self.norm,
        }
    }

    /// Unit vector in this direction's own norm, plus the original length.
    pub fn normalized(&self) -> Result<(Self, S)> {
        let n = self.norm();
        if n == S::zero() {
            return Err(Error::InvalidArgument("cannot normalize the zero direction".into()));
        }
        Ok((self.scaled(S::one() / n), n))
    }

    /// Componentwise sign; zero components are rejected.
    pub fn sgn(&self) -> Result<Vec<S>> {
        self.coords
            .iter()
            .enumerate()
            .map(|(index, c)| {
                if *c > S::zero() {
                    Ok(S::one())
                } else if *c < S::zero() {
                    Ok(-S::one())
                } else {
                    Err(Error::ZeroComponent { index })
                }
            })
            .collect()
    }
}

type EvalFn<S> = dyn Fn(&[S]) -> Result<ExtendedReal<S>> + Send + Sync;

/// A function `ℝⁿ → ℝ ∪ {+∞}`.
///
/// Cheap to clone and safe to call from many threads.
#[derive(Clone)]
pub struct FunctionOracle<S> {
    label: String,
    dimension: usize,
    eval: Arc<EvalFn<S>>,
    exact: Option<Arc<PiecewiseFn1D<Rational64>>>,
    expr: Option<Arc<Expr>>,
}

impl<S> fmt::Debug for FunctionOracle<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionOracle")
            .field("label", &self.label)
            .field("dimension", &self.dimension)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl<S: Scalar> FunctionOracle<S> {
    pub fn new<F>(label: impl Into<String>, dimension: usize, eval: F) -> Self
    where
        F: Fn(&[S]) -> Result<ExtendedReal<S>> + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            dimension,
            eval: Arc::new(eval),
            exact: None,
            expr: None,
        }
    }

    /// Oracle interpreting a parsed expression.
    pub fn from_expr(label: impl Into<String>, expr: Expr) -> Self {
        let expr = Arc::new(expr);
        let inner = Arc::clone(&expr);
        let mut oracle = Self::new(label, expr.dimension(), move |x: &[S]| inner.eval(x));
        oracle.expr = Some(expr);
        oracle
    }

    /// Oracle backed by an exact piecewise quadratic; evaluation uses the
    /// coefficients rounded to `S`.
    pub fn from_piecewise(label: impl Into<String>, pw: PiecewiseFn1D<Rational64>) -> Self {
        let rounded: PiecewiseFn1D<S> = pw.convert();
        let mut oracle = Self::new(label, 1, move |x: &[S]| Ok(ExtendedReal::Finite(rounded.eval(&x[0]))));
        oracle.exact = Some(Arc::new(pw));
        oracle
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn exact_form(&self) -> Option<&PiecewiseFn1D<Rational64>> {
        self.exact.as_deref()
    }

    pub fn expression(&self) -> Option<&Expr> {
        self.expr.as_deref()
    }

    /// `f(x)`. Never NaN and never `−∞`.
    pub fn eval(&self, x: &[S]) -> Result<ExtendedReal<S>> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: x.len(),
            });
        }
        match (self.eval)(x)? {
            ExtendedReal::MinusInfinity => Err(Error::EvaluationFault {
                node: self.label.clone(),
                reason: "oracle produced -inf".into(),
            }),
            v => Ok(v),
        }
    }

    pub fn evaluate(&self, x: &Point<S>) -> Result<ExtendedReal<S>> {
        self.eval(x.coords())
    }

    /// `f(x)` when it must be finite, e.g. at a base point.
    pub fn eval_finite(&self, x: &[S]) -> Result<S> {
        self.eval(x)?.finite().ok_or(Error::BasePointInfinite)
    }
}

/// Free-function form of [`FunctionOracle::evaluate`].
pub fn evaluate<S: Scalar>(oracle: &FunctionOracle<S>, x: &Point<S>) -> Result<ExtendedReal<S>> {
    oracle.evaluate(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_mismatch_rejected() {
        let f = FunctionOracle::<f64>::new("sum", 2, |x| Ok(ExtendedReal::Finite(x[0] + x[1])));
        assert!(matches!(f.eval(&[1.0]), Err(Error::DimensionMismatch { expected: 2, found: 1 })));
        assert_eq!(f.eval(&[1.0, 2.0]).unwrap(), ExtendedReal::Finite(3.0));
    }

    #[test]
    fn minus_infinity_is_not_an_oracle_value() {
        let f = FunctionOracle::<f64>::new("bad", 1, |_| Ok(ExtendedReal::MinusInfinity));
        assert!(f.eval(&[0.0]).is_err());
        let g = FunctionOracle::<f64>::new("barrier", 1, |_| Ok(ExtendedReal::PlusInfinity));
        assert_eq!(g.eval(&[0.0]).unwrap(), ExtendedReal::PlusInfinity);
        assert_eq!(g.eval_finite(&[0.0]), Err(Error::BasePointInfinite));
    }

    #[test]
    fn direction_helpers() {
        let d = Direction::new(vec![3.0, -4.0], NormKind::L2).unwrap();
        assert_eq!(d.norm(), 5.0);
        let (u, len) = d.normalized().unwrap();
        assert_eq!(len, 5.0);
        assert!((u.norm() - 1.0f64).abs() < 1e-15);
        assert_eq!(d.sgn().unwrap(), vec![1.0, -1.0]);
        let z = Direction::new(vec![1.0, 0.0], NormKind::L1).unwrap();
        assert_eq!(z.sgn(), Err(Error::ZeroComponent { index: 1 }));
        assert_eq!(z.norm(), 1.0);
    }

    #[test]
    fn point_rejects_non_finite() {
        assert!(Point::new(vec![f64::NAN]).is_err());
        assert!(Point::<f64>::new(vec![]).is_err());
    }
}
