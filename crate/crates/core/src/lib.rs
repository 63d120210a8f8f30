//! Numerical generalized derivatives of nonsmooth, nonconvex functions.
//!
//! The crate estimates four derivatives of a black-box function (directional,
//! Clarke, subderivative and radial epiderivative), builds and checks weak
//! subgradients, classifies regularity, and runs a global descent method
//! driven by the radial epiderivative.
//!
//! Everything numeric is generic over [`Scalar`] (`f32`, `f64`); the exact
//! one-dimensional analysis is generic over [`Field`] and also runs on
//! `Rational64`. The `*64` aliases below fix `f64`.

pub mod error;
pub mod exact1d;
pub mod expr;
pub mod extended;
pub mod func;
pub mod genderiv;
pub mod optimize;
pub mod registry;
pub mod regularity;
pub mod sampling;
pub mod scalar;
pub mod weaksub;

pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use func::{Direction, FunctionOracle, NormKind, Point};
pub use registry::{get_function, FunctionRegistry};
pub use scalar::{Field, Scalar};

pub type ExtendedReal64 = ExtendedReal<f64>;
pub type Point64 = Point<f64>;
pub type Direction64 = Direction<f64>;
pub type Oracle64 = FunctionOracle<f64>;
pub type Registry64 = FunctionRegistry<f64>;
pub type Schedule64 = genderiv::SamplingSchedule<f64>;
pub type Estimate64 = genderiv::DerivativeEstimate<f64>;
pub type WeakSubgradient64 = weaksub::WeakSubgradient<f64>;

pub type Piecewise64 = exact1d::PiecewiseFn1D<f64>;
pub type PiecewiseExact = exact1d::PiecewiseFn1D<num_rational::Rational64>;
