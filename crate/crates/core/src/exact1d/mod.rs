//! Exact and brute-force oracles for one-dimensional functions, plus the
//! global line search used by the optimizer.

mod brute;
mod linemin;
mod piecewise;
mod radial;

pub use brute::{bruteforce_radial_argmin, bruteforce_radial_epiderivative, BruteForceGrid, BruteForceMinimum};
pub use linemin::{global_min_1d, LineMinimum};
pub use piecewise::{Endpoint, Owner, Piece, PiecewiseFn1D};
pub use radial::exact_radial_epiderivative;
