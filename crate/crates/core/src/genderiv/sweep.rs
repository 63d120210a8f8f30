use crate::error::{Error, Result};
use crate::func::{Direction, FunctionOracle, Point};
use crate::sampling::{coordinate_directions, seed, sphere_points};
use crate::scalar::Scalar;

use super::{estimate, DerivativeEstimate, DerivativeKind, SamplingSchedule};

/// One cell of a sweep. Estimator errors are kept per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<S> {
    pub h: Vec<S>,
    pub kind: DerivativeKind,
    pub outcome: std::result::Result<DerivativeEstimate<S>, Error>,
}

/// Rows in direction-major order, kinds in the order requested.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable<S> {
    pub rows: Vec<SweepRow<S>>,
}

/// `{−1, +1}` in 1D; otherwise `±e_j` plus 32 low-discrepancy unit vectors.
pub fn default_direction_grid<S: Scalar>(n: usize, extra: usize) -> Vec<Vec<S>> {
    if n == 1 {
        return vec![vec![-S::one()], vec![S::one()]];
    }
    let mut grid = coordinate_directions(n);
    grid.extend(sphere_points(n, extra, seed::<S>("direction-grid", &[]), crate::func::NormKind::L2));
    grid
}

/// Estimates every requested kind in every direction.
pub fn derivative_sweep<S: Scalar>(
    oracle: &FunctionOracle<S>,
    xbar: &Point<S>,
    directions: &[Direction<S>],
    kinds: &[DerivativeKind],
    schedule: &SamplingSchedule<S>,
) -> Result<SweepTable<S>> {
    if directions.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one direction".into()));
    }
    schedule.validate()?;
    let mut rows = Vec::with_capacity(directions.len() * kinds.len());
    for h in directions {
        for kind in kinds {
            rows.push(SweepRow {
                h: h.coords().to_vec(),
                kind: *kind,
                outcome: estimate(*kind, oracle, xbar, h, schedule),
            });
        }
    }
    Ok(SweepTable { rows })
}
