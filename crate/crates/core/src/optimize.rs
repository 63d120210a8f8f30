//! Global descent driven by the radial epiderivative.
//!
//! A direction `h` with `f^r(x; h) < 0` decreases `f` somewhere along the
//! ray, not only locally, so the line search is a global 1D minimization.
//! The loop stops when no grid direction descends and `(0, 0)` is a weak
//! subgradient at the current point.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact1d::global_min_1d;
use crate::extended::ExtendedReal;
use crate::func::{Direction, FunctionOracle, NormKind, Point};
use crate::genderiv::{default_direction_grid, radial_epiderivative, SamplingSchedule};
use crate::scalar::{lit, Scalar};
use crate::weaksub::{global_min_certificate, MembershipVerdict, SampleSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct DescentParams<S> {
    /// Sphere points per dimension added to `±e_j` in `n ≥ 2`.
    pub sphere_points_per_dim: usize,
    /// `h` descends when `f^r(x; h) < −descent_tol`.
    pub descent_tol: S,
    /// Line-search horizon; `None` means `10⁴·(1 + ‖x₀‖)`.
    pub t_max: Option<S>,
    pub max_iters: usize,
    /// Cap on function evaluations, estimators included.
    pub eval_budget: usize,
    pub line_grid: usize,
    pub line_refine_rounds: usize,
    pub certificate: SampleSpec<S>,
    pub schedule: SamplingSchedule<S>,
}

impl<S: Scalar> Default for DescentParams<S> {
    fn default() -> Self {
        Self {
            sphere_points_per_dim: 32,
            descent_tol: lit(1e-4),
            t_max: None,
            max_iters: 100,
            eval_budget: 50_000_000,
            line_grid: 2000,
            line_refine_rounds: 40,
            certificate: SampleSpec::default(),
            schedule: SamplingSchedule::default(),
        }
    }
}

impl<S: Scalar> DescentParams<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.descent_tol > S::zero()) {
            return Err(Error::InvalidArgument("descent_tol must be positive".into()));
        }
        if let Some(t) = self.t_max {
            if !(t > S::zero()) || !t.is_finite() {
                return Err(Error::InvalidArgument("t_max must be positive and finite".into()));
            }
        }
        if self.line_grid < 2 {
            return Err(Error::InvalidArgument("line_grid must be at least 2".into()));
        }
        self.schedule.validate()
    }

    /// Direction grid in dimension `n`; `dense` doubles the sphere sample.
    pub fn direction_grid(&self, n: usize, dense: bool) -> Vec<Vec<S>> {
        let extra = self.sphere_points_per_dim * n * if dense { 2 } else { 1 };
        default_direction_grid(n, extra)
    }
}

/// Best grid direction at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentDirection<S> {
    pub h: Vec<S>,
    pub fr: ExtendedReal<S>,
    /// `fr < −descent_tol`.
    pub qualifies: bool,
    pub evaluations_used: usize,
}

/// Arg-min of `f^r(x̄; h)` over the grid, first in grid order on ties.
pub fn best_descent_direction<S: Scalar>(
    oracle: &FunctionOracle<S>,
    xbar: &Point<S>,
    direction_grid: &[Vec<S>],
    schedule: &SamplingSchedule<S>,
    descent_tol: S,
) -> Result<DescentDirection<S>> {
    if direction_grid.is_empty() {
        return Err(Error::InvalidArgument("direction grid is empty".into()));
    }
    oracle.eval_finite(xbar.coords())?;
    let estimates: Vec<_> = direction_grid
        .par_iter()
        .map(|h| radial_epiderivative(oracle, xbar, &Direction::l2(h.clone())?, schedule))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, e) in estimates.iter().enumerate() {
        if e.value < estimates[best].value {
            best = k;
        }
    }
    let fr = estimates[best].value;
    Ok(DescentDirection {
        h: direction_grid[best].clone(),
        fr,
        qualifies: fr < ExtendedReal::Finite(-descent_tol),
        evaluations_used: estimates.iter().map(|e| e.evaluations_used).sum(),
    })
}

/// `min_h f^r(x̄; h) ≥ −descent_tol` over the grid.
pub fn stationarity_check<S: Scalar>(
    oracle: &FunctionOracle<S>,
    xbar: &Point<S>,
    direction_grid: &[Vec<S>],
    schedule: &SamplingSchedule<S>,
    descent_tol: S,
) -> Result<bool> {
    Ok(!best_descent_direction(oracle, xbar, direction_grid, schedule, descent_tol)?.qualifies)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentStatus {
    GlobalMinCertified,
    BudgetExhausted,
    PossiblyUnbounded,
}

impl DescentStatus {
    pub fn name(self) -> &'static str {
        match self {
            Self::GlobalMinCertified => "global_min_certified",
            Self::BudgetExhausted => "budget_exhausted",
            Self::PossiblyUnbounded => "possibly_unbounded",
        }
    }
}

/// One point of the trace. `h`, `t` and `fr` describe the step that led
/// here and are `None` for the start point.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate<S> {
    pub x: Vec<S>,
    pub f: S,
    pub h: Option<Vec<S>>,
    pub t: Option<S>,
    pub fr: Option<ExtendedReal<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentTrace<S> {
    pub iterates: Vec<Iterate<S>>,
    pub status: DescentStatus,
    /// Membership check run at the final point, if any.
    pub certificate: Option<MembershipVerdict<S>>,
    pub evaluations_used: usize,
}

impl<S: Scalar> DescentTrace<S> {
    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn last(&self) -> &Iterate<S> {
        self.iterates.last().expect("trace starts with x0")
    }
}

/// Runs the descent loop from `x0`.
pub fn radial_descent<S: Scalar>(oracle: &FunctionOracle<S>, x0: &Point<S>, params: &DescentParams<S>) -> Result<DescentTrace<S>> {
    params.validate()?;
    let n = x0.dimension();
    let t_max = params.t_max.unwrap_or_else(|| lit::<S>(1e4) * (S::one() + NormKind::L2.norm(x0.coords())));
    let mut x = x0.clone();
    let mut fx = oracle.eval_finite(x.coords())?;
    let mut trace = DescentTrace {
        iterates: vec![Iterate {
            x: x.coords().to_vec(),
            f: fx,
            h: None,
            t: None,
            fr: None,
        }],
        status: DescentStatus::BudgetExhausted,
        certificate: None,
        evaluations_used: 1,
    };
    let mut dense = false;

    for _ in 0..params.max_iters {
        if trace.evaluations_used > params.eval_budget {
            return Ok(trace);
        }
        let grid = params.direction_grid(n, dense);
        let dir = best_descent_direction(oracle, &x, &grid, &params.schedule, params.descent_tol)?;
        trace.evaluations_used += dir.evaluations_used;

        if !dir.qualifies {
            let cert = global_min_certificate(oracle, &x, &params.certificate)?;
            trace.evaluations_used += cert.resolution;
            let holds = cert.holds;
            trace.certificate = Some(cert);
            if holds {
                trace.status = DescentStatus::GlobalMinCertified;
                return Ok(trace);
            }
            if dense || n == 1 {
                return Ok(trace);
            }
            dense = true;
            continue;
        }

        let h = Direction::l2(dir.h.clone())?.normalized()?.0;
        let base = x.clone();
        let phi = |t: S| oracle.eval(&base.offset(t, h.coords()));
        let mut horizon = t_max;
        let mut line = global_min_1d(phi, horizon, params.line_grid, params.line_refine_rounds)?;
        let per_search = 4 * params.line_grid + 33 * params.line_refine_rounds;
        trace.evaluations_used += per_search;
        for _ in 0..2 {
            if !line.at_upper_bound {
                break;
            }
            horizon = horizon * lit(10.0);
            line = global_min_1d(phi, horizon, params.line_grid, params.line_refine_rounds)?;
            trace.evaluations_used += per_search;
        }
        let Some(value) = line.value.finite() else {
            if line.value == ExtendedReal::MinusInfinity {
                trace.status = DescentStatus::PossiblyUnbounded;
            }
            return Ok(trace);
        };
        if line.at_upper_bound && value < fx {
            trace.status = DescentStatus::PossiblyUnbounded;
            return Ok(trace);
        }
        // Strict decrease by at least descent_tol·t/2.
        if !(value < fx - params.descent_tol * line.t * lit(0.5)) {
            return Ok(trace);
        }
        x = Point::new(base.offset(line.t, h.coords()))?;
        fx = value;
        dense = false;
        trace.iterates.push(Iterate {
            x: x.coords().to_vec(),
            f: fx,
            h: Some(h.coords().to_vec()),
            t: Some(line.t),
            fr: Some(dir.fr),
        });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(DescentParams::<f64>::default().validate().is_ok());
        let p = DescentParams::<f64> {
            descent_tol: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = DescentParams::<f64> {
            t_max: Some(-1.0),
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn grid_sizes() {
        let p = DescentParams::<f64>::default();
        assert_eq!(p.direction_grid(1, false).len(), 2);
        assert_eq!(p.direction_grid(2, false).len(), 4 + 64);
        assert_eq!(p.direction_grid(2, true).len(), 4 + 128);
    }

    #[test]
    fn smooth_bowl_in_two_dimensions() {
        let f = FunctionOracle::new("bowl", 2, |x: &[f64]| Ok(ExtendedReal::Finite((x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2))));
        let params = DescentParams {
            certificate: SampleSpec {
                points: 2000,
                ..Default::default()
            },
            ..Default::default()
        };
        let trace = radial_descent(&f, &Point::new(vec![0.0, 0.0]).unwrap(), &params).unwrap();
        let last = trace.last();
        assert!(last.f < 1e-3, "{last:?}");
        for w in trace.iterates.windows(2) {
            assert!(w[1].f < w[0].f);
        }
    }
}
