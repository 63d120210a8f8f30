use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::scalar::{count, lit, Scalar};

/// Result of [`global_min_1d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineMinimum<S> {
    pub t: S,
    pub value: ExtendedReal<S>,
    /// The minimizer sits at `t_max`: the function may keep decreasing.
    pub at_upper_bound: bool,
}

fn pick<S: Scalar>(a: (ExtendedReal<S>, S), b: (ExtendedReal<S>, S)) -> (ExtendedReal<S>, S) {
    if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

fn scan<S: Scalar, P>(phi: &P, ts: &[S]) -> Result<(ExtendedReal<S>, S)>
where
    P: Fn(S) -> Result<ExtendedReal<S>> + Sync,
{
    ts.par_iter()
        .map(|t| phi(*t).map(|v| (v, *t)))
        .try_reduce(|| (ExtendedReal::PlusInfinity, S::infinity()), |a, b| Ok(pick(a, b)))
}

/// Global minimum of `φ` over `(0, t_max]`.
///
/// Scans the union of a uniform grid `t_max·k/N` and a log grid spanning
/// nine decades below `t_max`, then repeatedly rescans a uniform sub-grid
/// around the incumbent. Ties go to the smallest `t`.
pub fn global_min_1d<S, P>(phi: P, t_max: S, grid_size: usize, refine_rounds: usize) -> Result<LineMinimum<S>>
where
    S: Scalar,
    P: Fn(S) -> Result<ExtendedReal<S>> + Sync,
{
    if !(t_max > S::zero()) || !t_max.is_finite() {
        return Err(Error::InvalidArgument("t_max must be positive and finite".into()));
    }
    let n = grid_size.max(2);
    let mut ts: Vec<S> = (1..=n).map(|k| t_max * count::<S>(k) / count::<S>(n)).collect();
    let log_lo = (t_max * lit::<S>(1e-9)).ln();
    let log_step = (t_max.ln() - log_lo) / count::<S>(n - 1);
    ts.extend((0..n).map(|k| (log_lo + log_step * count::<S>(k)).exp().min(t_max)));
    ts.sort_by(|a, b| a.partial_cmp(b).expect("grid values are finite"));
    ts.dedup();

    let (mut value, mut t) = scan(&phi, &ts)?;
    let k = ts.iter().position(|s| *s == t).unwrap_or(0);
    let mut lo = if k == 0 { ts[0] * lit(0.5) } else { ts[k - 1] };
    let mut hi = ts[(k + 1).min(ts.len() - 1)];

    const SUB: usize = 33;
    for _ in 0..refine_rounds {
        let step = (hi - lo) / count::<S>(SUB - 1);
        if !(step > S::zero()) {
            break;
        }
        let sub: Vec<S> = (0..SUB).map(|j| (lo + step * count::<S>(j)).min(t_max)).filter(|s| *s > S::zero()).collect();
        let cand = scan(&phi, &sub)?;
        let best = pick((value, t), cand);
        value = best.0;
        t = best.1;
        lo = (t - step).max(lo);
        hi = (t + step).min(hi);
    }
    Ok(LineMinimum {
        t,
        value,
        // refinement can land an ulp below t_max with the same value
        at_upper_bound: t_max - t <= t_max * lit(1e-9),
    })
}
