use rayon::prelude::*;

use crate::error::Result;
use crate::extended::ExtendedReal;
use crate::func::FunctionOracle;
use crate::scalar::{count, lit, Scalar};

/// Dense logarithmic `t`-grid for the brute-force oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceGrid {
    pub t_min: f64,
    pub t_max: f64,
    /// Number of log-spaced samples over `[t_min, t_max]`.
    pub points: usize,
    /// Relative perturbations `s` of the direction: `u ∈ {h, h(1 ± s)}`.
    pub shells: Vec<f64>,
    pub refine_points: usize,
    pub refine_rounds: usize,
    /// Quotients below `−divergence` are reported as `−∞`.
    pub divergence: f64,
}

impl Default for BruteForceGrid {
    fn default() -> Self {
        Self {
            t_min: 1e-8,
            t_max: 1e8,
            points: 1_000_001,
            shells: vec![1e-10],
            refine_points: 201,
            refine_rounds: 3,
            divergence: 1e9,
        }
    }
}

/// Minimum found by [`bruteforce_radial_argmin`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceMinimum<S> {
    pub value: ExtendedReal<S>,
    pub t: S,
}

struct Probe<'a, S> {
    oracle: &'a FunctionOracle<S>,
    xbar: S,
    fbar: S,
    dirs: Vec<S>,
}

impl<S: Scalar> Probe<'_, S> {
    /// `min_u (f(x̄ + t·u) − f(x̄)) / t` over the direction shell.
    fn quotient(&self, t: S) -> Result<ExtendedReal<S>> {
        let mut best = ExtendedReal::PlusInfinity;
        for u in &self.dirs {
            let v = self.oracle.eval(&[self.xbar + t * *u])?;
            best = best.min(v.quotient(self.fbar, t));
        }
        Ok(best)
    }

    fn scan(&self, ts: &[S]) -> Result<(ExtendedReal<S>, usize)> {
        ts.par_iter()
            .enumerate()
            .map(|(k, t)| self.quotient(*t).map(|v| (v, k)))
            .try_reduce(|| (ExtendedReal::PlusInfinity, usize::MAX), |a, b| Ok(if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a }))
    }
}

fn log_grid<S: Scalar>(lo: S, hi: S, n: usize) -> Vec<S> {
    if n < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / count::<S>(n - 1);
    (0..n).map(|k| (a + step * count(k)).exp()).collect()
}

/// Brute-force `inf_t` of the 1D Newton quotient on a dense log grid with
/// local refinement. Shares no code with the sampling estimators.
pub fn bruteforce_radial_argmin<S: Scalar>(oracle: &FunctionOracle<S>, xbar: S, h: S, grid: &BruteForceGrid) -> Result<BruteForceMinimum<S>> {
    if h == S::zero() {
        return Ok(BruteForceMinimum {
            value: ExtendedReal::zero(),
            t: S::zero(),
        });
    }
    let fbar = oracle.eval_finite(&[xbar])?;
    let mut dirs = vec![h];
    for s in &grid.shells {
        let s: S = lit(*s);
        dirs.push(h * (S::one() - s));
        dirs.push(h * (S::one() + s));
    }
    let probe = Probe { oracle, xbar, fbar, dirs };

    let ts = log_grid(lit::<S>(grid.t_min), lit(grid.t_max), grid.points.max(2));
    let (mut value, k) = probe.scan(&ts)?;
    let mut t = ts[k];

    let last = ts.len() - 1;
    // divergence at the ends of the grid: still dropping steeply over the last decade
    let per_decade = ((ts.len() - 1) as f64 / (grid.t_max / grid.t_min).log10()).round().max(1.0) as usize;
    if let Some(v) = value.finite() {
        let steep = |other: usize| -> Result<bool> {
            let w = probe.quotient(ts[other])?;
            Ok(match w.finite() {
                Some(w) => w - v > S::one() + lit::<S>(0.5) * w.abs(),
                None => false,
            })
        };
        if v < -lit::<S>(grid.divergence) || (k == 0 && steep(per_decade.min(last))?) || (k == last && steep(last.saturating_sub(per_decade))?) {
            return Ok(BruteForceMinimum {
                value: ExtendedReal::MinusInfinity,
                t,
            });
        }
    }
    if !value.is_finite() {
        return Ok(BruteForceMinimum { value, t });
    }

    let mut lo = ts[k.saturating_sub(1)];
    let mut hi = ts[(k + 1).min(last)];
    for _ in 0..grid.refine_rounds {
        let sub = log_grid(lo, hi, grid.refine_points.max(3));
        let (v, j) = probe.scan(&sub)?;
        if v < value {
            value = v;
            t = sub[j];
        }
        let j = sub.iter().position(|s| *s >= t).unwrap_or(sub.len() - 1);
        lo = sub[j.saturating_sub(1)];
        hi = sub[(j + 1).min(sub.len() - 1)];
    }
    Ok(BruteForceMinimum { value, t })
}

/// Value part of [`bruteforce_radial_argmin`].
pub fn bruteforce_radial_epiderivative<S: Scalar>(oracle: &FunctionOracle<S>, xbar: S, h: S, grid: &BruteForceGrid) -> Result<ExtendedReal<S>> {
    Ok(bruteforce_radial_argmin(oracle, xbar, h, grid)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BruteForceGrid {
        BruteForceGrid {
            points: 20_001,
            ..BruteForceGrid::default()
        }
    }

    #[test]
    fn smooth_function_gives_derivative_limit() {
        let f = FunctionOracle::<f64>::new("sq", 1, |x| Ok(ExtendedReal::Finite(x[0] * x[0])));
        let v = bruteforce_radial_epiderivative(&f, 1.0, 1.0, &small()).unwrap().to_f64();
        assert!((v - 2.0).abs() < 1e-6);
    }

    #[test]
    fn concave_ray_is_unbounded() {
        let f = FunctionOracle::<f64>::new("neg", 1, |x| Ok(ExtendedReal::Finite(-x[0] * x[0])));
        assert_eq!(bruteforce_radial_epiderivative(&f, 0.0, 1.0, &small()).unwrap(), ExtendedReal::MinusInfinity);
    }

    #[test]
    fn upward_jump_is_unbounded() {
        // f(0) = 1 but f → 0 from the right
        let f = FunctionOracle::<f64>::new("jump", 1, |x| Ok(ExtendedReal::Finite(if x[0] <= 0.0 { 1.0 } else { x[0] })));
        assert_eq!(bruteforce_radial_epiderivative(&f, 0.0, 1.0, &small()).unwrap(), ExtendedReal::MinusInfinity);
    }

    #[test]
    fn approach_from_above_at_infinity_is_finite() {
        // q(t) = 1 + 1/t decreases towards 1 without reaching it
        let f = FunctionOracle::<f64>::new("shift", 1, |x| Ok(ExtendedReal::Finite(if x[0] <= 0.0 { 0.0 } else { x[0] + 1.0 })));
        let v = bruteforce_radial_epiderivative(&f, 0.0, 1.0, &small()).unwrap().to_f64();
        assert!((v - 1.0).abs() < 1e-6);
    }
}
