use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::func::{Direction, FunctionOracle, Point};
use crate::sampling::{ball_points, log_space, seed};
use crate::scalar::{lit, rel_abs_tol, Scalar};

use super::{DerivativeEstimate, DerivativeKind, Diagnostics, SamplingSchedule, StageRecord, Status};

/// Oracle bound to a base point, counting evaluations.
struct Ctx<'a, S> {
    oracle: &'a FunctionOracle<S>,
    x: &'a [S],
    fbar: S,
    evals: AtomicUsize,
}

impl<'a, S: Scalar> Ctx<'a, S> {
    fn new(oracle: &'a FunctionOracle<S>, xbar: &'a Point<S>, h: &Direction<S>) -> Result<Self> {
        for found in [xbar.dimension(), h.dimension()] {
            if found != oracle.dimension() {
                return Err(Error::DimensionMismatch {
                    expected: oracle.dimension(),
                    found,
                });
            }
        }
        let fbar = oracle.eval_finite(xbar.coords())?;
        Ok(Self {
            oracle,
            x: xbar.coords(),
            fbar,
            evals: AtomicUsize::new(1),
        })
    }

    fn f(&self, y: &[S]) -> Result<ExtendedReal<S>> {
        self.evals.fetch_add(1, Ordering::Relaxed);
        self.oracle.eval(y)
    }

    /// `(f(base + t·u) − f_base) / t`.
    fn quotient_from(&self, base: &[S], f_base: S, t: S, u: &[S]) -> Result<ExtendedReal<S>> {
        let y: Vec<S> = base.iter().zip(u).map(|(b, d)| *b + t * *d).collect();
        Ok(self.f(&y)?.quotient(f_base, t))
    }

    fn quotient(&self, t: S, u: &[S]) -> Result<ExtendedReal<S>> {
        self.quotient_from(self.x, self.fbar, t, u)
    }

    /// Smallest `t` at which a quotient based at `y` is above rounding noise:
    /// `√ε·(‖y‖∞ + |f(y)|)`, capped at `cap`.
    fn t_floor(y: &[S], fy: S, cap: S) -> S {
        let size = y.iter().fold(S::zero(), |m, c| m.max(c.abs())) + fy.abs();
        (S::epsilon().sqrt() * size).min(cap)
    }

    fn finish(
        &self,
        kind: DerivativeKind,
        value: ExtendedReal<S>,
        status: Status,
        diagnostics: Diagnostics<S>,
    ) -> DerivativeEstimate<S> {
        DerivativeEstimate {
            kind,
            value,
            status,
            diagnostics,
            evaluations_used: self.evals.load(Ordering::Relaxed),
        }
    }
}

fn zero_estimate<S: Scalar>(kind: DerivativeKind, evals: usize) -> DerivativeEstimate<S> {
    DerivativeEstimate {
        kind,
        value: ExtendedReal::zero(),
        status: Status::Converged,
        diagnostics: Diagnostics::default(),
        evaluations_used: evals,
    }
}

fn unbounded<S: Scalar>(status: Status) -> ExtendedReal<S> {
    if status == Status::UnboundedBelow {
        ExtendedReal::MinusInfinity
    } else {
        ExtendedReal::PlusInfinity
    }
}

/// Divergence test on values ordered towards the limit, each paired with a
/// progress measure that grows towards the limit (`1/t`, `1/δ` or `t`).
///
/// Diverges when the last value is infinite or beyond `M∞`, or when the
/// magnitudes grow monotonically with one sign, end above 100, and grow at
/// least like `progress^0.4`.
fn divergence<S: Scalar>(seq: &[(S, ExtendedReal<S>)], m_inf: S) -> Option<Status> {
    let sign_status = |v: S| if v < S::zero() { Status::UnboundedBelow } else { Status::UnboundedAbove };
    let (_, last) = seq.last()?;
    match last {
        ExtendedReal::PlusInfinity => return Some(Status::UnboundedAbove),
        ExtendedReal::MinusInfinity => return Some(Status::UnboundedBelow),
        ExtendedReal::Finite(v) if v.abs() > m_inf => return Some(sign_status(*v)),
        _ => {}
    }
    if seq.len() < 3 {
        return None;
    }
    let vals: Option<Vec<S>> = seq.iter().map(|(_, v)| v.finite()).collect();
    let vals = vals?;
    let positive = vals[0] > S::zero();
    if vals.iter().any(|v| *v == S::zero() || (*v > S::zero()) != positive) {
        return None;
    }
    if vals.windows(2).any(|w| !(w[1].abs() > w[0].abs())) {
        return None;
    }
    let (first, last) = (vals[0].abs(), vals[vals.len() - 1].abs());
    if last < lit(100.0) {
        return None;
    }
    let (p0, p1) = (seq[0].0, seq[seq.len() - 1].0);
    let slope = (last / first).ln() / (p1 / p0).ln();
    (slope >= lit(0.4)).then(|| sign_status(vals[0]))
}

fn agree<S: Scalar>(a: ExtendedReal<S>, b: ExtendedReal<S>, tol: S) -> bool {
    match (a.finite(), b.finite()) {
        (Some(a), Some(b)) => (a - b).abs() <= rel_abs_tol(tol, b),
        _ => false,
    }
}

/// `(f(x̄ + t·u) − f(x̄)) / t`.
pub fn newton_quotient<S: Scalar>(oracle: &FunctionOracle<S>, xbar: &Point<S>, t: S, u: &Direction<S>) -> Result<ExtendedReal<S>> {
    if !(t > S::zero()) {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let ctx = Ctx::new(oracle, xbar, u)?;
    if u.is_zero() {
        return Ok(ExtendedReal::zero());
    }
    ctx.quotient(t, u.coords())
}

/// Unit-ball perturbation pattern shared by all shells of one estimate.
fn pattern<S: Scalar>(tag: &str, x: &[S], h: &[S], m: usize) -> Vec<Vec<S>> {
    ball_points(h.len(), m, seed(tag, &[x, h]))
}

/// Per-radius minima of the quotient at fixed `t` over `{h}` and the
/// perturbations `h + δ‖h‖·p`; the center is evaluated once.
fn shell_stages<S: Scalar>(ctx: &Ctx<'_, S>, h: &Direction<S>, t: S, ladder: &[S], pts: &[Vec<S>]) -> Result<Vec<ExtendedReal<S>>> {
    let center = ctx.quotient(t, h.coords())?;
    let scale = h.norm();
    let mut out = Vec::with_capacity(ladder.len());
    for delta in ladder {
        let r = *delta * scale;
        let mut best = center;
        for p in pts {
            let u: Vec<S> = h.coords().iter().zip(p).map(|(a, b)| *a + r * *b).collect();
            best = best.min(ctx.quotient(t, &u)?);
        }
        out.push(best);
    }
    Ok(out)
}

/// `liminf_{u→h}` of the quotient at fixed `t`, estimated by the minimum over
/// the smallest shell of the ladder, center included.
pub fn liminf_shell<S: Scalar>(
    oracle: &FunctionOracle<S>,
    xbar: &Point<S>,
    h: &Direction<S>,
    t: S,
    ladder: &[S],
    m: usize,
) -> Result<ExtendedReal<S>> {
    if !(t > S::zero()) {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    if ladder.is_empty() || m == 0 {
        return Err(Error::InvalidSchedule("shell needs a radius and at least one perturbation".into()));
    }
    let ctx = Ctx::new(oracle, xbar, h)?;
    let pts = pattern("radial", xbar.coords(), h.coords(), m);
    Ok(*shell_stages(&ctx, h, t, ladder, &pts)?.last().expect("ladder is nonempty"))
}

/// Radial epiderivative: the minimum of the liminf shells over the whole
/// `t` grid, refined inside the deepest few grid basins.
const BASINS: usize = 4;

pub fn radial_epiderivative<S: Scalar>(
    oracle: &FunctionOracle<S>,
    xbar: &Point<S>,
    h: &Direction<S>,
    schedule: &SamplingSchedule<S>,
) -> Result<DerivativeEstimate<S>> {
    schedule.validate()?;
    let ctx = Ctx::new(oracle, xbar, h)?;
    let kind = DerivativeKind::RadialEpi;
    if h.is_zero() {
        return Ok(zero_estimate(kind, 1));
    }
    let ladder = &schedule.shrink_ladder;
    let pts = pattern("radial", xbar.coords(), h.coords(), schedule.perturbations_per_shell);
    let shell = |t: S| -> Result<ExtendedReal<S>> { Ok(*shell_stages(&ctx, h, t, ladder, &pts)?.last().expect("nonempty")) };
    let scan = |ts: &[S]| -> Result<Vec<ExtendedReal<S>>> { ts.par_iter().map(|t| shell(*t)).collect() };

    let grid = schedule.t_grid();
    let vals = scan(&grid)?;
    let mut diagnostics = Diagnostics::default();

    let m_inf = schedule.divergence_threshold;
    let ppd = schedule.points_per_decade;
    let n = grid.len();
    let decade_idx: Vec<usize> = (0..4).map(|k| k * ppd).filter(|i| *i < n).collect();
    let small_end: Vec<(S, ExtendedReal<S>)> = decade_idx.iter().rev().map(|i| (S::one() / grid[*i], vals[*i])).collect();
    let large_end: Vec<(S, ExtendedReal<S>)> = decade_idx.iter().rev().map(|i| (grid[n - 1 - *i], vals[n - 1 - *i])).collect();
    let running_min = vals.iter().copied().fold(ExtendedReal::PlusInfinity, ExtendedReal::min);
    let below = running_min == ExtendedReal::MinusInfinity
        || running_min.finite().is_some_and(|v| v < -m_inf)
        || divergence(&small_end, m_inf) == Some(Status::UnboundedBelow)
        || divergence(&large_end, m_inf) == Some(Status::UnboundedBelow);
    if below {
        return Ok(ctx.finish(kind, ExtendedReal::MinusInfinity, Status::UnboundedBelow, diagnostics));
    }
    if running_min == ExtendedReal::PlusInfinity {
        return Ok(ctx.finish(kind, ExtendedReal::PlusInfinity, Status::UnboundedAbove, diagnostics));
    }

    // Refine the deepest grid basins, not only the grid arg-min: when the
    // infimum is approached as t grows, later basins are slightly deeper and
    // the grid alone cannot rank them.
    let mut basins: Vec<usize> = (0..n)
        .filter(|&i| (i == 0 || vals[i] <= vals[i - 1]) && (i + 1 == n || vals[i] <= vals[i + 1]))
        .collect();
    basins.sort_by(|a, b| vals[*a].cmp(&vals[*b]).then(a.cmp(b)));
    basins.truncate(BASINS);

    const SUB: usize = 17;
    let refine = |k: usize| -> Result<((ExtendedReal<S>, S), Vec<ExtendedReal<S>>)> {
        let mut best = (vals[k], grid[k]);
        let mut rounds = vec![best.0];
        let mut lo = grid[k.saturating_sub(1)];
        let mut hi = grid[(k + 1).min(n - 1)];
        for _ in 0..schedule.refine_rounds {
            if !(hi > lo) {
                rounds.push(best.0);
                continue;
            }
            let sub = log_space(lo, hi, SUB);
            let sv = scan(&sub)?;
            for (t, v) in sub.iter().zip(&sv) {
                if *v < best.0 {
                    best = (*v, *t);
                }
            }
            rounds.push(best.0);
            let j = sub.iter().position(|t| *t >= best.1).unwrap_or(SUB - 1);
            let (nlo, nhi) = (sub[j.saturating_sub(1)], sub[(j + 1).min(SUB - 1)]);
            // keep the incumbent inside the bracket even when it predates the sub-grid
            lo = nlo.min(best.1);
            hi = nhi.max(best.1);
        }
        Ok((best, rounds))
    };
    let mut best: Option<((ExtendedReal<S>, S), Vec<ExtendedReal<S>>)> = None;
    for k in basins {
        let cand = refine(k)?;
        let better = match &best {
            None => true,
            Some(((v, t), _)) => cand.0 .0 < *v || (cand.0 .0 == *v && cand.0 .1 < *t),
        };
        if better {
            best = Some(cand);
        }
    }
    let (best, rounds) = best.expect("a finite minimum has a basin");
    diagnostics.rounds = rounds;
    let (value, t_star) = best;
    diagnostics.argmin_t = Some(t_star);
    let stages = shell_stages(&ctx, h, t_star, ladder, &pts)?;
    diagnostics.stages = ladder.iter().zip(&stages).map(|(d, v)| StageRecord { scale: *d, value: *v }).collect();

    if value == ExtendedReal::MinusInfinity || value.finite().is_some_and(|v| v < -m_inf) {
        return Ok(ctx.finish(kind, ExtendedReal::MinusInfinity, Status::UnboundedBelow, diagnostics));
    }
    let r = &diagnostics.rounds;
    let rounds_ok = r.len() < 2 || agree(r[r.len() - 2], r[r.len() - 1], schedule.tol);
    let stages_ok = stages.len() < 2 || agree(stages[stages.len() - 2], stages[stages.len() - 1], schedule.tol);
    let status = if rounds_ok && stages_ok { Status::Converged } else { Status::NotConvergent };
    Ok(ctx.finish(kind, value, status, diagnostics))
}

/// One-sided directional derivative from the finest decade of the grid.
pub fn directional_derivative<S: Scalar>(
    oracle: &FunctionOracle<S>,
    xbar: &Point<S>,
    h: &Direction<S>,
    schedule: &SamplingSchedule<S>,
) -> Result<DerivativeEstimate<S>> {
    schedule.validate()?;
    let ctx = Ctx::new(oracle, xbar, h)?;
    let kind = DerivativeKind::Directional;
    if h.is_zero() {
        return Ok(zero_estimate(kind, 1));
    }
    let t0 = schedule.t_min;
    let ten: S = lit(10.0);
    let q = |t: S| ctx.quotient(t, h.coords());
    let mut diagnostics = Diagnostics::default();

    let decades: Vec<(S, ExtendedReal<S>)> = (0..4).rev().map(|k| {
        let t = t0 * ten.powi(k);
        q(t).map(|v| (S::one() / t, v))
    }).collect::<Result<_>>()?;
    if let Some(status) = divergence(&decades, schedule.divergence_threshold) {
        diagnostics.stages = decades.iter().map(|(p, v)| StageRecord { scale: S::one() / *p, value: *v }).collect();
        return Ok(ctx.finish(kind, unbounded(status), status, diagnostics));
    }

    let five: Vec<S> = (0..5).rev().map(|j| t0 * ten.powf(lit::<S>(j as f64 / 4.0))).collect();
    let five_vals: Vec<ExtendedReal<S>> = five.iter().map(|t| q(*t)).collect::<Result<_>>()?;
    diagnostics.stages = five.iter().zip(&five_vals).map(|(t, v)| StageRecord { scale: *t, value: *v }).collect();
    let value = *five_vals.last().expect("five values");

    let dense_n = schedule.points_per_decade * (1usize << schedule.refine_rounds.min(16)) + 1;
    let dense = log_space(t0, t0 * ten, dense_n);
    let dense_vals: Vec<ExtendedReal<S>> = dense.par_iter().map(|t| q(*t)).collect::<Result<_>>()?;

    let spread = |vs: &[ExtendedReal<S>]| -> Option<S> {
        let f: Option<Vec<S>> = vs.iter().map(|v| v.finite()).collect();
        let f = f?;
        let hi = f.iter().copied().fold(S::neg_infinity(), S::max);
        let lo = f.iter().copied().fold(S::infinity(), S::min);
        Some(hi - lo)
    };
    let status = match (value.finite(), spread(&five_vals), spread(&dense_vals)) {
        (Some(v), Some(s5), Some(sd)) => {
            let tol = rel_abs_tol(schedule.tol, v);
            if s5 < tol && sd < lit::<S>(10.0) * tol {
                Status::Converged
            } else {
                Status::NotConvergent
            }
        }
        _ => Status::NotConvergent,
    };
    Ok(ctx.finish(kind, value, status, diagnostics))
}

/// Extremal quotient of one ladder stage and where it was attained.
struct Extremal<S> {
    value: ExtendedReal<S>,
    base: Vec<S>,
    f_base: S,
    u: Vec<S>,
    t: S,
    floor: S,
}

impl<S: Scalar> Extremal<S> {
    fn empty(value: ExtendedReal<S>) -> Self {
        Self {
            value,
            base: Vec::new(),
            f_base: S::zero(),
            u: Vec::new(),
            t: S::zero(),
            floor: S::zero(),
        }
    }

    fn offer(&mut self, value: ExtendedReal<S>, take_max: bool, base: &[S], f_base: S, u: &[S], t: S, floor: S) {
        let better = if take_max { value > self.value } else { value < self.value };
        if better {
            *self = Self {
                value,
                base: base.to_vec(),
                f_base,
                u: u.to_vec(),
                t,
                floor,
            };
        }
    }
}

/// A large extremum sitting on the rounding floor of `t` may be a jump
/// whose quotient grows like `1/t`; compare with the quotient at ten times
/// the floor.
fn jump_check<S: Scalar>(ctx: &Ctx<'_, S>, e: &Extremal<S>) -> Result<Option<Status>> {
    let Some(v) = e.value.finite() else {
        return Ok(None);
    };
    if e.base.is_empty() || e.t > e.floor || v.abs() < lit(100.0) {
        return Ok(None);
    }
    let Some(w) = ctx.quotient_from(&e.base, e.f_base, e.floor * lit(10.0), &e.u)?.finite() else {
        return Ok(None);
    };
    let same_sign = (v > S::zero()) == (w > S::zero());
    Ok((same_sign && v.abs() >= lit::<S>(5.0) * w.abs()).then(|| if v < S::zero() { Status::UnboundedBelow } else { Status::UnboundedAbove }))
}

/// Cumulative stage values from the finest radius outwards, then the
/// estimate at the finest radius.
fn ladder_estimate<S: Scalar>(
    ctx: &Ctx<'_, S>,
    kind: DerivativeKind,
    ladder: &[S],
    stages: Vec<Extremal<S>>,
    schedule: &SamplingSchedule<S>,
) -> Result<DerivativeEstimate<S>> {
    let take_max = kind == DerivativeKind::Clarke;
    let raw: Vec<ExtendedReal<S>> = stages.iter().map(|e| e.value).collect();
    let raw_seq: Vec<(S, ExtendedReal<S>)> = ladder.iter().zip(&raw).map(|(d, v)| (S::one() / *d, *v)).collect();
    let raw_divergence = divergence(&raw_seq, schedule.divergence_threshold);
    let mut cumulative = raw;
    for k in (0..cumulative.len().saturating_sub(1)).rev() {
        let next = cumulative[k + 1];
        cumulative[k] = if take_max { cumulative[k].max(next) } else { cumulative[k].min(next) };
    }
    let records: Vec<StageRecord<S>> = ladder.iter().zip(&cumulative).map(|(d, v)| StageRecord { scale: *d, value: *v }).collect();
    let diagnostics = Diagnostics {
        stages: records,
        ..Diagnostics::default()
    };
    let seq: Vec<(S, ExtendedReal<S>)> = ladder.iter().zip(&cumulative).map(|(d, v)| (S::one() / *d, *v)).collect();
    let mut verdict = divergence(&seq, schedule.divergence_threshold).or(raw_divergence);
    if verdict.is_none() {
        verdict = jump_check(ctx, stages.last().expect("ladder is nonempty"))?;
    }
    if let Some(status) = verdict {
        return Ok(ctx.finish(kind, unbounded(status), status, diagnostics));
    }
    let value = *cumulative.last().expect("ladder is nonempty");
    let n = cumulative.len();
    let converged = n < 2 || agree(cumulative[n - 2], cumulative[n - 1], schedule.tol);
    let status = if converged { Status::Converged } else { Status::NotConvergent };
    Ok(ctx.finish(kind, value, status, diagnostics))
}

/// Clarke derivative: per radius, the maximum quotient over base points in
/// the `δ`-ball around `x̄` and `t ∈ (δ·ratio, δ]`.
pub fn clarke_derivative<S: Scalar>(
    oracle: &FunctionOracle<S>,
    xbar: &Point<S>,
    h: &Direction<S>,
    schedule: &SamplingSchedule<S>,
) -> Result<DerivativeEstimate<S>> {
    schedule.validate()?;
    let ctx = Ctx::new(oracle, xbar, h)?;
    let kind = DerivativeKind::Clarke;
    if h.is_zero() {
        return Ok(zero_estimate(kind, 1));
    }
    let pts = pattern("clarke", xbar.coords(), h.coords(), schedule.neighborhood_samples);
    let ladder = &schedule.shrink_ladder;
    let stages: Vec<Extremal<S>> = ladder
        .par_iter()
        .map(|delta| -> Result<Extremal<S>> {
            let ts = schedule.window(*delta);
            let mut best = Extremal::empty(ExtendedReal::MinusInfinity);
            for p in std::iter::once(None).chain(pts.iter().map(Some)) {
                let y: Vec<S> = match p {
                    None => ctx.x.to_vec(),
                    Some(p) => ctx.x.iter().zip(p).map(|(x, d)| *x + *delta * *d).collect(),
                };
                let Some(fy) = ctx.f(&y)?.finite() else {
                    continue;
                };
                let floor = Ctx::t_floor(&y, fy, *delta);
                for t in &ts {
                    let t = t.max(floor);
                    let q = ctx.quotient_from(&y, fy, t, h.coords())?;
                    best.offer(q, true, &y, fy, h.coords(), t, floor);
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    ladder_estimate(&ctx, kind, ladder, stages, schedule)
}

/// Subderivative: per radius, the minimum quotient over `t ∈ (δ·ratio, δ]`
/// and directions `u` in the `δ`-ball around `h`.
pub fn subderivative<S: Scalar>(
    oracle: &FunctionOracle<S>,
    xbar: &Point<S>,
    h: &Direction<S>,
    schedule: &SamplingSchedule<S>,
) -> Result<DerivativeEstimate<S>> {
    schedule.validate()?;
    let ctx = Ctx::new(oracle, xbar, h)?;
    let kind = DerivativeKind::Subderivative;
    if h.is_zero() {
        return Ok(zero_estimate(kind, 1));
    }
    let pts = pattern("subderivative", xbar.coords(), h.coords(), schedule.neighborhood_samples);
    let ladder = &schedule.shrink_ladder;
    let scale = h.norm();
    let stages: Vec<Extremal<S>> = ladder
        .par_iter()
        .map(|delta| -> Result<Extremal<S>> {
            let ts = schedule.window(*delta);
            let floor = Ctx::t_floor(ctx.x, ctx.fbar, *delta);
            let r = *delta * scale;
            let mut best = Extremal::empty(ExtendedReal::PlusInfinity);
            for p in std::iter::once(None).chain(pts.iter().map(Some)) {
                let u: Vec<S> = match p {
                    None => h.coords().to_vec(),
                    Some(p) => h.coords().iter().zip(p).map(|(a, b)| *a + r * *b).collect(),
                };
                for t in &ts {
                    let t = t.max(floor);
                    let q = ctx.quotient(t, &u)?;
                    best.offer(q, false, ctx.x, ctx.fbar, &u, t, floor);
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    ladder_estimate(&ctx, kind, ladder, stages, schedule)
}

/// Dispatches on the derivative kind.
pub fn estimate<S: Scalar>(
    kind: DerivativeKind,
    oracle: &FunctionOracle<S>,
    xbar: &Point<S>,
    h: &Direction<S>,
    schedule: &SamplingSchedule<S>,
) -> Result<DerivativeEstimate<S>> {
    match kind {
        DerivativeKind::Directional => directional_derivative(oracle, xbar, h, schedule),
        DerivativeKind::Clarke => clarke_derivative(oracle, xbar, h, schedule),
        DerivativeKind::Subderivative => subderivative(oracle, xbar, h, schedule),
        DerivativeKind::RadialEpi => radial_epiderivative(oracle, xbar, h, schedule),
    }
}
