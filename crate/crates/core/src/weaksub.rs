//! Weak subgradients: construction from radial epiderivative values,
//! sampled membership checks, and global-minimum certificates.
//!
//! `(v, c)` is a weak subgradient of `f` at `x̄` when
//! `f(x) ≥ f(x̄) + ⟨v, x − x̄⟩ − c‖x − x̄‖` for every `x`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact1d::{exact_radial_epiderivative, PiecewiseFn1D};
use crate::extended::ExtendedReal;
use crate::func::{Direction, FunctionOracle, NormKind, Point};
use crate::genderiv::{radial_epiderivative, SamplingSchedule};
use crate::sampling::{coordinate_directions, halton, log_space, seed, sphere_points};
use crate::scalar::{count, lit, Scalar};

/// Where a weak subgradient came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ConstructedL2,
    ConstructedL1,
    UserSupplied,
}

/// A pair `(v, c)` with `c ≥ 0`, measured in the given norm.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakSubgradient<S> {
    pub v: Vec<S>,
    pub c: S,
    pub norm: NormKind,
    pub provenance: Provenance,
}

impl<S: Scalar> WeakSubgradient<S> {
    pub fn new(v: Vec<S>, c: S, norm: NormKind) -> Result<Self> {
        if !(c >= S::zero()) {
            return Err(Error::InvalidArgument("c must be nonnegative".into()));
        }
        Ok(Self {
            v,
            c,
            norm,
            provenance: Provenance::UserSupplied,
        })
    }

    /// `⟨v, d⟩ − c‖d‖`, the conical minorant evaluated at `d`.
    pub fn minorant(&self, d: &[S]) -> S {
        dot(&self.v, d) - self.c * self.norm.norm(d)
    }
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + *x * *y)
}

/// Geometric ladder `c₀·factorᵏ ≤ c_max` searched by the constructions.
#[derive(Debug, Clone, PartialEq)]
pub struct CLadder<S> {
    pub c0: S,
    pub factor: S,
    pub c_max: S,
    /// Slack allowed in `g_c(s) ≤ f^r(x̄; s)` on the sphere sample.
    pub tol: S,
    /// Sphere sample size in `n ≥ 2`; `None` means `64·n`.
    pub sphere_points: Option<usize>,
}

impl<S: Scalar> Default for CLadder<S> {
    fn default() -> Self {
        Self {
            c0: S::one(),
            factor: lit(2.0),
            c_max: lit(2f64.powi(30)),
            tol: lit(1e-9),
            sphere_points: None,
        }
    }
}

impl<S: Scalar> CLadder<S> {
    fn validate(&self) -> Result<()> {
        if !(self.c0 >= S::zero() && self.factor > S::one() && self.c_max >= self.c0 && self.tol >= S::zero()) {
            return Err(Error::InvalidArgument("c ladder needs c0 ≥ 0, factor > 1, c_max ≥ c0, tol ≥ 0".into()));
        }
        Ok(())
    }

    /// The ladder values in increasing order.
    pub fn values(&self) -> Vec<S> {
        let mut out = Vec::new();
        let mut c = self.c0;
        while c <= self.c_max {
            out.push(c);
            if c == S::zero() {
                c = S::one();
            } else {
                c = c * self.factor;
            }
        }
        out
    }
}

/// Radial epiderivative `f^r(x̄; ·)` from the sampling estimator.
pub fn estimated_radial<'a, S: Scalar>(
    oracle: &'a FunctionOracle<S>,
    xbar: &'a Point<S>,
    schedule: &'a SamplingSchedule<S>,
) -> impl Fn(&[S]) -> Result<ExtendedReal<S>> + Sync + 'a {
    move |h: &[S]| Ok(radial_epiderivative(oracle, xbar, &Direction::l2(h.to_vec())?, schedule)?.value)
}

/// Radial epiderivative `f^r(x̄; ·)` of a 1D piecewise quadratic.
pub fn exact_radial<F>(pw: &PiecewiseFn1D<F>, xbar: F) -> impl Fn(&[F]) -> Result<ExtendedReal<F>> + Sync + '_
where
    F: Scalar,
{
    move |h: &[F]| exact_radial_epiderivative(pw, &xbar, &h[0])
}

fn sphere_sample<S: Scalar>(n: usize, norm: NormKind, anchor: &[S], ladder: &CLadder<S>) -> Vec<Vec<S>> {
    if n == 1 {
        return vec![vec![-S::one()], vec![S::one()]];
    }
    let m = ladder.sphere_points.unwrap_or(64 * n);
    let mut pts = sphere_points(n, m, seed("weak-sphere", &[anchor]), norm);
    for e in coordinate_directions::<S>(n) {
        pts.push(e);
    }
    pts.push(anchor.to_vec());
    pts
}

fn probe<S: Scalar, FR>(fr: &FR, h: &[S]) -> Result<ExtendedReal<S>>
where
    FR: Fn(&[S]) -> Result<ExtendedReal<S>> + Sync,
{
    let v = fr(h)?;
    if v == ExtendedReal::MinusInfinity {
        return Err(Error::NotEpidifferentiable {
            direction: h.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect(),
        });
    }
    Ok(v)
}

/// Searches the ladder for the smallest `c` whose rebuilt `v` satisfies
/// `⟨v, s⟩ − c‖s‖ ≤ f^r(x̄; s) + tol` on the sphere sample.
fn ladder_search<S: Scalar, FR>(
    n: usize,
    norm: NormKind,
    anchor: &[S],
    fr: &FR,
    params: &CLadder<S>,
    build: impl Fn(S) -> Vec<S>,
) -> Result<(Vec<S>, S)>
where
    FR: Fn(&[S]) -> Result<ExtendedReal<S>> + Sync,
{
    let sample = sphere_sample(n, norm, anchor, params);
    let values: Vec<ExtendedReal<S>> = sample.par_iter().map(|s| probe(fr, s)).collect::<Result<_>>()?;
    for c in params.values() {
        let v = build(c);
        let ok = sample.iter().zip(&values).all(|(s, bound)| match bound {
            ExtendedReal::Finite(b) => dot(&v, s) - c * norm.norm(s) <= *b + params.tol,
            _ => true,
        });
        if ok {
            return Ok((v, c));
        }
    }
    Err(Error::CBudgetExhausted {
        c_max: params.c_max.to_f64().unwrap_or(f64::INFINITY),
    })
}

fn anchor_value<S: Scalar, FR>(fr: &FR, h: &[S]) -> Result<S>
where
    FR: Fn(&[S]) -> Result<ExtendedReal<S>> + Sync,
{
    probe(fr, h)?.finite().ok_or_else(|| Error::NotEpidifferentiable {
        direction: h.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect(),
    })
}

/// ℓ2 construction: `v = (c + f^r(x̄; h) − ε)·h` with `h` scaled to unit
/// ℓ2 norm, for the smallest ladder `c` that keeps the cone below `f^r` on
/// the sphere.
pub fn construct_l2<S: Scalar, FR>(x_bar: &Point<S>, h: &Direction<S>, eps: S, fr: FR, params: &CLadder<S>) -> Result<WeakSubgradient<S>>
where
    FR: Fn(&[S]) -> Result<ExtendedReal<S>> + Sync,
{
    check_inputs(x_bar, h, eps, params)?;
    let unit = h.coords().iter().map(|c| *c / NormKind::L2.norm(h.coords())).collect::<Vec<S>>();
    let frh = anchor_value(&fr, &unit)?;
    let (v, c) = ladder_search(unit.len(), NormKind::L2, &unit, &fr, params, |c| {
        unit.iter().map(|u| (c + frh - eps) * *u).collect()
    })?;
    Ok(WeakSubgradient {
        v,
        c,
        norm: NormKind::L2,
        provenance: Provenance::ConstructedL2,
    })
}

/// ℓ1 construction: `v = (c + f^r(x̄; h) − ε)·Sgn(h)` with `h` scaled to unit
/// ℓ1 norm. Then `f^r(x̄; h) = (1/n)⟨v, Sgn h⟩ − c + ε`.
pub fn construct_l1<S: Scalar, FR>(x_bar: &Point<S>, h: &Direction<S>, eps: S, fr: FR, params: &CLadder<S>) -> Result<WeakSubgradient<S>>
where
    FR: Fn(&[S]) -> Result<ExtendedReal<S>> + Sync,
{
    check_inputs(x_bar, h, eps, params)?;
    let sgn = h.sgn()?;
    let unit = h.coords().iter().map(|c| *c / NormKind::L1.norm(h.coords())).collect::<Vec<S>>();
    let frh = anchor_value(&fr, &unit)?;
    let (v, c) = ladder_search(unit.len(), NormKind::L1, &unit, &fr, params, |c| {
        sgn.iter().map(|s| (c + frh - eps) * *s).collect()
    })?;
    Ok(WeakSubgradient {
        v,
        c,
        norm: NormKind::L1,
        provenance: Provenance::ConstructedL1,
    })
}

fn check_inputs<S: Scalar>(x_bar: &Point<S>, h: &Direction<S>, eps: S, params: &CLadder<S>) -> Result<()> {
    if x_bar.dimension() != h.dimension() {
        return Err(Error::DimensionMismatch {
            expected: x_bar.dimension(),
            found: h.dimension(),
        });
    }
    if h.is_zero() {
        return Err(Error::InvalidArgument("direction must be nonzero".into()));
    }
    if !(eps > S::zero()) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    params.validate()
}

/// Right-hand side of the ℓ1 identity, `(1/n)⟨v, Sgn h⟩ − c + ε`.
pub fn l1_identity_rhs<S: Scalar>(w: &WeakSubgradient<S>, h: &Direction<S>, eps: S) -> Result<S> {
    let sgn = h.sgn()?;
    Ok(dot(&w.v, &sgn) / count::<S>(sgn.len()) - w.c + eps)
}

/// Sample used by the membership check.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec<S> {
    /// Half-width `B` of the analysis box `[−B, B]ⁿ`.
    pub box_radius: S,
    pub points: usize,
    /// Violations must exceed `tol·(1 + ‖x − x̄‖)`.
    pub tol: S,
}

impl<S: Scalar> Default for SampleSpec<S> {
    fn default() -> Self {
        Self {
            box_radius: lit(1e6),
            points: 10_000,
            tol: lit(1e-7),
        }
    }
}

/// Outcome of a sampled membership check.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipVerdict<S> {
    pub holds: bool,
    /// Worst violating point; present exactly when `holds` is false.
    pub witness: Option<Vec<S>>,
    /// Smallest slack `f(x) − f(x̄) − ⟨v, x−x̄⟩ + c‖x−x̄‖` found.
    pub margin: S,
    /// Number of points checked.
    pub resolution: usize,
}

/// Deterministic sample of the analysis box, dense near `x̄` and along the
/// coordinate rays.
pub fn box_sample<S: Scalar>(xbar: &[S], spec: &SampleSpec<S>) -> Vec<Vec<S>> {
    let n = xbar.len();
    let b = spec.box_radius;
    let clip = |p: Vec<S>| -> Vec<S> { p.into_iter().map(|c| c.max(-b).min(b)).collect() };
    let total = spec.points.max(16);
    let mut out: Vec<Vec<S>> = Vec::with_capacity(total + 8);

    // radii along rays: 40% of the budget
    let rays = if n == 1 { vec![vec![S::one()], vec![-S::one()]] } else {
        let mut r = coordinate_directions::<S>(n);
        r.extend(sphere_points(n, 2 * n, seed("box-rays", &[xbar]), NormKind::L2));
        r
    };
    let per_ray = (total * 2 / 5 / rays.len()).max(2);
    let radii = log_space(lit::<S>(1e-8), b * lit(2.0), per_ray);
    for d in &rays {
        for r in &radii {
            out.push(clip(xbar.iter().zip(d).map(|(x, e)| *x + *r * *e).collect()));
        }
    }

    // near field [x̄ − 10, x̄ + 10]ⁿ and the whole box: 30% each
    let near = total * 3 / 10;
    let far = total.saturating_sub(out.len() + near);
    let ten: S = lit(10.0);
    if n == 1 {
        for k in 0..=near {
            let x = xbar[0] - ten + lit::<S>(20.0) * count::<S>(k) / count::<S>(near.max(1));
            out.push(clip(vec![x]));
        }
        for k in 0..=far {
            out.push(vec![-b + b * lit::<S>(2.0) * count::<S>(k) / count::<S>(far.max(1))]);
        }
    } else {
        let s = seed("box-halton", &[xbar]) % 4096;
        for k in 0..near {
            let p = (0..n)
                .map(|j| xbar[j] + ten * lit::<S>(2.0 * halton(s + k as u64 + 1, PRIMES[j % PRIMES.len()]) - 1.0))
                .collect();
            out.push(clip(p));
        }
        for k in 0..far {
            let p = (0..n)
                .map(|j| b * lit::<S>(2.0 * halton(s + (near + k) as u64 + 1, PRIMES[j % PRIMES.len()]) - 1.0))
                .collect();
            out.push(p);
        }
    }
    out
}

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Checks the weak-subgradient inequality on [`box_sample`].
pub fn verify_membership<S: Scalar>(
    oracle: &FunctionOracle<S>,
    xbar: &Point<S>,
    w: &WeakSubgradient<S>,
    spec: &SampleSpec<S>,
) -> Result<MembershipVerdict<S>> {
    if w.v.len() != oracle.dimension() || xbar.dimension() != oracle.dimension() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dimension(),
            found: if w.v.len() != oracle.dimension() { w.v.len() } else { xbar.dimension() },
        });
    }
    let fbar = oracle.eval_finite(xbar.coords())?;
    let sample = box_sample(xbar.coords(), spec);
    let slacks: Vec<Option<(S, S)>> = sample
        .par_iter()
        .map(|x| -> Result<Option<(S, S)>> {
            let d: Vec<S> = x.iter().zip(xbar.coords()).map(|(a, b)| *a - *b).collect();
            let Some(fx) = oracle.eval(x)?.finite() else {
                return Ok(None);
            };
            let slack = fx - fbar - w.minorant(&d);
            let allowance = spec.tol * (S::one() + NormKind::L2.norm(&d));
            Ok(Some((slack, slack + allowance)))
        })
        .collect::<Result<_>>()?;

    let mut margin = S::infinity();
    let mut worst: Option<(S, usize)> = None;
    for (k, s) in slacks.iter().enumerate() {
        let Some((slack, adjusted)) = s else { continue };
        margin = margin.min(*slack);
        if *adjusted < S::zero() {
            let scaled = *adjusted / (S::one() + NormKind::L2.norm(&sample[k]));
            if worst.is_none_or(|(w, _)| scaled < w) {
                worst = Some((scaled, k));
            }
        }
    }
    Ok(MembershipVerdict {
        holds: worst.is_none(),
        witness: worst.map(|(_, k)| sample[k].clone()),
        margin,
        resolution: sample.len(),
    })
}

/// `(0, 0) ∈ ∂ʷf(x̄)`, i.e. no sampled point has a lower value.
pub fn global_min_certificate<S: Scalar>(oracle: &FunctionOracle<S>, xbar: &Point<S>, spec: &SampleSpec<S>) -> Result<MembershipVerdict<S>> {
    let zero = WeakSubgradient::new(vec![S::zero(); oracle.dimension()], S::zero(), NormKind::L2)?;
    verify_membership(oracle, xbar, &zero, spec)
}

/// Interval of slopes `v` with `(v, c)` admissible for the one-dimensional
/// radial epiderivative: `[−c − f^r(x̄;−1), c + f^r(x̄;1)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WsubInterval<S> {
    Empty,
    Closed { lo: S, hi: S },
}

pub fn wsub_interval_1d<S: Scalar>(fr_plus: S, fr_minus: S, c: S) -> WsubInterval<S> {
    let lo = -c - fr_minus;
    let hi = c + fr_plus;
    if lo > hi {
        WsubInterval::Empty
    } else {
        WsubInterval::Closed { lo, hi }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_examples() {
        assert_eq!(wsub_interval_1d(1.0, 4.0, 0.0), WsubInterval::Closed { lo: -4.0, hi: 1.0 });
        assert_eq!(wsub_interval_1d(1.0, -1.5, 1.0), WsubInterval::Closed { lo: 0.5, hi: 2.0 });
        assert_eq!(wsub_interval_1d(0.0, 0.0, 0.0), WsubInterval::Closed { lo: 0.0, hi: 0.0 });
        assert_eq!(wsub_interval_1d(-1.0, -1.0, 0.5), WsubInterval::Empty);
    }

    #[test]
    fn ladder_values() {
        let l = CLadder::<f64> {
            c_max: 8.0,
            ..Default::default()
        };
        assert_eq!(l.values(), vec![1.0, 2.0, 4.0, 8.0]);
        let z = CLadder::<f64> {
            c0: 0.0,
            c_max: 2.0,
            ..Default::default()
        };
        assert_eq!(z.values(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn negative_c_rejected() {
        assert!(WeakSubgradient::new(vec![0.0], -1.0, NormKind::L2).is_err());
    }

    #[test]
    fn box_sample_respects_budget_and_box() {
        let spec = SampleSpec::<f64>::default();
        let pts = box_sample(&[1.0], &spec);
        assert!(pts.len() >= 9_000 && pts.len() <= 10_100, "{}", pts.len());
        assert!(pts.iter().all(|p| p[0].abs() <= 1e6));
        let pts2 = box_sample(&[0.0, 0.0], &spec);
        assert!(pts2.iter().all(|p| p.len() == 2 && p.iter().all(|c| c.abs() <= 1e6)));
    }

    #[test]
    fn unbounded_below_radial_is_rejected() {
        let fr = |_: &[f64]| Ok(ExtendedReal::MinusInfinity);
        let r = construct_l2(&Point::scalar(0.0), &Direction::scalar(1.0), 0.5, fr, &CLadder::default());
        assert!(matches!(r, Err(Error::NotEpidifferentiable { .. })));
    }

    #[test]
    fn zero_component_rejected() {
        let fr = |_: &[f64]| Ok(ExtendedReal::Finite(0.0));
        let h = Direction::new(vec![1.0, 0.0], NormKind::L1).unwrap();
        let r = construct_l1(&Point::new(vec![0.0, 0.0]).unwrap(), &h, 0.5, fr, &CLadder::default());
        assert_eq!(r, Err(Error::ZeroComponent { index: 1 }));
    }
}
