//! Derivative chains on a direction grid and the support conditions under
//! which the chain collapses to equalities.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::func::{Direction, FunctionOracle, NormKind, Point};
use crate::genderiv::{default_direction_grid, estimate, DerivativeEstimate, DerivativeKind, SamplingSchedule, Status};
use crate::scalar::{lit, rel_abs_tol, Scalar};
use crate::weaksub::{box_sample, SampleSpec};

/// Equalities of adjacent links in `f^r ≤ df ≤ f′ ≤ f°`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EqualityFlag {
    /// `f^r = df`
    REqD,
    /// `df = f′`
    DEqPrime,
    /// `f′ = f°`
    PrimeEqCircle,
}

impl EqualityFlag {
    pub const ALL: [EqualityFlag; 3] = [Self::REqD, Self::DEqPrime, Self::PrimeEqCircle];

    /// Positions of the two sides in [`DerivativeKind::ALL`].
    fn sides(self) -> (usize, usize) {
        match self {
            Self::REqD => (0, 1),
            Self::DEqPrime => (1, 2),
            Self::PrimeEqCircle => (2, 3),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::REqD => "r_eq_d",
            Self::DEqPrime => "d_eq_prime",
            Self::PrimeEqCircle => "prime_eq_circle",
        }
    }
}

/// All four estimates in one direction, in chain order
/// `[radial, subderivative, directional, clarke]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRecord<S> {
    pub h: Vec<S>,
    pub cells: Vec<std::result::Result<DerivativeEstimate<S>, Error>>,
}

impl<S: Scalar> ChainRecord<S> {
    /// Value of a cell usable for comparisons: converged finite values and
    /// detected infinities.
    pub fn usable(&self, i: usize) -> Option<ExtendedReal<S>> {
        let est = self.cells[i].as_ref().ok()?;
        match est.status {
            Status::Converged | Status::UnboundedBelow | Status::UnboundedAbove => Some(est.value),
            Status::NotConvergent => None,
        }
    }

    fn converged_finite(&self, i: usize) -> Option<S> {
        self.cells[i].as_ref().ok()?.converged_value()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport<S> {
    pub records: Vec<ChainRecord<S>>,
    pub ordering_ok: bool,
    /// Set when every direction with both sides converged and finite agrees
    /// within `tol`, and at least one such direction exists.
    pub equality_flags: Vec<EqualityFlag>,
    /// Some direction with both sides converged and finite disagrees. Flags
    /// in neither list had nothing to compare.
    pub refuted_flags: Vec<EqualityFlag>,
    pub tol: S,
}

impl<S> ChainReport<S> {
    pub fn has(&self, flag: EqualityFlag) -> bool {
        self.equality_flags.contains(&flag)
    }

    pub fn refutes(&self, flag: EqualityFlag) -> bool {
        self.refuted_flags.contains(&flag)
    }
}

fn leq<S: Scalar>(a: ExtendedReal<S>, b: ExtendedReal<S>, tol: S) -> bool {
    match (a, b) {
        (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => x <= y + rel_abs_tol(tol, x.abs().max(y.abs())),
        (a, b) => a <= b,
    }
}

/// Comparison tolerance used by the chain: ten times the schedule tolerance.
pub fn chain_tolerance<S: Scalar>(schedule: &SamplingSchedule<S>) -> S {
    schedule.tol * lit(10.0)
}

fn grid_or_default<S: Scalar>(n: usize, schedule: &SamplingSchedule<S>) -> Vec<Vec<S>> {
    if schedule.direction_grid.is_empty() {
        default_direction_grid(n, 32)
    } else {
        schedule.direction_grid.clone()
    }
}

/// Estimates the four derivatives on every direction and checks the chain.
pub fn chain_report<S: Scalar>(
    oracle: &FunctionOracle<S>,
    xbar: &Point<S>,
    direction_grid: &[Vec<S>],
    schedule: &SamplingSchedule<S>,
) -> Result<ChainReport<S>> {
    schedule.validate()?;
    oracle.eval_finite(xbar.coords())?;
    if direction_grid.is_empty() {
        return Err(Error::InvalidArgument("direction grid is empty".into()));
    }
    let dirs: Vec<Direction<S>> = direction_grid.iter().map(|h| Direction::l2(h.clone())).collect::<Result<_>>()?;
    let records: Vec<ChainRecord<S>> = dirs
        .par_iter()
        .map(|h| ChainRecord {
            h: h.coords().to_vec(),
            cells: DerivativeKind::ALL.iter().map(|k| estimate(*k, oracle, xbar, h, schedule)).collect(),
        })
        .collect();

    let tol = chain_tolerance(schedule);
    let ordering_ok = records.iter().all(|r| {
        (0..4).all(|i| {
            (i + 1..4).all(|j| match (r.usable(i), r.usable(j)) {
                (Some(a), Some(b)) => leq(a, b, tol),
                _ => true,
            })
        })
    });
    let mut equality_flags = Vec::new();
    let mut refuted_flags = Vec::new();
    for flag in EqualityFlag::ALL {
        let (i, j) = flag.sides();
        let verdicts: Vec<bool> = records
            .iter()
            .filter_map(|r| match (r.converged_finite(i), r.converged_finite(j)) {
                (Some(a), Some(b)) => Some((a - b).abs() <= rel_abs_tol(tol, a.abs().max(b.abs()))),
                _ => None,
            })
            .collect();
        if verdicts.iter().any(|ok| !ok) {
            refuted_flags.push(flag);
        } else if !verdicts.is_empty() {
            equality_flags.push(flag);
        }
    }
    Ok(ChainReport {
        records,
        ordering_ok,
        equality_flags,
        refuted_flags,
        tol,
    })
}

/// Which derivative bounds the increments of `f` from below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConditionKind {
    /// `f(x) − f(x̄) ≥ f°(x̄; x − x̄)`
    ClarkeSupport,
    /// `f(x) − f(x̄) ≥ f′(x̄; x − x̄)`
    DirDerSupport,
    /// `f(x) − f(x̄) ≥ df(x̄; x − x̄)`
    SubderSupport,
}

impl ConditionKind {
    pub const ALL: [ConditionKind; 3] = [Self::ClarkeSupport, Self::DirDerSupport, Self::SubderSupport];

    pub fn derivative(self) -> DerivativeKind {
        match self {
            Self::ClarkeSupport => DerivativeKind::Clarke,
            Self::DirDerSupport => DerivativeKind::Directional,
            Self::SubderSupport => DerivativeKind::Subderivative,
        }
    }

    /// Equalities that the corresponding theorem concludes from the condition.
    pub fn implied_flags(self) -> &'static [EqualityFlag] {
        match self {
            Self::ClarkeSupport => &EqualityFlag::ALL,
            Self::DirDerSupport => &[EqualityFlag::REqD, EqualityFlag::DEqPrime],
            Self::SubderSupport => &[EqualityFlag::REqD],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ClarkeSupport => "clarke_support",
            Self::DirDerSupport => "dirder_support",
            Self::SubderSupport => "subder_support",
        }
    }
}

impl fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionVerdict<S> {
    pub kind: ConditionKind,
    pub holds: bool,
    /// Worst violating point; present exactly when `holds` is false.
    pub witness: Option<Vec<S>>,
    pub resolution: usize,
}

/// The selected derivative of `f` at `x̄`, estimated per unit direction.
pub fn estimator_reference<'a, S: Scalar>(
    kind: ConditionKind,
    oracle: &'a FunctionOracle<S>,
    xbar: &'a Point<S>,
    schedule: &'a SamplingSchedule<S>,
) -> impl Fn(&[S]) -> Result<DerivativeEstimate<S>> + Sync + 'a {
    move |u: &[S]| estimate(kind.derivative(), oracle, xbar, &Direction::l2(u.to_vec())?, schedule)
}

fn key<S: Scalar>(u: &[S]) -> Vec<u64> {
    u.iter().map(|c| c.to_f64().unwrap_or(f64::NAN).to_bits()).collect()
}

/// Tests `f(x) − f(x̄) ≥ D(x̄; x − x̄) − tol·(1 + ‖x − x̄‖)` on the analysis
/// box, with `D(x̄; d) = ‖d‖·D(x̄; d/‖d‖)`. Directions where the reference is
/// `+∞` are skipped.
pub fn check_support_condition<S: Scalar, R>(
    oracle: &FunctionOracle<S>,
    xbar: &Point<S>,
    kind: ConditionKind,
    reference: R,
    spec: &SampleSpec<S>,
) -> Result<ConditionVerdict<S>>
where
    R: Fn(&[S]) -> Result<DerivativeEstimate<S>> + Sync,
{
    let fbar = oracle.eval_finite(xbar.coords())?;
    let sample = box_sample(xbar.coords(), spec);

    // One reference estimate per distinct unit direction.
    let mut units: BTreeMap<Vec<u64>, Vec<S>> = BTreeMap::new();
    let offsets: Vec<Option<(Vec<S>, S)>> = sample
        .iter()
        .map(|x| {
            let d: Vec<S> = x.iter().zip(xbar.coords()).map(|(a, b)| *a - *b).collect();
            let r = NormKind::L2.norm(&d);
            if r == S::zero() {
                return None;
            }
            let u: Vec<S> = d.iter().map(|c| *c / r).collect();
            units.entry(key(&u)).or_insert_with(|| u.clone());
            Some((u, r))
        })
        .collect();
    let refs: BTreeMap<Vec<u64>, ExtendedReal<S>> = units
        .into_par_iter()
        .map(|(k, u)| {
            let est = reference(&u)?;
            if est.status == Status::NotConvergent {
                return Err(Error::ReferenceNotAvailable {
                    direction: u.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect(),
                });
            }
            Ok((k, est.value))
        })
        .collect::<Result<_>>()?;

    let mut worst: Option<(S, usize)> = None;
    for (idx, (x, off)) in sample.iter().zip(&offsets).enumerate() {
        let Some((u, r)) = off else { continue };
        let bound = match refs[&key(u)] {
            ExtendedReal::Finite(v) => v * *r,
            _ => continue,
        };
        let Some(fx) = oracle.eval(x)?.finite() else { continue };
        let slack = fx - fbar - bound + spec.tol * (S::one() + *r);
        if slack < S::zero() {
            let scaled = slack / (S::one() + *r);
            if worst.is_none_or(|(w, _)| scaled < w) {
                worst = Some((scaled, idx));
            }
        }
    }
    Ok(ConditionVerdict {
        kind,
        holds: worst.is_none(),
        witness: worst.map(|(_, k)| sample[k].clone()),
        resolution: sample.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport<S> {
    pub chain: ChainReport<S>,
    /// One entry per [`ConditionKind`], errors kept per condition.
    pub conditions: Vec<(ConditionKind, std::result::Result<ConditionVerdict<S>, Error>)>,
    /// No condition that holds has one of its implied equalities refuted.
    pub consistent: bool,
}

impl<S> RegularityReport<S> {
    pub fn verdict(&self, kind: ConditionKind) -> Option<&std::result::Result<ConditionVerdict<S>, Error>> {
        self.conditions.iter().find(|(k, _)| *k == kind).map(|(_, v)| v)
    }

    pub fn holds(&self, kind: ConditionKind) -> bool {
        matches!(self.verdict(kind), Some(Ok(v)) if v.holds)
    }
}

/// Support sample for the regularity checks: the membership sample in 1D,
/// a lighter one in higher dimensions where every point has its own
/// direction.
pub fn support_sample<S: Scalar>(n: usize, schedule: &SamplingSchedule<S>) -> SampleSpec<S> {
    SampleSpec {
        points: if n == 1 { 10_000 } else { 256 * n },
        tol: schedule.tol,
        ..SampleSpec::default()
    }
}

/// Chain report on the schedule's direction grid plus all three support
/// checks.
pub fn classify_regularity<S: Scalar>(
    oracle: &FunctionOracle<S>,
    xbar: &Point<S>,
    schedule: &SamplingSchedule<S>,
) -> Result<RegularityReport<S>> {
    let grid = grid_or_default(xbar.dimension(), schedule);
    let chain = chain_report(oracle, xbar, &grid, schedule)?;
    let spec = support_sample(xbar.dimension(), schedule);
    let conditions: Vec<_> = ConditionKind::ALL
        .iter()
        .map(|k| {
            let reference = estimator_reference(*k, oracle, xbar, schedule);
            (*k, check_support_condition(oracle, xbar, *k, reference, &spec))
        })
        .collect();
    let consistent = conditions.iter().all(|(k, v)| match v {
        Ok(v) if v.holds => !k.implied_flags().iter().any(|f| chain.refutes(*f)),
        _ => true,
    });
    Ok(RegularityReport {
        chain,
        conditions,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_leq_with_tolerance() {
        let f = ExtendedReal::Finite;
        assert!(leq(f(1.0), f(1.0005), 1e-3));
        assert!(leq(f(1.0005), f(1.0), 1e-3));
        assert!(!leq(f(1.1), f(1.0), 1e-3));
        assert!(leq(ExtendedReal::MinusInfinity, f(-1e300), 1e-3));
        assert!(leq(f(3.0), ExtendedReal::PlusInfinity, 1e-3));
        assert!(!leq(ExtendedReal::PlusInfinity, f(3.0), 1e-3));
    }

    #[test]
    fn implied_flags_nest() {
        for k in ConditionKind::ALL {
            assert!(k.implied_flags().contains(&EqualityFlag::REqD));
        }
        assert_eq!(ConditionKind::ClarkeSupport.implied_flags().len(), 3);
    }
}
