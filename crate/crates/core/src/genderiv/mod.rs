//! Sampling estimators for the four generalized derivatives.

mod estimators;
mod schedule;
mod sweep;

use std::fmt;
use std::str::FromStr;

pub use estimators::{
    clarke_derivative, directional_derivative, estimate, liminf_shell, newton_quotient, radial_epiderivative, subderivative,
};
pub use schedule::SamplingSchedule;
pub use sweep::{default_direction_grid, derivative_sweep, SweepRow, SweepTable};

use crate::extended::ExtendedReal;

/// Which generalized derivative an estimate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DerivativeKind {
    Directional,
    Clarke,
    Subderivative,
    RadialEpi,
}

impl DerivativeKind {
    pub const ALL: [DerivativeKind; 4] = [Self::RadialEpi, Self::Subderivative, Self::Directional, Self::Clarke];

    pub fn name(self) -> &'static str {
        match self {
            Self::Directional => "directional",
            Self::Clarke => "clarke",
            Self::Subderivative => "subderivative",
            Self::RadialEpi => "radial",
        }
    }
}

impl fmt::Display for DerivativeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DerivativeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "directional" | "dir" => Ok(Self::Directional),
            "clarke" => Ok(Self::Clarke),
            "subderivative" | "sub" => Ok(Self::Subderivative),
            "radial" | "radialepi" => Ok(Self::RadialEpi),
            other => Err(format!("unknown derivative kind `{other}`")),
        }
    }
}

/// Outcome class of an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    NotConvergent,
    UnboundedBelow,
    UnboundedAbove,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::NotConvergent => "not_convergent",
            Self::UnboundedBelow => "unbounded_below",
            Self::UnboundedAbove => "unbounded_above",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Value of one ladder stage (radius `δ`) or one refinement scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageRecord<S> {
    pub scale: S,
    pub value: ExtendedReal<S>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics<S> {
    /// Per-radius values, coarsest first.
    pub stages: Vec<StageRecord<S>>,
    /// Minimizing `t` of the radial estimator.
    pub argmin_t: Option<S>,
    /// Incumbent after the grid scan and after each refinement round.
    pub rounds: Vec<ExtendedReal<S>>,
}

/// A derivative value with its convergence status.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeEstimate<S> {
    pub kind: DerivativeKind,
    pub value: ExtendedReal<S>,
    pub status: Status,
    pub diagnostics: Diagnostics<S>,
    pub evaluations_used: usize,
}

impl<S: crate::scalar::Scalar> DerivativeEstimate<S> {
    pub fn is_converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// The value when it is a converged finite number.
    pub fn converged_value(&self) -> Option<S> {
        if self.is_converged() {
            self.value.finite()
        } else {
            None
        }
    }
}
