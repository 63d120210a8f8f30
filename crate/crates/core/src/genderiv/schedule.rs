use crate::error::{Error, Result};
use crate::sampling::log_space;
use crate::scalar::{lit, Scalar};

/// Sampling parameters shared by all limit estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSchedule<S> {
    /// Smallest `t` of the global grid; also the finest `t` of the
    /// directional estimator.
    pub t_min: S,
    pub t_max: S,
    pub points_per_decade: usize,
    /// Strictly decreasing radii `δ₀ > … > δ_K`.
    pub shrink_ladder: Vec<S>,
    /// Perturbations `u` per radius in the radial shells (`m`).
    pub perturbations_per_shell: usize,
    /// Base points `y` (Clarke) or directions `u` (subderivative) per radius.
    pub neighborhood_samples: usize,
    /// `t` ranges over `(δ·window_ratio, δ]` in the Clarke and subderivative
    /// estimators.
    pub window_ratio: S,
    pub window_points: usize,
    /// Directions used by sweeps and regularity checks; empty means the
    /// dimension's default grid.
    pub direction_grid: Vec<Vec<S>>,
    pub refine_rounds: usize,
    /// `M∞`: magnitudes beyond this are treated as divergence.
    pub divergence_threshold: S,
    /// Relative-or-absolute convergence tolerance.
    pub tol: S,
}

impl<S: Scalar> Default for SamplingSchedule<S> {
    fn default() -> Self {
        Self {
            t_min: lit(1e-6),
            t_max: lit(1e6),
            points_per_decade: 20,
            shrink_ladder: [1e-2, 1e-3, 1e-4, 1e-5, 1e-6].map(lit).to_vec(),
            perturbations_per_shell: 8,
            neighborhood_samples: 32,
            window_ratio: lit(1e-9),
            window_points: 40,
            direction_grid: Vec::new(),
            refine_rounds: 4,
            divergence_threshold: lit(1e9),
            tol: lit(1e-3),
        }
    }
}

impl<S: Scalar> SamplingSchedule<S> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSchedule(m.to_string()));
        if !(self.t_min > S::zero()) || !self.t_min.is_finite() {
            return bad("t_min must be positive");
        }
        if !(self.t_max >= self.t_min) || !self.t_max.is_finite() {
            return bad("t_max must be finite and at least t_min");
        }
        if self.points_per_decade == 0 {
            return bad("points_per_decade must be at least 1");
        }
        if self.shrink_ladder.is_empty() {
            return bad("shrink ladder is empty");
        }
        if self.shrink_ladder.iter().any(|d| !(*d > S::zero()) || !d.is_finite()) {
            return bad("shrink ladder radii must be positive");
        }
        if self.shrink_ladder.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("shrink ladder must be strictly decreasing");
        }
        if self.perturbations_per_shell == 0 {
            return bad("perturbations_per_shell (m) must be at least 1");
        }
        if self.neighborhood_samples == 0 {
            return bad("neighborhood_samples must be at least 1");
        }
        if !(self.window_ratio > S::zero() && self.window_ratio < S::one()) {
            return bad("window_ratio must lie in (0, 1)");
        }
        if self.window_points < 2 {
            return bad("window_points must be at least 2");
        }
        if !(self.divergence_threshold > S::zero()) {
            return bad("divergence threshold must be positive");
        }
        if !(self.tol > S::zero()) {
            return bad("tol must be positive");
        }
        if self.direction_grid.iter().any(|d| d.is_empty() || d.iter().all(|c| *c == S::zero())) {
            return bad("direction grid contains a zero or empty vector");
        }
        Ok(())
    }

    /// The log-spaced global `t` grid.
    pub fn t_grid(&self) -> Vec<S> {
        let decades = (self.t_max / self.t_min).log10().to_f64().unwrap_or(0.0);
        let n = (decades * self.points_per_decade as f64).round() as usize + 1;
        log_space(self.t_min, self.t_max, n.max(1))
    }

    /// `window_points` log-spaced values in `(δ·window_ratio, δ]`.
    pub fn window(&self, delta: S) -> Vec<S> {
        let lo = delta * self.window_ratio;
        let mut v = log_space(lo, delta, self.window_points + 1);
        v.remove(0);
        v
    }

    pub fn smallest_radius(&self) -> S {
        *self.shrink_ladder.last().expect("validated ladder is nonempty")
    }
}
