use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters shared by the NCN method and the gradient-descent baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Sufficient-decrease parameter, in (0, 0.5).
    pub alpha: f64,
    /// Backtracking contraction factor, in (0, 1).
    pub beta: f64,
    /// Target gradient-norm accuracy.
    pub epsilon: f64,
    /// PT-inverse truncation level.
    pub m: f64,
    /// Gradient Lipschitz constant `M`; sets the noise acceptance bound.
    pub lipschitz_m: f64,
    /// Hessian Lipschitz constant `L`. Zero is allowed (quadratics).
    pub lipschitz_l: f64,
    pub max_outer_iters: usize,
    pub max_resample_draws: usize,
    /// Backtracking floor; a step size below it ends the run.
    pub min_step: f64,
    pub seed: u64,
    /// An iterate counts as having negative curvature when its smallest
    /// Hessian eigenvalue is below `-neg_curvature_tol`.
    pub neg_curvature_tol: f64,
    /// Eigenvalue split between the negative and positive subspaces in the
    /// gradient-projection diagnostics.
    pub projection_threshold: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            alpha: 0.1,
            beta: 0.9,
            epsilon: 1e-12,
            m: 1e-12,
            lipschitz_m: 1.0,
            lipschitz_l: 1.0,
            max_outer_iters: 500,
            max_resample_draws: 1000,
            min_step: 1e-16,
            seed: 0,
            neg_curvature_tol: 1e-12,
            projection_threshold: 0.0,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::invalid(
                "alpha",
                format!("must lie in (0, 0.5), got {}", self.alpha),
            ));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::invalid(
                "beta",
                format!("must lie in (0, 1), got {}", self.beta),
            ));
        }
        positive("epsilon", self.epsilon)?;
        positive("m", self.m)?;
        positive("lipschitz_m", self.lipschitz_m)?;
        if !(self.lipschitz_l >= 0.0 && self.lipschitz_l.is_finite()) {
            return Err(Error::invalid(
                "lipschitz_l",
                format!("must be non-negative and finite, got {}", self.lipschitz_l),
            ));
        }
        positive("min_step", self.min_step)?;
        if self.min_step > 1.0 {
            return Err(Error::invalid(
                "min_step",
                format!("must not exceed 1, got {}", self.min_step),
            ));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::invalid("max_outer_iters", "must be at least 1"));
        }
        if self.max_resample_draws == 0 {
            return Err(Error::invalid("max_resample_draws", "must be at least 1"));
        }
        if !(self.neg_curvature_tol >= 0.0 && self.neg_curvature_tol.is_finite()) {
            return Err(Error::invalid(
                "neg_curvature_tol",
                format!("must be non-negative, got {}", self.neg_curvature_tol),
            ));
        }
        if !self.projection_threshold.is_finite() {
            return Err(Error::invalid("projection_threshold", "must be finite"));
        }
        Ok(())
    }

    /// Per-coordinate standard deviation of the injected noise, `2ε/m`.
    pub fn noise_std(&self) -> f64 {
        2.0 * self.epsilon / self.m
    }

    /// Largest gradient norm accepted after a noise draw in dimension `n`:
    /// `(2√n·M/m + 1)·ε`.
    pub fn noise_acceptance_bound(&self, n: usize) -> f64 {
        (2.0 * (n as f64).sqrt() * self.lipschitz_m / self.m + 1.0) * self.epsilon
    }
}
