//! The NCN step and full method, and a gradient-descent baseline sharing
//! the same backtracking rule.

mod config;
mod gd;
mod ncn;
mod trace;

pub use config::OptimizerConfig;
pub use gd::{gd_run, gd_step};
pub use ncn::{ncn_run, ncn_step, FORCED_STEPS_AFTER_NOISE};
pub use trace::{
    format_real, IterationRecord, Method, ProjectionReference, RunTrace, Termination, CSV_HEADER,
};

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigendecompose, EigenDecomposition, Vector};
use crate::problems::Objective;
use crate::theory::grad_projections;

/// Rounding allowance added to the right-hand side of the sufficient
/// decrease test. Without it a step that leaves `f` unchanged up to the
/// last bit is rejected when `f` is nonzero.
pub fn armijo_slack(f: f64) -> f64 {
    4.0 * f64::EPSILON * f.abs()
}

/// The Armijo inequality `f_trial ≤ f − α·η·decrement` (with slack).
pub fn armijo_holds(f: f64, f_trial: f64, alpha: f64, eta: f64, decrement: f64) -> bool {
    f_trial <= f - alpha * eta * decrement + armijo_slack(f)
}

/// Everything the methods need at one point.
pub(crate) struct Probe {
    pub x: Vector,
    pub f: f64,
    pub g: Vector,
    pub grad_norm: f64,
    pub eig: EigenDecomposition,
}

impl Probe {
    pub fn at<O: Objective + ?Sized>(obj: &O, x: Vector) -> Result<Probe> {
        let f = obj.eval(&x)?;
        let g = obj.gradient(&x)?;
        let eig = jacobi_eigendecompose(&obj.hessian(&x)?)?;
        let grad_norm = g.norm();
        Ok(Probe {
            x,
            f,
            g,
            grad_norm,
            eig,
        })
    }

    pub fn min_eig(&self) -> f64 {
        self.eig.min_eigenvalue()
    }
}

pub(crate) struct Accepted {
    pub x: Vector,
    pub f: f64,
    pub eta: f64,
    pub n_backtracks: usize,
}

/// Tries `η = 1, β, β², …` along `x − η·direction` until the Armijo test
/// passes or `η` drops below `min_step`.
pub(crate) fn backtrack<O: Objective + ?Sized>(
    obj: &O,
    x: &Vector,
    f: f64,
    direction: &[f64],
    decrement: f64,
    cfg: &OptimizerConfig,
) -> Result<Accepted> {
    let mut eta = 1.0;
    let mut n_backtracks = 0;
    loop {
        let trial = x.sub_scaled(eta, direction);
        let f_trial = if trial.is_finite() {
            obj.value(&trial)
        } else {
            f64::NAN
        };
        if f_trial.is_finite() && armijo_holds(f, f_trial, cfg.alpha, eta, decrement) {
            return Ok(Accepted {
                x: trial,
                f: f_trial,
                eta,
                n_backtracks,
            });
        }
        eta *= cfg.beta;
        n_backtracks += 1;
        if eta < cfg.min_step {
            return Err(Error::StepUnderflow {
                min_step: cfg.min_step,
            });
        }
    }
}

/// Fixed basis for the projection diagnostics, when the problem has one.
pub(crate) struct Diagnostics {
    reference: Option<EigenDecomposition>,
    threshold: f64,
}

impl Diagnostics {
    pub fn new<O: Objective + ?Sized>(obj: &O, cfg: &OptimizerConfig) -> Self {
        Diagnostics {
            reference: obj.saddle_reference(),
            threshold: cfg.projection_threshold,
        }
    }

    pub fn kind(&self) -> ProjectionReference {
        if self.reference.is_some() {
            ProjectionReference::AnalyticSaddle
        } else {
            ProjectionReference::CurrentHessian
        }
    }

    /// Record for the state at `p`, with step fields zeroed.
    pub fn record(&self, k: usize, p: &Probe) -> Result<IterationRecord> {
        let basis = self.reference.as_ref().unwrap_or(&p.eig);
        let (neg, pos) = grad_projections(&p.g, basis, self.threshold)?;
        Ok(IterationRecord {
            k,
            f_value: p.f,
            grad_norm: p.grad_norm,
            min_hess_eig: p.min_eig(),
            step_size: 0.0,
            n_backtracks: 0,
            noise_injected: false,
            n_noise_draws: 0,
            neg_proj_norm: neg,
            pos_proj_norm: pos,
            decrement: 0.0,
            f_trial: p.f,
            x: p.x.clone(),
        })
    }
}

pub(crate) fn check_start<O: Objective + ?Sized>(
    obj: &O,
    x: &Vector,
    cfg: &OptimizerConfig,
) -> Result<()> {
    cfg.validate()?;
    if x.dim() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            found: x.dim(),
        });
    }
    if !x.is_finite() {
        return Err(Error::NonFiniteInput("x"));
    }
    Ok(())
}
