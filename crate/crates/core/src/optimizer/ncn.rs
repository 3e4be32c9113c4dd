use log::{debug, info};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg::{norm, PTInverse, Vector};
use crate::problems::{seeded_rng, Objective};

use super::{
    backtrack, check_start, Diagnostics, IterationRecord, Method, OptimizerConfig, Probe,
    RunTrace, Termination,
};

/// NCN steps taken after an accepted perturbation that still has
/// `‖∇f‖ ≤ ε`: `⌈log_{3/2} 2⌉`.
pub const FORCED_STEPS_AFTER_NOISE: usize = 2;

/// Step from `p` along `−|H|ₘ⁻¹∇f` with backtracking; the record carries
/// index `k` and describes the new point.
fn step_from<O: Objective + ?Sized>(
    obj: &O,
    p: &Probe,
    diag: &Diagnostics,
    cfg: &OptimizerConfig,
    k: usize,
) -> Result<(Probe, IterationRecord)> {
    let pti = PTInverse::new(&p.eig, cfg.m)?;
    let direction = pti.apply(&p.g)?;
    let decrement = pti.quadratic_form(&p.g)?;
    let acc = backtrack(obj, &p.x, p.f, &direction, decrement, cfg)?;
    let next = Probe::at(obj, acc.x)?;
    let mut rec = diag.record(k, &next)?;
    rec.step_size = acc.eta;
    rec.n_backtracks = acc.n_backtracks;
    rec.decrement = decrement;
    rec.f_trial = acc.f;
    Ok((next, rec))
}

/// One NCN step: `x − η·|∇²f(x)|ₘ⁻¹∇f(x)` with `η` chosen by backtracking.
pub fn ncn_step<O: Objective + ?Sized>(
    x: &Vector,
    obj: &O,
    cfg: &OptimizerConfig,
) -> Result<(Vector, IterationRecord)> {
    check_start(obj, x, cfg)?;
    let diag = Diagnostics::new(obj, cfg);
    let p = Probe::at(obj, x.clone())?;
    let (next, rec) = step_from(obj, &p, &diag, cfg, 1)?;
    Ok((next.x, rec))
}

/// Draws `x + X`, `Xᵢ ~ N(0, σ²)`, until the gradient norm is at most
/// `bound`. Returns the point and the number of draws, or `None` once
/// `cap` draws have all been rejected.
fn perturb<O: Objective + ?Sized>(
    obj: &O,
    x: &Vector,
    noise: &Normal<f64>,
    rng: &mut ChaCha8Rng,
    bound: f64,
    cap: usize,
) -> Option<(Vector, usize)> {
    let mut g = vec![0.0; x.dim()];
    for draw in 1..=cap {
        let candidate: Vec<f64> = x.iter().map(|xi| xi + noise.sample(rng)).collect();
        if candidate.iter().any(|v| !v.is_finite()) {
            continue;
        }
        obj.gradient_into(&candidate, &mut g);
        let gn = norm(&g);
        if gn.is_finite() && gn <= bound {
            return Some((Vector::from_raw(candidate), draw));
        }
    }
    None
}

/// The full NCN method with Gaussian perturbation at saddles.
///
/// Steps while `‖∇f‖ > ε` or the Hessian has an eigenvalue below
/// `−neg_curvature_tol`. Whenever a step lands at a point with small
/// gradient and negative curvature, noise of standard deviation `2ε/m`
/// is added (redrawn until the gradient norm is within
/// [`OptimizerConfig::noise_acceptance_bound`]). If the perturbed point
/// still has `‖∇f‖ ≤ ε`, [`FORCED_STEPS_AFTER_NOISE`] steps follow before
/// the stopping test is applied again.
///
/// Step underflow and an exhausted resampling budget end the run and are
/// reported through [`RunTrace::termination`].
pub fn ncn_run<O: Objective + ?Sized>(
    x0: &Vector,
    obj: &O,
    cfg: &OptimizerConfig,
) -> Result<RunTrace> {
    check_start(obj, x0, cfg)?;
    let diag = Diagnostics::new(obj, cfg);
    let mut rng = seeded_rng(cfg.seed, 1);
    let noise = Normal::new(0.0, cfg.noise_std())
        .map_err(|e| Error::invalid("epsilon", format!("noise scale 2ε/m invalid: {e}")))?;
    let bound = cfg.noise_acceptance_bound(obj.dim());
    let negative = |p: &Probe| p.min_eig() < -cfg.neg_curvature_tol;

    let mut cur = Probe::at(obj, x0.clone())?;
    let mut records = vec![diag.record(0, &cur)?];

    let termination = 'run: loop {
        if cur.grad_norm <= cfg.epsilon && !negative(&cur) {
            break Termination::Converged;
        }
        let k = records.len();
        if k > cfg.max_outer_iters {
            break Termination::MaxIters;
        }
        let (next, rec) = match step_from(obj, &cur, &diag, cfg, k) {
            Ok(v) => v,
            Err(Error::StepUnderflow { .. }) => break Termination::StepUnderflow,
            Err(e) => return Err(e),
        };
        debug!(
            "ncn k={k} f={:e} |g|={:e} eta={} min_eig={:e}",
            rec.f_value, rec.grad_norm, rec.step_size, rec.min_hess_eig
        );
        cur = next;
        if !(cur.grad_norm <= cfg.epsilon && negative(&cur)) {
            records.push(rec);
            continue;
        }

        let Some((x_tilde, draws)) =
            perturb(obj, &cur.x, &noise, &mut rng, bound, cfg.max_resample_draws)
        else {
            let mut rec = rec;
            rec.n_noise_draws = cfg.max_resample_draws;
            records.push(rec);
            break Termination::ResampleCapExceeded;
        };
        let perturbed = Probe::at(obj, x_tilde)?;
        let mut noisy = diag.record(k, &perturbed)?;
        noisy.step_size = rec.step_size;
        noisy.n_backtracks = rec.n_backtracks;
        noisy.decrement = rec.decrement;
        noisy.f_trial = rec.f_trial;
        noisy.noise_injected = true;
        noisy.n_noise_draws = draws;
        debug!("ncn k={k} noise accepted after {draws} draw(s), |g|={:e}", noisy.grad_norm);
        records.push(noisy);
        cur = perturbed;

        if cur.grad_norm <= cfg.epsilon {
            for _ in 0..FORCED_STEPS_AFTER_NOISE {
                let k = records.len();
                if k > cfg.max_outer_iters {
                    break 'run Termination::MaxIters;
                }
                match step_from(obj, &cur, &diag, cfg, k) {
                    Ok((next, rec)) => {
                        cur = next;
                        records.push(rec);
                    }
                    Err(Error::StepUnderflow { .. }) => break 'run Termination::StepUnderflow,
                    Err(e) => return Err(e),
                }
            }
        }
    };

    info!(
        "ncn finished: {termination:?} after {} step(s), f={:e}, |g|={:e}",
        records.len() - 1,
        cur.f,
        cur.grad_norm
    );
    Ok(RunTrace {
        method: Method::Ncn,
        records,
        termination,
        final_x: cur.x,
        projection_reference: diag.kind(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{DiagonalQuadratic, QuadraticSaddle, TwoWell};

    fn cfg() -> OptimizerConfig {
        OptimizerConfig {
            m: 1e-6,
            ..Default::default()
        }
    }

    #[test]
    fn saddle_step_doubles_x2() {
        let q = QuadraticSaddle::new(0.1).unwrap();
        let x = Vector::new(vec![0.3, 0.01]).unwrap();
        let (next, rec) = ncn_step(&x, &q, &cfg()).unwrap();
        assert_eq!(rec.step_size, 1.0);
        assert_eq!(rec.n_backtracks, 0);
        assert_eq!(next[0], 0.0);
        assert!((next[1] - 0.02).abs() < 1e-17);
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let q = QuadraticSaddle::new(0.1).unwrap();
        let x = Vector::zeros(2);
        let (next, rec) = ncn_step(&x, &q, &cfg()).unwrap();
        assert_eq!(next, x);
        assert_eq!(rec.step_size, 1.0);
    }

    #[test]
    fn convex_quadratic_in_one_step() {
        let d = DiagonalQuadratic::new(Vector::new(vec![2.0, 0.5, 7.0]).unwrap());
        let x = Vector::new(vec![1.0, -3.0, 0.25]).unwrap();
        let (next, _) = ncn_step(&x, &d, &cfg()).unwrap();
        assert!(next.norm_inf() < 1e-15);
        let trace = ncn_run(&x, &d, &cfg()).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert!(trace.steps() <= 2);
        assert_eq!(trace.noise_events(), 0);
    }

    #[test]
    fn converged_at_start_takes_no_step() {
        let d = DiagonalQuadratic::new(Vector::new(vec![1.0, 1.0]).unwrap());
        let trace = ncn_run(&Vector::zeros(2), &d, &cfg()).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert_eq!(trace.steps(), 0);
    }

    #[test]
    fn two_well_from_saddle_reaches_a_minimum() {
        let c = OptimizerConfig {
            m: 0.1,
            lipschitz_m: 3.0,
            lipschitz_l: 6.6,
            seed: 3,
            ..Default::default()
        };
        let trace = ncn_run(&Vector::zeros(2), &TwoWell, &c).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert!(trace.noise_events() >= 1);
        assert!(trace.records[1].noise_injected);
        let x = &trace.final_x;
        assert!((x[0].abs() - 1.0).abs() < 1e-6 && x[1].abs() < 1e-6, "{x:?}");
    }

    #[test]
    fn dimension_and_config_checked() {
        let q = QuadraticSaddle::new(0.1).unwrap();
        assert!(ncn_step(&Vector::zeros(3), &q, &cfg()).is_err());
        let bad = OptimizerConfig {
            alpha: 0.6,
            ..cfg()
        };
        assert!(ncn_run(&Vector::zeros(2), &q, &bad).is_err());
    }

    #[test]
    fn max_iters_reported() {
        let q = QuadraticSaddle::new(1e-3).unwrap();
        let c = OptimizerConfig {
            max_outer_iters: 3,
            ..cfg()
        };
        let trace = ncn_run(&Vector::new(vec![1.0, 1e-3]).unwrap(), &q, &c).unwrap();
        assert_eq!(trace.termination, Termination::MaxIters);
        assert_eq!(trace.steps(), 3);
    }
}
