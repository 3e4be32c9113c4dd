use log::{debug, info};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::problems::Objective;

use super::{
    backtrack, check_start, Diagnostics, IterationRecord, Method, OptimizerConfig, Probe,
    RunTrace, Termination,
};

fn step_from<O: Objective + ?Sized>(
    obj: &O,
    p: &Probe,
    diag: &Diagnostics,
    cfg: &OptimizerConfig,
    k: usize,
) -> Result<(Probe, IterationRecord)> {
    let decrement = p.grad_norm * p.grad_norm;
    let acc = backtrack(obj, &p.x, p.f, &p.g, decrement, cfg)?;
    let next = Probe::at(obj, acc.x)?;
    let mut rec = diag.record(k, &next)?;
    rec.step_size = acc.eta;
    rec.n_backtracks = acc.n_backtracks;
    rec.decrement = decrement;
    rec.f_trial = acc.f;
    Ok((next, rec))
}

/// One gradient step `x − η∇f(x)` with the same backtracking rule as NCN.
pub fn gd_step<O: Objective + ?Sized>(
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

/// Gradient descent until `‖∇f‖ ≤ ε`, with no curvature test and no
/// perturbation.
pub fn gd_run<O: Objective + ?Sized>(
    x0: &Vector,
    obj: &O,
    cfg: &OptimizerConfig,
) -> Result<RunTrace> {
    check_start(obj, x0, cfg)?;
    let diag = Diagnostics::new(obj, cfg);
    let mut cur = Probe::at(obj, x0.clone())?;
    let mut records = vec![diag.record(0, &cur)?];

    let termination = loop {
        if cur.grad_norm <= cfg.epsilon {
            break Termination::Converged;
        }
        let k = records.len();
        if k > cfg.max_outer_iters {
            break Termination::MaxIters;
        }
        match step_from(obj, &cur, &diag, cfg, k) {
            Ok((next, rec)) => {
                debug!(
                    "gd k={k} f={:e} |g|={:e} eta={}",
                    rec.f_value, rec.grad_norm, rec.step_size
                );
                cur = next;
                records.push(rec);
            }
            Err(Error::StepUnderflow { .. }) => break Termination::StepUnderflow,
            Err(e) => return Err(e),
        }
    };

    info!(
        "gd finished: {termination:?} after {} step(s), f={:e}, |g|={:e}",
        records.len() - 1,
        cur.f,
        cur.grad_norm
    );
    Ok(RunTrace {
        method: Method::Gd,
        records,
        termination,
        final_x: cur.x,
        projection_reference: diag.kind(),
    })
}
