//! Escape counts for the planar saddle `½x₁² − ½λx₂²` under unit steps.

use std::io::{self, Write};

use ncn::linalg::{jacobi_eigendecompose, pt_apply, pt_inverse};
use ncn::optimizer::format_real;
use ncn::problems::{Objective, QuadraticSaddle};
use ncn::{Error, Result};

pub const DEFAULT_LAMBDAS: [f64; 5] = [1.0, 0.1, 0.01, 1e-3, 1e-4];

/// GD cells whose closed form exceeds this are filled in from the closed
/// form instead of being simulated.
pub const GD_SIMULATION_CAP: u64 = 1_000_000;

/// Safety limit on simulated NCN steps; the closed form never comes close.
const NCN_STEP_LIMIT: u64 = 10_000;

pub const ESCAPE_CSV_HEADER: &str = "lambda,gamma,ncn_iters,gd_iters,ncn_closed_form,gd_closed_form,gd_capped";

/// `γ = 10⁻¹, …, 10⁻²⁰`.
pub fn default_gammas() -> Vec<f64> {
    (1..=20).map(|k| 10f64.powi(-k)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EscapeRow {
    pub lambda: f64,
    pub gamma: f64,
    pub ncn_iters: u64,
    pub gd_iters: u64,
    pub ncn_closed_form: u64,
    pub gd_closed_form: u64,
    /// `gd_iters` was taken from the closed form rather than simulated.
    pub gd_capped: bool,
}

impl EscapeRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            format_real(self.lambda),
            format_real(self.gamma),
            self.ncn_iters,
            self.gd_iters,
            self.ncn_closed_form,
            self.gd_closed_form,
            u8::from(self.gd_capped)
        )
    }
}

/// `⌈ln(1/γ)/ln(1 + r)⌉`.
fn closed_form(gamma: f64, rate_minus_one: f64) -> u64 {
    (-gamma.ln() / rate_minus_one.ln_1p()).ceil() as u64
}

fn outside_unit_box(x: &[f64]) -> bool {
    x.iter().any(|v| v.abs() >= 1.0)
}

/// Unit NCN steps `x ← x − |H|ₘ⁻¹∇f(x)` from `(γ, γ)`.
pub fn ncn_escape_iters(q: &QuadraticSaddle, gamma: f64, m: f64) -> Result<u64> {
    let mut x = vec![gamma, gamma];
    let mut g = vec![0.0; 2];
    for k in 1..=NCN_STEP_LIMIT {
        q.gradient_into(&x, &mut g);
        let pti = pt_inverse(&jacobi_eigendecompose(&q.hessian(&x)?)?, m)?;
        let d = pt_apply(&pti, &g)?;
        x[0] -= d[0];
        x[1] -= d[1];
        if outside_unit_box(&x) {
            return Ok(k);
        }
    }
    Err(Error::InvalidParameter {
        name: "gamma",
        reason: format!("no escape within {NCN_STEP_LIMIT} steps"),
    })
}

/// Unit gradient steps `x ← x − ∇f(x)` from `(γ, γ)`, for at most `cap`
/// steps. `None` if the iterate is still in the box after `cap` steps.
pub fn gd_escape_iters(q: &QuadraticSaddle, gamma: f64, cap: u64) -> Option<u64> {
    let mut x = vec![gamma, gamma];
    let mut g = vec![0.0; 2];
    for k in 1..=cap {
        q.gradient_into(&x, &mut g);
        x[0] -= g[0];
        x[1] -= g[1];
        if outside_unit_box(&x) {
            return Some(k);
        }
    }
    None
}

fn check_grid(lambdas: &[f64], gammas: &[f64]) -> Result<()> {
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && **l <= 1.0)) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("must lie in (0, 1], got {l}"),
        });
    }
    if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && **g < 1.0)) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: format!("must lie in (0, 1), got {g}"),
        });
    }
    Ok(())
}

pub fn escape_row(lambda: f64, gamma: f64, m: f64) -> Result<EscapeRow> {
    check_grid(&[lambda], &[gamma])?;
    let q = QuadraticSaddle::new(lambda)?;
    let ncn_closed_form = closed_form(gamma, 1.0);
    let gd_closed_form = closed_form(gamma, lambda);
    let ncn_iters = ncn_escape_iters(&q, gamma, m)?;
    let (gd_iters, gd_capped) = if gd_closed_form > GD_SIMULATION_CAP {
        log::info!("lambda={lambda:e} gamma={gamma:e}: GD count {gd_closed_form} taken from the closed form");
        (gd_closed_form, true)
    } else {
        // One spare step so that an off-by-one shows up as a mismatch rather
        // than as a cap.
        let iters = gd_escape_iters(&q, gamma, gd_closed_form + 1).unwrap_or(gd_closed_form + 2);
        (iters, false)
    };
    Ok(EscapeRow {
        lambda,
        gamma,
        ncn_iters,
        gd_iters,
        ncn_closed_form,
        gd_closed_form,
        gd_capped,
    })
}

/// Every `(λ, γ)` cell, λ-major. Cells are computed in parallel threads
/// and returned in grid order.
pub fn escape_table(lambdas: &[f64], gammas: &[f64], m: f64) -> Result<Vec<EscapeRow>> {
    check_grid(lambdas, gammas)?;
    std::thread::scope(|s| {
        let handles: Vec<_> = lambdas
            .iter()
            .map(|&l| s.spawn(move || gammas.iter().map(|&g| escape_row(l, g, m)).collect::<Result<Vec<_>>>()))
            .collect();
        let mut rows = Vec::with_capacity(lambdas.len() * gammas.len());
        for h in handles {
            rows.extend(h.join().expect("escape worker panicked")?);
        }
        Ok(rows)
    })
}

pub fn write_escape_csv<W: Write>(rows: &[EscapeRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{ESCAPE_CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}
