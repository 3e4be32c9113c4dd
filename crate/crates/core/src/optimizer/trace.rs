use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::linalg::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ncn,
    Gd,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ncn => "ncn",
            Method::Gd => "gd",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    MaxIters,
    StepUnderflow,
    ResampleCapExceeded,
}

/// Which eigenbasis splits the gradient into its negative- and
/// positive-curvature parts in the trace diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionReference {
    /// The problem's analytic saddle Hessian.
    AnalyticSaddle,
    /// The Hessian at each recorded iterate.
    CurrentHessian,
}

/// State of iterate `x_k` together with the step that produced it.
///
/// Record 0 is the starting point; its step fields are zero. For `k ≥ 1`,
/// `f_trial` is the objective at the point accepted by the line search and
/// `decrement` the quadratic form `∇fᵀ D ∇f` at `x_{k-1}` (with `D` the
/// PT-inverse for NCN and the identity for gradient descent). When noise
/// was injected after the step, the state fields describe the perturbed
/// point and `f_trial` the line-search point before perturbation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub f_value: f64,
    pub grad_norm: f64,
    pub min_hess_eig: f64,
    pub step_size: f64,
    pub n_backtracks: usize,
    pub noise_injected: bool,
    pub n_noise_draws: usize,
    pub neg_proj_norm: f64,
    pub pos_proj_norm: f64,
    pub decrement: f64,
    pub f_trial: f64,
    pub x: Vector,
}

pub const CSV_HEADER: &str = "k,f,grad_norm,min_hess_eig,step_size,n_backtracks,noise_injected,n_noise_draws,neg_proj_norm,pos_proj_norm";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

impl IterationRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.k,
            format_real(self.f_value),
            format_real(self.grad_norm),
            format_real(self.min_hess_eig),
            format_real(self.step_size),
            self.n_backtracks,
            u8::from(self.noise_injected),
            self.n_noise_draws,
            format_real(self.neg_proj_norm),
            format_real(self.pos_proj_norm),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub method: Method,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    pub final_x: Vector,
    pub projection_reference: ProjectionReference,
}

impl RunTrace {
    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("a trace always holds the initial record")
    }

    /// Number of steps taken (records after the initial one).
    pub fn steps(&self) -> usize {
        self.records.len() - 1
    }

    pub fn noise_events(&self) -> usize {
        self.records.iter().filter(|r| r.noise_injected).count()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(w, "{}", r.csv_row())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_formatting_round_trips() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 12345.678, 0.0] {
            let s = format_real(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_real(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_header_and_row_shape() {
        let r = IterationRecord {
            k: 3,
            f_value: 0.5,
            grad_norm: 1e-3,
            min_hess_eig: -1.0,
            step_size: 0.9,
            n_backtracks: 1,
            noise_injected: true,
            n_noise_draws: 2,
            neg_proj_norm: 0.0,
            pos_proj_norm: 1e-3,
            decrement: 0.0,
            f_trial: 0.5,
            x: Vector::zeros(2),
        };
        let row = r.csv_row();
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        assert!(row.starts_with("3,5.0000000000000000e-1,"));
        assert!(row.contains(",1,2,"));
    }
}
