//! Objective functions with analytic first and second derivatives.

mod fd;
mod matfac;
mod quadratic;
mod rng;

pub use fd::{finite_difference_check, FdErrors};
pub use matfac::{MatrixFactorization, MAX_FACTORIZATION_DIM};
pub use quadratic::{DiagonalQuadratic, QuadraticSaddle, TwoWell};
pub use rng::{estimate_lipschitz, gaussian_vec, random_init, seeded_rng, LIPSCHITZ_SAMPLE_PAIRS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{EigenDecomposition, SymmetricMatrix, Vector};

/// Gradient (`M`) and Hessian (`L`) Lipschitz constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lipschitz {
    pub gradient: f64,
    pub hessian: f64,
}

/// A twice continuously differentiable function on ℝⁿ.
///
/// Implementors provide the raw `value`, `gradient_into` and `hessian_at`
/// on slices of length [`Objective::dim`]; the provided `eval`, `gradient`
/// and `hessian` wrap them with dimension and finiteness checks.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> &'static str;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient_into(&self, x: &[f64], out: &mut [f64]);

    fn hessian_at(&self, x: &[f64]) -> SymmetricMatrix;

    /// Eigenbasis of the Hessian at a known saddle, when one is available
    /// analytically. Used as the reference for gradient projections.
    fn saddle_reference(&self) -> Option<EigenDecomposition> {
        None
    }

    /// Exact Lipschitz constants, for problems where they are known.
    fn analytic_lipschitz(&self) -> Option<Lipschitz> {
        None
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        check_point(self.dim(), x)?;
        let f = self.value(x);
        if !f.is_finite() {
            return Err(Error::NonFiniteInput("objective value"));
        }
        Ok(f)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vector> {
        check_point(self.dim(), x)?;
        let mut g = vec![0.0; self.dim()];
        self.gradient_into(x, &mut g);
        Vector::new(g).map_err(|_| Error::NonFiniteInput("gradient"))
    }

    fn hessian(&self, x: &[f64]) -> Result<SymmetricMatrix> {
        check_point(self.dim(), x)?;
        let h = self.hessian_at(x);
        if !h.is_finite() {
            return Err(Error::NonFiniteInput("hessian"));
        }
        Ok(h)
    }
}

fn check_point(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput("x"));
    }
    Ok(())
}
