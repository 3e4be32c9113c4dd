use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigendecompose, EigenDecomposition, SymmetricMatrix, Vector};

use super::{Lipschitz, Objective};

/// `f(x) = x₁²/2 − λ·x₂²/2` with `λ ∈ (0, 1]`: a saddle at the origin whose
/// condition number is `1/λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticSaddle {
    lambda: f64,
}

impl QuadraticSaddle {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::invalid(
                "lambda",
                format!("must lie in (0, 1], got {lambda}"),
            ));
        }
        Ok(QuadraticSaddle { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Objective for QuadraticSaddle {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &'static str {
        "quad_saddle"
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * x[0] * x[0] - 0.5 * self.lambda * x[1] * x[1]
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        out[0] = x[0];
        out[1] = -self.lambda * x[1];
    }

    fn hessian_at(&self, _x: &[f64]) -> SymmetricMatrix {
        SymmetricMatrix::from_diagonal(&[1.0, -self.lambda])
    }

    fn saddle_reference(&self) -> Option<EigenDecomposition> {
        jacobi_eigendecompose(&self.hessian_at(&[0.0, 0.0])).ok()
    }

    fn analytic_lipschitz(&self) -> Option<Lipschitz> {
        Some(Lipschitz {
            gradient: 1.0,
            hessian: 0.0,
        })
    }
}

/// `f(x) = ½ Σ dᵢ xᵢ²` with coefficients of any sign.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalQuadratic {
    d: Vector,
}

impl DiagonalQuadratic {
    pub fn new(d: Vector) -> Self {
        DiagonalQuadratic { d }
    }

    pub fn coefficients(&self) -> &Vector {
        &self.d
    }
}

impl Objective for DiagonalQuadratic {
    fn dim(&self) -> usize {
        self.d.dim()
    }

    fn name(&self) -> &'static str {
        "diag_quad"
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.d.iter().zip(x).map(|(d, v)| d * v * v).sum::<f64>()
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        for ((o, d), v) in out.iter_mut().zip(self.d.iter()).zip(x) {
            *o = d * v;
        }
    }

    fn hessian_at(&self, _x: &[f64]) -> SymmetricMatrix {
        SymmetricMatrix::from_diagonal(&self.d)
    }

    fn saddle_reference(&self) -> Option<EigenDecomposition> {
        jacobi_eigendecompose(&SymmetricMatrix::from_diagonal(&self.d)).ok()
    }

    fn analytic_lipschitz(&self) -> Option<Lipschitz> {
        Some(Lipschitz {
            gradient: self.d.norm_inf(),
            hessian: 0.0,
        })
    }
}

/// `f(x) = x₁⁴/4 − x₁²/2 + x₂²/2`: a saddle at the origin (Hessian
/// `diag(−1, 1)`) between minima at `(±1, 0)` (Hessian `diag(2, 1)`).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TwoWell;

impl Objective for TwoWell {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &'static str {
        "two_well"
    }

    // The value is kept in the product form x₁²(x₁²/4 − 1/2) so that it
    // stays relatively accurate next to the saddle, where it is of order
    // x₁²; (x₁² − 1)²/4 − 1/4 rounds to zero there. The gradient uses
    // x₁(x₁ − 1)(x₁ + 1) for accuracy next to the minima.
    fn value(&self, x: &[f64]) -> f64 {
        let s = x[0] * x[0];
        s * (0.25 * s - 0.5) + 0.5 * x[1] * x[1]
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        out[0] = x[0] * (x[0] - 1.0) * (x[0] + 1.0);
        out[1] = x[1];
    }

    fn hessian_at(&self, x: &[f64]) -> SymmetricMatrix {
        SymmetricMatrix::from_diagonal(&[3.0 * x[0] * x[0] - 1.0, 1.0])
    }

    fn saddle_reference(&self) -> Option<EigenDecomposition> {
        jacobi_eigendecompose(&self.hessian_at(&[0.0, 0.0])).ok()
    }
}
