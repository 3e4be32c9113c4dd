use crate::error::{Error, Result};

use super::{EigenDecomposition, Matrix, SymmetricMatrix, Vector};

/// Positive-definite truncated inverse `Q |Λ|ₘ⁻¹ Qᵀ` held in factored form.
///
/// Each eigenvalue is replaced by `max(|λᵢ|, m)` before inversion: negative
/// curvature has its sign flipped and curvature smaller than `m` in
/// magnitude (including exact zeros) is floored at `m`. The dense matrix is
/// only assembled on request.
#[derive(Clone, Debug, PartialEq)]
pub struct PTInverse {
    q: Matrix,
    inv_abs_lambda: Vec<f64>,
    m: f64,
}

impl PTInverse {
    pub fn new(eig: &EigenDecomposition, m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::invalid(
                "m",
                format!("truncation parameter must be positive and finite, got {m}"),
            ));
        }
        let inv_abs_lambda = eig
            .eigenvalues()
            .iter()
            .map(|l| 1.0 / l.abs().max(m))
            .collect();
        Ok(PTInverse {
            q: eig.eigenvectors().clone(),
            inv_abs_lambda,
            m,
        })
    }

    pub fn dim(&self) -> usize {
        self.inv_abs_lambda.len()
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn eigenvectors(&self) -> &Matrix {
        &self.q
    }

    /// Diagonal of `|Λ|ₘ⁻¹`, aligned with the eigenvector columns.
    pub fn inv_abs_lambda(&self) -> &[f64] {
        &self.inv_abs_lambda
    }

    fn check(&self, g: &[f64]) -> Result<()> {
        if g.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: g.len(),
            });
        }
        Ok(())
    }

    /// `Q diag(inv_abs_lambda) Qᵀ g`, computed as three O(n²) products.
    pub fn apply(&self, g: &[f64]) -> Result<Vector> {
        self.check(g)?;
        let mut y = self.q.tr_mul_vec(g)?;
        for (yi, d) in y.iter_mut().zip(&self.inv_abs_lambda) {
            *yi *= d;
        }
        Ok(Vector::from_raw(self.q.mul_vec(&y)?))
    }

    /// `gᵀ Q diag(inv_abs_lambda) Qᵀ g`.
    pub fn quadratic_form(&self, g: &[f64]) -> Result<f64> {
        self.check(g)?;
        let y = self.q.tr_mul_vec(g)?;
        Ok(y.iter()
            .zip(&self.inv_abs_lambda)
            .map(|(yi, d)| d * yi * yi)
            .sum())
    }

    /// Assembles the dense `n x n` matrix. O(n³); meant for checks.
    pub fn to_dense(&self) -> SymmetricMatrix {
        let n = self.dim();
        SymmetricMatrix::from_lower(n, |i, j| {
            (0..n)
                .map(|k| self.q.get(i, k) * self.inv_abs_lambda[k] * self.q.get(j, k))
                .sum()
        })
    }
}

pub fn pt_inverse(eig: &EigenDecomposition, m: f64) -> Result<PTInverse> {
    PTInverse::new(eig, m)
}

pub fn pt_apply(pti: &PTInverse, g: &[f64]) -> Result<Vector> {
    pti.apply(g)
}

pub fn quadratic_form(pti: &PTInverse, g: &[f64]) -> Result<f64> {
    pti.quadratic_form(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::jacobi_eigendecompose;

    fn pti_of_diag(d: &[f64], m: f64) -> PTInverse {
        let e = jacobi_eigendecompose(&SymmetricMatrix::from_diagonal(d)).unwrap();
        pt_inverse(&e, m).unwrap()
    }

    /// `inv_abs_lambda` re-keyed to the original diagonal position.
    fn by_position(p: &PTInverse) -> Vec<f64> {
        let n = p.dim();
        let mut out = vec![0.0; n];
        for k in 0..n {
            let col = p.eigenvectors().column(k);
            let pos = col.iter().position(|v| *v == 1.0).unwrap();
            out[pos] = p.inv_abs_lambda()[k];
        }
        out
    }

    #[test]
    fn sign_flip() {
        let lam = 0.25;
        let p = pti_of_diag(&[1.0, -lam], 1e-3);
        assert_eq!(by_position(&p), vec![1.0, 1.0 / lam]);
    }

    #[test]
    fn truncation_of_small_and_tiny_eigenvalues() {
        let p = pti_of_diag(&[5.0, -0.5, 1e-15], 1e-3);
        let got = by_position(&p);
        let want = [0.2, 2.0, 1000.0];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= 1e-12 * w, "{g} vs {w}");
        }
    }

    #[test]
    fn full_truncation() {
        let p = pti_of_diag(&[0.3, -0.2, 0.0], 0.5);
        assert!(p.inv_abs_lambda().iter().all(|&d| d == 2.0));
    }

    #[test]
    fn invalid_m() {
        let e = jacobi_eigendecompose(&SymmetricMatrix::identity(2)).unwrap();
        for m in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                pt_inverse(&e, m),
                Err(Error::InvalidParameter { name: "m", .. })
            ));
        }
    }

    #[test]
    fn apply_zero_and_identity() {
        let p = pti_of_diag(&[1.0, 1.0, 1.0], 0.5);
        assert_eq!(p.apply(&[0.0, 0.0, 0.0]).unwrap().as_slice(), &[0.0; 3]);
        assert_eq!(p.apply(&[1.5, -2.0, 3.0]).unwrap().as_slice(), &[1.5, -2.0, 3.0]);
    }

    #[test]
    fn apply_saddle_coordinate_map() {
        let lam = 0.1;
        let p = pti_of_diag(&[1.0, -lam], 1e-6);
        let out = p.apply(&[0.7, -0.3]).unwrap();
        assert!((out[0] - 0.7).abs() < 1e-15);
        assert!((out[1] + 0.3 / lam).abs() < 1e-14);
    }

    #[test]
    fn quadratic_form_values() {
        let id = pti_of_diag(&[1.0, 1.0], 1e-6);
        assert_eq!(id.quadratic_form(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(id.quadratic_form(&[3.0, 4.0]).unwrap(), 25.0);
        let p = pti_of_diag(&[1.0, -0.1], 1e-6);
        // 0.3² · 1 + 0.001² · 10
        let v = p.quadratic_form(&[0.3, -0.001]).unwrap();
        assert!((v - 0.09001).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let p = pti_of_diag(&[1.0, 2.0], 1e-6);
        assert_eq!(
            p.apply(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        );
        assert!(p.quadratic_form(&[1.0, 2.0, 3.0]).is_err());
    }
}
