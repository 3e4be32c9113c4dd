use crate::error::{Error, Result};

use super::{Matrix, SymmetricMatrix};

/// Sweep cap for [`jacobi_eigendecompose`].
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Convergence target: off-diagonal Frobenius norm relative to `‖A‖_F`.
pub const JACOBI_REL_TOL: f64 = 1e-12;

/// Orthonormal eigenbasis and eigenvalues of a symmetric matrix.
///
/// Column `k` of `q` is the eigenvector paired with `lambda[k]`. Eigenvalues
/// are sorted ascending; equal eigenvalues keep the order in which the
/// sweeps left them on the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition {
    q: Matrix,
    lambda: Vec<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambda
    }

    pub fn eigenvectors(&self) -> &Matrix {
        &self.q
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.q.column(k)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.lambda[0]
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.lambda.iter().fold(0.0_f64, |acc, l| acc.max(l.abs()))
    }

    /// `Qᵀ v`: coordinates of `v` in the eigenbasis.
    pub fn to_eigenbasis(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.q.tr_mul_vec(v)
    }

    /// `Q diag(lambda) Qᵀ`.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let n = self.dim();
        SymmetricMatrix::from_lower(n, |i, j| {
            (0..n)
                .map(|k| self.q.get(i, k) * self.lambda[k] * self.q.get(j, k))
                .sum()
        })
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Rotations are skipped below a threshold during the first three sweeps,
/// and entries that have become negligible next to both diagonal entries are
/// flushed to zero afterwards. Iteration stops once the off-diagonal
/// Frobenius norm is at most `JACOBI_REL_TOL * ‖A‖_F`.
pub fn jacobi_eigendecompose(a: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::invalid("matrix", "dimension must be at least 1"));
    }
    if !a.is_finite() {
        return Err(Error::NonFiniteInput("matrix"));
    }

    let mut w: Vec<f64> = a.row_major().to_vec();
    let mut v = Matrix::identity(n);
    let tol = JACOBI_REL_TOL * a.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&w, n);
        if off <= tol {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::ConvergenceFailure {
                sweeps,
                off_norm: off,
            });
        }

        let threshold = if sweeps < 3 {
            let abs_sum: f64 = (0..n)
                .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
                .map(|(p, q)| w[p * n + q].abs())
                .sum();
            0.2 * abs_sum / (n * n) as f64
        } else {
            0.0
        };

        for p in 0..n {
            for q in p + 1..n {
                let apq = w[p * n + q];
                let app = w[p * n + p];
                let aqq = w[q * n + q];
                let g = 100.0 * apq.abs();
                if sweeps > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    w[p * n + q] = 0.0;
                    w[q * n + p] = 0.0;
                    continue;
                }
                if apq.abs() <= threshold || apq == 0.0 {
                    continue;
                }
                rotate(&mut w, &mut v, n, p, q);
            }
        }
        sweeps += 1;
    }

    let diag: Vec<f64> = (0..n).map(|i| w[i * n + i]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // `sort_by` is stable, so ties keep their diagonal order.
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));

    let lambda = order.iter().map(|&i| diag[i]).collect();
    let q = Matrix::from_fn(n, n, |r, c| v.get(r, order[c]));
    Ok(EigenDecomposition { q, lambda })
}

fn off_diagonal_norm(w: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += w[i * n + j] * w[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Applies the rotation that annihilates `w[p][q]`, updating `w <- Jᵀ w J`
/// and accumulating `v <- v J`.
fn rotate(w: &mut [f64], v: &mut Matrix, n: usize, p: usize, q: usize) {
    let apq = w[p * n + q];
    let h = w[q * n + q] - w[p * n + p];
    let t = if (100.0 * apq).abs() + h.abs() == h.abs() {
        apq / h
    } else {
        let theta = 0.5 * h / apq;
        let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
        if theta < 0.0 {
            -t
        } else {
            t
        }
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    w[p * n + p] -= t * apq;
    w[q * n + q] += t * apq;
    w[p * n + q] = 0.0;
    w[q * n + p] = 0.0;

    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = w[r * n + p];
        let arq = w[r * n + q];
        let new_rp = arp - s * (arq + tau * arp);
        let new_rq = arq + s * (arp - tau * arq);
        w[r * n + p] = new_rp;
        w[p * n + r] = new_rp;
        w[r * n + q] = new_rq;
        w[q * n + r] = new_rq;
    }

    for r in 0..n {
        let vrp = v.get(r, p);
        let vrq = v.get(r, q);
        v.set(r, p, vrp - s * (vrq + tau * vrp));
        v.set(r, q, vrq + s * (vrp - tau * vrq));
    }
}
