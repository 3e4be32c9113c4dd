use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymmetricMatrix, Vector};

use super::{gaussian_vec, seeded_rng, Objective};

/// Largest decision-vector dimension `r·(l + n)` accepted, since every
/// iteration assembles and eigendecomposes the dense Hessian.
pub const MAX_FACTORIZATION_DIM: usize = 600;

/// Rank-`r` factorization objective `f(U, V) = ½‖U·Vᵀ − M‖_F²`.
///
/// The decision vector is `x = [vec(U); vec(V)]` with column-major
/// vectorization: `U[i, k]` sits at `i + l·k` and `V[j, k]` at
/// `l·r + j + n·k`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFactorization {
    target: Matrix,
    rank: usize,
}

impl MatrixFactorization {
    pub fn new(target: Matrix, rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::invalid("rank", "must be at least 1"));
        }
        let dim = rank * (target.rows() + target.cols());
        if dim > MAX_FACTORIZATION_DIM {
            return Err(Error::invalid(
                "rank",
                format!(
                    "decision dimension r(l+n) = {dim} exceeds the dense-Hessian cap {MAX_FACTORIZATION_DIM}"
                ),
            ));
        }
        Ok(MatrixFactorization { target, rank })
    }

    /// Exact rank-`r` target `U₀V₀ᵀ` with standard Gaussian factors, plus
    /// optional i.i.d. Gaussian noise of standard deviation `noise_std`.
    pub fn synthetic_target(
        rows: usize,
        cols: usize,
        rank: usize,
        seed: u64,
        noise_std: f64,
    ) -> Result<Matrix> {
        if rows == 0 || cols == 0 || rank == 0 {
            return Err(Error::invalid("target", "rows, cols and rank must be positive"));
        }
        if !(noise_std >= 0.0 && noise_std.is_finite()) {
            return Err(Error::invalid(
                "target_noise",
                format!("must be a non-negative finite real, got {noise_std}"),
            ));
        }
        let mut rng = seeded_rng(seed, 2);
        let u = gaussian_vec(&mut rng, rows * rank, 1.0)?;
        let v = gaussian_vec(&mut rng, cols * rank, 1.0)?;
        let noise = if noise_std > 0.0 {
            gaussian_vec(&mut rng, rows * cols, noise_std)?
        } else {
            vec![0.0; rows * cols]
        };
        let m = Matrix::from_fn(rows, cols, |i, j| {
            (0..rank)
                .map(|k| u[i + rows * k] * v[j + cols * k])
                .sum::<f64>()
                + noise[i * cols + j]
        });
        Ok(m)
    }

    pub fn target(&self) -> &Matrix {
        &self.target
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Packs `U` (l×r) and `V` (n×r) into the decision vector.
    pub fn pack(&self, u: &Matrix, v: &Matrix) -> Result<Vector> {
        let (l, n, r) = (self.target.rows(), self.target.cols(), self.rank);
        if u.rows() != l || u.cols() != r {
            return Err(Error::DimensionMismatch {
                expected: l * r,
                found: u.rows() * u.cols(),
            });
        }
        if v.rows() != n || v.cols() != r {
            return Err(Error::DimensionMismatch {
                expected: n * r,
                found: v.rows() * v.cols(),
            });
        }
        let mut x = Vec::with_capacity(r * (l + n));
        for k in 0..r {
            x.extend((0..l).map(|i| u.get(i, k)));
        }
        for k in 0..r {
            x.extend((0..n).map(|j| v.get(j, k)));
        }
        Vector::new(x)
    }

    /// Inverse of [`MatrixFactorization::pack`].
    pub fn unpack(&self, x: &[f64]) -> Result<(Matrix, Matrix)> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let (l, n, r) = (self.target.rows(), self.target.cols(), self.rank);
        let u = Matrix::from_fn(l, r, |i, k| x[i + l * k]);
        let v = Matrix::from_fn(n, r, |j, k| x[l * r + j + n * k]);
        Ok((u, v))
    }

    /// Residual `E = U·Vᵀ − M`, row-major.
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let (l, n, r) = (self.target.rows(), self.target.cols(), self.rank);
        let (u, v) = x.split_at(l * r);
        let mut e = Vec::with_capacity(l * n);
        for i in 0..l {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..r {
                    s += u[i + l * k] * v[j + n * k];
                }
                e.push(s - self.target.get(i, j));
            }
        }
        e
    }
}

impl Objective for MatrixFactorization {
    fn dim(&self) -> usize {
        self.rank * (self.target.rows() + self.target.cols())
    }

    fn name(&self) -> &'static str {
        "matfac"
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.residual(x).iter().map(|e| e * e).sum::<f64>()
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        let (l, n, r) = (self.target.rows(), self.target.cols(), self.rank);
        let e = self.residual(x);
        let (u, v) = x.split_at(l * r);
        let (gu, gv) = out.split_at_mut(l * r);
        // ∂f/∂U = E·V, ∂f/∂V = Eᵀ·U
        for k in 0..r {
            for i in 0..l {
                gu[i + l * k] = (0..n).map(|j| e[i * n + j] * v[j + n * k]).sum();
            }
            for j in 0..n {
                gv[j + n * k] = (0..l).map(|i| e[i * n + j] * u[i + l * k]).sum();
            }
        }
    }

    fn hessian_at(&self, x: &[f64]) -> SymmetricMatrix {
        let (l, n, r) = (self.target.rows(), self.target.cols(), self.rank);
        let e = self.residual(x);
        let (u, v) = x.split_at(l * r);
        let iu = |i: usize, k: usize| i + l * k;
        let iv = |j: usize, k: usize| l * r + j + n * k;

        let gram = |data: &[f64], rows: usize, a: usize, b: usize| -> f64 {
            (0..rows).map(|t| data[t + rows * a] * data[t + rows * b]).sum()
        };

        let mut h = SymmetricMatrix::zeros(self.dim());
        for k in 0..r {
            for kp in 0..=k {
                // (VᵀV) ⊗ I_l and (UᵀU) ⊗ I_n
                let vtv = gram(v, n, k, kp);
                for i in 0..l {
                    h.set(iu(i, k), iu(i, kp), vtv);
                }
                let utu = gram(u, l, k, kp);
                for j in 0..n {
                    h.set(iv(j, k), iv(j, kp), utu);
                }
            }
        }
        // ∂²f/∂U[i,k]∂V[j,k'] = U[i,k']·V[j,k] + δ(k,k')·E[i,j]
        for k in 0..r {
            for kp in 0..r {
                for i in 0..l {
                    for j in 0..n {
                        let mut val = u[i + l * kp] * v[j + n * k];
                        if k == kp {
                            val += e[i * n + j];
                        }
                        h.set(iu(i, k), iv(j, kp), val);
                    }
                }
            }
        }
        h
    }
}
