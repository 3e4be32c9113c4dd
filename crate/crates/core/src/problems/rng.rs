use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigendecompose, norm};

use super::{Lipschitz, Objective};

/// Number of random point pairs sampled by [`estimate_lipschitz`].
pub const LIPSCHITZ_SAMPLE_PAIRS: usize = 10;

/// ChaCha8 generator for `(seed, stream)`. Streams separate independent
/// consumers of one seed: 0 initial points, 1 optimizer noise, 2 synthetic
/// targets, 3 Lipschitz sampling.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` i.i.d. draws from `N(0, std²)`.
pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize, std: f64) -> Result<Vec<f64>> {
    let normal = Normal::new(0.0, std)
        .map_err(|e| Error::invalid("std", format!("{e} (got {std})")))?;
    Ok((0..n).map(|_| normal.sample(rng)).collect())
}

/// Reproducible Gaussian starting point with mean zero.
pub fn random_init(n: usize, std: f64, seed: u64) -> Result<crate::linalg::Vector> {
    if n == 0 {
        return Err(Error::invalid("n", "dimension must be at least 1"));
    }
    if !(std > 0.0 && std.is_finite()) {
        return Err(Error::invalid(
            "std",
            format!("must be positive and finite, got {std}"),
        ));
    }
    let mut rng = seeded_rng(seed, 0);
    crate::linalg::Vector::new(gaussian_vec(&mut rng, n, std)?)
}

/// Rough Lipschitz constants around `x0`, each padded by a factor of 2.
///
/// `M` is twice the spectral radius of `∇²f(x0)`. `L` is twice the largest
/// ratio `‖∇²f(x) − ∇²f(y)‖₂ / ‖x − y‖` over [`LIPSCHITZ_SAMPLE_PAIRS`]
/// pairs drawn from `N(x0, σ²I)` with `σ = 10⁻²·max(1, ‖x0‖∞)`.
pub fn estimate_lipschitz<O: Objective + ?Sized>(
    obj: &O,
    x0: &[f64],
    seed: u64,
) -> Result<Lipschitz> {
    let h0 = obj.hessian(x0)?;
    let gradient = 2.0 * jacobi_eigendecompose(&h0)?.max_abs_eigenvalue();

    let scale = 1e-2 * x0.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let mut rng = seeded_rng(seed, 3);
    let n = obj.dim();
    let mut ratio = 0.0_f64;
    for _ in 0..LIPSCHITZ_SAMPLE_PAIRS {
        let dx = gaussian_vec(&mut rng, n, scale)?;
        let dy = gaussian_vec(&mut rng, n, scale)?;
        let x: Vec<f64> = x0.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let y: Vec<f64> = x0.iter().zip(&dy).map(|(a, b)| a + b).collect();
        let dist = norm(&dx.iter().zip(&dy).map(|(a, b)| a - b).collect::<Vec<_>>());
        if dist == 0.0 {
            continue;
        }
        let diff = obj.hessian(&x)?.sub(&obj.hessian(&y)?)?;
        let spectral = jacobi_eigendecompose(&diff)?.max_abs_eigenvalue();
        ratio = ratio.max(spectral / dist);
    }
    Ok(Lipschitz {
        gradient,
        hessian: 2.0 * ratio,
    })
}
