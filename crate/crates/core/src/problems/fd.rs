use crate::error::{Error, Result};

use super::Objective;

/// Max-norm discrepancies between analytic derivatives and central
/// differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdErrors {
    pub grad_error: f64,
    pub hess_error: f64,
}

/// Compares the analytic gradient against central differences of `value`
/// and the analytic Hessian against central differences of the gradient,
/// both with step `h`.
pub fn finite_difference_check<O: Objective + ?Sized>(
    obj: &O,
    x: &[f64],
    h: f64,
) -> Result<FdErrors> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("h", format!("must be positive, got {h}")));
    }
    let n = obj.dim();
    let grad = obj.gradient(x)?;
    let hess = obj.hessian(x)?;

    let mut probe = x.to_vec();
    let mut g_plus = vec![0.0; n];
    let mut g_minus = vec![0.0; n];
    let mut grad_error = 0.0_f64;
    let mut hess_error = 0.0_f64;
    for j in 0..n {
        let xj = x[j];
        probe[j] = xj + h;
        let f_plus = obj.value(&probe);
        obj.gradient_into(&probe, &mut g_plus);
        probe[j] = xj - h;
        let f_minus = obj.value(&probe);
        obj.gradient_into(&probe, &mut g_minus);
        probe[j] = xj;

        let fd = (f_plus - f_minus) / (2.0 * h);
        if !fd.is_finite() {
            return Err(Error::NonFiniteInput("finite difference"));
        }
        grad_error = grad_error.max((fd - grad[j]).abs());
        for i in 0..n {
            let fd = (g_plus[i] - g_minus[i]) / (2.0 * h);
            if !fd.is_finite() {
                return Err(Error::NonFiniteInput("finite difference"));
            }
            hess_error = hess_error.max((fd - hess.get(i, j)).abs());
        }
    }
    Ok(FdErrors {
        grad_error,
        hess_error,
    })
}
