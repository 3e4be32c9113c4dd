//! Closed-form constants and iteration bounds for the NCN method, plus the
//! gradient split into negative- and positive-curvature subspaces.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, gamma_ur};

use crate::error::{Error, Result};
use crate::linalg::EigenDecomposition;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoryConstants {
    pub m: f64,
    pub lipschitz_m: f64,
    pub lipschitz_l: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    /// Escape-rate slack; the guaranteed growth base is `2 − ζ`.
    pub zeta: f64,
    /// Noise-region constant.
    pub gamma_c: f64,
    /// Lower bound on the absolute Hessian eigenvalues at critical points.
    pub xi: f64,
    pub n: usize,
    /// Target failure probability.
    pub p: f64,
    /// Upper bound on `f(x0) − f(x*)`.
    pub f0_gap: f64,
}

impl Default for TheoryConstants {
    fn default() -> Self {
        TheoryConstants {
            m: 1.0,
            lipschitz_m: 1.0,
            lipschitz_l: 1.0,
            alpha: 0.1,
            beta: 0.9,
            epsilon: 1e-3,
            zeta: 0.5,
            gamma_c: 0.5,
            xi: 4.0,
            n: 2,
            p: 0.05,
            f0_gap: 1.0,
        }
    }
}

/// Conditions that do not invalidate the arithmetic but fall outside the
/// regime the bounds are stated for.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundFlags {
    /// `m ≥ ξ/2`: truncation may act on eigenvalues at critical points.
    pub m_not_below_half_xi: bool,
    /// `ε ≥ δ`: the accuracy target is coarser than the local neighborhood.
    pub epsilon_not_below_delta: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationBounds {
    pub delta: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    /// Number of noise rounds, `1 + log(S/p)/log(1/(1−q))`; the first
    /// factor of `k4`.
    pub k4_rounds: f64,
    pub s_max: f64,
    pub t_max: f64,
    pub k_total: f64,
    pub q_lower: f64,
    pub flags: BoundFlags,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
    }
}

fn unit_open(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in (0, 1), got {v}")))
    }
}

impl TheoryConstants {
    pub fn validate(&self) -> Result<()> {
        positive("m", self.m)?;
        positive("lipschitz_m", self.lipschitz_m)?;
        positive("lipschitz_l", self.lipschitz_l)?;
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::invalid(
                "alpha",
                format!("must lie in (0, 0.5), got {}", self.alpha),
            ));
        }
        unit_open("beta", self.beta)?;
        positive("epsilon", self.epsilon)?;
        unit_open("zeta", self.zeta)?;
        unit_open("gamma_c", self.gamma_c)?;
        positive("xi", self.xi)?;
        if self.n == 0 {
            return Err(Error::invalid("n", "dimension must be at least 1"));
        }
        unit_open("p", self.p)?;
        if !(self.f0_gap >= 0.0 && self.f0_gap.is_finite()) {
            return Err(Error::invalid(
                "f0_gap",
                format!("must be non-negative and finite, got {}", self.f0_gap),
            ));
        }
        Ok(())
    }
}

fn delta_unchecked(c: &TheoryConstants) -> f64 {
    let m2 = c.m * c.m;
    (m2 * (1.0 - 2.0 * c.alpha) / c.lipschitz_l).min(m2 / (5.0 * c.lipschitz_l))
}

/// Radius `δ = min{m²(1−2α)/L, m²/(5L)}` of the critical-point neighborhood.
pub fn compute_delta(c: &TheoryConstants) -> Result<f64> {
    positive("m", c.m)?;
    positive("lipschitz_l", c.lipschitz_l)?;
    if !(c.alpha > 0.0 && c.alpha < 0.5) {
        return Err(Error::invalid(
            "alpha",
            format!("must lie in (0, 0.5), got {}", c.alpha),
        ));
    }
    Ok(delta_unchecked(c))
}

/// `2(1 − Φ(1))·γ(n/2, n/2)/Γ(n/2)`, a lower bound on the probability that
/// one noise draw lands where the escape rate is guaranteed.
pub fn compute_q_lower(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "dimension must be at least 1"));
    }
    let a = n as f64 / 2.0;
    Ok(two_sided_tail() * gamma_lr(a, a))
}

/// `2(1 − Φ(1)) = P(|Z| ≥ 1) = Γ(½, ½)/Γ(½)`. The incomplete-gamma form
/// is used because it is accurate to a few ulps here.
fn two_sided_tail() -> f64 {
    gamma_ur(0.5, 0.5)
}

fn non_negative(name: &'static str, v: f64, what: &str) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(name, format!("{what} (evaluates to {v})")))
    }
}

/// Evaluates every iteration bound. Results are real-valued; callers may
/// round up.
pub fn compute_bounds(c: &TheoryConstants) -> Result<IterationBounds> {
    c.validate()?;
    let (m, big_m, l, ab, eps) = (c.m, c.lipschitz_m, c.lipschitz_l, c.alpha * c.beta, c.epsilon);
    let delta = delta_unchecked(c);

    let ratio = delta / (2.0 * eps);
    if ratio < 1.0 {
        return Err(Error::invalid(
            "k1",
            format!("needs epsilon ≤ delta/2 = {}, got epsilon = {eps}", delta / 2.0),
        ));
    }
    let k1 = 1.0 + ratio.ln() / 1.5_f64.ln();

    let k2 = 4.0 * big_m * big_m * c.f0_gap / (ab * m * delta * delta);
    let t_max = 2.0 / ab * (big_m / m).powi(3) + ab;

    let k3 = non_negative(
        "k3",
        (2.0 * m * m / (5.0 * l * eps)).log2().log2(),
        "log2(log2(2m²/(5Lε))) needs 2m²/(5Lε) ≥ 2",
    )?;

    let half = delta / 2.0;
    let s_max = m * m / (big_m * ab * half * half) * c.f0_gap;

    let q_lower = compute_q_lower(c.n)?;
    let k4_rounds = if s_max > 0.0 {
        non_negative(
            "k4",
            1.0 + (s_max / c.p).ln() / (1.0 / (1.0 - q_lower)).ln(),
            "1 + log(S/p)/log(1/(1−q)) is negative",
        )?
    } else {
        // No saddle can be visited when f0_gap = 0.
        0.0
    };
    let inner = non_negative(
        "k4",
        (5.0 * l / (2.0 * m * m * eps)).log2().log2(),
        "log2(log2(5L/(2m²ε))) needs 5L/(2m²ε) ≥ 2",
    )?;
    let k4 = k4_rounds * (inner + 2.0_f64.ln() / 1.5_f64.ln() + 1.0);

    let k_total = s_max * t_max * k1 + (s_max * t_max + 1.0) * k2 + k3 + s_max * k4;

    Ok(IterationBounds {
        delta,
        k1,
        k2,
        k3,
        k4,
        k4_rounds,
        s_max,
        t_max,
        k_total,
        q_lower,
        flags: BoundFlags {
            m_not_below_half_xi: m >= c.xi / 2.0,
            epsilon_not_below_delta: eps >= delta,
        },
    })
}

/// Norms of the gradient's components in the span of eigenvectors whose
/// eigenvalue is below `neg_threshold` and in the complementary span.
pub fn grad_projections(
    g: &[f64],
    reference: &EigenDecomposition,
    neg_threshold: f64,
) -> Result<(f64, f64)> {
    let coords = reference.to_eigenbasis(g)?;
    let (mut neg, mut pos) = (0.0, 0.0);
    for (c, &lambda) in coords.iter().zip(reference.eigenvalues()) {
        if lambda < neg_threshold {
            neg += c * c;
        } else {
            pos += c * c;
        }
    }
    Ok((neg.sqrt(), pos.sqrt()))
}
