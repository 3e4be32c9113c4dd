use nalgebra::{DMatrix, DVector};
use ncn::linalg::Vector;
use ncn::optimizer::{
    armijo_holds, armijo_slack, gd_run, ncn_run, Method, OptimizerConfig, RunTrace, Termination,
};
use ncn::problems::{
    estimate_lipschitz, random_init, DiagonalQuadratic, MatrixFactorization, Objective,
    QuadraticSaddle, TwoWell,
};
use proptest::prelude::*;

/// `gᵀ|H|ₘ⁻¹g` from nalgebra's eigensolver.
fn oracle_decrement<O: Objective>(obj: &O, x: &[f64], m: f64) -> f64 {
    let n = obj.dim();
    let h = obj.hessian(x).unwrap();
    let h = DMatrix::from_fn(n, n, |i, j| h.get(i, j));
    let g = DVector::from_column_slice(&obj.gradient(x).unwrap());
    let eig = h.symmetric_eigen();
    let c = eig.eigenvectors.transpose() * g;
    c.iter()
        .zip(eig.eigenvalues.iter())
        .map(|(ci, li)| ci * ci / li.abs().max(m))
        .sum()
}

/// `dec_tol` bounds the relative disagreement with the oracle decrement;
/// `None` skips that comparison, for Hessians with eigenvalues near zero
/// where `1/max(|λ|, m)` turns eigensolver rounding into O(1) differences.
fn check_trace<O: Objective>(
    obj: &O,
    trace: &RunTrace,
    cfg: &OptimizerConfig,
    dec_tol: Option<f64>,
) {
    for w in trace.records.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        assert!(cur.grad_norm >= 0.0);
        assert!(cur.step_size > 0.0 && cur.step_size <= 1.0);
        let expected_eta = cfg.beta.powi(cur.n_backtracks as i32);
        assert!((cur.step_size - expected_eta).abs() <= 1e-12 * expected_eta);

        // Armijo certificate, re-derived from the stored iterate.
        let f_prev = obj.value(&prev.x);
        assert_eq!(f_prev, prev.f_value);
        if let Some(tol) = dec_tol {
            let decrement = match trace.method {
                Method::Ncn => oracle_decrement(obj, &prev.x, cfg.m),
                Method::Gd => prev.grad_norm * prev.grad_norm,
            };
            assert!(
                (decrement - cur.decrement).abs() <= tol * decrement.max(1e-300),
                "decrement {decrement} vs {}",
                cur.decrement
            );
        }
        assert!(armijo_holds(f_prev, cur.f_trial, cfg.alpha, cur.step_size, cur.decrement));

        // Monotone descent away from perturbations.
        if !cur.noise_injected {
            assert_eq!(cur.f_trial, cur.f_value);
            assert!(cur.f_value <= prev.f_value + armijo_slack(prev.f_value));
        }
    }
}

fn saddle_cfg() -> OptimizerConfig {
    OptimizerConfig {
        epsilon: 1e-10,
        m: 1e-6,
        max_outer_iters: 40,
        ..Default::default()
    }
}

fn two_well_cfg(seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        m: 0.1,
        lipschitz_m: 3.0,
        lipschitz_l: 6.6,
        seed,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn two_well_traces_are_certified(x1 in -2.0..2.0_f64, x2 in -2.0..2.0_f64, seed in 0u64..100) {
        let x0 = Vector::new(vec![x1, x2]).unwrap();
        let cfg = two_well_cfg(seed);
        for trace in [ncn_run(&x0, &TwoWell, &cfg).unwrap(), gd_run(&x0, &TwoWell, &cfg).unwrap()] {
            check_trace(&TwoWell, &trace, &cfg, Some(1e-8));
        }
    }

    #[test]
    fn indefinite_quadratic_traces_are_certified(
        d in prop::collection::vec(prop_oneof![-5.0..-0.1_f64, 0.1..5.0_f64], 4),
        x in prop::collection::vec(-1.0..1.0_f64, 4),
    ) {
        let obj = DiagonalQuadratic::new(Vector::new(d).unwrap());
        let x0 = Vector::new(x).unwrap();
        let cfg = OptimizerConfig { max_outer_iters: 30, m: 1e-3, ..Default::default() };
        let trace = ncn_run(&x0, &obj, &cfg).unwrap();
        check_trace(&obj, &trace, &cfg, Some(1e-8));
        let trace = gd_run(&x0, &obj, &cfg).unwrap();
        check_trace(&obj, &trace, &cfg, Some(1e-8));
    }

    #[test]
    fn saddle_always_takes_unit_steps(
        lambda in 1e-4..1.0_f64,
        x1 in -1.0..1.0_f64,
        x2 in prop_oneof![-1e-3..-1e-12_f64, 1e-12..1e-3_f64],
    ) {
        // L = 0 here, so the unit-step region is the whole plane.
        let q = QuadraticSaddle::new(lambda).unwrap();
        let trace = ncn_run(&Vector::new(vec![x1, x2]).unwrap(), &q, &saddle_cfg()).unwrap();
        check_trace(&q, &trace, &saddle_cfg(), Some(1e-8));
        prop_assert!(trace.records[1..].iter().all(|r| r.step_size == 1.0));
    }

    #[test]
    fn ncn_doubles_the_unstable_coordinate(lambda in 1e-4..1.0_f64, gamma in 1e-12..1e-2_f64) {
        let q = QuadraticSaddle::new(lambda).unwrap();
        let trace = ncn_run(&Vector::new(vec![0.7, gamma]).unwrap(), &q, &saddle_cfg()).unwrap();
        for w in trace.records.windows(2) {
            let ratio = w[1].x[1] / w[0].x[1];
            prop_assert!((ratio - 2.0).abs() <= 4.0 * f64::EPSILON);
            prop_assert_eq!(w[1].x[0], 0.0);
        }
        // Steps until |x₂| ≥ 1 match ⌈ln(1/γ)/ln 2⌉.
        let escape = trace.records.iter().position(|r| r.x[1].abs() >= 1.0).unwrap();
        prop_assert_eq!(escape as f64, ((1.0 / gamma).ln() / 2f64.ln()).ceil());
    }
}

#[test]
fn noise_branch_from_exact_saddle() {
    let x0 = Vector::zeros(2);
    for seed in 0..20 {
        let cfg = two_well_cfg(seed);
        let trace = ncn_run(&x0, &TwoWell, &cfg).unwrap();
        assert_eq!(trace.termination, Termination::Converged, "seed {seed}");
        let bound = cfg.noise_acceptance_bound(2);
        let noisy: Vec<_> = trace.records.iter().filter(|r| r.noise_injected).collect();
        assert!(!noisy.is_empty());
        assert!(noisy.iter().all(|r| r.grad_norm <= bound && r.n_noise_draws >= 1));
        check_trace(&TwoWell, &trace, &cfg, Some(1e-8));
        let x = &trace.final_x;
        assert!((x[0].abs() - 1.0).abs() <= 1e-6 && x[1].abs() <= 1e-6);
    }
}

#[test]
fn runs_are_deterministic() {
    let x0 = Vector::zeros(2);
    let cfg = two_well_cfg(17);
    let a = ncn_run(&x0, &TwoWell, &cfg).unwrap();
    let b = ncn_run(&x0, &TwoWell, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv_string(), b.to_csv_string());
    let c = ncn_run(&x0, &TwoWell, &two_well_cfg(18)).unwrap();
    assert_ne!(a.final_x, c.final_x);
}

#[test]
fn resample_cap_is_reported() {
    // An acceptance bound below any attainable gradient norm: tiny M/m
    // with ε so small that the accepted radius is smaller than the noise.
    let cfg = OptimizerConfig {
        m: 1.0,
        lipschitz_m: 1e-6,
        epsilon: 1e-12,
        max_resample_draws: 5,
        ..Default::default()
    };
    let trace = ncn_run(&Vector::zeros(2), &TwoWell, &cfg).unwrap();
    assert_eq!(trace.termination, Termination::ResampleCapExceeded);
    assert_eq!(trace.last().n_noise_draws, 5);
    assert!(!trace.last().noise_injected);
}

#[test]
fn gradient_descent_crawls_off_an_ill_conditioned_saddle() {
    let q = QuadraticSaddle::new(1e-5).unwrap();
    let cfg = OptimizerConfig {
        epsilon: 1e-300,
        max_outer_iters: 100_000,
        ..Default::default()
    };
    let trace = gd_run(&Vector::new(vec![0.0, 0.1]).unwrap(), &q, &cfg).unwrap();
    assert_eq!(trace.termination, Termination::MaxIters);
    assert_eq!(trace.steps(), 100_000);
    assert!(trace.records.iter().all(|r| r.grad_norm < 1.0));
    assert!(trace.records[1..].iter().all(|r| r.step_size == 1.0));
}

#[test]
fn factorization_ends_with_nonnegative_curvature() {
    let target = MatrixFactorization::synthetic_target(10, 10, 1, 1000, 0.0).unwrap();
    let obj = MatrixFactorization::new(target, 1).unwrap();
    let x0 = random_init(obj.dim(), 100.0, 0).unwrap();
    let lip = estimate_lipschitz(&obj, &x0, 0).unwrap();
    let cfg = OptimizerConfig {
        epsilon: 1e-12,
        m: 1e-12,
        lipschitz_m: lip.gradient,
        lipschitz_l: lip.hessian,
        ..Default::default()
    };
    let trace = ncn_run(&x0, &obj, &cfg).unwrap();
    let last = trace.last();
    assert!(last.min_hess_eig >= -1e-6, "{}", last.min_hess_eig);
    assert!(last.f_value <= 1e-20, "{}", last.f_value);
    // The gradient stalls at its rounding floor, a little above 1e-12; see
    // the guide's chapter on experiments.
    assert!(last.grad_norm <= 1e-8);
    assert!(matches!(trace.termination, Termination::Converged | Termination::MaxIters));
    check_trace(&obj, &trace, &cfg, None);
}
