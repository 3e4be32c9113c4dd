use nalgebra::DMatrix;
use ncn::linalg::{Matrix, Vector};
use ncn::problems::{
    finite_difference_check, DiagonalQuadratic, MatrixFactorization, Objective, QuadraticSaddle,
    TwoWell,
};
use proptest::prelude::*;

const H: f64 = 1e-5;

fn target(rows: usize, cols: usize, rank: usize, seed: u64) -> Matrix {
    MatrixFactorization::synthetic_target(rows, cols, rank, seed, 0.0).unwrap()
}

/// Commutation matrix `K` with `vec(Aᵀ) = K·vec(A)` for an `rows × cols`
/// matrix `A`, column-major.
fn commutation(rows: usize, cols: usize) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(rows * cols, rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            // A[i, j] is at i + rows·j in vec(A) and at j + cols·i in vec(Aᵀ).
            k[(j + cols * i, i + rows * j)] = 1.0;
        }
    }
    k
}

/// Hessian of `½‖UVᵀ − M‖²` assembled from Kronecker products:
/// `∇²_UU = VᵀV ⊗ I_l`, `∇²_VV = UᵀU ⊗ I_n`,
/// `∇²_UV = (Vᵀ ⊗ U)·K_{n,r} + I_r ⊗ E`.
fn kronecker_hessian(obj: &MatrixFactorization, x: &[f64]) -> DMatrix<f64> {
    let (u, v) = obj.unpack(x).unwrap();
    let to_na = |m: &Matrix| DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j));
    let (u, v, m) = (to_na(&u), to_na(&v), to_na(obj.target()));
    let (l, n, r) = (u.nrows(), v.nrows(), u.ncols());
    let e = &u * v.transpose() - m;
    let uu = (v.transpose() * &v).kronecker(&DMatrix::identity(l, l));
    let vv = (u.transpose() * &u).kronecker(&DMatrix::identity(n, n));
    let uv = v.transpose().kronecker(&u) * commutation(n, r) + DMatrix::identity(r, r).kronecker(&e);

    let d = r * (l + n);
    let mut h = DMatrix::zeros(d, d);
    h.view_mut((0, 0), (l * r, l * r)).copy_from(&uu);
    h.view_mut((l * r, l * r), (n * r, n * r)).copy_from(&vv);
    h.view_mut((0, l * r), (l * r, n * r)).copy_from(&uv);
    h.view_mut((l * r, 0), (n * r, l * r)).copy_from(&uv.transpose());
    h
}

#[test]
fn factorization_hessian_matches_kronecker_assembly() {
    for seed in 0..5 {
        let obj = MatrixFactorization::new(target(5, 5, 2, seed), 2).unwrap();
        let x = ncn::problems::random_init(obj.dim(), 1.0, 10 + seed).unwrap();
        let ours = obj.hessian(&x).unwrap();
        let oracle = kronecker_hessian(&obj, &x);
        let scale = oracle.amax().max(1.0);
        for i in 0..obj.dim() {
            for j in 0..obj.dim() {
                let diff = (ours.get(i, j) - oracle[(i, j)]).abs();
                assert!(diff <= 1e-12 * scale, "seed {seed} ({i},{j}): {diff}");
            }
        }
    }
}

#[test]
fn kronecker_oracle_on_rectangular_targets() {
    let obj = MatrixFactorization::new(target(4, 7, 3, 9), 3).unwrap();
    let x = ncn::problems::random_init(obj.dim(), 0.7, 2).unwrap();
    let ours = obj.hessian(&x).unwrap();
    let oracle = kronecker_hessian(&obj, &x);
    for i in 0..obj.dim() {
        for j in 0..obj.dim() {
            assert!((ours.get(i, j) - oracle[(i, j)]).abs() <= 1e-12 * oracle.amax());
        }
    }
}

fn assert_fd<O: Objective>(obj: &O, x: &[f64], grad_tol: f64, hess_tol: f64) {
    let e = finite_difference_check(obj, x, H).unwrap();
    assert!(e.grad_error <= grad_tol, "{} grad {:e}", obj.name(), e.grad_error);
    assert!(e.hess_error <= hess_tol, "{} hess {:e}", obj.name(), e.hess_error);
}

#[test]
fn finite_differences_certify_every_problem() {
    let x2 = [0.37, -0.81];
    assert_fd(&QuadraticSaddle::new(0.01).unwrap(), &x2, 1e-8, 1e-8);
    assert_fd(&TwoWell, &x2, 1e-8, 1e-6);
    let d = DiagonalQuadratic::new(Vector::new(vec![3.0, -0.5, 1e-3, -2.0]).unwrap());
    assert_fd(&d, &[1.0, 2.0, -3.0, 0.5], 1e-8, 1e-8);

    let obj = MatrixFactorization::new(target(5, 5, 2, 3), 2).unwrap();
    let x = ncn::problems::random_init(obj.dim(), 1.0, 4).unwrap();
    assert_fd(&obj, &x, 1e-6, 1e-6);
}

proptest! {
    #[test]
    fn factorization_fd_random_points(seed in 0u64..1000, scale in 0.1..2.0_f64) {
        let obj = MatrixFactorization::new(target(5, 5, 2, seed), 2).unwrap();
        let x = ncn::problems::random_init(obj.dim(), scale, seed).unwrap();
        let e = finite_difference_check(&obj, &x, H).unwrap();
        prop_assert!(e.grad_error <= 1e-5 * (1.0 + scale.powi(3)));
        prop_assert!(e.hess_error <= 1e-5 * (1.0 + scale.powi(2)));
    }

    #[test]
    fn two_well_fd_random_points(x1 in -2.0..2.0_f64, x2 in -2.0..2.0_f64) {
        let e = finite_difference_check(&TwoWell, &[x1, x2], H).unwrap();
        prop_assert!(e.grad_error <= 1e-7);
        prop_assert!(e.hess_error <= 1e-6);
    }

    #[test]
    fn factorization_is_invariant_to_balanced_rescaling(seed in 0u64..1000, c in 0.1..10.0_f64) {
        let obj = MatrixFactorization::new(target(4, 6, 2, seed), 2).unwrap();
        let x = ncn::problems::random_init(obj.dim(), 1.0, seed).unwrap();
        let (u, v) = obj.unpack(&x).unwrap();
        let u2 = Matrix::from_fn(u.rows(), u.cols(), |i, k| c * u.get(i, k));
        let v2 = Matrix::from_fn(v.rows(), v.cols(), |j, k| v.get(j, k) / c);
        let f1 = obj.eval(&x).unwrap();
        let f2 = obj.eval(&obj.pack(&u2, &v2).unwrap()).unwrap();
        prop_assert!((f1 - f2).abs() <= 1e-12 * f1.max(1.0));
    }

    #[test]
    fn pack_then_unpack_is_identity(seed in 0u64..1000) {
        let obj = MatrixFactorization::new(target(3, 5, 2, seed), 2).unwrap();
        let x = ncn::problems::random_init(obj.dim(), 1.0, seed).unwrap();
        let (u, v) = obj.unpack(&x).unwrap();
        prop_assert_eq!(obj.pack(&u, &v).unwrap(), x);
    }
}

#[test]
fn saddle_hessian_is_constant() {
    let q = QuadraticSaddle::new(0.3).unwrap();
    let a = q.hessian(&[5.0, -7.0]).unwrap();
    let b = q.hessian(&[0.0, 0.0]).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.get(0, 0), 1.0);
    assert_eq!(a.get(1, 1), -0.3);
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Twenty gradient points and ten Hessian points per problem, with the
/// tolerances scaled by the size of the analytic derivative.
fn certify_at_random_points<O: Objective>(obj: &O, std: f64, seed: u64) {
    for i in 0..20 {
        let x = ncn::problems::random_init(obj.dim(), std, seed * 100 + i).unwrap();
        let e = finite_difference_check(obj, &x, H).unwrap();
        let g = obj.gradient(&x).unwrap();
        assert!(e.grad_error <= 1e-6 * (1.0 + max_abs(&g)), "{} grad {:e}", obj.name(), e.grad_error);
        if i < 10 {
            let h = obj.hessian(&x).unwrap();
            assert!(e.hess_error <= 1e-5 * (1.0 + h.max_abs()), "{} hess {:e}", obj.name(), e.hess_error);
        }
    }
}

#[test]
fn derivative_invariants_for_every_problem_type() {
    certify_at_random_points(&QuadraticSaddle::new(0.05).unwrap(), 1.0, 1);
    certify_at_random_points(&TwoWell, 1.0, 2);
    certify_at_random_points(
        &DiagonalQuadratic::new(Vector::new(vec![1.0, -2.0, 0.5, -1e-2, 4.0]).unwrap()),
        1.0,
        3,
    );
    // Dimension r(l + n) = 40.
    certify_at_random_points(&MatrixFactorization::new(target(10, 10, 2, 4), 2).unwrap(), 1.0, 4);
}

#[test]
fn documented_oracle_examples() {
    let q = QuadraticSaddle::new(0.3).unwrap();
    for x in [[0.0, 0.0], [1.5, -2.5], [-10.0, 3.0]] {
        assert!(finite_difference_check(&q, &x, H).unwrap().grad_error <= 1e-9);
    }
    assert!(finite_difference_check(&TwoWell, &[0.3, -0.7], H).unwrap().grad_error <= 1e-8);

    let obj = MatrixFactorization::new(target(3, 3, 1, 5), 1).unwrap();
    let x = ncn::problems::random_init(obj.dim(), 1.0, 6).unwrap();
    let e = finite_difference_check(&obj, &x, H).unwrap();
    assert!(e.hess_error <= 1e-6 * (1.0 + obj.hessian(&x).unwrap().max_abs()));
}

#[test]
fn balanced_rescaling_at_ten_percent() {
    let obj = MatrixFactorization::new(target(5, 4, 2, 8), 2).unwrap();
    let x = ncn::problems::random_init(obj.dim(), 1.0, 8).unwrap();
    let (u, v) = obj.unpack(&x).unwrap();
    let f = obj.eval(&x).unwrap();
    for t in [0.1, -0.1] {
        let s = 1.0 + t;
        let u2 = Matrix::from_fn(u.rows(), u.cols(), |i, k| s * u.get(i, k));
        let v2 = Matrix::from_fn(v.rows(), v.cols(), |j, k| v.get(j, k) / s);
        let f2 = obj.eval(&obj.pack(&u2, &v2).unwrap()).unwrap();
        assert!((f - f2).abs() <= 1e-12 * f.max(1.0));
    }
}
