//! Nonconvex Newton (NCN) optimization.
//!
//! NCN replaces the Hessian in Newton's method by its PT-inverse: the
//! eigenvalues are replaced by their absolute values, floored at `m`, and
//! inverted. Near a saddle this turns the Newton step into an ascent along
//! negative-curvature directions at a rate independent of their magnitude.
//!
//! ```
//! use ncn::linalg::Vector;
//! use ncn::optimizer::{ncn_step, OptimizerConfig};
//! use ncn::problems::QuadraticSaddle;
//!
//! let f = QuadraticSaddle::new(0.1)?;
//! let cfg = OptimizerConfig { m: 1e-6, ..Default::default() };
//! let (x, record) = ncn_step(&Vector::new(vec![0.3, 0.01])?, &f, &cfg)?;
//! assert_eq!(record.step_size, 1.0);
//! assert_eq!(x[0], 0.0);
//! assert!((x[1] - 0.02).abs() < 1e-17);
//! # Ok::<(), ncn::Error>(())
//! ```

pub mod error;
pub mod io;
pub mod linalg;
pub mod optimizer;
pub mod problems;
pub mod theory;

pub use error::{Error, Result};
pub use linalg::{EigenDecomposition, Matrix, PTInverse, SymmetricMatrix, Vector};
pub use optimizer::{
    gd_run, gd_step, ncn_run, ncn_step, IterationRecord, OptimizerConfig, RunTrace, Termination,
};
pub use problems::Objective;

#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/pt_inverse.md")]
    pub mod pt_inverse {}
    #[doc = include_str!("../../../book/src/ncn_method.md")]
    pub mod ncn_method {}
    #[doc = include_str!("../../../book/src/problems.md")]
    pub mod problems {}
    #[doc = include_str!("../../../book/src/theory.md")]
    pub mod theory {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub mod experiments {}
}
