use std::path::PathBuf;

use ncn::io::{load_matrix, load_vector};
use ncn::linalg::Vector;
use ncn::optimizer::OptimizerConfig;
use ncn::problems::{
    estimate_lipschitz, random_init, DiagonalQuadratic, Lipschitz, MatrixFactorization, Objective,
    QuadraticSaddle, TwoWell,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    QuadSaddle {
        lambda: f64,
    },
    DiagQuad {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d_file: Option<PathBuf>,
    },
    Matfac {
        /// Target matrix file; a synthetic rank-`rank` target is used when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix_file: Option<PathBuf>,
        #[serde(default = "ten")]
        rows: usize,
        #[serde(default = "ten")]
        cols: usize,
        #[serde(default = "one")]
        rank: usize,
        /// Seed of the synthetic target; defaults to the run seed.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target_seed: Option<u64>,
        #[serde(default)]
        target_noise: f64,
    },
    TwoWell,
}

fn ten() -> usize {
    10
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Ncn,
    Gd,
    #[default]
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    /// `N(0, std²)` entries drawn from the run seed.
    Random { std: f64 },
    Values { x: Vec<f64> },
    File { path: PathBuf },
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Random { std: 1.0 }
    }
}

/// Everything needed to reproduce one comparative run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub problem: Option<ProblemSpec>,
    pub method: MethodChoice,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub m: f64,
    /// Gradient Lipschitz constant; derived from the problem when absent.
    pub lip_m: Option<f64>,
    /// Hessian Lipschitz constant; derived from the problem when absent.
    pub lip_l: Option<f64>,
    pub max_iters: usize,
    pub max_resample_draws: usize,
    pub min_step: f64,
    pub neg_curvature_tol: f64,
    pub projection_threshold: f64,
    pub seed: u64,
    pub init: InitSpec,
    /// Output path prefix.
    pub out: PathBuf,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let c = OptimizerConfig::default();
        ExperimentSpec {
            problem: None,
            method: MethodChoice::Both,
            alpha: c.alpha,
            beta: c.beta,
            epsilon: c.epsilon,
            m: c.m,
            lip_m: None,
            lip_l: None,
            max_iters: c.max_outer_iters,
            max_resample_draws: c.max_resample_draws,
            min_step: c.min_step,
            neg_curvature_tol: c.neg_curvature_tol,
            projection_threshold: c.projection_threshold,
            seed: 0,
            init: InitSpec::default(),
            out: PathBuf::from("ncn_run"),
        }
    }
}

/// A spec turned into a concrete objective, starting point and config.
pub struct Resolved {
    /// The input spec with every derived value (Lipschitz constants,
    /// target seed) filled in, so that re-running it repeats the run.
    pub spec: ExperimentSpec,
    pub objective: Box<dyn Objective>,
    pub x0: Vector,
    pub config: OptimizerConfig,
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl ExperimentSpec {
    /// Reads a spec from JSON, accepting either a bare spec or a run
    /// summary holding one under `"spec"`.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let v: Value = serde_json::from_str(text).map_err(config_err)?;
        Self::from_value(unwrap_summary(v))
    }

    pub fn from_value(v: Value) -> Result<Self, CliError> {
        serde_json::from_value(v).map_err(config_err)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("spec serializes")
    }

    /// `self` with the fields of `overlay` (a JSON spec or summary) laid
    /// over it.
    pub fn overlaid(&self, overlay: Value) -> Result<Self, CliError> {
        let mut base = self.to_value();
        merge(&mut base, unwrap_summary(overlay));
        Self::from_value(base)
    }

    pub fn optimizer_config(&self, lip: Lipschitz) -> OptimizerConfig {
        OptimizerConfig {
            alpha: self.alpha,
            beta: self.beta,
            epsilon: self.epsilon,
            m: self.m,
            lipschitz_m: lip.gradient,
            lipschitz_l: lip.hessian,
            max_outer_iters: self.max_iters,
            max_resample_draws: self.max_resample_draws,
            min_step: self.min_step,
            seed: self.seed,
            neg_curvature_tol: self.neg_curvature_tol,
            projection_threshold: self.projection_threshold,
        }
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let mut spec = self.clone();
        let problem = spec
            .problem
            .clone()
            .ok_or_else(|| config_err("no problem given (use --problem or a config file)"))?;

        let objective: Box<dyn Objective> = match &problem {
            ProblemSpec::QuadSaddle { lambda } => {
                Box::new(QuadraticSaddle::new(*lambda).map_err(config_err)?)
            }
            ProblemSpec::DiagQuad { d, d_file } => {
                let d = match (d, d_file) {
                    (Some(d), None) => Vector::new(d.clone()).map_err(config_err)?,
                    (None, Some(path)) => load_vector(path).map_err(config_err)?,
                    _ => return Err(config_err("diag_quad needs exactly one of d and d_file")),
                };
                Box::new(DiagonalQuadratic::new(d))
            }
            ProblemSpec::Matfac {
                matrix_file,
                rows,
                cols,
                rank,
                target_seed,
                target_noise,
            } => {
                let target = match matrix_file {
                    Some(path) => load_matrix(path).map_err(config_err)?,
                    None => {
                        let seed = target_seed.unwrap_or(spec.seed);
                        spec.problem = Some(ProblemSpec::Matfac {
                            matrix_file: None,
                            rows: *rows,
                            cols: *cols,
                            rank: *rank,
                            target_seed: Some(seed),
                            target_noise: *target_noise,
                        });
                        MatrixFactorization::synthetic_target(*rows, *cols, *rank, seed, *target_noise)
                            .map_err(config_err)?
                    }
                };
                Box::new(MatrixFactorization::new(target, *rank).map_err(config_err)?)
            }
            ProblemSpec::TwoWell => Box::new(TwoWell),
        };

        let n = objective.dim();
        let x0 = match &spec.init {
            InitSpec::Random { std } => random_init(n, *std, spec.seed).map_err(config_err)?,
            InitSpec::Values { x } => Vector::new(x.clone()).map_err(config_err)?,
            InitSpec::File { path } => load_vector(path).map_err(config_err)?,
        };
        if x0.dim() != n {
            return Err(config_err(format!(
                "initial point has dimension {}, problem needs {n}",
                x0.dim()
            )));
        }

        let lip = match (spec.lip_m, spec.lip_l) {
            (Some(gradient), Some(hessian)) => Lipschitz { gradient, hessian },
            (given_m, given_l) => {
                let derived = match objective.analytic_lipschitz() {
                    Some(l) => l,
                    None => estimate_lipschitz(objective.as_ref(), &x0, spec.seed)
                        .map_err(CliError::Solver)?,
                };
                Lipschitz {
                    gradient: given_m.unwrap_or(derived.gradient),
                    hessian: given_l.unwrap_or(derived.hessian),
                }
            }
        };
        spec.lip_m = Some(lip.gradient);
        spec.lip_l = Some(lip.hessian);

        let config = spec.optimizer_config(lip);
        config.validate().map_err(config_err)?;
        Ok(Resolved {
            spec,
            objective,
            x0,
            config,
        })
    }
}

fn unwrap_summary(v: Value) -> Value {
    match v {
        Value::Object(mut map) if map.contains_key("spec") && map.contains_key("results") => {
            map.remove("spec").expect("checked above")
        }
        other => other,
    }
}

/// Recursive object merge. A tagged object whose `"kind"` changes is
/// replaced outright, since its remaining fields belong to the old kind.
fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            let kind_changed = matches!(
                (b.get("kind"), o.get("kind")),
                (Some(x), Some(y)) if x != y
            );
            if kind_changed {
                *b = o;
                return;
            }
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
