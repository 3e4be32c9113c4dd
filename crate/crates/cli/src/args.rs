use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ncn::io::parse_vector;
use ncn::theory::TheoryConstants;
use serde_json::Value;

use crate::bounds::{bounds_json, cmd_bounds, constants_with_overlay};
use crate::escape::{default_gammas, escape_table, write_escape_csv, DEFAULT_LAMBDAS};
use crate::run::{cmd_run, summary_path};
use crate::spec::{ExperimentSpec, InitSpec, MethodChoice, ProblemSpec};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "ncn", version, about = "Nonconvex Newton experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run NCN and/or gradient descent on one problem.
    Run(RunArgs),
    /// Iterations to leave [-1, 1]² from (γ, γ) on the planar saddle.
    EscapeTable(EscapeArgs),
    /// Print the iteration bounds for a set of constants as JSON.
    Bounds(BoundsArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ProblemKind {
    #[value(alias = "quad_saddle")]
    QuadSaddle,
    #[value(alias = "diag_quad")]
    DiagQuad,
    Matfac,
    #[value(alias = "two_well")]
    TwoWell,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    Ncn,
    Gd,
    Both,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub problem: Option<ProblemKind>,
    #[arg(long, value_enum, default_value = "both")]
    pub method: MethodArg,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Eigenvalue floor of the PT-inverse.
    #[arg(long)]
    pub m: Option<f64>,
    /// Gradient Lipschitz constant (derived from the problem if omitted).
    #[arg(long)]
    pub lip_m: Option<f64>,
    /// Hessian Lipschitz constant (derived from the problem if omitted).
    #[arg(long)]
    pub lip_l: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub init_std: f64,
    /// Explicit starting point, comma or space separated.
    #[arg(long, conflicts_with = "init_file")]
    pub init: Option<String>,
    #[arg(long)]
    pub init_file: Option<PathBuf>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Output prefix: writes <out>_ncn.csv, <out>_gd.csv, <out>_summary.json.
    #[arg(long, default_value = "ncn_run")]
    pub out: PathBuf,
    /// JSON spec (or a previous run summary) laid over the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// quad-saddle: curvature of the unstable direction.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// diag-quad: inline coefficients.
    #[arg(long, conflicts_with = "diag_file")]
    pub diag: Option<String>,
    #[arg(long)]
    pub diag_file: Option<PathBuf>,
    /// matfac: target matrix file (synthetic target if omitted).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub rows: usize,
    #[arg(long, default_value_t = 10)]
    pub cols: usize,
    #[arg(long, default_value_t = 1)]
    pub rank: usize,
    #[arg(long)]
    pub target_seed: Option<u64>,
    #[arg(long, default_value_t = 0.0)]
    pub target_noise: f64,
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    parse_vector(&s.replace(',', " "))
        .map(|v| v.to_vec())
        .map_err(|e| CliError::Config(format!("--{what}: {e}")))
}

fn read_json(path: &PathBuf) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl RunArgs {
    pub fn to_spec(&self) -> Result<ExperimentSpec, CliError> {
        let d = ExperimentSpec::default();
        let problem = match self.problem {
            None => None,
            Some(ProblemKind::QuadSaddle) => Some(ProblemSpec::QuadSaddle { lambda: self.lambda }),
            Some(ProblemKind::DiagQuad) => Some(ProblemSpec::DiagQuad {
                d: self.diag.as_deref().map(|s| parse_list(s, "diag")).transpose()?,
                d_file: self.diag_file.clone(),
            }),
            Some(ProblemKind::Matfac) => Some(ProblemSpec::Matfac {
                matrix_file: self.matrix.clone(),
                rows: self.rows,
                cols: self.cols,
                rank: self.rank,
                target_seed: self.target_seed,
                target_noise: self.target_noise,
            }),
            Some(ProblemKind::TwoWell) => Some(ProblemSpec::TwoWell),
        };
        let init = match (&self.init, &self.init_file) {
            (Some(s), _) => InitSpec::Values { x: parse_list(s, "init")? },
            (None, Some(path)) => InitSpec::File { path: path.clone() },
            (None, None) => InitSpec::Random { std: self.init_std },
        };
        let spec = ExperimentSpec {
            problem,
            method: match self.method {
                MethodArg::Ncn => MethodChoice::Ncn,
                MethodArg::Gd => MethodChoice::Gd,
                MethodArg::Both => MethodChoice::Both,
            },
            alpha: self.alpha.unwrap_or(d.alpha),
            beta: self.beta.unwrap_or(d.beta),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            m: self.m.unwrap_or(d.m),
            lip_m: self.lip_m,
            lip_l: self.lip_l,
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            seed: self.seed,
            init,
            out: self.out.clone(),
            ..d
        };
        match &self.config {
            Some(path) => spec.overlaid(read_json(path)?),
            None => Ok(spec),
        }
    }
}

#[derive(Debug, Args)]
pub struct EscapeArgs {
    /// Comma-separated λ values (default 1, 0.1, 0.01, 1e-3, 1e-4).
    #[arg(long)]
    pub lambdas: Option<String>,
    /// Comma-separated γ values (default 1e-1 … 1e-20).
    #[arg(long)]
    pub gammas: Option<String>,
    #[arg(long, default_value_t = 1e-12)]
    pub m: f64,
    /// CSV output path; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub lip_m: Option<f64>,
    #[arg(long)]
    pub lip_l: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long)]
    pub gamma_c: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    /// Problem dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Target failure probability.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub f0_gap: Option<f64>,
    /// JSON object of constants laid over the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl BoundsArgs {
    pub fn to_constants(&self) -> Result<TheoryConstants, CliError> {
        let d = TheoryConstants::default();
        let c = TheoryConstants {
            m: self.m.unwrap_or(d.m),
            lipschitz_m: self.lip_m.unwrap_or(d.lipschitz_m),
            lipschitz_l: self.lip_l.unwrap_or(d.lipschitz_l),
            alpha: self.alpha.unwrap_or(d.alpha),
            beta: self.beta.unwrap_or(d.beta),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            zeta: self.zeta.unwrap_or(d.zeta),
            gamma_c: self.gamma_c.unwrap_or(d.gamma_c),
            xi: self.xi.unwrap_or(d.xi),
            n: self.n.unwrap_or(d.n),
            p: self.p.unwrap_or(d.p),
            f0_gap: self.f0_gap.unwrap_or(d.f0_gap),
        };
        match &self.config {
            Some(path) => constants_with_overlay(&c, read_json(path)?),
            None => Ok(c),
        }
    }
}

/// Runs a parsed command line and returns the process exit code. Messages
/// go to stderr; `bounds` and a stdout escape table go to stdout.
pub fn dispatch(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run(args) => {
            let outcome = cmd_run(&args.to_spec()?)?;
            for r in &outcome.summary.results {
                match &r.error {
                    Some(e) => eprintln!("{}: solver error: {e}", r.method.as_str()),
                    None => eprintln!(
                        "{}: {:?} after {} steps, f = {:e}",
                        r.method.as_str(),
                        r.termination.expect("set when no error"),
                        r.steps,
                        r.final_f.unwrap_or(f64::NAN)
                    ),
                }
            }
            eprintln!("summary: {}", summary_path(&outcome.summary.spec.out).display());
            Ok(outcome.exit_code)
        }
        Command::EscapeTable(args) => {
            let lambdas = match &args.lambdas {
                Some(s) => parse_list(s, "lambdas")?,
                None => DEFAULT_LAMBDAS.to_vec(),
            };
            let gammas = match &args.gammas {
                Some(s) => parse_list(s, "gammas")?,
                None => default_gammas(),
            };
            let rows = escape_table(&lambdas, &gammas, args.m).map_err(|e| CliError::Config(e.to_string()))?;
            match &args.out {
                Some(path) => {
                    let file = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    write_escape_csv(&rows, std::io::BufWriter::new(file))
                }
                None => write_escape_csv(&rows, std::io::stdout().lock()),
            }
            .map_err(|e| CliError::Io(e.to_string()))?;
            Ok(0)
        }
        Command::Bounds(args) => {
            let b = cmd_bounds(&args.to_constants()?)?;
            println!("{}", bounds_json(&b));
            Ok(0)
        }
    }
}
