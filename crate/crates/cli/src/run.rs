use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use ncn::optimizer::{gd_run, ncn_run, Method, ProjectionReference, RunTrace, Termination};
use serde::{Deserialize, Serialize};

use crate::spec::{ExperimentSpec, MethodChoice, Resolved};
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    /// `None` when the solver returned an error before finishing.
    pub termination: Option<Termination>,
    pub steps: usize,
    pub noise_events: usize,
    pub final_f: Option<f64>,
    pub final_grad_norm: Option<f64>,
    pub final_min_eig: Option<f64>,
    pub projection_reference: Option<ProjectionReference>,
    pub wall_time_s: f64,
    pub error: Option<String>,
    pub csv: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// The resolved spec; feeding it back through `--config` repeats the run.
    pub spec: ExperimentSpec,
    pub seed: u64,
    pub results: Vec<MethodSummary>,
}

impl RunSummary {
    pub fn result(&self, method: Method) -> Option<&MethodSummary> {
        self.results.iter().find(|r| r.method == method)
    }
}

pub struct RunOutcome {
    pub summary: RunSummary,
    pub traces: Vec<RunTrace>,
    pub exit_code: i32,
}

fn methods(choice: MethodChoice) -> &'static [Method] {
    match choice {
        MethodChoice::Ncn => &[Method::Ncn],
        MethodChoice::Gd => &[Method::Gd],
        MethodChoice::Both => &[Method::Ncn, Method::Gd],
    }
}

pub fn csv_path(prefix: &Path, method: Method) -> PathBuf {
    suffixed(prefix, &format!("_{}.csv", method.as_str()))
}

pub fn summary_path(prefix: &Path) -> PathBuf {
    suffixed(prefix, "_summary.json")
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Runs every requested method without touching the filesystem.
pub fn execute(spec: &ExperimentSpec) -> Result<RunOutcome, CliError> {
    let Resolved {
        spec,
        objective,
        x0,
        config,
    } = spec.resolve()?;
    let mut results = Vec::new();
    let mut traces = Vec::new();
    let mut exit_code = 0;

    for &method in methods(spec.method) {
        let start = Instant::now();
        let outcome = match method {
            Method::Ncn => ncn_run(&x0, objective.as_ref(), &config),
            Method::Gd => gd_run(&x0, objective.as_ref(), &config),
        };
        let wall_time_s = start.elapsed().as_secs_f64();
        let csv = csv_path(&spec.out, method);
        let summary = match outcome {
            Ok(trace) => {
                let last = trace.last();
                let error = match trace.termination {
                    Termination::StepUnderflow | Termination::ResampleCapExceeded => {
                        exit_code = 2;
                        Some(format!("{:?}", trace.termination))
                    }
                    Termination::Converged | Termination::MaxIters => None,
                };
                log::info!(
                    "{}: {:?} after {} steps, f = {:e}, |g| = {:e}",
                    method.as_str(),
                    trace.termination,
                    trace.steps(),
                    last.f_value,
                    last.grad_norm
                );
                let s = MethodSummary {
                    method,
                    termination: Some(trace.termination),
                    steps: trace.steps(),
                    noise_events: trace.noise_events(),
                    final_f: Some(last.f_value),
                    final_grad_norm: Some(last.grad_norm),
                    final_min_eig: Some(last.min_hess_eig),
                    projection_reference: Some(trace.projection_reference),
                    wall_time_s,
                    error,
                    csv,
                };
                traces.push(trace);
                s
            }
            Err(e) => {
                log::error!("{}: {e}", method.as_str());
                exit_code = 2;
                MethodSummary {
                    method,
                    termination: None,
                    steps: 0,
                    noise_events: 0,
                    final_f: None,
                    final_grad_norm: None,
                    final_min_eig: None,
                    projection_reference: None,
                    wall_time_s,
                    error: Some(format!("{e:?}")),
                    csv,
                }
            }
        };
        results.push(summary);
    }

    Ok(RunOutcome {
        summary: RunSummary {
            seed: spec.seed,
            spec,
            results,
        },
        traces,
        exit_code,
    })
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| io_err(path, e))
}

/// Executes the run and writes the per-method CSVs and the JSON summary.
/// Returns the process exit code.
pub fn cmd_run(spec: &ExperimentSpec) -> Result<RunOutcome, CliError> {
    let outcome = execute(spec)?;
    for trace in &outcome.traces {
        let path = csv_path(&outcome.summary.spec.out, trace.method);
        write_file(&path, |w| trace.write_csv(w))?;
    }
    let path = summary_path(&outcome.summary.spec.out);
    write_file(&path, |w| {
        serde_json::to_writer_pretty(&mut *w, &outcome.summary).map_err(std::io::Error::other)?;
        writeln!(w)
    })?;
    Ok(outcome)
}
