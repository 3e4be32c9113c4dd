//! Experiment runner for the `ncn` optimizer: comparative NCN and
//! gradient-descent runs with CSV traces and JSON summaries, the planar
//! saddle escape table, and the iteration-bound calculator.

pub mod args;
pub mod bounds;
pub mod escape;
pub mod run;
pub mod spec;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(ncn::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Solver(_) => 2,
        }
    }
}
