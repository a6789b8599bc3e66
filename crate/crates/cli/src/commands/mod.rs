//! Subcommand payloads: validation first, computation second.

pub mod background;
pub mod bessel;
pub mod nonlinear;
pub mod norms;
pub mod solve;
pub mod uniqueness;

use crate::output::Artifact;
use crate::{CliError, Command, RunContext};

/// A fully validated subcommand, ready to run.
#[derive(Debug, Clone)]
pub enum Prepared {
    Background(background::Plan),
    Bessel(bessel::Plan),
    Solve(solve::Plan),
    Uniqueness(uniqueness::Plan),
    Norms(norms::Plan),
    Nonlinear(nonlinear::Plan),
}

pub fn prepare(command: &Command, ctx: &RunContext) -> Result<Prepared, CliError> {
    Ok(match command {
        Command::Background(_) => Prepared::Background(background::Plan::from_config(ctx)?),
        Command::BesselCheck(_) => Prepared::Bessel(bessel::Plan::from_config(ctx)?),
        Command::Solve(_) => Prepared::Solve(solve::Plan::from_config(ctx)?),
        Command::Uniqueness(_) => Prepared::Uniqueness(uniqueness::Plan::from_config(ctx)?),
        Command::Norms(_) => Prepared::Norms(norms::Plan::from_config(ctx)?),
        Command::Nonlinear(_) => Prepared::Nonlinear(nonlinear::Plan::from_config(ctx)?),
    })
}

impl Prepared {
    pub fn run(&self, ctx: &RunContext) -> Result<Vec<Artifact>, CliError> {
        match self {
            Prepared::Background(p) => p.run(ctx),
            Prepared::Bessel(p) => p.run(ctx),
            Prepared::Solve(p) => p.run(ctx),
            Prepared::Uniqueness(p) => p.run(ctx),
            Prepared::Norms(p) => p.run(ctx),
            Prepared::Nonlinear(p) => p.run(ctx),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::numerical(e.to_string(), serde_json::Value::Null)
}
