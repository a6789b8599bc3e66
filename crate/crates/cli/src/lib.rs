//! Batch experiment runner over `wedge-core`.
//!
//! Every subcommand reads one JSON config, computes everything in memory and
//! only then writes its outputs, each through a temporary file and a rename.
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input (nothing written),
//! 3 numerical failure (only `diagnostics.json` written).

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use config::ExperimentConfig;
use output::{Artifact, Header};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable holding the log filter (e.g. `info`, `debug`).
pub const LOG_ENV: &str = "WEDGE_SPECTRAL_LOG";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("numerical failure: {message}")]
    Numerical { message: String, details: Value },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn numerical(message: impl Into<String>, details: Value) -> Self {
        CliError::Numerical { message: message.into(), details }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_INVALID,
            CliError::Numerical { .. } => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wedge-spectral", version, about = "Experiments for the attached transonic shock at a wedge")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Background shock state, optionally over a q₀ sweep.
    Background(CommonArgs),
    /// Bessel bound suite and Wronskian grid.
    BesselCheck(CommonArgs),
    /// Cut-off Laplace–Neumann solve for a named source.
    Solve(CommonArgs),
    /// Homogeneous decay study over a sequence of cut radii.
    Uniqueness(CommonArgs),
    /// Weighted Hölder norm estimates for a named field.
    Norms(CommonArgs),
    /// Nonlinear fixed-point iteration and edge profile.
    Nonlinear(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` in the config (default: current directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed; overrides `seed` in the config (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Background(a)
            | Command::BesselCheck(a)
            | Command::Solve(a)
            | Command::Uniqueness(a)
            | Command::Norms(a)
            | Command::Nonlinear(a) => a,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Background(_) => "background",
            Command::BesselCheck(_) => "bessel-check",
            Command::Solve(_) => "solve",
            Command::Uniqueness(_) => "uniqueness",
            Command::Norms(_) => "norms",
            Command::Nonlinear(_) => "nonlinear",
        }
    }
}

/// Everything a subcommand needs besides its payload.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub config: ExperimentConfig,
    pub header: Header,
    pub seed: u64,
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).try_init();
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

fn execute(command: &Command) -> Result<(), CliError> {
    let args = command.common();
    let config = ExperimentConfig::load(&args.config)?;
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let out_dir = args.out.clone().or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let header = Header { config_sha256: config.sha256.clone(), seed };
    let ctx = RunContext { config, header, seed };
    let prepared = commands::prepare(command, &ctx)?;
    log::info!("{} config {} seed {}", command.name(), ctx.header.config_sha256, seed);
    let result = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build()
            .map_err(|e| CliError::Io(std::io::Error::other(e)))?
            .install(|| prepared.run(&ctx)),
        None => prepared.run(&ctx),
    };
    match result {
        Ok(artifacts) => output::write_all(&out_dir, &artifacts),
        Err(CliError::Numerical { message, details }) => {
            let body = json!({ "status": "numerical_failure", "subcommand": command.name(), "error": message, "details": details });
            output::write_all(&out_dir, &[Artifact::json("diagnostics.json", body, &ctx.header)])?;
            Err(CliError::Numerical { message, details: Value::Null })
        }
        Err(e) => Err(e),
    }
}
