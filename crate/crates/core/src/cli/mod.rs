//! Command line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical
//! nonconvergence, 4 I/O error.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use config::{RunConfig, DEFAULT_SEED, SCHEMA_VERSION};

#[derive(Debug, Parser)]
#[command(
    name = "rydberg-scaling",
    version,
    about = "Universal scaling of driven frozen Rydberg gases"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration, or a manifest from an earlier run.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads. Affects speed only.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Output directory (default `out`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical exponents for a dimension and interaction exponent.
    Exponents {
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        p: Option<u32>,
    },
    /// Mean-field equation of state on an (α, Δ) grid.
    Eos,
    /// Disorder-averaged Rydberg fraction against time.
    Simulate,
    /// α sweep with saturation fits, exponents and collapse test.
    Sweep,
    /// Exponents and collapse test for external excitation curves.
    Collapse,
    /// Local density average over a Gaussian cloud.
    Lda,
}

/// Everything a command needs besides its own section of the config.
pub struct Context {
    pub config: RunConfig,
    /// Directory relative paths in the config are taken from.
    pub base: PathBuf,
    pub seed: u64,
    pub out: PathBuf,
    /// `--out` was given explicitly.
    pub out_given: bool,
}

impl Context {
    /// The config as it should be recorded: seed resolved.
    pub fn effective_config(&self) -> RunConfig {
        RunConfig {
            seed: Some(self.seed),
            ..self.config.clone()
        }
    }
}

pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    execute(cli)
}

pub fn execute(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        // Fails only if a pool already exists, which is harmless here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let (config, base) = match &cli.config {
        Some(path) => (
            RunConfig::load(path)?,
            path.parent().map(PathBuf::from).unwrap_or_default(),
        ),
        None => (
            RunConfig {
                schema_version: SCHEMA_VERSION,
                ..Default::default()
            },
            PathBuf::new(),
        ),
    };
    let seed = cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let ctx = Context {
        config,
        base,
        seed,
        out_given: cli.out.is_some(),
        out: cli.out.unwrap_or_else(|| PathBuf::from("out")),
    };
    match cli.command {
        Command::Exponents { d, p } => commands::exponents(&ctx, d, p),
        Command::Eos => commands::eos(&ctx),
        Command::Simulate => commands::simulate(&ctx),
        Command::Sweep => commands::sweep(&ctx),
        Command::Collapse => commands::collapse(&ctx),
        Command::Lda => commands::lda(&ctx),
    }
}

/// Process entry point: parse, run, map errors to exit codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
