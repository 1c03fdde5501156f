//! `spdclab`: reproducible pipelines over the spdclab-core modules.
//!
//! Exit codes: 0 success, 1 computation error, 2 usage or configuration
//! error.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "spdclab",
    version,
    about = "Photon-pair source simulation and eTPA analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Run configuration (TOML; the eTPA scenario is JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// RNG seed for stochastic steps.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Phase-matched signal/idler wavelengths versus crystal temperature.
    TuningCurve(Common),
    /// Joint spectral and temporal intensities and the entanglement time.
    Jsa(Common),
    /// Monte Carlo time tags, coincidence counts and heralded g2.
    Simulate(Common),
    /// Entangled and classical two-photon absorption rate estimates.
    EtpaReport(Common),
    /// Solvent/sample rate tables: fits, absorption rate and Gamma.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Remove flagged rows before fitting.
        #[arg(long)]
        drop_flagged: bool,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad or missing input: exit code 2.
    #[error("{0}")]
    Config(String),
    /// Failure while computing: exit code 1.
    #[error(transparent)]
    Compute(#[from] spdclab_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

/// Tag a core error raised while reading inputs as a configuration error.
pub fn input_err(path: &Path) -> impl Fn(spdclab_core::Error) -> CliError + '_ {
    move |e| match e {
        // These already carry the path.
        spdclab_core::Error::Parse { .. } | spdclab_core::Error::Io { .. } => CliError::Config(e.to_string()),
        e => CliError::Config(format!("{}: {e}", path.display())),
    }
}

pub fn write_output(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

pub fn to_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}

fn prepare(common: &Common) -> Result<(), CliError> {
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    std::fs::create_dir_all(&common.out).map_err(|e| {
        CliError::Config(format!(
            "cannot create output directory {}: {e}",
            common.out.display()
        ))
    })
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    match cli.command {
        Command::TuningCurve(c) => {
            prepare(&c)?;
            commands::tuning_curve(&c)
        }
        Command::Jsa(c) => {
            prepare(&c)?;
            commands::jsa(&c)
        }
        Command::Simulate(c) => {
            prepare(&c)?;
            commands::simulate(&c)
        }
        Command::EtpaReport(c) => {
            prepare(&c)?;
            commands::etpa_report(&c)
        }
        Command::Analyze { common, drop_flagged } => {
            prepare(&common)?;
            commands::analyze(&common, drop_flagged)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
