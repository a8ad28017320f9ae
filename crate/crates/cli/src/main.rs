mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("decode failed: {0}")]
    Decode(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Failed(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Decode(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "layercode",
    version,
    about = "Layer Code construction, decoding and thermal experiments"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Search budget, overriding the config.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and validate a lattice; writes lattice.txt and build.json.
    Build { config: PathBuf },
    /// Decode an error or syndrome file against a lattice file.
    Decode {
        lattice: PathBuf,
        input: PathBuf,
        /// Check stage invariants while decoding.
        #[arg(long)]
        audit: bool,
    },
    /// Decode independent random errors.
    Sample { config: PathBuf },
    /// Run a thermal memory experiment.
    Thermal {
        config: PathBuf,
        /// Print the resolved plan without simulating.
        #[arg(long)]
        dry_run: bool,
    },
    /// Energy barrier search, optional walk and distance tests.
    Barrier { config: PathBuf },
    /// Closed-form bound sweep as CSV.
    Bounds {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge CSV outputs into one plot-ready table.
    Report { files: Vec<PathBuf> },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Build { config } => commands::build(&config, cli.seed),
        Command::Decode {
            lattice,
            input,
            audit,
        } => commands::decode(&lattice, &input, audit),
        Command::Sample { config } => commands::sample(&config, cli.seed),
        Command::Thermal { config, dry_run } => commands::thermal(&config, cli.seed, dry_run),
        Command::Barrier { config } => commands::barrier(&config, cli.seed, cli.budget),
        Command::Bounds { config, out } => commands::bounds(&config, out.as_deref()),
        Command::Report { files } => commands::report(&files),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
