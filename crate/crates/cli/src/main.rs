mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::{exit, CliError};

/// Chaos expansions of products of Poisson multiple integrals on finite spaces.
#[derive(Parser, Debug)]
#[command(name = "chaoskit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports.
    #[arg(long, global = true, default_value = "chaoskit-out")]
    out: PathBuf,
    /// Overrides `params.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `params.samples`.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Overrides `params.n_max`.
    #[arg(long, global = true)]
    nmax: Option<usize>,
    /// Do not print the summary.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count non-flat partitions, diagram pairs and words for `shape`.
    Enumerate,
    /// Chaos kernels of the product (all orders, or `params.q` only).
    Kernels {
        /// Also write the configuration with every kernel materialized.
        #[arg(long)]
        dump_config: Option<PathBuf>,
    },
    /// Expectation of the product by diagram sum and by enumeration.
    Expect,
    /// Run one consistency check, or all of them.
    Verify {
        #[arg(long, default_value = "all")]
        check: String,
    },
    /// Divergence table for the built-in witness kernel.
    Witness,
}

fn run(cli: &Cli) -> Result<report::Output, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::parse("")?,
    };
    if let Some(seed) = cli.seed {
        cfg.params.seed = seed;
    }
    if let Some(samples) = cli.samples {
        if samples < 2 {
            return Err(CliError::Invalid {
                field: "--samples".into(),
                message: "at least 2 samples are required".into(),
            });
        }
        cfg.params.samples = samples;
    }
    if let Some(n) = cli.nmax {
        cfg.params.n_max = n;
    }
    let out = match &cli.command {
        Command::Enumerate => commands::enumerate(&cfg)?,
        Command::Kernels { dump_config } => {
            if let Some(path) = dump_config {
                std::fs::write(path, cfg.to_toml()?).map_err(|e| CliError::Io {
                    path: path.display().to_string(),
                    source: e,
                })?;
            }
            commands::kernels(&cfg)?
        }
        Command::Expect => commands::expect(&cfg)?,
        Command::Verify { check } => commands::verify(&cfg, check)?,
        Command::Witness => commands::witness(&cfg)?,
    };
    out.write(&cli.out)?;
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if !cli.quiet {
                for line in &out.summary {
                    println!("{line}");
                }
            }
            ExitCode::from(if out.passed { exit::OK } else { exit::CHECK_FAILED })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
