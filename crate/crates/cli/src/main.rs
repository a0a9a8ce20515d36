//! `euler-rates`: rate-certification sweeps for the backward-Euler
//! approximation of operator semigroups.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use euler_rates_cli::config::{self, OutputFormat, Suite};
use euler_rates_cli::{emit, run_suite};

#[derive(Parser)]
#[command(name = "euler-rates", version, about = "Euler approximation rate certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel bound chain Q <= min(2/tau^2, 3t^2/n) <= 12/(sqrt(n)/t+tau)^2
    Kernel(Common),
    /// Explicit functional bounds t/sqrt(n), 3t^2/(2n) and the composite
    Norms(Common),
    /// Error-vs-envelope sweep with log-log slope fits
    Rates(Common),
    /// Lower-bound sandwich on the multiplication-operator model
    Sharpness(Common),
    /// Shifted-calculus convergence and order-above-two divergence
    Limits(Common),
}

#[derive(Args)]
struct Common {
    /// JSON sweep configuration
    #[arg(long)]
    config: PathBuf,
    /// Output file for the record table (overrides the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (overrides the config)
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Worker threads (EULER_RATES_JOBS overrides this flag)
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed for deterministic test vectors (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
}

impl Command {
    fn suite(&self) -> Suite {
        match self {
            Command::Kernel(_) => Suite::Kernel,
            Command::Norms(_) => Suite::Norms,
            Command::Rates(_) => Suite::Rates,
            Command::Sharpness(_) => Suite::Sharpness,
            Command::Limits(_) => Suite::Limits,
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Kernel(c)
            | Command::Norms(c)
            | Command::Rates(c)
            | Command::Sharpness(c)
            | Command::Limits(c) => c,
        }
    }
}

fn configure_jobs(flag: Option<usize>) -> Result<()> {
    let jobs = match std::env::var("EULER_RATES_JOBS") {
        Ok(v) => Some(v.parse::<usize>().context("EULER_RATES_JOBS must be an integer")?),
        Err(_) => flag,
    };
    if let Some(j) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .context("cannot configure the worker pool")?;
    }
    Ok(())
}

fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    let common = cli.command.common();
    configure_jobs(common.jobs)?;

    let mut cfg = config::load_config(&common.config, cli.command.suite())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out_path = Some(out.clone());
    }
    if let Some(format) = common.format {
        cfg.format = Some(format);
    }

    let run = run_suite(&cfg)?;
    if let Some(path) = &cfg.out_path {
        emit::emit(&run.records, cfg.format.unwrap_or(OutputFormat::Csv), path)?;
    }
    println!("{}", serde_json::to_string_pretty(&run.summary)?);
    Ok(run.pass)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
