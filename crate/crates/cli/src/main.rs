use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wavesrc_cli::{evaluate, reconstruct, resolve_scenario, simulate, CliError, RunConfig, LOG_ENV};

#[derive(Parser)]
#[command(name = "wavesrc", version, about = "Bayesian reconstruction of moving wave sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic sensor data for a scenario.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; falls back to the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the posterior with pCN chains.
    Reconstruct {
        #[arg(long)]
        config: PathBuf,
        /// Directory written by `simulate`.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Continue from existing chain checkpoints.
        #[arg(long)]
        resume: bool,
    },
    /// Tabulate reconstruction errors.
    Evaluate {
        /// Directory written by `reconstruct`.
        #[arg(long)]
        summaries: PathBuf,
        /// Built-in case name (`case1`..`case4`) or a config file.
        #[arg(long)]
        scenario: Option<String>,
        /// Report file, JSON if it ends in `.json`, CSV otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn output_dir(out: Option<PathBuf>, config: &RunConfig) -> Result<PathBuf, CliError> {
    out.or_else(|| config.output_dir.clone())
        .ok_or_else(|| CliError::Config("no output directory: pass --out or set output_dir".into()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let dir = output_dir(out, &cfg)?;
            simulate(&cfg, &dir)?;
            println!("wrote measurements to {}", dir.display());
        }
        Command::Reconstruct {
            config,
            data,
            out,
            resume,
        } => {
            let cfg = RunConfig::load(&config)?;
            let dir = output_dir(out, &cfg)?;
            let diag = reconstruct(&cfg, &data, &dir, resume)?;
            for c in &diag.chains {
                println!(
                    "chain {}: acceptance {:.3}, ESS {:.1}, trajectory error {:.4e}, intensity error {:.4e}",
                    c.chain, c.acceptance_ratio, c.effective_sample_size, c.mean_trajectory_error, c.mean_intensity_error
                );
            }
            println!("wrote summaries to {}", dir.display());
        }
        Command::Evaluate {
            summaries,
            scenario,
            out,
        } => {
            let scenario = scenario.as_deref().map(resolve_scenario).transpose()?;
            let report = evaluate(&summaries, scenario.as_ref(), out.as_deref())?;
            print!("{}", report.table());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
