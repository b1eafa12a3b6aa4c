use clap::{Parser, Subcommand};
use econsim::iafit::{FitConfig, FitGrid, OwnTerm};
use econsim::runner::{self, RunOptions};
use econsim::{ConfigError, Error};
use std::path::PathBuf;
use std::process::ExitCode;

/// Gather-trade-build economy simulator.
///
/// Exit codes: 0 success, 1 I/O or parse error, 2 configuration error,
/// 3 runtime invariant violation, 4 replay mismatch.
#[derive(Parser)]
#[command(name = "econsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write its log and CSV exports.
    Run {
        /// Episode config (TOML); defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        objective: Option<String>,
    },
    /// Run a variant × system × objective grid described by a manifest.
    Sweep {
        /// Sweep manifest (TOML).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Fit inequity-aversion parameters to logged rewards.
    Fit {
        /// Episode log (.jsonl) or reward CSV with columns t,agent_id,reward.
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        /// Sliding window, LEN or LEN:STRIDE.
        #[arg(long)]
        window: Option<String>,
        /// Include the grid endpoints α = 0, 5 and β = 0, 1.
        #[arg(long)]
        inclusive_grid: bool,
        /// Use the unsmoothed own reward as the baseline term.
        #[arg(long)]
        raw_own_term: bool,
        /// Output CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-execute a logged episode and verify every recorded value.
    Replay {
        log: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, seed, out, variant, system, objective } => {
            let log = runner::cmd_run(&RunOptions { config, seed, out: out.clone(), variant, system, objective })?;
            println!(
                "wrote {} steps to {} (final alignment {}, digest {})",
                log.steps.len(),
                out.display(),
                log.summary.alignment,
                log.header.config_digest
            );
            if log.summary.masked_replaced > 0 {
                eprintln!("warning: {} masked actions were replaced by no-ops", log.summary.masked_replaced);
            }
        }
        Command::Sweep { config, out, jobs } => {
            let outcome = runner::cmd_sweep(&config, &out, jobs)?;
            let failed = outcome.failures.len();
            println!("{} runs, {} failed", outcome.runs.len(), failed);
            if let Some((i, msg, code)) = outcome.failures.into_iter().next() {
                return Err(match code {
                    2 => Error::Config(ConfigError::new(format!("run {i}: {msg}"))),
                    3 => Error::Invariant(format!("run {i}: {msg}")),
                    _ => Error::Data(format!("run {i}: {msg}")),
                });
            }
        }
        Command::Fit { input, gamma, lambda, window, inclusive_grid, raw_own_term, out } => {
            let window = window.as_deref().map(runner::parse_window).transpose()?;
            let cfg = FitConfig {
                gamma,
                lambda,
                grid: if inclusive_grid { FitGrid::inclusive() } else { FitGrid::exclusive() },
                own_term: if raw_own_term { OwnTerm::Raw } else { OwnTerm::Smoothed },
            };
            let csv = runner::fits_csv(&runner::cmd_fit(&input, &cfg, window)?);
            match out {
                Some(path) => runner::write_atomic(&path, &csv)?,
                None => print!("{}", String::from_utf8_lossy(&csv)),
            }
        }
        Command::Replay { log } => {
            let l = runner::cmd_replay(&log)?;
            println!("verified {} steps", l.steps.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
