use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

mod check;
mod commands;
mod output;
mod spec;

use output::Sink;
use spec::RunSpec;

/// Photon statistics of three- and four-level lasers.
#[derive(Parser)]
#[command(name = "lasernoise", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Subcommand)]
enum Command {
    /// Steady-state photon number, populations and net rates.
    Steady,
    /// Monte Carlo runs: per-run moments and a Fano-factor summary.
    Mc,
    /// Analytic photo-current spectrum, plus Monte Carlo estimate with --runs.
    Spectrum,
    /// Analytic Fano factor, plus Monte Carlo intervals with --runs.
    Fano,
    /// Photon number, zero-frequency noise and Fano factor over a grid.
    Sweep,
    /// Optimum-noise table for all schemes and pumping modes.
    Table2,
    /// Analytic engine against its closed forms.
    Check,
}

#[derive(Args, Clone, Debug, Default)]
pub struct Options {
    /// JSON run specification.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed of the config's `sim` section.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of Monte Carlo runs.
    #[arg(long, global = true)]
    pub runs: Option<u64>,
    /// Output directory; tables go to standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub omega_max: Option<f64>,
    #[arg(long, global = true)]
    pub omega_points: Option<usize>,
    /// Daniell half-width, in Fourier bins, applied to each run.
    #[arg(long, global = true)]
    pub smooth: Option<usize>,
}

fn load(opts: &Options) -> Result<RunSpec> {
    let path = opts.config.as_ref().context("--config is required for this command")?;
    RunSpec::load(path)
}

fn run(cli: Cli) -> Result<bool> {
    let opts = &cli.options;
    let sink = Sink::new(opts.out.clone())?;
    match cli.command {
        Command::Steady => commands::steady(&load(opts)?, &sink)?,
        Command::Sweep => commands::sweep(&load(opts)?, &sink)?,
        Command::Mc => commands::mc(&load(opts)?, opts, &sink)?,
        Command::Fano => commands::fano(&load(opts)?, opts, &sink)?,
        Command::Spectrum => commands::spectrum(&load(opts)?, opts, &sink)?,
        Command::Table2 => commands::table2(&sink)?,
        Command::Check => {
            let outcomes = check::run_all()?;
            for o in &outcomes {
                println!("{} {:<36} {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
            }
            return Ok(outcomes.iter().all(|o| o.pass));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
