use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use prefbandit::harness::{
    run_eta_sweep, run_offline_experiment, run_online_experiment, write_offline, write_online, write_sweep,
    ExperimentConfig, Mode, Written,
};
use prefbandit::Error;

/// Greedy-sampling preference bandit experiments.
///
/// Output goes to `run.output_dir` from the config, or to
/// $PREFBANDIT_OUTPUT_DIR when set. Exit status: 0 success, 1 configuration
/// error, 2 runtime error.
#[derive(Parser)]
#[command(name = "prefbandit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Online trajectories with per-round step regret.
    RunOnline { config: PathBuf },
    /// Offline sample-complexity sweep over `run.m_grid`.
    RunOffline { config: PathBuf },
    /// Online trajectories repeated for every η in `run.eta_grid`.
    SweepEta { config: PathBuf },
    /// Parse and check a config, then print its canonical form.
    Validate {
        config: PathBuf,
        /// Subcommand to check the config against.
        #[arg(long, value_parser = ["run-online", "run-offline", "sweep-eta"], default_value = "run-online")]
        mode: String,
    },
}

fn load(path: &Path, mode: Mode) -> Result<ExperimentConfig, Error> {
    let cfg = ExperimentConfig::load(path)?;
    cfg.validate(mode)?;
    Ok(cfg)
}

fn report(w: &Written) {
    println!("wrote {}", w.raw.display());
    println!("wrote {}", w.summary.display());
    println!("wrote {}", w.config.display());
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::RunOnline { config } => {
            let cfg = load(&config, Mode::Online)?;
            let results = run_online_experiment(&cfg)?;
            report(&write_online(&cfg.output_dir(), &cfg, &results)?);
        }
        Command::RunOffline { config } => {
            let cfg = load(&config, Mode::Offline)?;
            let results = run_offline_experiment(&cfg)?;
            report(&write_offline(&cfg.output_dir(), &cfg, &results)?);
        }
        Command::SweepEta { config } => {
            let cfg = load(&config, Mode::SweepEta)?;
            let results = run_eta_sweep(&cfg)?;
            report(&write_sweep(&cfg.output_dir(), &cfg, &results)?);
        }
        Command::Validate { config, mode } => {
            let mode = match mode.as_str() {
                "run-offline" => Mode::Offline,
                "sweep-eta" => Mode::SweepEta,
                _ => Mode::Online,
            };
            let cfg = load(&config, mode)?;
            cfg.build_instance().map_err(|e| Error::Config(format!("instance: {e}")))?;
            print!("{}", cfg.to_canonical_toml());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("prefbandit: {e}");
            if e.is_config() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
