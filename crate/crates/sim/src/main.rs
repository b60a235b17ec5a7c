//! Command-line interface.
//!
//! Exit codes: 0 success, 1 configuration/usage error, 2 runtime abort.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use econ_core::config::{PolicyKind, SimConfig};
use econ_core::error::EconError;
use econ_llm::PromptFixture;
use econ_sim::{recompute_metrics, run_simulation};

#[derive(Parser)]
#[command(name = "econ-sim", version, about = "Agent-based macroeconomic simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation from a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the policy kind (len|cats|composite|scripted|llm).
        #[arg(long)]
        policy: Option<String>,
        /// Override the number of simulated months.
        #[arg(long)]
        months: Option<usize>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute indicators and regressions from a stored run directory.
    Metrics {
        #[arg(long)]
        run: PathBuf,
    },
    /// Check a config file and exit.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
    /// Render a decision prompt from a JSON fixture and print it.
    GoldenPrompt {
        #[arg(long)]
        fixture: PathBuf,
    },
}

fn load_config(path: &Path) -> Result<SimConfig<f64>, EconError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| EconError::data(path.display().to_string(), e.to_string()))?;
    let config: SimConfig<f64> = serde_json::from_str(&text)
        .map_err(|e| EconError::data(path.display().to_string(), e.to_string()))?;
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    match cli.command {
        Command::Run { config, seed, policy, months, out } => {
            let mut cfg = match load_config(&config) {
                Ok(cfg) => cfg,
                Err(e) => return config_error(e),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(months) = months {
                cfg.num_months = months;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(policy) = policy {
                cfg.policy.kind = match PolicyKind::parse(&policy) {
                    Ok(kind) => kind,
                    Err(e) => return config_error(e),
                };
            }
            if let Err(e) = cfg.validate() {
                return config_error(e);
            }
            match run_simulation(cfg) {
                Ok(output) => {
                    println!(
                        "completed {} months ({} years) -> {}",
                        output.months.len(),
                        output.years.len(),
                        output.output_dir.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("run aborted: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Metrics { run } => match recompute_metrics(&run) {
            Ok(years) => {
                println!("recomputed metrics for {} years -> {}", years.len(), run.display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("metrics failed: {e}");
                ExitCode::from(2)
            }
        },
        Command::ValidateConfig { config } => match load_config(&config) {
            Ok(_) => {
                println!("config ok");
                ExitCode::SUCCESS
            }
            Err(e) => config_error(e),
        },
        Command::GoldenPrompt { fixture } => {
            let text = match std::fs::read_to_string(&fixture) {
                Ok(text) => text,
                Err(e) => return config_error(EconError::data(fixture.display().to_string(), e.to_string())),
            };
            let fixture: PromptFixture = match serde_json::from_str(&text) {
                Ok(f) => f,
                Err(e) => return config_error(EconError::domain(format!("fixture: {e}"))),
            };
            match fixture.render() {
                Ok(prompt) => {
                    println!("{prompt}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("render failed: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}

fn config_error(e: EconError) -> ExitCode {
    eprintln!("{e}");
    ExitCode::from(1)
}
