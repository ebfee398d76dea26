//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage, parse or validation errors, 2 for
//! runtime failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::channel::ChannelSnapshot;
use crate::harness::{oracle_study, run_trial_detailed, sweep_users_with, SweepOptions, SweepScenario};
use crate::io::{
    energy_csv_string, links_csv_string, load_config, read_json, render_config, write_json, write_output,
    write_sweep_outputs, RunManifest,
};
use crate::planner::{build_plan, PlanOptions};
use crate::topology::Topology;
use crate::SimConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "supercell", version, about = "Broadcast energy simulator for macro / phantom-cell / D2D networks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat key-value configuration file; missing keys take the defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed. Falls back to SUPERCELL_SEED, then to the config value.
    #[arg(long, global = true, env = "SUPERCELL_SEED", value_name = "U64")]
    seed: Option<u64>,
    /// Trials per sweep point (sweep) or instances (oracle).
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,
    /// Comma-separated user counts.
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',')]
    users: Option<Vec<usize>>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Machine-readable stdout.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one trial and print its report as JSON.
    Run {
        /// Trial index.
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Run the user-count sweep and write sweep.csv, sweep.json and manifest.json.
    Sweep {
        /// Worker threads (default: all cores). Output does not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Build a serving plan from a topology and a snapshot.
    Plan {
        #[arg(long, value_name = "PATH")]
        topology: PathBuf,
        #[arg(long, value_name = "PATH")]
        snapshot: PathBuf,
    },
    /// Load, validate and print the resolved configuration.
    ValidateConfig,
    /// Compare greedy clustering with the exhaustive optimum on small cells.
    Oracle,
}

#[derive(Debug)]
enum CliError {
    Invalid(String),
    Runtime(String),
}

impl CliError {
    fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn resolve_config(common: &Common) -> Result<SimConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => load_config(path).map_err(|e| CliError::Invalid(e.to_string()))?,
        None => SimConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(trials) = common.trials {
        config.trials = trials;
    }
    if let Some(users) = &common.users {
        config.user_counts = users.clone();
    }
    config.validate().map_err(|e| CliError::Invalid(e.to_string()))?;
    Ok(config)
}

fn json_line<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(CliError::runtime)
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let config = resolve_config(&cli.common)?;
    let mut emit = |text: String| out.write_all(text.as_bytes()).map_err(CliError::runtime);
    match cli.command {
        Command::ValidateConfig => {
            if cli.common.json {
                emit(json_line(&config)?)
            } else {
                emit(render_config(&config))
            }
        }
        Command::Run { trial } => {
            let counts = match &cli.common.users {
                Some(users) => config.split_users(users[0]),
                None => config.uniform_cell_counts(),
            };
            let artifacts = run_trial_detailed(&config, &counts, trial);
            if let Some(dir) = &cli.common.out {
                std::fs::create_dir_all(dir).map_err(CliError::runtime)?;
                let mut manifest = RunManifest::new(&config);
                let report = json_line(&artifacts.report)?;
                write_output(dir, "trial.json", report.as_bytes(), &mut manifest).map_err(CliError::runtime)?;
                let energy = energy_csv_string(std::slice::from_ref(&artifacts.report)).map_err(CliError::runtime)?;
                write_output(dir, "energy.csv", energy.as_bytes(), &mut manifest).map_err(CliError::runtime)?;
                if let Some(topology) = &artifacts.topology {
                    write_output(dir, "topology.json", json_line(topology)?.as_bytes(), &mut manifest)
                        .map_err(CliError::runtime)?;
                }
                if let Some(plan) = &artifacts.plan {
                    write_output(dir, "plan.json", json_line(plan)?.as_bytes(), &mut manifest)
                        .map_err(CliError::runtime)?;
                }
                // Written last so it carries every D-Link the planner drew.
                if let Some(snapshot) = &artifacts.snapshot {
                    let links = links_csv_string(snapshot).map_err(CliError::runtime)?;
                    write_output(dir, "links.csv", links.as_bytes(), &mut manifest).map_err(CliError::runtime)?;
                    write_output(dir, "snapshot.json", json_line(snapshot)?.as_bytes(), &mut manifest)
                        .map_err(CliError::runtime)?;
                }
                write_json(&dir.join("manifest.json"), &manifest).map_err(CliError::runtime)?;
            }
            emit(json_line(&artifacts.report)?)
        }
        Command::Sweep { workers } => {
            let report = sweep_users_with(&config, SweepOptions { workers }).map_err(CliError::runtime)?;
            let dir = cli.common.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            write_sweep_outputs(&dir, &config, &report).map_err(CliError::runtime)?;
            if cli.common.json {
                return emit(json_line(&report)?);
            }
            let mut text = format!("{:>6}  {:>12}  {:>12}  {:>12}  {:>8}\n", "users", "macro", "phantom", "supercell", "rejected");
            for p in &report.points {
                let [m, ph, sc] = SweepScenario::ALL.map(|s| p.stats(s).mean);
                text += &format!("{:>6}  {m:>12.4e}  {ph:>12.4e}  {sc:>12.4e}  {:>8}\n", p.users, p.rejected);
            }
            text += &format!("wrote {}\n", dir.display());
            emit(text)
        }
        Command::Plan { topology, snapshot } => {
            let topology: Topology = read_json(&topology).map_err(|e| CliError::Invalid(e.to_string()))?;
            topology.validate(config.allow_overlap).map_err(|e| CliError::Invalid(e.to_string()))?;
            let snapshot: ChannelSnapshot = read_json(&snapshot).map_err(|e| CliError::Invalid(e.to_string()))?;
            if snapshot.user_count() != topology.users.len() {
                return Err(CliError::Invalid(format!(
                    "snapshot has {} users but the topology has {}",
                    snapshot.user_count(),
                    topology.users.len()
                )));
            }
            let plan = build_plan(&snapshot, &config.power_profile(), &PlanOptions::from_config(&config))
                .map_err(CliError::runtime)?;
            let text = json_line(&plan)?;
            if let Some(dir) = &cli.common.out {
                std::fs::create_dir_all(dir).map_err(CliError::runtime)?;
                std::fs::write(dir.join("plan.json"), &text).map_err(CliError::runtime)?;
            }
            emit(text)
        }
        Command::Oracle => {
            let instances = cli.common.trials.unwrap_or(500) as u64;
            let max_users = cli.common.users.as_ref().map_or(6, |u| u[0]);
            if !(1..=crate::planner::MAX_BRUTE_FORCE_USERS).contains(&max_users) {
                return Err(CliError::Invalid(format!(
                    "--users must be between 1 and {}",
                    crate::planner::MAX_BRUTE_FORCE_USERS
                )));
            }
            let study = oracle_study(&config, instances, max_users).map_err(CliError::runtime)?;
            if cli.common.json {
                return emit(json_line(&study)?);
            }
            let n = study.instances.len();
            let below_opt = study.instances.iter().filter(|i| i.greedy < i.optimum * (1.0 - 1e-12)).count();
            let above_direct = study.instances.iter().filter(|i| i.greedy > i.all_direct * (1.0 + 1e-12)).count();
            let optimal = study.instances.iter().filter(|i| i.greedy <= i.optimum * (1.0 + 1e-12)).count();
            emit(format!(
                "instances {n} (skipped {})\nmean greedy/optimal {:.6}\ngreedy optimal in {optimal}/{n}\ngreedy below optimum {below_opt}\ngreedy above all-direct {above_direct}\n",
                study.skipped,
                study.mean_ratio()
            ))
        }
    }
}

/// Parses `args` and runs the selected subcommand, returning the exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(CliError::Invalid(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INVALID
        }
        Err(CliError::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_RUNTIME
        }
    }
}
