//! Command-line front end: structured TOML configs in, CSV traces and metric
//! tables out.
//!
//! Exit codes: 0 on success, 2 for usage and configuration errors (including
//! unreadable or unwritable paths), 3 for numerical failures such as an
//! integration blow-up.

mod config;
mod output;

use clap::{Parser, Subcommand};
use fluxsim::{
    canned_scenario, canned_scenarios, run_scenario, run_sweep, simulate_scenario, HarnessError,
    Scenario, SimulationError,
};
use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use config::{load_config, parse_axis, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad usage, unreadable or malformed config, invalid scenario: exit 2.
    Config(String),
    /// The simulation itself failed: exit 3.
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Numerical(msg) => write!(f, "{msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(err: HarnessError) -> CliError {
        match &err {
            HarnessError::Simulation(
                SimulationError::NonFiniteState { .. } | SimulationError::Derivative { .. },
            )
            | HarnessError::LengthMismatch { .. } => CliError::Numerical(err.to_string()),
            _ => CliError::Config(err.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "fluxsim", version, about = "Induction machine flux estimator testbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the ground-truth machine and write its trace as CSV.
    Simulate {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path; falls back to `out` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Noise seed override (ground truth itself is noise-free).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run an estimation scenario and write trace and metrics CSVs.
    Scenario {
        /// Canned scenario name; see `list-scenarios`.
        name: Option<String>,
        /// TOML run configuration, as an alternative to a canned name.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for `<name>_trace.csv` and `<name>_metrics.csv`.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Measurement-noise seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one scenario across a swept quantity and tabulate the metrics.
    Sweep {
        /// TOML run configuration holding the base scenario.
        #[arg(long)]
        config: PathBuf,
        /// Axis spec: freq=5,50 or r_se=0.95,1.05 or offset=0.05 and so on.
        #[arg(long)]
        axis: String,
        /// Output CSV path; falls back to `out` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Measurement-noise seed, shared by every cell.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the canned scenario names.
    ListScenarios,
}

fn create_out(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn resolve_out(flag: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    flag.or_else(|| cfg.out.clone()).ok_or_else(|| {
        CliError::Config("no output path: pass --out or set `out` in the config".to_string())
    })
}

fn cmd_simulate(config: &Path, out: Option<PathBuf>, _seed: Option<u64>) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let out = resolve_out(out, &cfg)?;
    // Metrics settling does not apply to a plain simulation.
    let mut scenario = cfg.scenario;
    scenario.settle = 0.0;
    let trace = simulate_scenario(&scenario)?;
    output::write_trace_csv(create_out(&out)?, &trace)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", out.display())))?;
    println!("wrote {} ({} rows)", out.display(), trace.len());
    Ok(())
}

fn scenario_from_args(name: Option<&str>, config: Option<&Path>) -> Result<(Scenario, u64), CliError> {
    match (name, config) {
        (Some(name), None) => {
            let scenario = canned_scenario(name).ok_or_else(|| {
                let names: Vec<String> =
                    canned_scenarios().iter().map(|s| s.name.clone()).collect();
                CliError::Config(format!(
                    "unknown scenario `{name}`; valid names: {}",
                    names.join(", ")
                ))
            })?;
            Ok((scenario, 0))
        }
        (None, Some(path)) => {
            let cfg = load_config(path)?;
            Ok((cfg.scenario, cfg.seed))
        }
        (Some(_), Some(_)) => Err(CliError::Config(
            "pass either a scenario name or --config, not both".to_string(),
        )),
        (None, None) => Err(CliError::Config(
            "pass a scenario name or --config; see `fluxsim list-scenarios`".to_string(),
        )),
    }
}

fn cmd_scenario(
    name: Option<&str>,
    config: Option<&Path>,
    out_dir: &Path,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let (scenario, cfg_seed) = scenario_from_args(name, config)?;
    let seed = seed.unwrap_or(cfg_seed);
    let result = run_scenario(&scenario, seed)?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    let trace_path = out_dir.join(format!("{}_trace.csv", scenario.name));
    let metrics_path = out_dir.join(format!("{}_metrics.csv", scenario.name));
    output::write_full_csv(create_out(&trace_path)?, &result)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", trace_path.display())))?;
    output::write_metrics_csv(create_out(&metrics_path)?, &result.metrics)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", metrics_path.display())))?;

    let m = &result.metrics;
    println!(
        "{}: rms = {} Wb, relative rms = {}, drift slope = {} Wb/s, diverged = {}",
        scenario.name,
        m.rms,
        m.relative_rms(),
        m.drift_slope,
        m.diverged
    );
    println!("wrote {} and {}", trace_path.display(), metrics_path.display());
    Ok(())
}

fn cmd_sweep(
    config: &Path,
    axis_spec: &str,
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let axis = parse_axis(axis_spec)?;
    let out = resolve_out(out, &cfg)?;
    let seed = seed.unwrap_or(cfg.seed);
    let points = run_sweep(&cfg.scenario, &axis, seed);

    output::write_sweep_csv(create_out(&out)?, &points)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", out.display())))?;

    let mut first_failure: Option<CliError> = None;
    for p in &points {
        if let Err(err) = &p.outcome {
            eprintln!("sweep value {} failed: {err}", p.value);
            if first_failure.is_none() {
                first_failure = Some(err.clone().into());
            }
        }
    }
    if let Some(err) = first_failure {
        return Err(err);
    }
    println!("wrote {} ({} rows)", out.display(), points.len());
    Ok(())
}

fn cmd_list_scenarios() {
    for s in canned_scenarios() {
        println!("{}", s.name);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out, seed } => cmd_simulate(&config, out, seed),
        Command::Scenario { name, config, out_dir, seed } => {
            cmd_scenario(name.as_deref(), config.as_deref(), &out_dir, seed)
        }
        Command::Sweep { config, axis, out, seed } => cmd_sweep(&config, &axis, out, seed),
        Command::ListScenarios => {
            cmd_list_scenarios();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
