//! Command-line scenario runner.
//!
//! Exit codes: 0 success, 2 configuration problem, 3 I/O failure,
//! 4 numerical failure inside the engine.

use crate::config::{parse_priority_file, ConfigError, RunConfig};
use crate::controller::ControllerState;
use crate::engine::{run, EngineError};
use crate::metrics::cost_comparison;
use crate::output;
use crate::pv::{PvError, PvParams};
use crate::stack::StackState;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "pvstack",
    version,
    about = "Simulate a converter-less PV-electrolyser stack with cell-switching MPPT"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario; writes timeseries.csv and summary.txt
    Run {
        /// Built-in scenario: "startup" or "irradiance-step"
        #[arg(long)]
        scenario: Option<String>,
        /// TOML configuration file
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the scenario duration (s)
        #[arg(long)]
        duration: Option<f64>,
        /// Override the integration step (s)
        #[arg(long)]
        dt: Option<f64>,
        /// Permutation file reordering the startup tie-break preference
        #[arg(long, value_name = "FILE")]
        seed_order: Option<PathBuf>,
    },
    /// Print the steady-state power table p(n) per irradiance level
    Oracle {
        /// TOML configuration file
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config: {msg}"),
            CliError::Io(msg) => write!(f, "io: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical: {msg}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<PvError> for CliError {
    fn from(e: PvError) -> Self {
        match e {
            PvError::InvalidAnchors(_) => CliError::Config(e.to_string()),
            PvError::CalibrationInfeasible(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::InvalidScenario(_) => CliError::Config(e.to_string()),
            EngineError::Stack(_) | EngineError::Metrics(_) => CliError::Numerical(e.to_string()),
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            scenario,
            config,
            out,
            duration,
            dt,
            seed_order,
        } => run_command(scenario, config, out, duration, dt, seed_order),
        Command::Oracle { config } => oracle_command(config),
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => Ok(RunConfig::load(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn run_command(
    scenario_name: Option<String>,
    config_path: Option<PathBuf>,
    out: PathBuf,
    duration: Option<f64>,
    dt: Option<f64>,
    seed_order: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = load_config(config_path.as_ref())?;
    let scenario = config.scenario(scenario_name.as_deref(), duration, dt)?;
    let pv = PvParams::calibrate(&config.anchors())?;
    let cell_params = config.cell_params()?;
    let n_total = config.n_total()?;
    let mut opts = config.run_options();
    if let Some(path) = seed_order {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        opts.tie_priority = Some(parse_priority_file(&text, n_total)?);
    }

    let result = run(
        &scenario,
        &pv,
        &cell_params,
        StackState::new(n_total),
        ControllerState::new(),
        &opts,
    )?;
    let cost = cost_comparison(&config.cost_inputs())
        .map_err(|e| CliError::Numerical(e.to_string()))?;

    // the config's out_dir applies unless --out was set to something else
    let out_dir = config
        .out_dir
        .as_ref()
        .map(PathBuf::from)
        .filter(|_| out.as_os_str() == "out")
        .unwrap_or(out);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    let csv_path = out_dir.join("timeseries.csv");
    output::write_timeseries(&csv_path, &result)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", csv_path.display())))?;
    let summary_path = out_dir.join("summary.txt");
    let summary = output::summary_text(&scenario, &pv, &cell_params, &result, &cost);
    std::fs::write(&summary_path, summary)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", summary_path.display())))?;

    println!(
        "wrote {} ({} rows) and {}",
        csv_path.display(),
        result.records.len(),
        summary_path.display()
    );
    Ok(())
}

fn oracle_command(config_path: Option<PathBuf>) -> Result<(), CliError> {
    let config = load_config(config_path.as_ref())?;
    let scenario = config.scenario(None, None, None)?;
    let pv = PvParams::calibrate(&config.anchors())?;
    let cell_params = config.cell_params()?;
    let n_total = config.n_total()?;
    print!(
        "{}",
        output::oracle_table_text(&pv, &cell_params, n_total, &scenario.profile.levels())
    );
    Ok(())
}
