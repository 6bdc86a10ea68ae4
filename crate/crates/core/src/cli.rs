//! Command-line front end for `afsec`.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input, 3 method does not apply to
//! the instance, 4 solver failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::convex::SolverConfig;
use crate::degraded::{solve_degraded, DegradedMode, DegradedProblem};
use crate::error::Error;
use crate::experiment::{
    instances_path, run_sweep, write_aggregates, write_instances, ExperimentConfig, OutputFormat,
};
use crate::model::{ChannelInstance, Method, SolveReport};
use crate::oracle::{grid_oracle, OracleConfig};
use crate::scaled::{solve_scaled, ScaledProblem};
use crate::symmetric::{symmetric_rate, SymmetricInstance};
use crate::zero_forcing::solve_zero_forcing;

pub const EXIT_PARSE: u8 = 2;
pub const EXIT_MISMATCH: u8 = 3;
pub const EXIT_SOLVER: u8 = 4;

/// Default oracle resolution for `solve --method oracle`.
const DEFAULT_ORACLE_STEPS: usize = 201;
const DEFAULT_ORACLE_REFINE: usize = 3;

#[derive(Debug, Parser)]
#[command(name = "afsec", version, about = "Secrecy-rate optimization for amplify-and-forward relay networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and print the report as JSON.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        method: CliMethod,
        #[command(flatten)]
        common: Common,
    },
    /// Averaged rates over a Monte Carlo ensemble.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Averaged rates plus a per-instance audit file.
    Montecarlo {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Brute-force grid search over the power box.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ORACLE_STEPS)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_ORACLE_REFINE)]
        refine: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Overrides the seed in the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: CliFormat,
    /// Process instances on one thread.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliMethod {
    Degraded,
    DegradedTotal,
    Zf,
    Scaled,
    Symmetric,
    Oracle,
}

impl From<CliMethod> for Method {
    fn from(m: CliMethod) -> Method {
        match m {
            CliMethod::Degraded => Method::DegradedIndividual,
            CliMethod::DegradedTotal => Method::DegradedTotal,
            CliMethod::Zf => Method::ZeroForcing,
            CliMethod::Scaled => Method::Scaled,
            CliMethod::Symmetric => Method::Symmetric,
            CliMethod::Oracle => Method::Oracle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliFormat {
    Csv,
    Json,
}

impl From<CliFormat> for OutputFormat {
    fn from(f: CliFormat) -> OutputFormat {
        match f {
            CliFormat::Csv => OutputFormat::Csv,
            CliFormat::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Solver(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Solver(e) if e.is_method_mismatch() => EXIT_MISMATCH,
            CliError::Solver(Error::InstanceFailed { source, .. }) if source.is_method_mismatch() => EXIT_MISMATCH,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(msg) => write!(f, "{msg}"),
            CliError::Solver(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInstance(_) | Error::DimensionMismatch { .. } | Error::InvalidConfig(_) => {
                CliError::Parse(e.to_string())
            }
            e => CliError::Solver(e),
        }
    }
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Parse(format!("{}: {e}", path.display()))
}

pub fn read_instance(path: &Path) -> Result<ChannelInstance, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn read_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

/// Runs `method` on `instance` with the library defaults.
pub fn solve(instance: &ChannelInstance, method: Method, cfg: &SolverConfig) -> crate::Result<SolveReport> {
    match method {
        Method::DegradedIndividual => solve_degraded(&DegradedProblem::new(instance.clone(), DegradedMode::Individual)?, cfg),
        Method::DegradedTotal => solve_degraded(&DegradedProblem::new(instance.clone(), DegradedMode::Total)?, cfg),
        Method::ZeroForcing => solve_zero_forcing(instance, cfg),
        Method::Scaled => solve_scaled(&ScaledProblem::new(instance.clone())?, cfg),
        Method::Symmetric => symmetric_rate(&SymmetricInstance::from_instance(instance)?),
        Method::Oracle => grid_oracle(instance, &OracleConfig::new(DEFAULT_ORACLE_STEPS, DEFAULT_ORACLE_REFINE)),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            }
            Box::new(BufWriter::new(File::create(p).map_err(|e| io_error(p, e))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_report(report: &SolveReport, out: Option<&Path>) -> Result<(), CliError> {
    let mut w = open_out(out)?;
    let io = |e: io::Error| CliError::Solver(Error::InvalidConfig(format!("write failed: {e}")));
    serde_json::to_writer_pretty(&mut w, report).map_err(|e| CliError::Solver(Error::InvalidConfig(e.to_string())))?;
    writeln!(w).map_err(io)?;
    w.flush().map_err(io)
}

fn experiment(config: &Path, common: &Common, audit: bool) -> Result<(), CliError> {
    let mut config = read_config(config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let format = OutputFormat::from(common.format);
    let out = common.out.clone().or_else(|| config.output_path.clone());
    if audit && out.is_none() {
        return Err(CliError::Parse("montecarlo needs --out or output_path".into()));
    }
    let result = run_sweep(&config, &SolverConfig::default(), !common.serial)?;
    write_aggregates(&result.aggregates, format, open_out(out.as_deref())?)?;
    if audit {
        let path = instances_path(out.as_deref().expect("checked above"), format);
        write_instances(&result.instances, format, open_out(Some(&path))?)?;
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { instance, method, common } => {
            let inst = read_instance(&instance)?;
            let report = solve(&inst, method.into(), &SolverConfig::default())?;
            print_report(&report, common.out.as_deref())
        }
        Command::Sweep { config, common } => experiment(&config, &common, false),
        Command::Montecarlo { config, common } => experiment(&config, &common, true),
        Command::Oracle {
            instance,
            steps,
            refine,
            common,
        } => {
            let inst = read_instance(&instance)?;
            let mut cfg = OracleConfig::new(steps, refine);
            cfg.parallel = !common.serial;
            let report = grid_oracle(&inst, &cfg)?;
            print_report(&report, common.out.as_deref())
        }
    }
}

/// Parses `std::env::args`, runs, and maps failures to exit codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
