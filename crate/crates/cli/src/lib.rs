//! Command-line front end for the `hyperuniform` library.
//!
//! Subcommands: `sample`, `variance`, `regime`, `partition dump` and
//! `verify`. Every subcommand except `verify` accepts `--config FILE`, a
//! JSON object with the same keys as the flags; flags given on the command
//! line override the file. Exit status is 0 on success, 1 for usage and
//! domain errors and 2 for numerical failures.

pub mod config;
pub mod output;
pub mod verify;

use clap::{Args, Parser, Subcommand};
use config::{CommandKind, EstimatorKind, ExperimentConfig, Format, ProcessKind, RegimeKind};
use hyperuniform::partition::ZonalPartition;
use hyperuniform::processes::Process;
use hyperuniform::variance::{mc_number_variance, regime_experiment};
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "HYPERUNIFORM_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Domain(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Domain(m) => write!(f, "domain error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<hyperuniform::Error> for CliError {
    fn from(e: hyperuniform::Error) -> Self {
        match e {
            hyperuniform::Error::Domain(m) => CliError::Domain(m),
            hyperuniform::Error::Overflow(m) | hyperuniform::Error::Numerical(m) => CliError::Numerical(m),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hyperuniform", version, about = "Number variance experiments for point processes on spheres")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one sample of a point process.
    Sample(SampleArgs),
    /// Estimate the number variance for one cap size.
    Variance(VarianceArgs),
    /// Fit the growth of the number variance across a grid.
    Regime(RegimeArgs),
    /// Equal-area partitions of S^2.
    Partition {
        #[command(subcommand)]
        action: PartitionAction,
    },
    /// Run the deterministic identity checks.
    Verify,
}

#[derive(Debug, Subcommand)]
pub enum PartitionAction {
    /// Write every cell of the N-cell partition.
    Dump(PartitionArgs),
}

#[derive(Debug, Args, Default)]
pub struct OutputArgs {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (standard output when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct ProcessArgs {
    #[arg(long, value_enum)]
    pub process: Option<ProcessKind>,
    /// Sphere dimension (default 2).
    #[arg(long)]
    pub d: Option<usize>,
    /// Number of points or partition cells.
    #[arg(long)]
    pub n: Option<usize>,
    /// Degree of the harmonic ensemble.
    #[arg(long = "L", alias = "l")]
    pub l: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicate: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VarianceArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    /// Cap angle (radians unless --degrees).
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Threshold parameter, cap angle t N^{-1/d}.
    #[arg(long)]
    pub t: Option<f64>,
    /// Read angles in degrees.
    #[arg(long)]
    pub degrees: bool,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Caps per replicate.
    #[arg(long)]
    pub centers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RegimeArgs {
    /// Process family.
    #[arg(long, value_enum)]
    pub process: Option<ProcessKind>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeKind>,
    /// Comma-separated sizes (N, or L for the harmonic ensemble).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Cap angle of the large-cap regime.
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub degrees: bool,
    /// Small-cap schedule phi = c N^{-alpha}.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated threshold parameters.
    #[arg(long, value_delimiter = ',')]
    pub ts: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorKind>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub centers: Option<usize>,
    /// Point pairs per cell for the jittered formula.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn flag(b: bool) -> Option<bool> {
    b.then_some(true)
}

fn with_output(mut c: ExperimentConfig, out: &OutputArgs) -> ExperimentConfig {
    c.format = out.format;
    c.output = out.output.clone();
    c
}

fn with_process(c: ExperimentConfig, p: &ProcessArgs) -> ExperimentConfig {
    ExperimentConfig { process: p.process, d: p.d, n: p.n, l: p.l, ..c }
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Sample(_) => CommandKind::Sample,
            Command::Variance(_) => CommandKind::Variance,
            Command::Regime(_) => CommandKind::Regime,
            Command::Partition { .. } => CommandKind::Partition,
            Command::Verify => CommandKind::Verify,
        }
    }

    fn config_path(&self) -> Option<&PathBuf> {
        match self {
            Command::Sample(a) => a.out.config.as_ref(),
            Command::Variance(a) => a.out.config.as_ref(),
            Command::Regime(a) => a.out.config.as_ref(),
            Command::Partition { action: PartitionAction::Dump(a) } => a.out.config.as_ref(),
            Command::Verify => None,
        }
    }

    /// Settings given as flags.
    pub fn flags(&self) -> ExperimentConfig {
        let base = ExperimentConfig::default();
        match self {
            Command::Sample(a) => with_output(
                with_process(ExperimentConfig { seed: a.seed, replicate: a.replicate, ..base }, &a.process),
                &a.out,
            ),
            Command::Variance(a) => with_output(
                with_process(
                    ExperimentConfig {
                        phi: a.phi,
                        t: a.t,
                        degrees: flag(a.degrees),
                        replicates: a.replicates,
                        centers: a.centers,
                        seed: a.seed,
                        ..base
                    },
                    &a.process,
                ),
                &a.out,
            ),
            Command::Regime(a) => with_output(
                ExperimentConfig {
                    process: a.process,
                    d: a.d,
                    regime: a.regime,
                    sizes: a.sizes.clone(),
                    phi: a.phi,
                    degrees: flag(a.degrees),
                    c: a.c,
                    alpha: a.alpha,
                    ts: a.ts.clone(),
                    estimator: a.estimator,
                    replicates: a.replicates,
                    centers: a.centers,
                    pairs: a.pairs,
                    seed: a.seed,
                    ..base
                },
                &a.out,
            ),
            Command::Partition { action: PartitionAction::Dump(a) } => {
                with_output(ExperimentConfig { n: a.n, ..base }, &a.out)
            }
            Command::Verify => base,
        }
    }

    /// File settings overlaid with flags.
    pub fn merged_config(&self) -> Result<ExperimentConfig, CliError> {
        let kind = self.kind();
        let file = match self.config_path() {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(other) = file.subcommand {
            if other != kind {
                return Err(CliError::Usage(format!(
                    "config file is for '{other:?}' but the subcommand is '{kind:?}'"
                )));
            }
        }
        let mut merged = file.overlay(self.flags());
        merged.subcommand = Some(kind);
        Ok(merged)
    }
}

/// Result of a command: the rendered document and where it goes.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub output: Option<PathBuf>,
    /// Set by `verify` when a check fails.
    pub failed: bool,
}

pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    if let Command::Verify = command {
        let checks = verify::run_checks()?;
        return Ok(Outcome {
            text: verify::report(&checks),
            output: None,
            failed: checks.iter().any(|c| !c.passed()),
        });
    }
    let config = command.merged_config()?;
    let (text, resolved) = match command.kind() {
        CommandKind::Sample => {
            let (spec, resolved) = config.resolve_sample()?;
            let sample = Process::new(spec)?.sample(resolved.seed.unwrap_or(0), resolved.replicate.unwrap_or(0))?;
            (output::render_sample(&sample, &resolved, resolved.format.unwrap_or_default())?, resolved)
        }
        CommandKind::Variance => {
            let (job, resolved) = config.resolve_variance()?;
            let report = mc_number_variance(job.spec, job.cap, job.replicates, job.centers, job.seed)?;
            (output::render_variance(&report, &resolved, resolved.format.unwrap_or_default())?, resolved)
        }
        CommandKind::Regime => {
            let (rc, resolved) = config.resolve_regime()?;
            let result = regime_experiment(&rc)?;
            (output::render_regime(&result, &resolved, resolved.format.unwrap_or_default())?, resolved)
        }
        CommandKind::Partition => {
            let (n, resolved) = config.resolve_partition()?;
            let partition = ZonalPartition::new(n)?;
            (output::render_partition(&partition, &resolved, resolved.format.unwrap_or_default())?, resolved)
        }
        CommandKind::Verify => unreachable!("handled above"),
    };
    Ok(Outcome { text, output: resolved.output, failed: false })
}

fn write_outcome(outcome: &Outcome) -> Result<(), CliError> {
    match &outcome.output {
        Some(path) => std::fs::write(path, &outcome.text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(outcome.text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{value}'")))?;
        if n == 0 {
            return Err(CliError::Usage(format!("{THREADS_ENV} must be positive")));
        }
        // a second initialisation in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads().and_then(|_| execute(&cli.command)).and_then(|outcome| {
        write_outcome(&outcome)?;
        Ok(outcome.failed)
    });
    match result {
        Ok(false) => 0,
        Ok(true) => 2,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
