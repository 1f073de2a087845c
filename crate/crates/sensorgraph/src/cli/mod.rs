//! Command-line front end.
//!
//! Exit status: 0 success, 1 invalid arguments or configuration, 2 parse
//! error, 3 degenerate motion, 4 I/O error, 5 disconnected graph, 6 solver
//! failure.

mod commands;
mod error;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::CliError;

use crate::config::{InitMode, RunConfig, SolverConfig};
use crate::report::RunReport;
use sensorgraph_core::{EdgeKind, NodeId};

#[derive(Debug, Parser)]
#[command(name = "sensorgraph", version, about = "Fuse pairwise sensor calibrations into one consistent rig")]
pub struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true, value_name = "JSON")]
    pub config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Only print errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Print the run report as JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve AX = XB for two rigidly mounted sensors.
    Handeye(HandeyeArgs),
    /// Jackknife variance of a pairwise calibration, as a graph edge.
    Jackknife(JackknifeArgs),
    /// Optimize all sensor poses of a calibration graph.
    Optimize(OptimizeArgs),
    /// Plane alignment, point residual and global graph error.
    Validate(ValidateArgs),
    /// Monte-Carlo study on synthetic rigs.
    Synth(SynthArgs),
    /// Check and summarize a saved run report.
    Report(ReportArgs),
}

/// Motion-pair file, or two synchronized absolute pose lists.
#[derive(Debug, Args)]
pub struct MotionSource {
    /// Motion-pair file (`A: pose  B: pose` per line).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["eye", "hand"])]
    pub motions: Option<PathBuf>,
    /// Absolute poses of the first sensor.
    #[arg(long, value_name = "FILE", requires = "hand")]
    pub eye: Option<PathBuf>,
    /// Absolute poses of the second sensor, one per eye pose.
    #[arg(long, value_name = "FILE", requires = "eye")]
    pub hand: Option<PathBuf>,
}

/// Where a computed pairwise transform goes in the graph.
#[derive(Debug, Args)]
pub struct EdgeTarget {
    /// Graph node of the first sensor.
    #[arg(long, default_value_t = 0)]
    pub from: NodeId,
    /// Graph node of the second sensor.
    #[arg(long, default_value_t = 1)]
    pub to: NodeId,
    /// Edge kind tag.
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<EdgeKind>,
    /// Smallest variance used when inverting to information.
    #[arg(long)]
    pub variance_floor: Option<f64>,
}

fn parse_kind(s: &str) -> Result<EdgeKind, String> {
    s.parse().map_err(|e: sensorgraph_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct HandeyeArgs {
    #[command(flatten)]
    pub source: MotionSource,
    /// Output: the solved pose, or with --jackknife an edge record.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also estimate the variance and write an edge record.
    #[arg(long)]
    pub jackknife: bool,
    #[command(flatten)]
    pub edge: EdgeTarget,
    /// Write the run report here.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct JackknifeArgs {
    #[command(flatten)]
    pub source: MotionSource,
    /// Pose list of repeated direct measurements of one transform.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["motions", "eye", "hand"])]
    pub poses: Option<PathBuf>,
    #[command(flatten)]
    pub edge: EdgeTarget,
    /// Edge record output.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Calibration graph file.
    pub graph: PathBuf,
    /// Optimized graph output.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Initial poses; `tree` is used whenever a node has no vertex record.
    #[arg(long, value_enum)]
    pub init: Option<InitMode>,
    #[command(flatten)]
    pub solver: SolverConfig,
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Graph whose global error to report.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// Plane normals seen by the first lidar.
    #[arg(long, value_name = "FILE", requires = "normals2")]
    pub normals1: Option<PathBuf>,
    /// The same planes seen by the second lidar.
    #[arg(long, value_name = "FILE", requires = "normals1")]
    pub normals2: Option<PathBuf>,
    /// Points in the second sensor frame.
    #[arg(long, value_name = "FILE", requires = "target")]
    pub source: Option<PathBuf>,
    /// Matching points in the first sensor frame.
    #[arg(long, value_name = "FILE", requires = "source")]
    pub target: Option<PathBuf>,
    /// Transform under test as `tx ty tz qx qy qz qw`; identity by default.
    #[arg(long, num_args = 7, allow_negative_numbers = true, value_names = ["TX", "TY", "TZ", "QX", "QY", "QZ", "QW"])]
    pub transform: Option<Vec<f64>>,
    /// Pose list whose first pose is the transform under test.
    #[arg(long, value_name = "FILE", conflicts_with = "transform")]
    pub transform_file: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub nodes: Option<usize>,
    /// `complete` or pairs such as `0-1,1-2,2-0`.
    #[arg(long)]
    pub topology: Option<String>,
    /// Translation noise standard deviation, meters.
    #[arg(long)]
    pub sigma_trans: Option<f64>,
    /// Rotation noise standard deviation, radians.
    #[arg(long)]
    pub sigma_rot: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Worker threads; trials are collected in order regardless.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Per-trial CSV.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Directory for the generated graph of every trial.
    #[arg(long, value_name = "DIR")]
    pub graphs_dir: Option<PathBuf>,
    /// Summary report.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverConfig,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report to check.
    #[arg(required_unless_present = "schema")]
    pub file: Option<PathBuf>,
    /// Print the report JSON schema instead.
    #[arg(long)]
    pub schema: bool,
}

/// Parses `args`, runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.quiet);
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    }
}

fn init_logging(quiet: bool) {
    let level = if quiet {
        log::LevelFilter::Error
    } else {
        log::LevelFilter::Warn
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format(|buf, record| {
            let level = record.level().as_str().to_ascii_lowercase();
            writeln!(buf, "{level}: {}", record.args())
        })
        .try_init();
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.or(config.seed);
    let start = std::time::Instant::now();
    let report = match &cli.command {
        Command::Handeye(a) => commands::handeye(a, &config)?,
        Command::Jackknife(a) => commands::jackknife(a, &config)?,
        Command::Optimize(a) => commands::optimize(a, &config)?,
        Command::Validate(a) => commands::validate(a)?,
        Command::Synth(a) => commands::synth(a, &config, seed)?,
        Command::Report(a) => {
            if a.schema {
                print!("{}", crate::report::SCHEMA);
                return Ok(());
            }
            commands::report(a)?
        }
    };
    let mut report = report;
    if !matches!(cli.command, Command::Report(_)) {
        report.timing.elapsed_seconds = start.elapsed().as_secs_f64();
    }
    if let Some(path) = report_path(&cli.command) {
        std::fs::write(path, report.to_json() + "\n").map_err(|e| CliError::io(path.display(), e))?;
    }
    // validate always prints its metrics as JSON
    let as_json = cli.json || (matches!(cli.command, Command::Validate(_)) && !cli.quiet);
    if as_json {
        println!("{}", report.to_json());
    } else if !cli.quiet {
        for line in commands::summary_lines(&report) {
            println!("{line}");
        }
    }
    Ok(())
}

fn report_path(command: &Command) -> Option<&PathBuf> {
    match command {
        Command::Handeye(a) => a.report.as_ref(),
        Command::Jackknife(a) => a.report.as_ref(),
        Command::Optimize(a) => a.report.as_ref(),
        Command::Validate(a) => a.report.as_ref(),
        Command::Synth(a) => a.report.as_ref(),
        Command::Report(_) => None,
    }
}

/// Report for commands that echo their configuration.
fn new_report(command: &str, config: impl serde::Serialize) -> RunReport {
    let mut r = RunReport::new(command);
    r.config = serde_json::to_value(config).expect("configuration serializes");
    r
}
