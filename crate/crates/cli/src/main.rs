//! `dddm`: detect mental health, substance use and concurrent status from
//! administrative visit records.
//!
//! Typical pipeline, run in one directory:
//!
//! ```text
//! dddm simulate                # writes sample.csv
//! dddm detect-basic            # reads sample.csv, writes status.csv
//! dddm summarize               # reads status.csv
//! ```

mod commands;
mod error;
mod output;

use std::net::SocketAddr;
use std::panic;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use dddm::analytics::{Statistic, TimeUnit};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "dddm",
    version,
    about = "Visit-count and time-span detection of MH, SU and concurrent MHSU status"
)]
struct Cli {
    /// Directory for inputs and outputs given without an explicit path.
    #[arg(long, global = true, env = "DDDM_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the 200-patient sample dataset.
    Simulate(SimulateArgs),
    /// Mental health status per client.
    DetectMh(DetectArgs),
    /// Substance use status per client.
    DetectSu(DetectArgs),
    /// Concurrent MHSU status, assuming the data spans at most --t-mhsu days.
    DetectBasic(DetectArgs),
    /// Concurrent MHSU status in every sliding --t-mhsu day window.
    DetectBroad(DetectArgs),
    /// Counts and proportions of a status table.
    Summarize(SummarizeArgs),
    /// Detection counts over a grid of parameter values.
    Sweep(SweepArgs),
    /// Detection counts per calendar bucket.
    Temporal(TemporalArgs),
    /// Split a dataset by client or by time.
    Split(SplitArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SummaryFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlacementArg {
    Deterministic,
    SeededUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepKindArg {
    WithinSpan,
    VisitCount,
    ConcurrentSpan,
}

/// Detection parameters; anything left out keeps the command's default.
#[derive(Debug, Clone, Default, Args)]
struct ParamArgs {
    /// Hospital visits with an MH code required.
    #[arg(long, allow_negative_numbers = true)]
    n_mhh: Option<i64>,
    /// Physician visits with an MH code required.
    #[arg(long, allow_negative_numbers = true)]
    n_mhp: Option<i64>,
    /// Hospital visits with an SU code required.
    #[arg(long, allow_negative_numbers = true)]
    n_suh: Option<i64>,
    /// Physician visits with an SU code required.
    #[arg(long, allow_negative_numbers = true)]
    n_sup: Option<i64>,
    /// Maximum days between the first and last qualifying MH visit.
    #[arg(long, allow_negative_numbers = true)]
    t_mh: Option<i64>,
    /// Maximum days between the first and last qualifying SU visit.
    #[arg(long, allow_negative_numbers = true)]
    t_su: Option<i64>,
    /// Concurrency window in days.
    #[arg(long, allow_negative_numbers = true)]
    t_mhsu: Option<i64>,
    /// MH codes, comma-separated or @file with one code per line. Repeatable.
    #[arg(long, value_name = "CODES")]
    icd_mh: Vec<String>,
    /// SU codes, comma-separated or @file with one code per line. Repeatable.
    #[arg(long, value_name = "CODES")]
    icd_su: Vec<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Output path (`-` for stdout) [default: <out-dir>/sample.csv].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Visit date placement [default: deterministic, or seeded-uniform when --seed is given].
    #[arg(long, value_enum)]
    placement: Option<PlacementArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// Dataset CSV [default: <out-dir>/sample.csv].
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Status table path (`-` for stdout) [default: <out-dir>/status.csv].
    #[arg(long)]
    out: Option<PathBuf>,
    /// detect-basic only: run even if the data spans more than --t-mhsu days.
    #[arg(long)]
    force: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Debug, Args)]
struct SummarizeArgs {
    /// Status table CSV [default: <out-dir>/status.csv].
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Output path [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Collapse windowed output to one row per client before counting.
    #[arg(long)]
    aggregate: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: SummaryFormat,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Dataset CSV [default: <out-dir>/sample.csv].
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: SweepKindArg,
    /// Comma-separated x values [default: the kind's standard grid].
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<u32>>,
    /// visit-count: physician visits per hospital visit.
    #[arg(long, default_value_t = 2)]
    ratio: u32,
    /// concurrent-span: one series per within-condition span [default: 14,21,28].
    #[arg(long, value_delimiter = ',')]
    within_spans: Option<Vec<u32>>,
    /// Series path (`-` for stdout) [default: <out-dir>/sweep-<kind>.<format>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG line chart here.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Debug, Args)]
struct TemporalArgs {
    /// Dataset CSV [default: <out-dir>/sample.csv].
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, default_value = "month")]
    unit: TimeUnit,
    #[arg(long, default_value = "year")]
    span: TimeUnit,
    #[arg(long, default_value = "frequency")]
    statistic: Statistic,
    /// Run even if a bucket is wider than --t-mhsu days.
    #[arg(long)]
    force: bool,
    /// Bucket table path (`-` for stdout) [default: <out-dir>/temporal.<format>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG bar chart here.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["by_id", "by_time"])))]
struct SplitArgs {
    /// Dataset CSV [default: <out-dir>/sample.csv].
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Clients per chunk.
    #[arg(long)]
    by_id: Option<usize>,
    /// Days per chunk; fractional values are allowed.
    #[arg(long)]
    by_time: Option<f64>,
    /// --by-time: stop at the first empty chunk instead of skipping it.
    #[arg(long, requires = "by_time")]
    strict_appendix: bool,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, env = "DDDM_ADDR", default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Largest accepted request body in MiB.
    #[arg(long, default_value_t = 64)]
    body_limit_mb: usize,
    /// Per-request computation limit in seconds.
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
    /// Keep uploaded datasets as CSV files here and reload them on start.
    #[arg(long)]
    spill_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if matches!(cli.command, Command::Serve(_)) {
        "info"
    } else {
        "warn"
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default_level))
        .format_timestamp(None)
        .init();

    match panic::catch_unwind(|| commands::run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(err)) => {
            eprintln!("dddm: {err}");
            err.exit_code()
        }
        Err(_) => CliError::Internal("unexpected panic".into()).exit_code(),
    }
}
