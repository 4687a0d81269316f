//! `murs`: build template stores, rank and suppress mutants, tune, report.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 when input data fails
//! validation, 3 when an internal invariant is violated.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "murs", version, about = "Rank and suppress mutants using historical developer feedback")]
struct Cli {
    /// Directory of `*.profile` files overriding the built-in language profiles.
    #[arg(long, global = true, value_name = "DIR")]
    profiles: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Template labeled records and aggregate them into a store.
    BuildStore(BuildStoreArgs),
    /// Rank records against a store and attach suppression decisions.
    Rank(RankArgs),
    /// Apply per-file and per-changelist caps to ranked output.
    Surface(SurfaceArgs),
    /// Replay an evaluation set under every grid configuration.
    Tune(TuneArgs),
    /// Controversial or consistently negative templates.
    Report(ReportArgs),
    /// Generate mutants for changed lines of a source file.
    Mutate(MutateArgs),
}

#[derive(Debug, Args)]
struct BuildStoreArgs {
    #[arg(long, value_name = "FILE")]
    records: PathBuf,
    /// original, typed or indexed.
    #[arg(long, default_value = "indexed")]
    template: String,
    #[arg(long, default_value_t = 0)]
    context: usize,
    #[arg(long, default_value_t = 0)]
    vocab: usize,
    #[arg(long, value_name = "STORE")]
    out: PathBuf,
    /// Timestamp recorded in the store; defaults to SOURCE_DATE_EPOCH, else 0.
    #[arg(long)]
    built_at: Option<u64>,
}

#[derive(Debug, Args)]
struct RankArgs {
    #[arg(long, value_name = "FILE")]
    records: PathBuf,
    #[arg(long, value_name = "STORE")]
    store: PathBuf,
    /// {usefulness|bayes}x{kill-ratio|kill-counter}.
    #[arg(long, default_value = "bayesxkill-counter")]
    ranking: String,
    /// Order kill-counter tuples with fewer always-killed mutants first.
    #[arg(long)]
    fewer_killed_first: bool,
    /// none, average or probabilistic.
    #[arg(long, default_value = "probabilistic")]
    suppression: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SurfaceArgs {
    #[arg(long, value_name = "FILE")]
    ranked: PathBuf,
    #[arg(long, default_value_t = 3)]
    per_file: usize,
    #[arg(long, default_value_t = 10)]
    per_changelist: usize,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[arg(long, value_name = "FILE")]
    train: PathBuf,
    #[arg(long, value_name = "FILE")]
    eval: PathBuf,
    /// `full` for the 288-point grid, or a file with one configuration per line.
    #[arg(long, default_value = "full")]
    grid: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("report").required(true).args(["top_controversial", "negative_templates"])))]
struct ReportArgs {
    #[arg(long, value_name = "STORE")]
    store: PathBuf,
    /// List the K most controversial templates.
    #[arg(long, value_name = "K")]
    top_controversial: Option<usize>,
    /// List templates that drew mostly negative feedback in every month.
    #[arg(long, requires = "records")]
    negative_templates: bool,
    /// Timestamped records for --negative-templates.
    #[arg(long, value_name = "FILE")]
    records: Option<PathBuf>,
    /// Minimum average number of mutants per month.
    #[arg(long, default_value_t = 50.0)]
    min_monthly: f64,
    /// Monthly usefulness must stay below this value.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MutateArgs {
    #[arg(long, value_name = "FILE")]
    source: PathBuf,
    /// Comma-separated line numbers and ranges, e.g. `3,7-9`.
    #[arg(long, value_name = "SPEC")]
    changed_lines: String,
    #[arg(long)]
    language: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "cl0")]
    changelist: String,
    /// Name recorded in the mutants; defaults to the source path.
    #[arg(long)]
    filename: Option<String>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = std::panic::catch_unwind(|| commands::run(cli));
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("murs: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(3),
    }
}
