mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use config::{Config, OracleKind};

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_FORMAT_ERROR: u8 = 2;
pub const EXIT_OBJECTS_MISSING: u8 = 3;
pub const EXIT_TRANSPORT: u8 = 4;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_DATA: u8 = 65;
pub const EXIT_CANT_CREATE: u8 = 73;
pub const EXIT_IO: u8 = 74;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0} already exists (pass --force to overwrite)")]
    Exists(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Exists(_) => EXIT_CANT_CREATE,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

/// Graph-state task planning with oracle-guided state reduction.
#[derive(Debug, Parser)]
#[command(name = "taskscope", version)]
struct Cli {
    /// TOML settings file; flags and TASKSCOPE_LLM_* variables take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads for `bench`.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, value_name = "LEVEL")]
    log_level: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded household world.
    GenWorld(GenWorldArgs),
    /// Reduce a world to the objects relevant to a goal.
    Reduce(ReduceArgs),
    /// Plan on a world or reduced world.
    Plan(PlanArgs),
    /// Run a benchmark matrix and write per-run rows plus aggregates.
    Bench(BenchArgs),
    /// Replay a plan on a world and check that it reaches the goal.
    ValidatePlan(ValidateArgs),
}

#[derive(Debug, Args)]
struct GenWorldArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 280)]
    objects: usize,
    #[arg(long, default_value_t = 6)]
    rooms: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Clone, Args)]
struct OracleArgs {
    #[arg(long, value_enum)]
    oracle: Option<OracleKind>,
    /// Noisy oracle: chance of dropping each correct pick.
    #[arg(long)]
    p_drop: Option<f64>,
    /// Noisy oracle: chance of adding each wrong candidate.
    #[arg(long)]
    p_add: Option<f64>,
    #[arg(long)]
    noise_seed: Option<u64>,
    /// Scripted oracle: JSON array of reply strings.
    #[arg(long, value_name = "PATH")]
    script: Option<PathBuf>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    #[arg(long)]
    world: PathBuf,
    /// Taxonomy JSON; defaults to the bundled household taxonomy.
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    #[arg(long)]
    goal: String,
    #[command(flatten)]
    oracle: OracleArgs,
    /// Frontier-expansion rounds.
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PlannerChoice {
    Mcts,
    Policy,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["world", "reduced"]))]
struct PlanArgs {
    #[arg(long)]
    world: Option<PathBuf>,
    #[arg(long)]
    reduced: Option<PathBuf>,
    #[arg(long)]
    goal: String,
    #[arg(long, value_enum, default_value = "mcts")]
    planner: PlannerChoice,
    #[command(flatten)]
    oracle: OracleArgs,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_len: Option<usize>,
    /// Plan JSON; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Matrix JSON; omitted fields take their defaults.
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    /// Report directory (rows.jsonl, summary.json, table.txt).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    world: PathBuf,
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    goal: String,
}

fn init_logging(level: &str) -> Result<(), CliError> {
    level
        .parse::<log::LevelFilter>()
        .map_err(|_| CliError::Usage(format!("unknown log level {level:?}")))?;
    env_logger::Builder::new()
        .parse_filters(level)
        .format_timestamp(None)
        .try_init()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let cfg = Config::load(cli.config.as_deref())?;
    let level = cli.log_level.clone().or_else(|| cfg.log_level.clone()).unwrap_or_else(|| "warn".into());
    init_logging(&level)?;
    let jobs = cli
        .jobs
        .or(cfg.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    match cli.command {
        Command::GenWorld(a) => commands::gen_world(&a),
        Command::Reduce(a) => commands::reduce(&a, &cfg),
        Command::Plan(a) => commands::plan(&a, &cfg),
        Command::Bench(a) => commands::bench(&a, jobs),
        Command::ValidatePlan(a) => commands::validate_plan(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn plan_needs_exactly_one_input() {
        assert!(Cli::try_parse_from(["taskscope", "plan", "--goal", "open(a#1)=true"]).is_err());
        assert!(Cli::try_parse_from([
            "taskscope", "plan", "--world", "a", "--reduced", "b", "--goal", "open(a#1)=true"
        ])
        .is_err());
        assert!(Cli::try_parse_from(["taskscope", "plan", "--reduced", "b", "--goal", "open(a#1)=true"]).is_ok());
    }
}
