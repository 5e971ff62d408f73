//! `jitminer`: mine labeled JIT defect datasets and train the baseline model.

mod lines;
mod mine;
mod modeling;
mod stats;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jitminer_core::config::RunConfig;
use jitminer_core::metrics::{EntropyMode, Feature, LaLdNorm, LtNorm, NfNorm, NucNorm};
use jitminer_core::model::NormFit;
use jitminer_core::tracker::{ExportFormat, LinkMode};

/// Invalid invocation that clap could not catch on its own; exits with 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "jitminer", version, about = "Just-in-time defect dataset miner and baseline classifier")]
struct Cli {
    /// key = value run configuration; command-line flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for commit extraction and SZZ tracing
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
    /// Seed for every random choice (default 42)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Embed a generation timestamp in report files
    #[arg(long, global = true)]
    stamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mine a repository and ticket export into dataset.csv, pairs.jsonl and summary.json
    Mine(MineArgs),
    /// Dataset overview, per-feature statistics and extension report
    Stats(StatsArgs),
    /// Train the baseline network on a dataset
    Train(TrainArgs),
    /// Evaluate a saved model on a dataset
    Eval(EvalArgs),
    /// Leave-one-feature-out ablation
    Ablate(AblateArgs),
    /// Show the lines an inducing commit added that its fix later changed
    Lines(LinesArgs),
    /// Min-max normalize dataset columns
    Normalize(NormalizeArgs),
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[arg(long)]
    pub entropy_mode: Option<EntropyMode>,
    #[arg(long)]
    pub window_days: Option<f64>,
    #[arg(long)]
    pub la_ld_norm: Option<LaLdNorm>,
    #[arg(long)]
    pub lt_norm: Option<LtNorm>,
    #[arg(long)]
    pub nf_norm: Option<NfNorm>,
    #[arg(long)]
    pub nuc_norm: Option<NucNorm>,
    /// 0 or -1
    #[arg(long, allow_negative_numbers = true)]
    pub rexp_year_offset: Option<i32>,
}

#[derive(Args, Debug)]
pub struct MineArgs {
    #[arg(long)]
    pub repo: Option<PathBuf>,
    /// Ticket export (CSV or JSON)
    #[arg(long)]
    pub tickets: Option<PathBuf>,
    #[arg(long)]
    pub tickets_format: Option<ExportFormat>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the inducing pairs (default <out>/pairs.jsonl)
    #[arg(long)]
    pub pairs_out: Option<PathBuf>,
    /// Fix linking strictness: id-only or id+keyword
    #[arg(long)]
    pub links: Option<LinkMode>,
    /// Only commits at or after this time (epoch seconds or ISO-8601)
    #[arg(long)]
    pub since: Option<String>,
    #[arg(long)]
    pub until: Option<String>,
    #[command(flatten)]
    pub metrics: MetricsArgs,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    pub dataset: PathBuf,
    #[arg(long)]
    pub json: bool,
    /// Repository the dataset was mined from, for the extension report
    #[arg(long)]
    pub repo: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct TrainFlags {
    /// Comma-separated feature names
    #[arg(long, value_parser = parse_features)]
    pub features: Option<FeatureList>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long)]
    pub hidden_width: Option<usize>,
    /// Number of weight layers (hidden layers plus output)
    #[arg(long)]
    pub layers: Option<usize>,
    /// Fit min-max ranges on the training split or the full dataset
    #[arg(long)]
    pub norm_fit: Option<NormFit>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    pub dataset: PathBuf,
    #[command(flatten)]
    pub flags: TrainFlags,
    /// Where to save the trained model as JSON
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// Also write the per-epoch loss history as JSON
    #[arg(long)]
    pub loss_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    pub dataset: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Args, Debug)]
pub struct AblateArgs {
    pub dataset: PathBuf,
    #[command(flatten)]
    pub flags: TrainFlags,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct LinesArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub repo: PathBuf,
    /// 1-based line of the pairs file
    #[arg(long)]
    pub pair: usize,
}

#[derive(Args, Debug)]
pub struct NormalizeArgs {
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_parser = parse_features)]
    pub features: Option<FeatureList>,
    /// Write the fitted column ranges as JSON
    #[arg(long)]
    pub ranges_out: Option<PathBuf>,
}

/// Comma-separated feature selection from the command line.
#[derive(Debug, Clone)]
pub struct FeatureList(pub Vec<Feature>);

fn parse_features(s: &str) -> Result<FeatureList, String> {
    let list = Feature::parse_list(s).map_err(|e| e.to_string())?;
    if list.is_empty() {
        return Err("empty feature list".into());
    }
    Ok(FeatureList(list))
}

/// Settings shared by every subcommand after merging file and flags.
pub struct Context {
    pub config: RunConfig,
    pub stamp: Option<u64>,
}

impl Context {
    pub fn seed(&self) -> u64 {
        self.config.train.seed
    }
}

fn build_context(cli: &Cli) -> anyhow::Result<Context> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(|e| UsageError(format!("config {}: {e}", path.display())))?,
        None => RunConfig::default(),
    };
    if let Some(jobs) = cli.jobs {
        config.jobs = Some(jobs as usize);
    }
    if let Some(seed) = cli.seed {
        config.train.seed = seed;
    }
    let stamp = cli.stamp.then(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs())
    });
    Ok(Context { config, stamp })
}

fn init_logging(config: &RunConfig) {
    let default = config.log_level.clone().unwrap_or_else(|| "warn".to_owned());
    let env = env_logger::Env::new().filter_or("JITMINER_LOG", default);
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut ctx = build_context(&cli)?;
    init_logging(&ctx.config);
    if let Some(jobs) = ctx.config.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match cli.command {
        Command::Mine(args) => mine::run(&mut ctx, args),
        Command::Stats(args) => stats::run_stats(&ctx, args),
        Command::Train(args) => modeling::run_train(&mut ctx, args),
        Command::Eval(args) => modeling::run_eval(args),
        Command::Ablate(args) => modeling::run_ablate(&mut ctx, args),
        Command::Lines(args) => lines::run(args),
        Command::Normalize(args) => stats::run_normalize(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
