//! `arise`: categorical clustering with value-level semantic enrichment.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "arise", version, about = "Categorical clustering with semantic value descriptions")]
pub struct Cli {
    /// TOML file with run settings; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Run every stage on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print dataset statistics as JSON.
    Stats(DataArgs),
    /// Describe every distinct attribute value and store the results in a cache.
    Describe(DescribeArgs),
    /// Write a deterministic hash-based token bundle for a description cache.
    StubBundle(StubBundleArgs),
    /// Pool a token bundle into one embedding per attribute value.
    Encode(EncodeArgs),
    /// Search the fusion weight and cluster.
    Cluster(ClusterArgs),
    /// Score a clustering result against ground-truth labels.
    Eval(EvalArgs),
    /// Run a suite of repeated-trial evaluations.
    Bench(BenchArgs),
    /// Time the pipeline on synthetic data of growing size.
    Scaling(ScalingArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Number of clusters; defaults to the number of label classes.
    #[arg(long)]
    pub k: Option<usize>,
    /// Column holding ground-truth classes [default: class].
    #[arg(long)]
    pub label_column: Option<String>,
    /// The table has no label column.
    #[arg(long, conflicts_with = "label_column")]
    pub no_label: bool,
    /// Single-character field delimiter.
    #[arg(long)]
    pub delimiter: Option<char>,
    /// JSON file of declared values per attribute.
    #[arg(long)]
    pub domains: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DescribeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// JSONL description cache, created if missing.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Description source: stub or openai.
    #[arg(long)]
    pub llm: Option<String>,
    /// Base URL of an OpenAI-compatible API, e.g. http://localhost:8000/v1.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Concurrent requests.
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Prompt template file with {attribute}, {value}, {domain} and {max_words}.
    #[arg(long)]
    pub prompt_template: Option<PathBuf>,
    /// Record failures and continue instead of aborting.
    #[arg(long)]
    pub best_effort: bool,
}

#[derive(Args, Debug)]
pub struct StubBundleArgs {
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    /// Only use descriptions from this model.
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    /// attention, mean or cls.
    #[arg(long)]
    pub pooling: Option<String>,
    /// Zero-fill values the bundle lacks.
    #[arg(long)]
    pub best_effort: bool,
    /// JSON file for the pooled embeddings.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    /// Weights as start:end:step, a comma list, or one value.
    #[arg(long)]
    pub alphas: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Seed of the final k-means run.
    #[arg(long)]
    pub final_seed: Option<u64>,
    /// Keep the selected candidate's partition instead of re-running k-means.
    #[arg(long)]
    pub reuse_search_labels: bool,
    #[arg(long)]
    pub pooling: Option<String>,
    /// exact or subsample.
    #[arg(long)]
    pub silhouette: Option<String>,
    #[arg(long)]
    pub best_effort: bool,
    /// Where to write result.json; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub result: PathBuf,
    /// CSV holding the ground-truth column.
    #[arg(long)]
    pub labels: PathBuf,
    /// Column name; required when the CSV has more than one column.
    #[arg(long)]
    pub label_column: Option<String>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub suite: PathBuf,
    /// Markdown table output; stdout when omitted.
    #[arg(long)]
    pub out_md: Option<PathBuf>,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ScalingArgs {
    /// n, m or v.
    #[arg(long, default_value = "n")]
    pub axis: String,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', default_values_t = [2000usize, 4000, 8000])]
    pub values: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    #[arg(long, default_value_t = 5)]
    pub cardinality: usize,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    #[arg(long, default_value = "0,0.5,1")]
    pub alphas: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", commands::diagnostic(&e));
            ExitCode::FAILURE
        }
    }
}
