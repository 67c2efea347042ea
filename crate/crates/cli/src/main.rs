//! `ontorep` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 numerical failure.

mod commands;
mod config;
mod run;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Environment variable naming the default data directory for inputs.
pub const DATA_DIR_VAR: &str = "ONTOREP_DATA_DIR";

/// Bad invocation; maps to exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "ontorep", version, about = "Ontology-grounded contrastive embeddings")]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Flat key = value file with defaults for the subcommand's flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate an ontology and write it in normalized form.
    Ingest(IngestArgs),
    /// Generate templated descriptions from graph relations.
    GenDesc(GenDescArgs),
    /// Sample name/definition and name/description training pairs.
    SamplePairs(SamplePairsArgs),
    /// Split a pair file into train and dev sets.
    Split(SplitArgs),
    /// Train the bi-encoder with in-batch InfoNCE.
    Train(TrainArgs),
    /// Finetune on STS pairs by cosine regression.
    FinetuneSts(FinetuneArgs),
    /// Embed concept names into an index file.
    Embed(EmbedArgs),
    /// Concept-similarity correlation on a term-pair benchmark.
    EvalSim(EvalSimArgs),
    /// Build the leaf-to-parent benchmark from a graph.
    BuildL2p(BuildL2pArgs),
    /// Score leaf-to-parent linking.
    EvalL2p(EvalL2pArgs),
    /// Pearson correlation on an STS set.
    EvalSts(EvalStsArgs),
    /// Accuracy on NLI triplets by similarity.
    EvalNli(EvalNliArgs),
    /// Entity-linking accuracy.
    EvalNel(EvalNelArgs),
    /// Pairwise similarity matrix over a term list.
    SimMatrix(SimMatrixArgs),
    /// Nearest concepts for query texts.
    Search(SearchArgs),
    /// Write a synthetic ontology and benchmark fixtures.
    Synth(SynthArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct IngestArgs {
    #[arg(long)]
    pub concepts: PathBuf,
    #[arg(long)]
    pub edges: PathBuf,
    /// `label<TAB>hierarchical|inverse|associative` lines.
    #[arg(long)]
    pub kinds: Option<PathBuf>,
    /// Merge duplicate concept ids instead of rejecting them.
    #[arg(long)]
    pub merge_duplicates: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct GenDescArgs {
    /// Directory with concepts.jsonl and edges.jsonl.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub seed: u64,
    /// `label<TAB>rule[<TAB>phrase]` verbalization overrides.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = ontorep::ontograph::DEFAULT_MAX_DEPTH)]
    pub max_depth: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SamplePairsArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub descriptions: PathBuf,
    #[arg(long)]
    pub total: usize,
    #[arg(long, default_value_t = 0.15)]
    pub def_fraction: f64,
    #[arg(long, default_value_t = 50)]
    pub def_cap: usize,
    /// `concept_id<TAB>weight` lines scaling definition shares.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SplitArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub dev_fraction: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    /// Held-out pairs for in-batch accuracy before and after training.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    /// Continue from a checkpoint instead of a fresh encoder.
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 2e-5)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.05)]
    pub warmup: f64,
    #[arg(long, default_value_t = 0.01)]
    pub weight_decay: f64,
    #[arg(long, default_value_t = 1)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub temperature: f64,
    #[arg(long, default_value_t = 1 << 15)]
    pub buckets: usize,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub init_scale: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct FinetuneArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub dev: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 6e-6)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.05)]
    pub warmup: f64,
    #[arg(long, default_value_t = 0.01)]
    pub weight_decay: f64,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    /// Keep the last epoch instead of the best dev epoch.
    #[arg(long)]
    pub keep_last: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EmbedArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub graph: PathBuf,
    /// Embed every name, not only the canonical one.
    #[arg(long)]
    pub synonyms: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalSimArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// `term1<TAB>term2<TAB>gold` lines.
    #[arg(long)]
    pub pairs: PathBuf,
    /// cosine, euclidean, manhattan or all.
    #[arg(long, default_value = "all")]
    pub distance: String,
    #[arg(long)]
    pub scale_min: Option<f64>,
    #[arg(long)]
    pub scale_max: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct BuildL2pArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Count any ancestor as a correct parent.
    #[arg(long)]
    pub ancestors: bool,
    /// Embed every candidate name.
    #[arg(long)]
    pub synonyms: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalL2pArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Benchmark from build-l2p; built from --graph when absent.
    #[arg(long)]
    pub benchmark: Option<PathBuf>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub ancestors: bool,
    #[arg(long)]
    pub synonyms: bool,
    #[arg(long, default_value_t = ontorep::evalsuite::DEFAULT_K_MISS)]
    pub k_miss: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalStsArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalNliArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub triplets: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalNelArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub mentions: PathBuf,
    /// Index file from `embed`; built from --graph when absent.
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub synonyms: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SimMatrixArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// One term per line, optionally `term<TAB>group`.
    #[arg(long)]
    pub terms: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long, short, default_value_t = 10)]
    pub k: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(required = true)]
    pub queries: Vec<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 550)]
    pub leaves: usize,
    #[arg(long, default_value_t = 150)]
    pub non_leaves: usize,
    #[arg(long)]
    pub seed: u64,
    /// Rows per benchmark fixture; 0 skips them.
    #[arg(long, default_value_t = 0)]
    pub benchmarks: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Resolve an input path, falling back to the data directory for relative
/// paths that do not exist under the working directory.
pub fn input_path(p: &Path) -> PathBuf {
    if p.is_relative() && !p.exists() {
        if let Some(dir) = std::env::var_os(DATA_DIR_VAR) {
            let candidate = Path::new(&dir).join(p);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    p.to_owned()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 1;
        }
        let train = match cause.downcast_ref::<ontorep::evalsuite::EvalError>() {
            Some(ontorep::evalsuite::EvalError::Encode(t)) => Some(t),
            _ => cause.downcast_ref::<ontorep::trainer::TrainError>(),
        };
        if train.is_some_and(|t| t.is_numerical()) {
            return 3;
        }
    }
    2
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let args: Vec<OsString> = std::env::args_os().collect();
    let args = match config::merge(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
