//! `unirep`: analogy, cross-level, FAQ retrieval, data-prep and projection
//! pipelines over file-based inputs.
//!
//! Every subcommand is deterministic for fixed inputs and seed, whatever
//! `--threads` is. Failures print one JSON record on stderr and exit nonzero.

mod commands;
mod common;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use common::{Format, ProviderSpec};

#[derive(Debug, Parser)]
#[command(name = "unirep", version, about = "Evaluate word, phrase and sentence embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand. Only `format` and `case_fold` enter
/// the config fingerprint.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Report format; defaults to csv for `project`, json elsewhere.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Worker threads.
    #[arg(long, default_value_t = 1, global = true)]
    #[serde(skip)]
    pub threads: usize,
    /// Lowercase word-table tokens and lookups.
    #[arg(long, global = true)]
    pub case_fold: bool,
    /// Output file (directory for `prep-ppdb`); stdout when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score analogy datasets with one or more embedding providers.
    EvalAnalogy(EvalAnalogyArgs),
    /// Positive/negative preservation ratios between word and derived levels.
    Crosslevel(CrosslevelArgs),
    /// Generate candidate lists or lift a word dataset to phrases/sentences.
    BuildDataset(BuildDatasetArgs),
    /// Top-1 accuracy and MRR on an FAQ collection.
    FaqEval(FaqEvalArgs),
    /// Hard negatives for FAQ fine-tuning.
    FaqNegatives(FaqNegativesArgs),
    /// Paraphrase and entailment training data from a paraphrase-database dump.
    PrepPpdb(PrepPpdbArgs),
    /// 2-D PCA of items or pair-difference vectors.
    Project(ProjectArgs),
    /// Per-category dataset sizes.
    Stats(StatsArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct EvalAnalogyArgs {
    /// Analogy dataset (JSONL); repeat for several levels.
    #[arg(long, required = true)]
    pub dataset: Vec<PathBuf>,
    /// NAME=word-bow:PATH or NAME=seq:PATH; repeatable.
    #[arg(long)]
    pub provider: Vec<ProviderSpec>,
    /// Shortcut for `--provider word-bow=word-bow:PATH`.
    #[arg(long)]
    pub word_vectors: Option<PathBuf>,
    /// Per-question outcomes (JSONL).
    #[arg(long)]
    #[serde(skip)]
    pub outcomes: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct CrosslevelArgs {
    #[arg(long)]
    pub word_dataset: PathBuf,
    /// Derived phrase- or sentence-level dataset; repeatable.
    #[arg(long, required = true)]
    pub dataset: Vec<PathBuf>,
    #[arg(long)]
    pub provider: Vec<ProviderSpec>,
    #[arg(long)]
    pub word_vectors: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct BuildDatasetArgs {
    /// Word tuples in `: category` / `a b c d` layout.
    #[arg(long, conflicts_with_all = ["dataset", "templates"], requires = "word_vectors")]
    pub questions: Option<PathBuf>,
    /// Table whose vocabulary supplies the candidates.
    #[arg(long)]
    pub word_vectors: Option<PathBuf>,
    /// Candidates per question; per-category reference counts when absent.
    #[arg(long)]
    pub k: Option<usize>,
    /// Word-level dataset to lift.
    #[arg(long, requires_all = ["templates", "level"])]
    pub dataset: Option<PathBuf>,
    /// Template records (JSONL).
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// `phrase<TAB>paraphrase` substitutions for B-side templates.
    #[arg(long)]
    pub paraphrases: Option<PathBuf>,
    #[arg(long)]
    pub level: Option<unirep_core::analogy::Level>,
    /// Summary report destination; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RankerKind {
    Tfidf,
    Bm25,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitArg {
    Train,
    Test,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct FaqEvalArgs {
    /// `qa_id<TAB>question<TAB>answer`.
    #[arg(long)]
    pub collection: PathBuf,
    /// `query_id<TAB>text<TAB>gold_qa_id<TAB>split`.
    #[arg(long)]
    pub queries: PathBuf,
    /// Repeat to compare rankers.
    #[arg(long, value_enum, required = true)]
    pub ranker: Vec<RankerKind>,
    /// Vectors keyed by qa_id and query_id, for `dense`.
    #[arg(long)]
    pub seq_vectors: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitArg,
    /// Per-query gold ranks (JSONL).
    #[arg(long)]
    #[serde(skip)]
    pub rankings: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct FaqNegativesArgs {
    #[arg(long)]
    pub collection: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long, value_enum, default_value = "bm25")]
    pub ranker: RankerKind,
    #[arg(long)]
    pub seq_vectors: Option<PathBuf>,
    /// Negatives per query.
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    #[arg(long, value_enum, default_value = "train")]
    pub split: SplitArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct PrepPpdbArgs {
    /// `|||`-delimited dump.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 343_000)]
    pub per_label: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Negatives per paraphrase pair.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Draw negatives from sources and targets instead of targets only.
    #[arg(long)]
    pub pool_sources: bool,
    /// Keep duplicate pairs.
    #[arg(long)]
    pub no_dedup: bool,
    /// SNLI/MultiNLI JSONL to pass through; repeatable.
    #[arg(long)]
    pub nli: Vec<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct ProjectArgs {
    /// One item per line; projected with PCA.
    #[arg(long, required_unless_present = "pairs", conflicts_with = "pairs")]
    pub items: Option<PathBuf>,
    /// `category<TAB>a<TAB>b` lines; exported as difference vectors.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long)]
    pub provider: Option<ProviderSpec>,
    #[arg(long, conflicts_with = "provider")]
    pub word_vectors: Option<PathBuf>,
    /// Project raw vectors instead of unit-normalized ones.
    #[arg(long)]
    pub raw: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct StatsArgs {
    #[arg(long, required = true)]
    pub dataset: Vec<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    context: Vec<String>,
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<unirep_core::Error>() {
            return e.kind();
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "io";
        }
    }
    "invalid-config"
}

fn report_error(kind: &str, message: String, context: Vec<String>) {
    let rec = ErrorRecord {
        error: ErrorBody { kind, message, context },
    };
    eprintln!("{}", serde_json::to_string(&rec).expect("error record serializes"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            report_error("usage", e.kind().to_string(), vec![e.render().to_string().trim().to_string()]);
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::EvalAnalogy(a) => commands::analogy::eval(a),
        Command::Crosslevel(a) => commands::analogy::crosslevel(a),
        Command::BuildDataset(a) => commands::analogy::build(a),
        Command::Stats(a) => commands::analogy::stats(a),
        Command::FaqEval(a) => commands::faq::eval(a),
        Command::FaqNegatives(a) => commands::faq::negatives(a),
        Command::PrepPpdb(a) => commands::prep::ppdb(a),
        Command::Project(a) => commands::project::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let context = e.chain().skip(1).map(|c| c.to_string()).collect();
            report_error(error_kind(&e), e.to_string(), context);
            ExitCode::FAILURE
        }
    }
}
