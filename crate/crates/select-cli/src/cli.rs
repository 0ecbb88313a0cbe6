//! Argument grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "select",
    version,
    about = "Dynamic anchor mining and concept-edit toolkit",
    disable_help_subcommand = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// End-to-end anchor mining for a target concept.
    Mine(MineArgs),
    /// Score a single metric family without running the full pipeline.
    Score {
        #[command(subcommand)]
        what: ScoreCommand,
    },
    /// Solve the closed-form weight edit on matrix or embedding inputs.
    Erase(EraseArgs),
    /// Layer-swap causal tracing over layered-model files or planted
    /// fixtures.
    Trace(TraceArgs),
    /// Score tables of per-concept accuracies.
    Report(ReportArgs),
}

/// Backend and configuration flags shared by scoring commands.
#[derive(Args, Debug, Clone, Default)]
pub struct BackendArgs {
    /// Scoring backend: ngram, http, or fixture.
    #[arg(long)]
    pub backend: Option<String>,
    /// Training corpus for the ngram backend.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Canned-response file for the fixture backend.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// JSON config file; flags win over file values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for every synthetic-randomness source.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Response cache directory (default .select-cache).
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MineArgs {
    /// Concept to erase.
    #[arg(long)]
    pub target: String,
    /// Concept category: general, instance, celebrity, artist_style, nsfw.
    #[arg(long, default_value = "general")]
    pub category: String,
    #[command(flatten)]
    pub backend: BackendArgs,
    /// Write the run record here (canonical JSON). Prints to stdout when
    /// omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Stage-one activation-ratio threshold.
    #[arg(long)]
    pub uc_threshold: Option<f64>,
    /// Stage-one survivor count.
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Child-to-parent hierarchy file (JSON object).
    #[arg(long)]
    pub hierarchy: Option<PathBuf>,
    /// Comma-separated synonyms of the target to exclude.
    #[arg(long)]
    pub synonyms: Option<String>,
    /// Candidate count requested from the backend.
    #[arg(long)]
    pub num_candidates: Option<usize>,
    /// Related-word count used for activation scoring.
    #[arg(long)]
    pub num_related_words: Option<usize>,
    /// Mask-template count used for activation scoring.
    #[arg(long)]
    pub num_related_templates: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum ScoreCommand {
    /// Contextual activation report (and anchor/target ratio with
    /// --anchor).
    Activation(ActivationArgs),
    /// Coherence report for a target/anchor pair.
    Coherence(CoherenceArgs),
}

#[derive(Args, Debug)]
pub struct ActivationArgs {
    #[arg(long)]
    pub target: String,
    /// Optional anchor; adds the anchor report and the activation ratio.
    #[arg(long)]
    pub anchor: Option<String>,
    #[arg(long, default_value = "general")]
    pub category: String,
    /// Comma-separated related words; generated via the backend when
    /// omitted.
    #[arg(long)]
    pub words: Option<String>,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CoherenceArgs {
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub anchor: String,
    #[arg(long, default_value = "general")]
    pub category: String,
    /// Prompt file, one target-bearing prompt per line; built-in prompts
    /// when omitted.
    #[arg(long)]
    pub prompts: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EraseArgs {
    /// Weight matrix file; synthetic weights when omitted in name mode.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Target embedding matrix file (matrix mode).
    #[arg(long)]
    pub c1: Option<PathBuf>,
    /// Anchor embedding matrix file (matrix mode).
    #[arg(long)]
    pub cstar: Option<PathBuf>,
    /// Retain embedding matrix file (matrix mode, optional).
    #[arg(long)]
    pub c0: Option<PathBuf>,
    /// Target concept name (name mode).
    #[arg(long)]
    pub target: Option<String>,
    /// Anchor concept name (name mode).
    #[arg(long)]
    pub anchor: Option<String>,
    /// Comma-separated retain concepts (name mode).
    #[arg(long)]
    pub retain: Option<String>,
    /// Embedding file mapping concept name to vector; hash-synthetic
    /// embeddings when omitted.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Embedding dimension for synthetic embeddings.
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    /// Output row count for synthetic weights.
    #[arg(long, default_value_t = 8)]
    pub out_dim: usize,
    /// Preservation weight.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the solution here (canonical JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    /// Base model file (file mode).
    #[arg(long)]
    pub base: Option<PathBuf>,
    /// Edited model file (file mode).
    #[arg(long)]
    pub edited: Option<PathBuf>,
    /// Concept to score; repeatable in file mode.
    #[arg(long)]
    pub concept: Vec<String>,
    /// Prompt file, one prompt per line; built-in prompts when omitted.
    #[arg(long)]
    pub prompts: Option<PathBuf>,
    /// Layer count for a planted fixture (planted mode).
    #[arg(long)]
    pub layers: Option<usize>,
    /// Comma-separated planted layer indices (planted mode).
    #[arg(long)]
    pub plant: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the heatmap CSV here (layer columns, concept rows).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Records file: .csv or .json with acc_e, acc_g, acc_s, acc_b
    /// columns.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Treat input accuracies as percentages (0-100) instead of
    /// fractions.
    #[arg(long)]
    pub percent: bool,
    /// Write the summary here (canonical JSON, fractions).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the summary table here (CSV, percent).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}
