use std::path::PathBuf;

use bdrkit_core::{EigenMode, KnnRule, SparsifyChoice};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bdrkit",
    version,
    about = "Block-diagonal affinity recovery and spectral clustering"
)]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic affinity matrix, its truth labels and a JSON sidecar.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    /// Feature vectors; the affinity is built from normalized inner products.
    Data,
    /// A precomputed symmetric affinity matrix.
    Affinity,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EigArg {
    Generalized,
    Standard,
}

impl From<EigArg> for EigenMode {
    fn from(e: EigArg) -> Self {
        match e {
            EigArg::Generalized => EigenMode::Generalized,
            EigArg::Standard => EigenMode::Standard,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SparsifyArg {
    Threshold,
    Pnn,
    None,
}

impl From<SparsifyArg> for SparsifyChoice {
    fn from(s: SparsifyArg) -> Self {
        match s {
            SparsifyArg::Threshold => SparsifyChoice::Threshold,
            SparsifyArg::Pnn => SparsifyChoice::Pnn,
            SparsifyArg::None => SparsifyChoice::None,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KnnArg {
    Union,
    Mutual,
}

impl From<KnnArg> for KnnRule {
    fn from(k: KnnArg) -> Self {
        match k {
            KnnArg::Union => KnnRule::Union,
            KnnArg::Mutual => KnnRule::Mutual,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// CSV file with one sample per row (or per column with --transpose).
    #[arg(long, required = true)]
    pub input: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = InputKind::Data)]
    pub kind: InputKind,

    /// Field delimiter; `tab` and `\t` select a tab.
    #[arg(long, default_value = ",")]
    pub delimiter: String,

    /// Samples are columns rather than rows.
    #[arg(long)]
    pub transpose: bool,

    #[arg(long, default_value_t = 2)]
    pub kmin: usize,

    /// Defaults to twice the number of truth clusters, or 10 without truth.
    #[arg(long)]
    pub kmax: Option<usize>,

    /// Defaults to 2 (kmax - 1).
    #[arg(long)]
    pub ncmax: Option<usize>,

    /// Smallest admissible block; defaults to ceil(N / kmax).
    #[arg(long)]
    pub nmin: Option<usize>,

    #[arg(long, value_enum, default_value = "generalized")]
    pub eig: EigArg,

    #[arg(long, value_enum, default_value = "pnn")]
    pub sparsify: SparsifyArg,

    /// Edge rule for the p-nearest-neighbour graph.
    #[arg(long, value_enum, default_value = "union")]
    pub knn_rule: KnnArg,

    #[arg(long, default_value_t = 1e-3)]
    pub lambda1_tol: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// One integer label per line; 0 marks an isolated sample.
    #[arg(long)]
    pub truth: Option<PathBuf>,

    /// Result document path; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Repeat the run with seeds seed, seed+1, ... and report p_det.
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Block sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,

    /// Within-block similarity per block, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub within: Vec<f64>,

    /// Half-width of the uniform jitter on block entries.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,

    /// Number of isolated vertices appended at the end.
    #[arg(long, default_value_t = 0)]
    pub type1: usize,

    /// Outlier vertex as `POSITION:c1,c2,...` (1-based position, one
    /// coefficient per block). Repeatable.
    #[arg(long)]
    pub type2: Vec<String>,

    /// Cross-block similarity matrix, rows separated by `;`.
    #[arg(long)]
    pub group: Option<String>,

    /// Half-width of the uniform jitter on injected entries.
    #[arg(long, default_value_t = 0.0)]
    pub corruption_jitter: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output prefix; writes PREFIX.affinity.csv, PREFIX.labels.csv and PREFIX.json.
    #[arg(long)]
    pub out: PathBuf,
}
