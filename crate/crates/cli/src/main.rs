mod args;
mod gen;
mod input;
mod json;
mod report;

use std::path::Path;
use std::process::ExitCode;

use bdrkit_core::nalgebra::DMatrix;
use bdrkit_core::{p_det, run, DataMatrix, Error, PipelineConfig, SymmetricGraph};
use clap::Parser;

use args::{Cli, Command, InputKind, RunArgs};
use report::{Document, InputEcho, Trials};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn read(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    /// Process exit status for this error.
    fn exit_code(&self) -> u8 {
        match self {
            Self::Io { .. } | Self::Json(_) => 1,
            Self::Parse(_) => 3,
            Self::Core(e) => match e {
                Error::NoSparseCandidate => 2,
                Error::InvalidConfig(_) => 4,
                Error::ZeroColumn(_) => 5,
                Error::NonFinite { .. } => 6,
                Error::Dimension(_) => 7,
                Error::NotSymmetric { .. } => 8,
                Error::SingularDegree(_) => 9,
                Error::InvalidSpec(_) => 10,
                Error::PositionOutOfRange { .. } => 11,
                Error::UnsupportedCorruptionCombination(_) => 12,
                Error::AllOutliers => 13,
                Error::DegenerateInput(_) => 14,
                Error::NoFeasibleCandidate(_) => 15,
                Error::VerticalSegment => 16,
                Error::NoCandidates => 17,
                Error::LengthMismatch(..) => 18,
                Error::EmptyGraph => 19,
                Error::EmptyTrials => 20,
                Error::EigenFailure => 21,
            },
        }
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::read(path, e))
}

fn load_graph(args: &RunArgs, path: &Path) -> Result<SymmetricGraph, CliError> {
    let mut rows = input::read_table(path, input::parse_delimiter(&args.delimiter)?)?;
    if args.transpose {
        rows = input::transpose(rows)?;
    }
    match args.kind {
        InputKind::Data => Ok(bdrkit_core::build_affinity(&DataMatrix::from_sample_rows(&rows)?)?),
        InputKind::Affinity => {
            let n = rows.len();
            if let Some(i) = rows.iter().position(|r| r.len() != n) {
                return Err(CliError::Parse(format!(
                    "affinity row {} has {} entries, expected {n}",
                    i + 1,
                    rows[i].len()
                )));
            }
            Ok(SymmetricGraph::from_affinity(DMatrix::from_fn(n, n, |i, j| {
                rows[i][j]
            }))?)
        }
    }
}

fn run_pipeline(args: &RunArgs) -> Result<(), CliError> {
    let path = args.input.as_deref().expect("clap enforces --input");
    let graph = load_graph(args, path)?;
    let truth = args.truth.as_deref().map(input::read_labels).transpose()?;
    if args.trials == 0 {
        return Err(Error::EmptyTrials.into());
    }
    let config = PipelineConfig {
        k_min: args.kmin,
        k_max: args.kmax,
        nc_max: args.ncmax,
        n_min: args.nmin,
        mode: args.eig.into(),
        sparsify: args.sparsify.into(),
        knn_rule: args.knn_rule.into(),
        lambda1_tol: args.lambda1_tol,
        seed: args.seed,
        ..Default::default()
    };
    let mut results = Vec::with_capacity(args.trials);
    for t in 0..args.trials as u64 {
        let cfg = PipelineConfig {
            seed: args.seed.wrapping_add(t),
            ..config.clone()
        };
        results.push(run(&graph, &cfg, truth.as_deref())?);
    }
    let trials = if args.trials > 1 {
        let k_hat: Vec<usize> = results.iter().map(|r| r.k_hat()).collect();
        let true_k = truth.as_deref().map(bdrkit_core::pipeline::count_clusters);
        Some(Trials {
            seeds: results.iter().map(|r| r.config.seed).collect(),
            p_det: true_k.map(|k| p_det(&k_hat, k)).transpose()?,
            k_hat,
            acc: results.iter().map(|r| r.metrics.accuracy).collect(),
        })
    } else {
        None
    };
    let echo = InputEcho {
        input: path.to_path_buf(),
        kind: args.kind,
        delimiter: args.delimiter.clone(),
        transpose: args.transpose,
        truth: args.truth.clone(),
        trials: args.trials,
    };
    let text = json::to_string(&Document::new(&echo, &results[0], trials))?;
    match &args.output {
        Some(out) => write_file(out, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("BDRKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("BDRKIT_THREADS must be a positive integer, got '{raw}'")))?;
    if n > 0 {
        // Fails only if a global pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = configure_threads().and_then(|()| match &cli.command {
        Some(Command::Gen(g)) => gen::run(g),
        None => run_pipeline(&cli.run),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bdrkit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
