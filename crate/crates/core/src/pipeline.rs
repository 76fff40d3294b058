//! End-to-end recovery: enhancement, `v` estimation, reconstruction and
//! clustering.

use serde::{Deserialize, Serialize};

use crate::changepoint::{candidate_sizes, detect_changepoints_with, ChangepointSet};
use crate::cluster::{map_labels_back, reconstruct_bd, spectral_cluster, KMeansConfig};
use crate::enhance::{
    detect_type1, sbdo_order, sparsify, KnnRule, Ordering, SparsifyConfig, SparsifyMethod, Type1Report,
};
use crate::error::{Error, Result};
use crate::estimate::{evaluate_all, select_model, VEstimate};
use crate::matrix::{build_affinity, vector_v, DataMatrix, EigenMode, SymmetricGraph};
use crate::metrics::{accuracy, conductance, modularity, MetricReport};

/// Sparsification choice at the pipeline level; numeric settings are
/// filled in from the resolved configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SparsifyChoice {
    Threshold,
    #[default]
    Pnn,
    None,
}

impl std::str::FromStr for SparsifyChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "threshold" => Ok(Self::Threshold),
            "pnn" => Ok(Self::Pnn),
            "none" => Ok(Self::None),
            other => Err(Error::InvalidConfig(format!("unknown sparsification method '{other}'"))),
        }
    }
}

/// User-facing settings; `None` fields take data-dependent defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub k_min: usize,
    pub k_max: Option<usize>,
    pub nc_max: Option<usize>,
    pub n_min: Option<usize>,
    pub mode: EigenMode,
    pub sparsify: SparsifyChoice,
    pub knn_rule: KnnRule,
    pub lambda1_tol: f64,
    /// Shortest segment the changepoint search may create.
    pub min_segment: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            k_min: 2,
            k_max: None,
            nc_max: None,
            n_min: None,
            mode: EigenMode::Generalized,
            sparsify: SparsifyChoice::Pnn,
            knn_rule: KnnRule::Union,
            lambda1_tol: 1e-3,
            min_segment: 3,
            seed: 0,
        }
    }
}

/// Configuration after defaults have been applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub nc_max: usize,
    pub n_min: usize,
    pub mode: EigenMode,
    pub sparsify: SparsifyChoice,
    pub knn_rule: KnnRule,
    pub lambda1_tol: f64,
    pub min_segment: usize,
    pub seed: u64,
}

/// Default K_max when nothing is known about the number of clusters.
pub const DEFAULT_K_MAX: usize = 10;

impl PipelineConfig {
    /// Applies defaults for a graph of `n` non-outlier vertices. `true_k` (if
    /// known) sets `k_max = 2 * true_k`.
    pub fn resolve(&self, n: usize, true_k: Option<usize>) -> Result<ResolvedConfig> {
        let k_min = self.k_min;
        let k_max = self
            .k_max
            .unwrap_or_else(|| true_k.map_or(DEFAULT_K_MAX, |k| 2 * k).max(k_min));
        if k_min < 2 || k_min > k_max {
            return Err(Error::InvalidConfig(format!(
                "need 2 <= kmin <= kmax, got {k_min} and {k_max}"
            )));
        }
        let nc_max = self.nc_max.unwrap_or(2 * (k_max - 1));
        if nc_max + 1 < k_max {
            return Err(Error::InvalidConfig(format!(
                "ncmax = {nc_max} must be at least kmax - 1 = {}",
                k_max - 1
            )));
        }
        let n_min = self.n_min.unwrap_or_else(|| n.div_ceil(k_max));
        if !(self.lambda1_tol.is_finite() && self.lambda1_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda1 tolerance {} must be positive",
                self.lambda1_tol
            )));
        }
        if self.min_segment < 2 {
            return Err(Error::InvalidConfig("minimum segment length must be at least 2".into()));
        }
        if n < 2 * k_min {
            return Err(Error::InvalidConfig(format!(
                "{n} samples cannot form {k_min} blocks of size 2"
            )));
        }
        Ok(ResolvedConfig {
            k_min,
            k_max,
            nc_max,
            n_min,
            mode: self.mode,
            sparsify: self.sparsify,
            knn_rule: self.knn_rule,
            lambda1_tol: self.lambda1_tol,
            min_segment: self.min_segment,
            seed: self.seed,
        })
    }
}

impl ResolvedConfig {
    pub fn sparsify_config(&self) -> SparsifyConfig {
        let method = match self.sparsify {
            SparsifyChoice::Threshold => SparsifyMethod::threshold(),
            SparsifyChoice::Pnn => SparsifyMethod::Pnn {
                initial: None,
                step: 1,
                min_block: self.n_min,
                rule: self.knn_rule,
            },
            SparsifyChoice::None => SparsifyMethod::None,
        };
        SparsifyConfig {
            method,
            lambda1_tol: self.lambda1_tol,
            mode: self.mode,
        }
    }

    pub fn kmeans(&self) -> KMeansConfig {
        KMeansConfig {
            seed: self.seed,
            ..Default::default()
        }
    }
}

/// Everything produced by one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub config: ResolvedConfig,
    pub type1: Type1Report,
    /// Order of the non-outlier vertices (indices into `type1.kept_indices`).
    pub ordering: Ordering,
    pub sparsify_parameter: Option<f64>,
    pub sparsify_accepted: bool,
    pub changepoints: ChangepointSet,
    pub estimate: VEstimate,
    /// Labels in original sample order; 0 marks Type I outliers.
    pub labels: Vec<usize>,
    pub metrics: MetricReport,
}

impl PipelineResult {
    pub fn k_hat(&self) -> usize {
        self.estimate.k()
    }

    pub fn n_hat(&self) -> &[usize] {
        &self.estimate.sizes
    }
}

/// Number of distinct non-outlier labels.
pub fn count_clusters(labels: &[usize]) -> usize {
    let mut ids: Vec<usize> = labels.iter().copied().filter(|&l| l != 0).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.len()
}

/// Runs the pipeline on a data matrix (features x samples).
pub fn run_on_data(x: &DataMatrix, cfg: &PipelineConfig, truth: Option<&[usize]>) -> Result<PipelineResult> {
    run(&build_affinity(x)?, cfg, truth)
}

/// Runs the pipeline on an affinity graph.
pub fn run(g: &SymmetricGraph, cfg: &PipelineConfig, truth: Option<&[usize]>) -> Result<PipelineResult> {
    if let Some(t) = truth {
        if t.len() != g.len() {
            return Err(Error::LengthMismatch(t.len(), g.len()));
        }
    }
    let (type1, reduced) = detect_type1(g)?;
    let config = cfg.resolve(reduced.len(), truth.map(count_clusters))?;

    let ordering = sbdo_order(&reduced);
    let ordered = reduced.permuted(&ordering.order);
    let sparse = sparsify(&ordered, &config.sparsify_config())?;

    let v = vector_v(sparse.graph.laplacian());
    let changepoints = detect_changepoints_with(&v, config.nc_max, config.min_segment)?;
    let min_size = config.n_min.max(config.min_segment);
    let mut rows = Vec::new();
    for k in config.k_min..=config.k_max {
        match candidate_sizes(&changepoints, k, min_size) {
            Ok(r) => rows.extend(r),
            Err(Error::NoFeasibleCandidate(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let estimate = select_model(evaluate_all(&sparse.graph, &v, &rows)?)?;

    let bd = reconstruct_bd(&ordered.map_affinity(|_, _, x| x.max(0.0)), &estimate.sizes)?;
    let ordered_labels = spectral_cluster(&bd, estimate.k(), &config.kmeans())?;
    let labels = map_labels_back(&ordered_labels, &ordering, &type1);

    let metrics = MetricReport {
        accuracy: truth.map(|t| accuracy(&labels, t)).transpose()?,
        mod_original: modularity(g.affinity(), &labels).ok(),
        mod_bd: modularity(bd.affinity(), &ordered_labels).ok(),
        cond_original: conductance(g.affinity(), &labels).ok(),
        cond_bd: conductance(bd.affinity(), &ordered_labels).ok(),
    };

    Ok(PipelineResult {
        config,
        type1,
        ordering,
        sparsify_parameter: sparse.parameter,
        sparsify_accepted: sparse.accepted,
        changepoints,
        estimate,
        labels,
        metrics,
    })
}
