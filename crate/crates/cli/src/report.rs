use std::path::PathBuf;

use bdrkit_core::{PipelineResult, ResolvedConfig};
use serde::Serialize;

use crate::args::InputKind;

#[derive(Debug, Serialize)]
pub struct InputEcho {
    pub input: PathBuf,
    pub kind: InputKind,
    pub delimiter: String,
    pub transpose: bool,
    pub truth: Option<PathBuf>,
    pub trials: usize,
}

#[derive(Debug, Serialize)]
pub struct ConfigEcho<'a> {
    #[serde(flatten)]
    pub input: &'a InputEcho,
    pub resolved: &'a ResolvedConfig,
}

#[derive(Debug, Serialize)]
pub struct Metrics {
    pub acc: Option<f64>,
    pub mod_original: Option<f64>,
    pub mod_bd: Option<f64>,
    pub cond_original: Option<f64>,
    pub cond_bd: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Sparsification {
    pub parameter: Option<f64>,
    pub accepted: bool,
}

#[derive(Debug, Serialize)]
pub struct Trials {
    pub seeds: Vec<u64>,
    #[serde(rename = "K_hat")]
    pub k_hat: Vec<usize>,
    pub acc: Vec<Option<f64>>,
    pub p_det: Option<f64>,
}

/// The result document. Indices are 0-based positions in the input; labels
/// are 1-based with 0 for isolated samples.
#[derive(Debug, Serialize)]
pub struct Document<'a> {
    pub config: ConfigEcho<'a>,
    pub type1_indices: &'a [usize],
    pub ordering: Vec<usize>,
    pub sparsification: Sparsification,
    #[serde(rename = "K_hat")]
    pub k_hat: usize,
    pub n_hat: &'a [usize],
    #[serde(rename = "W_sim")]
    pub w_sim: Vec<Vec<f64>>,
    pub feasible: bool,
    pub residual: f64,
    pub gamma_used: f64,
    pub tau: &'a [usize],
    pub labels: &'a [usize],
    pub metrics: Metrics,
    pub v: &'a [f64],
    pub v_hat: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<Trials>,
}

impl<'a> Document<'a> {
    pub fn new(input: &'a InputEcho, res: &'a PipelineResult, trials: Option<Trials>) -> Self {
        let w = &res.estimate.w_sim;
        Self {
            config: ConfigEcho {
                input,
                resolved: &res.config,
            },
            type1_indices: &res.type1.outlier_indices,
            ordering: res.ordering.order.iter().map(|&i| res.type1.kept_indices[i]).collect(),
            sparsification: Sparsification {
                parameter: res.sparsify_parameter,
                accepted: res.sparsify_accepted,
            },
            k_hat: res.k_hat(),
            n_hat: res.n_hat(),
            w_sim: (0..w.nrows()).map(|i| w.row(i).iter().copied().collect()).collect(),
            feasible: res.estimate.feasible,
            residual: res.estimate.residual,
            gamma_used: res.changepoints.gamma,
            tau: &res.changepoints.tau,
            labels: &res.labels,
            metrics: Metrics {
                acc: res.metrics.accuracy,
                mod_original: res.metrics.mod_original,
                mod_bd: res.metrics.mod_bd,
                cond_original: res.metrics.cond_original,
                cond_bd: res.metrics.cond_bd,
            },
            v: &res.estimate.v,
            v_hat: &res.estimate.v_hat,
            trials,
        }
    }
}
