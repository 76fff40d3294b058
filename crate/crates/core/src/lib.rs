//! Block-diagonal representation recovery for spectral clustering of
//! outlier-corrupted data.
//!
//! The pipeline removes isolated samples, reorders the affinity so that
//! clusters become contiguous, sparsifies it, and reads block sizes and
//! similarity coefficients off the piece-wise linear vector `v` before
//! clustering the reconstructed block-diagonal matrix.

#![allow(clippy::needless_range_loop)]

pub mod changepoint;
pub mod cluster;
pub mod enhance;
pub mod error;
pub mod estimate;
pub mod matrix;
pub mod metrics;
pub mod pipeline;
pub mod synthetic;

pub use nalgebra;

pub use changepoint::{candidate_sizes, detect_changepoints, detect_changepoints_with, ChangepointSet};
pub use cluster::{map_labels_back, reconstruct_bd, spectral_cluster, KMeansConfig};
pub use enhance::{
    detect_type1, sbdo_order, sparsify, KnnRule, Ordering, Sparsified, SparsifyConfig, SparsifyMethod, Type1Report,
};
pub use error::{Error, Result};
pub use estimate::{
    estimate_undesired, evaluate_candidate, fit_segment_plane, select_model, target_v_for_candidate, PlaneFit,
    VEstimate,
};
pub use matrix::{
    build_affinity, eig_smallest, eigenvalues, vector_v, DataMatrix, EigenMode, Spectrum, SymmetricGraph,
};
pub use metrics::{accuracy, conductance, modularity, p_det, MetricReport};
pub use pipeline::{run, run_on_data, PipelineConfig, PipelineResult, ResolvedConfig, SparsifyChoice};
pub use synthetic::{
    gen_target_bd, inject_corruption, predict_eigs_group, predict_eigs_target, predict_eigs_type2, predict_v,
    BlockSpec, CorruptedGraph, CorruptionSpec, RootEquation, SpectrumPrediction, Type2Outlier, VertexRole,
};
