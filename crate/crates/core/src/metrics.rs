//! Clustering quality metrics.

use nalgebra::DMatrix;
use pathfinding::matrix::Matrix;
use pathfinding::prelude::kuhn_munkres;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Best fraction of samples whose predicted label matches the truth under a
/// one-to-one relabeling. Label 0 marks outliers and only matches truth 0.
pub fn accuracy(labels: &[usize], truth: &[usize]) -> Result<f64> {
    if labels.len() != truth.len() {
        return Err(Error::LengthMismatch(labels.len(), truth.len()));
    }
    if labels.is_empty() {
        return Err(Error::LengthMismatch(0, 0));
    }
    let outliers_matched = labels.iter().zip(truth).filter(|&(&a, &b)| a == 0 && b == 0).count();

    let mut pred_ids: Vec<usize> = labels.iter().copied().filter(|&l| l != 0).collect();
    let mut true_ids: Vec<usize> = truth.iter().copied().filter(|&l| l != 0).collect();
    pred_ids.sort_unstable();
    pred_ids.dedup();
    true_ids.sort_unstable();
    true_ids.dedup();

    let size = pred_ids.len().max(true_ids.len());
    let mut matched = 0i64;
    if size > 0 {
        let mut counts = Matrix::new(size, size, 0i64);
        for (&a, &b) in labels.iter().zip(truth) {
            if a != 0 && b != 0 {
                let r = pred_ids.binary_search(&a).expect("collected above");
                let c = true_ids.binary_search(&b).expect("collected above");
                counts[(r, c)] += 1;
            }
        }
        matched = kuhn_munkres(&counts).0;
    }
    Ok((outliers_matched as f64 + matched as f64) / labels.len() as f64)
}

fn check_labels(w: &DMatrix<f64>, labels: &[usize]) -> Result<f64> {
    if !w.is_square() {
        return Err(Error::Dimension(format!("{}x{} affinity", w.nrows(), w.ncols())));
    }
    if w.nrows() != labels.len() {
        return Err(Error::LengthMismatch(labels.len(), w.nrows()));
    }
    let total: f64 = w.iter().sum();
    if total == 0.0 {
        return Err(Error::EmptyGraph);
    }
    Ok(total)
}

/// Newman modularity `(1/2g) sum [w_mn - d_m d_n / 2g] delta(c_m, c_n)` with
/// `2g` the sum of all entries of `w`.
pub fn modularity(w: &DMatrix<f64>, labels: &[usize]) -> Result<f64> {
    let two_g = check_labels(w, labels)?;
    let n = labels.len();
    let degrees: Vec<f64> = w.row_iter().map(|r| r.sum()).collect();
    let mut within = 0.0;
    let mut by_label = std::collections::BTreeMap::<usize, f64>::new();
    for m in 0..n {
        *by_label.entry(labels[m]).or_default() += degrees[m];
        for c in 0..n {
            if labels[m] == labels[c] {
                within += w[(m, c)];
            }
        }
    }
    let expected: f64 = by_label.values().map(|d| d * d).sum::<f64>() / two_g;
    Ok((within - expected) / two_g)
}

/// Fraction of total edge weight that crosses between different labels.
pub fn conductance(w: &DMatrix<f64>, labels: &[usize]) -> Result<f64> {
    let total = check_labels(w, labels)?;
    let n = labels.len();
    let mut cross = 0.0;
    for m in 0..n {
        for c in 0..n {
            if labels[m] != labels[c] {
                cross += w[(m, c)];
            }
        }
    }
    Ok(cross / total)
}

/// Fraction of trials whose estimated block count equals `k`.
pub fn p_det(trials: &[usize], k: usize) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::EmptyTrials);
    }
    Ok(trials.iter().filter(|&&t| t == k).count() as f64 / trials.len() as f64)
}

/// Metrics reported for a labeling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: Option<f64>,
    pub mod_original: Option<f64>,
    pub mod_bd: Option<f64>,
    pub cond_original: Option<f64>,
    pub cond_bd: Option<f64>,
}
