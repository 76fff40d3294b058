//! Block-diagonal reconstruction and spectral clustering of the result.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::enhance::{Ordering, Type1Report};
use crate::error::{Error, Result};
use crate::estimate::block_ranges;
use crate::matrix::{eig_smallest, EigenMode, SymmetricGraph};

/// Keeps the entries inside the diagonal blocks given by `sizes` and zeroes
/// every cross-block entry.
pub fn reconstruct_bd(g: &SymmetricGraph, sizes: &[usize]) -> Result<SymmetricGraph> {
    let total: usize = sizes.iter().sum();
    if total != g.len() {
        return Err(Error::LengthMismatch(total, g.len()));
    }
    let mut block = vec![0usize; total];
    for (b, (s, e)) in block_ranges(sizes).into_iter().enumerate() {
        block[s..e].fill(b);
    }
    Ok(g.map_affinity(|i, j, x| if block[i] == block[j] { x } else { 0.0 }))
}

/// k-means settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            restarts: 50,
            max_iter: 300,
            tol: 1e-9,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
struct KMeansRun {
    assignment: Vec<usize>,
    inertia: f64,
}

fn sq_dist(points: &DMatrix<f64>, row: usize, center: &[f64]) -> f64 {
    center
        .iter()
        .enumerate()
        .map(|(c, &x)| (points[(row, c)] - x).powi(2))
        .sum()
}

fn plus_plus_init(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.nrows();
    let row = |i: usize| points.row(i).iter().copied().collect::<Vec<f64>>();
    let mut centers = vec![row(rng.random_range(0..n))];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random_range(0.0..total);
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.push(row(pick));
        let last = centers.last().expect("just pushed");
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, i, last));
        }
    }
    centers
}

fn lloyd(points: &DMatrix<f64>, k: usize, cfg: &KMeansConfig, seed: u64) -> KMeansRun {
    let (n, dim) = points.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = plus_plus_init(points, k, &mut rng);
    let mut assignment = vec![0usize; n];
    for _ in 0..cfg.max_iter {
        for (i, a) in assignment.iter_mut().enumerate() {
            let mut best = (0, f64::INFINITY);
            for (c, center) in centers.iter().enumerate() {
                let d = sq_dist(points, i, center);
                if d < best.1 {
                    best = (c, d);
                }
            }
            *a = best.0;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, &a) in assignment.iter().enumerate() {
            counts[a] += 1;
            for (c, s) in sums[a].iter_mut().enumerate() {
                *s += points[(i, c)];
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Re-seed an empty cluster at the point worst served by its center.
                let far = (0..n)
                    .map(|i| (i, sq_dist(points, i, &centers[assignment[i]])))
                    .fold((0, -1.0), |b, x| if x.1 > b.1 { x } else { b })
                    .0;
                sums[c] = points.row(far).iter().copied().collect();
                counts[c] = 1;
            }
        }
        let mut shift = 0.0f64;
        for c in 0..k {
            let new: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            shift = shift.max(new.iter().zip(&centers[c]).map(|(a, b)| (a - b).powi(2)).sum::<f64>());
            centers[c] = new;
        }
        if shift.sqrt() <= cfg.tol {
            break;
        }
    }
    let mut inertia = 0.0;
    for (i, a) in assignment.iter_mut().enumerate() {
        let mut best = (0, f64::INFINITY);
        for (c, center) in centers.iter().enumerate() {
            let d = sq_dist(points, i, center);
            if d < best.1 {
                best = (c, d);
            }
        }
        *a = best.0;
        inertia += best.1;
    }
    KMeansRun { assignment, inertia }
}

/// Relabels clusters `1..=k` in order of first appearance.
pub fn canonical_labels(assignment: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    assignment
        .iter()
        .map(|a| {
            let next = map.len() + 1;
            *map.entry(*a).or_insert(next)
        })
        .collect()
}

/// k-means++ with restarts; the best run has the lowest inertia, ties going
/// to the earliest restart. Returns 1-based canonical labels.
pub fn kmeans(points: &DMatrix<f64>, k: usize, cfg: &KMeansConfig) -> Result<Vec<usize>> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "cannot form {k} clusters from {n} points"
        )));
    }
    let runs: Vec<KMeansRun> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|r| lloyd(points, k, cfg, cfg.seed.wrapping_add(r as u64)))
        .collect();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.inertia.total_cmp(&b.1.inertia).then(a.0.cmp(&b.0)))
        .expect("at least one restart");
    Ok(canonical_labels(&best.1.assignment))
}

/// Clusters the vertices of `g` by k-means on the rows of its `k` smallest
/// generalized eigenvectors. Labels are 1-based and follow `g`'s vertex order.
pub fn spectral_cluster(g: &SymmetricGraph, k: usize, cfg: &KMeansConfig) -> Result<Vec<usize>> {
    let spectrum = eig_smallest(g, EigenMode::Generalized, k)?;
    kmeans(&spectrum.vectors, k, cfg)
}

/// Maps labels of the reordered, outlier-free graph back to the original
/// sample order, giving Type I samples the label 0.
pub fn map_labels_back(ordered: &[usize], ordering: &Ordering, report: &Type1Report) -> Vec<usize> {
    let total = report.kept_indices.len() + report.outlier_indices.len();
    let mut out = vec![0; total];
    for (pos, &label) in ordered.iter().enumerate() {
        out[report.kept_indices[ordering.order[pos]]] = label;
    }
    out
}
