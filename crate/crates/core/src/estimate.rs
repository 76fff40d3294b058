//! Block-model estimation from the vector `v`: per-segment plane fits for the
//! within-block coefficients, median shifts for the cross-block ones, and
//! selection among candidate block-size vectors.

use std::cmp::Ordering as CmpOrdering;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymmetricGraph;

/// `(start, end)` half-open index ranges of consecutive blocks.
pub fn block_ranges(sizes: &[usize]) -> Vec<(usize, usize)> {
    let mut start = 0;
    sizes
        .iter()
        .map(|&s| {
            let r = (start, start + s);
            start += s;
            r
        })
        .collect()
}

/// `v` of the graph restricted to the candidate's diagonal blocks: each entry
/// sums the similarities to earlier members of the same block only.
pub fn target_v_for_candidate(g: &SymmetricGraph, sizes: &[usize]) -> Result<Vec<f64>> {
    let total: usize = sizes.iter().sum();
    if total != g.len() {
        return Err(Error::LengthMismatch(total, g.len()));
    }
    let w = g.affinity();
    let mut v = vec![0.0; total];
    for (start, end) in block_ranges(sizes) {
        for (m, slot) in v.iter_mut().enumerate().take(end).skip(start) {
            *slot = (start..m).map(|n| w[(m, n)]).sum();
        }
    }
    Ok(v)
}

/// Total-least-squares line through a set of points, written as
/// `normal . (x, y) + bias = 0` with `normal[1] > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneFit {
    pub normal: [f64; 2],
    pub bias: f64,
    pub slope: f64,
    pub centroid: [f64; 2],
}

impl PlaneFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.centroid[1] + self.slope * (x - self.centroid[0])
    }
}

/// Fits a line by taking the normal as the eigenvector of the smallest
/// eigenvalue of the 2 x 2 sample covariance.
pub fn fit_segment_plane(points: &[(f64, f64)]) -> Result<PlaneFit> {
    if points.len() < 2 {
        return Err(Error::DegenerateInput(format!("segment of {} points", points.len())));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mx, y - my);
        a += dx * dx;
        b += dx * dy;
        c += dy * dy;
    }
    let (a, b, c) = (a / k, b / k, c / k);
    if a == 0.0 && c == 0.0 {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }
    let half_gap = (0.5 * (a - c)).hypot(b);
    let lambda = 0.5 * (a + c) - half_gap;
    // Two equivalent null vectors of (C - lambda I); take the better conditioned one.
    let u = [b, lambda - a];
    let v = [lambda - c, b];
    let mut normal = if u[0].hypot(u[1]) >= v[0].hypot(v[1]) { u } else { v };
    if normal == [0.0, 0.0] {
        normal = if a <= c { [1.0, 0.0] } else { [0.0, 1.0] };
    }
    let norm = normal[0].hypot(normal[1]);
    normal = [normal[0] / norm, normal[1] / norm];
    if normal[1] < 0.0 {
        normal = [-normal[0], -normal[1]];
    }
    if normal[1].abs() <= 1e-12 {
        return Err(Error::VerticalSegment);
    }
    Ok(PlaneFit {
        normal,
        bias: -(normal[0] * mx + normal[1] * my),
        slope: -normal[0] / normal[1],
        centroid: [mx, my],
    })
}

/// Median (mean of the two middle values for even lengths).
pub fn median(values: &[f64]) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Cross-block coefficient from the per-row shift of a block's `v` over its
/// fitted ramp, divided by the size of the block causing the shift.
pub fn undesired_coefficient(shift_residual: &[f64], other_block_size: usize) -> f64 {
    median(shift_residual) / other_block_size as f64
}

/// Off-diagonal entries of the similarity-coefficient matrix (symmetric,
/// zero diagonal). `fitted[m]` is the plane-fit value at row `m`.
pub fn estimate_undesired(
    g: &SymmetricGraph,
    sizes: &[usize],
    target_v: &[f64],
    fitted: &[f64],
) -> Result<DMatrix<f64>> {
    let n = g.len();
    if target_v.len() != n || fitted.len() != n {
        return Err(Error::LengthMismatch(target_v.len().min(fitted.len()), n));
    }
    let w = g.affinity();
    let ranges = block_ranges(sizes);
    let k = sizes.len();
    let mut out = DMatrix::zeros(k, k);
    for i in 1..k {
        let (si, ei) = ranges[i];
        for j in 0..i {
            let (sj, ej) = ranges[j];
            let residual: Vec<f64> = (si..ei)
                .map(|m| {
                    let increase: f64 = (sj..ej).map(|c| w[(m, c)]).sum();
                    target_v[m] + increase - fitted[m]
                })
                .collect();
            let x = undesired_coefficient(&residual, sizes[j]);
            out[(i, j)] = x;
            out[(j, i)] = x;
        }
    }
    Ok(out)
}

/// A fully evaluated candidate block-size vector.
#[derive(Debug, Clone, PartialEq)]
pub struct VEstimate {
    pub sizes: Vec<usize>,
    /// Within-block coefficients on the diagonal, cross-block ones elsewhere.
    pub w_sim: DMatrix<f64>,
    pub v: Vec<f64>,
    pub v_hat: Vec<f64>,
    pub residual: f64,
    pub feasible: bool,
}

impl VEstimate {
    pub fn k(&self) -> usize {
        self.sizes.len()
    }
}

/// Every block is more similar to itself than to any other block:
/// `w_sim[i][i] > w_sim[i][j]` for all `j != i`.
pub fn is_feasible(w_sim: &DMatrix<f64>) -> bool {
    let k = w_sim.nrows();
    (0..k).all(|i| {
        let own = w_sim[(i, i)];
        own.is_finite() && (0..k).filter(|&j| j != i).all(|j| own > w_sim[(i, j)])
    })
}

/// Fits the block model for one candidate and assembles the predicted `v`.
pub fn evaluate_candidate(g: &SymmetricGraph, v: &[f64], sizes: &[usize]) -> Result<VEstimate> {
    if v.len() != g.len() {
        return Err(Error::LengthMismatch(v.len(), g.len()));
    }
    let target = target_v_for_candidate(g, sizes)?;
    let ranges = block_ranges(sizes);
    let k = sizes.len();
    let mut fitted = vec![0.0; v.len()];
    let mut w_sim = DMatrix::zeros(k, k);
    for (i, &(s, e)) in ranges.iter().enumerate() {
        let points: Vec<(f64, f64)> = (s..e).map(|m| ((m - s) as f64, target[m])).collect();
        let fit = fit_segment_plane(&points)?;
        w_sim[(i, i)] = fit.slope;
        for m in s..e {
            fitted[m] = fit.predict((m - s) as f64);
        }
    }
    let cross = estimate_undesired(g, sizes, &target, &fitted)?;
    for i in 0..k {
        for j in 0..k {
            if i != j {
                w_sim[(i, j)] = cross[(i, j)];
            }
        }
    }
    let mut v_hat = fitted;
    for (i, &(s, e)) in ranges.iter().enumerate() {
        let shift: f64 = (0..i).map(|j| sizes[j] as f64 * w_sim[(i, j)]).sum();
        for x in &mut v_hat[s..e] {
            *x += shift;
        }
    }
    let residual = v.iter().zip(&v_hat).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    Ok(VEstimate {
        sizes: sizes.to_vec(),
        feasible: is_feasible(&w_sim),
        w_sim,
        v: v.to_vec(),
        v_hat,
        residual,
    })
}

/// Evaluates every candidate in parallel, keeping input order.
pub fn evaluate_all(g: &SymmetricGraph, v: &[f64], candidates: &[Vec<usize>]) -> Result<Vec<VEstimate>> {
    candidates
        .par_iter()
        .map(|sizes| evaluate_candidate(g, v, sizes))
        .collect()
}

fn rank(a: &VEstimate, b: &VEstimate) -> CmpOrdering {
    a.residual
        .total_cmp(&b.residual)
        .then(a.k().cmp(&b.k()))
        .then_with(|| a.sizes.cmp(&b.sizes))
}

/// Feasible candidate with the smallest residual (ties: smaller K, then
/// lexicographically smaller sizes). If none is feasible, the overall
/// minimizer is returned with `feasible == false`.
pub fn select_model(candidates: Vec<VEstimate>) -> Result<VEstimate> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let any_feasible = candidates.iter().any(|c| c.feasible);
    candidates
        .into_iter()
        .filter(|c| c.feasible || !any_feasible)
        .min_by(rank)
        .ok_or(Error::NoCandidates)
}
