//! Piece-wise affine changepoint detection by exact penalized least squares,
//! and the candidate block sizes derived from the changepoints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default shortest segment the solver will create.
pub const MIN_SEGMENT: usize = 2;

/// Changepoints of a vector of length `len`. Each entry of `tau` is the
/// 1-based index of the last element of a segment; the final segment ends at
/// `len` implicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangepointSet {
    pub tau: Vec<usize>,
    pub gamma: f64,
    pub len: usize,
}

impl ChangepointSet {
    pub fn count(&self) -> usize {
        self.tau.len()
    }

    /// Segment lengths.
    pub fn segment_sizes(&self) -> Vec<usize> {
        boundaries_to_sizes(&self.tau, self.len)
    }
}

fn boundaries_to_sizes(tau: &[usize], len: usize) -> Vec<usize> {
    let mut prev = 0;
    let mut out = Vec::with_capacity(tau.len() + 1);
    for &t in tau.iter().chain(std::iter::once(&len)) {
        out.push(t - prev);
        prev = t;
    }
    out
}

/// Prefix sums giving the affine least-squares residual of any slice in O(1).
pub struct SegmentCost {
    sx: Vec<f64>,
    sxx: Vec<f64>,
    sy: Vec<f64>,
    syy: Vec<f64>,
    sxy: Vec<f64>,
}

impl SegmentCost {
    pub fn new(v: &[f64]) -> Self {
        let n = v.len();
        let mut c = Self {
            sx: vec![0.0; n + 1],
            sxx: vec![0.0; n + 1],
            sy: vec![0.0; n + 1],
            syy: vec![0.0; n + 1],
            sxy: vec![0.0; n + 1],
        };
        for (i, &y) in v.iter().enumerate() {
            let x = i as f64;
            c.sx[i + 1] = c.sx[i] + x;
            c.sxx[i + 1] = c.sxx[i] + x * x;
            c.sy[i + 1] = c.sy[i] + y;
            c.syy[i + 1] = c.syy[i] + y * y;
            c.sxy[i + 1] = c.sxy[i] + x * y;
        }
        c
    }

    /// Residual sum of squares of the affine fit to `v[start..end]`.
    pub fn cost(&self, start: usize, end: usize) -> f64 {
        let k = (end - start) as f64;
        if end - start < 3 {
            return 0.0;
        }
        let sx = self.sx[end] - self.sx[start];
        let sy = self.sy[end] - self.sy[start];
        let sxx = (self.sxx[end] - self.sxx[start]) - sx * sx / k;
        let syy = (self.syy[end] - self.syy[start]) - sy * sy / k;
        let sxy = (self.sxy[end] - self.sxy[start]) - sx * sy / k;
        (syy - sxy * sxy / sxx).max(0.0)
    }
}

/// Exact minimizer of `sum of segment residuals + gamma * (#changepoints)`
/// over all segmentations whose segments have at least `min_segment` elements.
pub fn segment_with_penalty(v: &[f64], gamma: f64, min_segment: usize) -> Vec<usize> {
    let n = v.len();
    let min_segment = min_segment.max(1);
    if n < 2 * min_segment {
        return Vec::new();
    }
    let cost = SegmentCost::new(v);
    // best[e]: optimal objective of v[..e] plus gamma (one per segment).
    let mut best = vec![f64::INFINITY; n + 1];
    let mut last = vec![0usize; n + 1];
    best[0] = 0.0;
    for e in min_segment..=n {
        for s in (0..=e - min_segment).filter(|&s| s == 0 || s >= min_segment) {
            if !best[s].is_finite() {
                continue;
            }
            let candidate = best[s] + cost.cost(s, e) + gamma;
            if candidate < best[e] {
                best[e] = candidate;
                last[e] = s;
            }
        }
    }
    let mut tau = Vec::new();
    let mut e = n;
    while last[e] > 0 {
        tau.push(last[e]);
        e = last[e];
    }
    tau.reverse();
    tau
}

/// Penalized objective of a given segmentation.
pub fn penalized_cost(v: &[f64], tau: &[usize], gamma: f64) -> f64 {
    let cost = SegmentCost::new(v);
    let mut prev = 0;
    let mut total = gamma * tau.len() as f64;
    for &t in tau.iter().chain(std::iter::once(&v.len())) {
        total += cost.cost(prev, t);
        prev = t;
    }
    total
}

fn variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

/// Detects changepoints with a penalty that starts at `1e-6 * Var(v)` and
/// doubles until at most `max_changepoints` remain.
pub fn detect_changepoints(v: &[f64], max_changepoints: usize) -> Result<ChangepointSet> {
    detect_changepoints_with(v, max_changepoints, MIN_SEGMENT)
}

/// [`detect_changepoints`] with an explicit minimum segment length.
pub fn detect_changepoints_with(v: &[f64], max_changepoints: usize, min_segment: usize) -> Result<ChangepointSet> {
    if v.len() < 2 {
        return Err(Error::DegenerateInput(format!("vector of length {}", v.len())));
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    let var = variance(v);
    if var == 0.0 {
        return Err(Error::DegenerateInput("constant vector".into()));
    }
    let mut gamma = 1e-6 * var;
    loop {
        let tau = segment_with_penalty(v, gamma, min_segment);
        if tau.len() <= max_changepoints {
            return Ok(ChangepointSet {
                tau,
                gamma,
                len: v.len(),
            });
        }
        gamma *= 2.0;
    }
}

/// Every way of choosing `k - 1` of the changepoints as block boundaries,
/// converted to block sizes, keeping only rows whose blocks all have at least
/// `min_size` members. Rows appear in lexicographic order of the chosen
/// boundaries.
pub fn candidate_sizes(cp: &ChangepointSet, k: usize, min_size: usize) -> Result<Vec<Vec<usize>>> {
    if k == 0 || cp.count() + 1 < k {
        return Err(Error::NoFeasibleCandidate(k));
    }
    let mut rows = Vec::new();
    let mut chosen = Vec::with_capacity(k - 1);
    combinations(&cp.tau, k - 1, 0, &mut chosen, &mut |c| {
        let sizes = boundaries_to_sizes(c, cp.len);
        if sizes.iter().all(|&s| s >= min_size) {
            rows.push(sizes);
        }
    });
    if rows.is_empty() {
        return Err(Error::NoFeasibleCandidate(k));
    }
    Ok(rows)
}

fn combinations(items: &[usize], r: usize, from: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if chosen.len() == r {
        f(chosen);
        return;
    }
    let need = r - chosen.len();
    for i in from..=items.len() - need {
        chosen.push(items[i]);
        combinations(items, r, i + 1, chosen, f);
        chosen.pop();
    }
}
