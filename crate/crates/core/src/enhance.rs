//! Structure enhancement ahead of estimation: isolated-vertex removal,
//! similarity-based reordering and sparsification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{eigenvalues, EigenMode, SymmetricGraph};

/// Spectra below this are treated as indefinite.
const NONNEGATIVE_TOL: f64 = -1e-9;

/// Partition of the input vertices into isolated (Type I) and kept ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Type1Report {
    /// Sorted original indices of vertices without any edge.
    pub outlier_indices: Vec<usize>,
    /// `kept_indices[new] = old`.
    pub kept_indices: Vec<usize>,
}

/// Removes every vertex whose off-diagonal row of `W` is entirely zero.
pub fn detect_type1(g: &SymmetricGraph) -> Result<(Type1Report, SymmetricGraph)> {
    let w = g.affinity();
    let n = g.len();
    let (mut outliers, mut kept) = (Vec::new(), Vec::new());
    for m in 0..n {
        if (0..n).all(|c| c == m || w[(m, c)] == 0.0) {
            outliers.push(m);
        } else {
            kept.push(m);
        }
    }
    if kept.is_empty() {
        return Err(Error::AllOutliers);
    }
    let reduced = g.submatrix(&kept);
    Ok((
        Type1Report {
            outlier_indices: outliers,
            kept_indices: kept,
        },
        reduced,
    ))
}

/// A vertex permutation: position `a` of the reordered graph holds vertex
/// `order[a]` of the input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ordering {
    pub order: Vec<usize>,
}

impl Ordering {
    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// `inverse[old] = position`.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.order.len()];
        for (pos, &old) in self.order.iter().enumerate() {
            inv[old] = pos;
        }
        inv
    }
}

fn argmax_lowest(values: impl Iterator<Item = (usize, f64)>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, x) in values {
        if best.is_none_or(|(_, b)| x > b) {
            best = Some((i, x));
        }
    }
    best
}

/// Greedy similarity ordering.
///
/// Starts from the highest-degree vertex, then repeatedly appends the
/// unselected vertex with the largest accumulated similarity to everything
/// selected so far. When no unselected vertex has positive similarity to the
/// selection, it restarts from the highest-degree unselected vertex. Ties go
/// to the lowest index.
pub fn sbdo_order(g: &SymmetricGraph) -> Ordering {
    let n = g.len();
    let w = g.affinity();
    let degrees = g.degrees();
    let mut selected = vec![false; n];
    let mut score = vec![0.0f64; n];
    let mut order = Vec::with_capacity(n);

    let pick_by_degree =
        |selected: &[bool]| argmax_lowest((0..n).filter(|&m| !selected[m]).map(|m| (m, degrees[m]))).map(|(m, _)| m);

    let mut next = pick_by_degree(&selected);
    while let Some(m) = next {
        selected[m] = true;
        order.push(m);
        for c in 0..n {
            if !selected[c] {
                score[c] += w[(c, m)];
            }
        }
        next = match argmax_lowest((0..n).filter(|&c| !selected[c]).map(|c| (c, score[c]))) {
            Some((c, s)) if s > 0.0 => Some(c),
            Some(_) => pick_by_degree(&selected),
            None => None,
        };
    }
    Ordering { order }
}

/// How the p-nearest-neighbour graph keeps an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KnnRule {
    /// Both endpoints must list each other.
    Mutual,
    /// Either endpoint listing the other suffices.
    #[default]
    Union,
}

impl std::str::FromStr for KnnRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mutual" => Ok(Self::Mutual),
            "union" => Ok(Self::Union),
            other => Err(Error::InvalidConfig(format!("unknown neighbour rule '{other}'"))),
        }
    }
}

/// Sparsification strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "method")]
pub enum SparsifyMethod {
    /// Zero every entry below a threshold that grows from `initial` by `step`.
    Threshold {
        initial: f64,
        step: f64,
    },
    /// Keep the `p` strongest neighbours, `p` shrinking from `initial` by
    /// `step` while it exceeds `min_block`. `initial = None` means `N - 2`.
    Pnn {
        initial: Option<usize>,
        step: usize,
        min_block: usize,
        rule: KnnRule,
    },
    None,
}

impl SparsifyMethod {
    pub fn threshold() -> Self {
        Self::Threshold {
            initial: 0.5,
            step: 1e-3,
        }
    }

    pub fn pnn(min_block: usize) -> Self {
        Self::Pnn {
            initial: None,
            step: 1,
            min_block,
            rule: KnnRule::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsifyConfig {
    pub method: SparsifyMethod,
    pub lambda1_tol: f64,
    pub mode: EigenMode,
}

impl SparsifyConfig {
    pub fn new(method: SparsifyMethod, mode: EigenMode) -> Self {
        Self {
            method,
            lambda1_tol: 1e-3,
            mode,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.lambda1_tol.is_finite() && self.lambda1_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda1 tolerance must be positive, got {}",
                self.lambda1_tol
            )));
        }
        match self.method {
            SparsifyMethod::Threshold { initial, step } => {
                if !(0.0..1.0).contains(&initial) {
                    return Err(Error::InvalidConfig(format!(
                        "initial threshold {initial} outside [0, 1)"
                    )));
                }
                if !(step.is_finite() && step > 0.0) {
                    return Err(Error::InvalidConfig(format!("threshold step {step} must be positive")));
                }
            }
            SparsifyMethod::Pnn { initial, step, .. } => {
                if step == 0 {
                    return Err(Error::InvalidConfig("neighbour step must be positive".into()));
                }
                if let Some(p) = initial {
                    if p >= n {
                        return Err(Error::InvalidConfig(format!("initial p = {p} must be below N = {n}")));
                    }
                }
            }
            SparsifyMethod::None => {}
        }
        Ok(())
    }
}

/// Outcome of a sparsification sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Sparsified {
    pub graph: SymmetricGraph,
    /// Threshold or neighbour count of the returned candidate (`None` for pass-through).
    pub parameter: Option<f64>,
    /// `false` when the sweep fell back to the last nonnegative candidate.
    pub accepted: bool,
}

enum Verdict {
    Accept,
    Fallback,
    Reject,
}

fn judge(g: &SymmetricGraph, cfg: &SparsifyConfig) -> Result<Verdict> {
    if cfg.mode == EigenMode::Generalized && g.degrees().iter().any(|&d| d <= 1e-12) {
        return Ok(Verdict::Reject);
    }
    let vals = match eigenvalues(g, cfg.mode) {
        Ok(v) => v,
        Err(Error::SingularDegree(_)) => return Ok(Verdict::Reject),
        Err(e) => return Err(e),
    };
    if vals.iter().any(|&v| v < NONNEGATIVE_TOL) {
        return Ok(Verdict::Reject);
    }
    Ok(if vals.len() < 2 || vals[1] < cfg.lambda1_tol {
        Verdict::Accept
    } else {
        Verdict::Fallback
    })
}

/// Sweeps candidates in order, returning the first one whose second-smallest
/// eigenvalue is below `cfg.lambda1_tol` (with a nonnegative spectrum), or
/// else the last candidate with a nonnegative spectrum.
fn sweep(cfg: &SparsifyConfig, candidates: impl Iterator<Item = (f64, SymmetricGraph)>) -> Result<Sparsified> {
    let mut fallback: Option<(f64, SymmetricGraph)> = None;
    let mut previous: Option<(SymmetricGraph, bool, bool)> = None;
    for (param, g) in candidates {
        // Identical support gives an identical verdict.
        let (accept, usable) = match &previous {
            Some((prev, a, u)) if prev.affinity() == g.affinity() => (*a, *u),
            _ => match judge(&g, cfg)? {
                Verdict::Accept => (true, true),
                Verdict::Fallback => (false, true),
                Verdict::Reject => (false, false),
            },
        };
        if accept {
            return Ok(Sparsified {
                graph: g,
                parameter: Some(param),
                accepted: true,
            });
        }
        if usable {
            fallback = Some((param, g.clone()));
        }
        previous = Some((g, accept, usable));
    }
    match fallback {
        Some((param, graph)) => Ok(Sparsified {
            graph,
            parameter: Some(param),
            accepted: false,
        }),
        None => Err(Error::NoSparseCandidate),
    }
}

/// Graph keeping only entries `>= t` (negative entries always dropped).
pub fn threshold_graph(g: &SymmetricGraph, t: f64) -> SymmetricGraph {
    g.map_affinity(|_, _, x| if x < t || x <= 0.0 { 0.0 } else { x })
}

/// Graph keeping, for each vertex, its `p` most similar positive neighbours
/// (lowest index on ties), combined across endpoints by `rule`.
pub fn knn_graph(g: &SymmetricGraph, p: usize, rule: KnnRule) -> SymmetricGraph {
    let n = g.len();
    let w = g.affinity();
    let mut keep = vec![vec![false; n]; n];
    let mut idx: Vec<usize> = Vec::with_capacity(n);
    for m in 0..n {
        idx.clear();
        idx.extend((0..n).filter(|&c| c != m && w[(m, c)] > 0.0));
        idx.sort_by(|&a, &b| w[(m, b)].total_cmp(&w[(m, a)]).then(a.cmp(&b)));
        for &c in idx.iter().take(p) {
            keep[m][c] = true;
        }
    }
    g.map_affinity(|i, j, x| {
        let kept = match rule {
            KnnRule::Mutual => keep[i][j] && keep[j][i],
            KnnRule::Union => keep[i][j] || keep[j][i],
        };
        if kept {
            x
        } else {
            0.0
        }
    })
}

/// Sparsifies an ordered graph so that (ideally) at least two eigenvalues of
/// its Laplacian are close to zero.
pub fn sparsify(g: &SymmetricGraph, cfg: &SparsifyConfig) -> Result<Sparsified> {
    let n = g.len();
    cfg.validate(n)?;
    match cfg.method {
        SparsifyMethod::None => Ok(Sparsified {
            graph: g.clone(),
            parameter: None,
            accepted: true,
        }),
        SparsifyMethod::Threshold { initial, step } => {
            let thresholds = (0..).map(move |k| initial + k as f64 * step).take_while(|&t| t < 1.0);
            sweep(cfg, thresholds.map(|t| (t, threshold_graph(g, t))))
        }
        SparsifyMethod::Pnn {
            initial,
            step,
            min_block,
            rule,
        } => {
            let start = initial.unwrap_or(n.saturating_sub(2));
            let ps = (0..)
                .map_while(move |k: usize| start.checked_sub(k * step))
                .take_while(move |&p| p > min_block);
            sweep(cfg, ps.map(|p| (p as f64, knn_graph(g, p, rule))))
        }
    }
}
