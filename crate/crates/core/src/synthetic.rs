//! Synthetic block-diagonal affinities with controlled corruption, and the
//! closed-form spectra and `v` vectors they are known to have.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{EigenMode, SymmetricGraph};

/// Block layout of a target affinity: block `i` has `sizes[i]` vertices whose
/// pairwise similarity is `within[i]` (plus optional uniform jitter).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub sizes: Vec<usize>,
    pub within: Vec<f64>,
    #[serde(default)]
    pub jitter: f64,
}

impl BlockSpec {
    pub fn new(sizes: Vec<usize>, within: Vec<f64>) -> Self {
        Self {
            sizes,
            within,
            jitter: 0.0,
        }
    }

    pub fn with_jitter(mut self, jitter: f64) -> Self {
        self.jitter = jitter;
        self
    }

    pub fn n_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidSpec("at least one block is required".into()));
        }
        if self.sizes.len() != self.within.len() {
            return Err(Error::InvalidSpec(format!(
                "{} block sizes but {} coefficients",
                self.sizes.len(),
                self.within.len()
            )));
        }
        if let Some(s) = self.sizes.iter().find(|&&s| s < 2) {
            return Err(Error::InvalidSpec(format!("block size {s} is below 2")));
        }
        if let Some(w) = self.within.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidSpec(format!(
                "within-block coefficient {w} is not positive"
            )));
        }
        if !(self.jitter.is_finite() && self.jitter >= 0.0) {
            return Err(Error::InvalidSpec(format!("jitter {} is negative", self.jitter)));
        }
        Ok(())
    }

    /// Block index of every vertex of the target matrix.
    pub fn block_of_vertex(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(k, &s)| std::iter::repeat_n(k, s))
            .collect()
    }
}

/// An outlier vertex connected to every member of block `j` with weight
/// `coefficients[j]`, inserted so that it becomes vertex `position` (1-based)
/// of the matrix at the time of insertion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Type2Outlier {
    pub position: usize,
    pub coefficients: Vec<f64>,
}

/// Corruption applied on top of a target matrix.
///
/// `group_sim` is either empty or a symmetric K x K matrix with zero diagonal
/// whose `(i, j)` entry fills the whole block-i/block-j rectangle.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    #[serde(default)]
    pub type1_count: usize,
    #[serde(default)]
    pub type2: Vec<Type2Outlier>,
    #[serde(default)]
    pub group_sim: Vec<Vec<f64>>,
    /// Uniform jitter half-width applied to every injected nonzero entry.
    #[serde(default)]
    pub jitter: f64,
}

impl CorruptionSpec {
    fn group(&self, i: usize, j: usize) -> f64 {
        if self.group_sim.is_empty() {
            0.0
        } else {
            self.group_sim[i][j]
        }
    }

    fn has_group_similarity(&self) -> bool {
        self.group_sim.iter().flatten().any(|&x| x != 0.0)
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if !self.group_sim.is_empty() {
            if self.group_sim.len() != k || self.group_sim.iter().any(|r| r.len() != k) {
                return Err(Error::InvalidSpec(format!("group similarity must be {k}x{k}")));
            }
            for i in 0..k {
                if self.group_sim[i][i] != 0.0 {
                    return Err(Error::InvalidSpec("group similarity diagonal must be zero".into()));
                }
                for j in 0..k {
                    let x = self.group_sim[i][j];
                    if !(x.is_finite() && x >= 0.0) || x != self.group_sim[j][i] {
                        return Err(Error::InvalidSpec(format!(
                            "group similarity ({i}, {j}) must be finite, nonnegative and symmetric"
                        )));
                    }
                }
            }
        }
        for t in &self.type2 {
            if t.coefficients.len() != k {
                return Err(Error::InvalidSpec(format!(
                    "type II outlier needs {k} coefficients, got {}",
                    t.coefficients.len()
                )));
            }
            if t.coefficients.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::InvalidSpec("type II coefficients must be nonnegative".into()));
            }
        }
        if !(self.jitter.is_finite() && self.jitter >= 0.0) {
            return Err(Error::InvalidSpec(format!("jitter {} is negative", self.jitter)));
        }
        Ok(())
    }
}

/// What a vertex of a generated matrix is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexRole {
    /// Member of the given (0-based) block.
    Block(usize),
    /// Index into [`CorruptionSpec::type2`].
    Type2(usize),
    Type1,
}

/// Corrupted matrix together with the role of every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptedGraph {
    pub graph: SymmetricGraph,
    pub roles: Vec<VertexRole>,
}

impl CorruptedGraph {
    /// 1-based ground-truth labels. Type I vertices get 0; a Type II vertex is
    /// assigned to the block it is most similar to (lowest index on ties).
    pub fn truth_labels(&self, corruption: &CorruptionSpec) -> Vec<usize> {
        self.roles
            .iter()
            .map(|role| match *role {
                VertexRole::Block(k) => k + 1,
                VertexRole::Type2(t) => {
                    let c = &corruption.type2[t].coefficients;
                    let mut best = 0;
                    for (j, &x) in c.iter().enumerate() {
                        if x > c[best] {
                            best = j;
                        }
                    }
                    best + 1
                }
                VertexRole::Type1 => 0,
            })
            .collect()
    }
}

fn jittered(rng: &mut ChaCha8Rng, value: f64, jitter: f64) -> f64 {
    if jitter == 0.0 {
        value
    } else {
        (value + rng.random_range(-jitter..=jitter)).max(f64::MIN_POSITIVE)
    }
}

/// Target block-diagonal affinity: block `i` filled with `within[i]`, zero
/// elsewhere and on the diagonal.
pub fn gen_target_bd(spec: &BlockSpec, seed: u64) -> Result<SymmetricGraph> {
    spec.validate()?;
    let n = spec.n_vertices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(n, n);
    let mut start = 0;
    for (&size, &value) in spec.sizes.iter().zip(&spec.within) {
        for a in start..start + size {
            for b in (a + 1)..start + size {
                let x = jittered(&mut rng, value, spec.jitter);
                w[(a, b)] = x;
                w[(b, a)] = x;
            }
        }
        start += size;
    }
    SymmetricGraph::from_affinity(w)
}

/// Applies group similarity, then inserts Type II vertices in list order, then
/// appends Type I vertices.
pub fn inject_corruption(
    g: &SymmetricGraph,
    spec: &BlockSpec,
    c: &CorruptionSpec,
    seed: u64,
) -> Result<CorruptedGraph> {
    spec.validate()?;
    c.validate(spec.n_blocks())?;
    if g.len() != spec.n_vertices() {
        return Err(Error::LengthMismatch(g.len(), spec.n_vertices()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roles: Vec<VertexRole> = spec.block_of_vertex().into_iter().map(VertexRole::Block).collect();
    let mut w = g.affinity().clone();

    if c.has_group_similarity() {
        let n = w.nrows();
        for a in 0..n {
            for b in (a + 1)..n {
                if let (VertexRole::Block(i), VertexRole::Block(j)) = (roles[a], roles[b]) {
                    let x = c.group(i, j);
                    if i != j && x != 0.0 {
                        let x = jittered(&mut rng, x, c.jitter);
                        w[(a, b)] = x;
                        w[(b, a)] = x;
                    }
                }
            }
        }
    }

    for (t, outlier) in c.type2.iter().enumerate() {
        let n = w.nrows();
        if outlier.position == 0 || outlier.position > n + 1 {
            return Err(Error::PositionOutOfRange {
                position: outlier.position,
                max: n + 1,
            });
        }
        let at = outlier.position - 1;
        let mut row = vec![0.0; n];
        for (r, role) in roles.iter().enumerate() {
            if let VertexRole::Block(j) = *role {
                let x = outlier.coefficients[j];
                if x != 0.0 {
                    row[r] = jittered(&mut rng, x, c.jitter);
                }
            }
        }
        w = w.insert_row(at, 0.0).insert_column(at, 0.0);
        for (r, &x) in row.iter().enumerate() {
            let r = if r >= at { r + 1 } else { r };
            w[(at, r)] = x;
            w[(r, at)] = x;
        }
        roles.insert(at, VertexRole::Type2(t));
    }

    if c.type1_count > 0 {
        let n = w.nrows();
        w = w.resize(n + c.type1_count, n + c.type1_count, 0.0);
        roles.extend(std::iter::repeat_n(VertexRole::Type1, c.type1_count));
    }

    Ok(CorruptedGraph {
        graph: SymmetricGraph::from_affinity(w)?,
        roles,
    })
}

/// Scalar equation `c0 + sum_j weights[j] / (poles[j] - x) = 0`.
///
/// With `c0 > 0` and positive weights the left side increases strictly between
/// consecutive poles, so there is exactly one root between each pair of
/// distinct poles and one above the largest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootEquation {
    pub c0: f64,
    pub poles: Vec<f64>,
    pub weights: Vec<f64>,
}

const POLE_MERGE_TOL: f64 = 1e-12;

impl RootEquation {
    pub fn evaluate(&self, x: f64) -> f64 {
        self.c0
            + self
                .poles
                .iter()
                .zip(&self.weights)
                .map(|(p, c)| c / (p - x))
                .sum::<f64>()
    }

    /// Number of values returned by [`RootEquation::roots`].
    pub fn degree(&self) -> usize {
        self.poles.len()
    }

    /// All roots, ascending. Zero-weight poles and repeated poles contribute
    /// roots located at the pole itself.
    pub fn roots(&self) -> Vec<f64> {
        let mut roots = Vec::with_capacity(self.poles.len());
        let mut active: Vec<(f64, f64)> = Vec::new();
        for (&p, &c) in self.poles.iter().zip(&self.weights) {
            if c == 0.0 {
                roots.push(p);
            } else {
                active.push((p, c));
            }
        }
        active.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (p, c) in active {
            match merged.last_mut() {
                Some((q, s)) if (p - *q).abs() <= POLE_MERGE_TOL * q.abs().max(1.0) => {
                    roots.push(*q);
                    *s += c;
                }
                _ => merged.push((p, c)),
            }
        }

        let reduced = RootEquation {
            c0: self.c0,
            poles: merged.iter().map(|m| m.0).collect(),
            weights: merged.iter().map(|m| m.1).collect(),
        };
        for (idx, &(p, _)) in merged.iter().enumerate() {
            let hi = match merged.get(idx + 1) {
                Some(&(q, _)) => q,
                None => p + merged.iter().map(|m| m.1).sum::<f64>() / self.c0 + 1.0,
            };
            roots.push(reduced.bisect(p, hi));
        }
        roots.sort_by(f64::total_cmp);
        roots
    }

    /// Root on the open interval `(lo, hi)` where the function runs from
    /// `-inf` at `lo` upward through zero.
    fn bisect(&self, lo: f64, hi: f64) -> f64 {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.evaluate(mid) < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= 1e-15 * b.abs().max(1.0) {
                break;
            }
        }
        0.5 * (a + b)
    }
}

/// Eigenvalues known in closed form (value, multiplicity) plus an optional
/// scalar equation supplying the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPrediction {
    pub explicit: Vec<(f64, usize)>,
    pub residual: Option<RootEquation>,
}

impl SpectrumPrediction {
    pub fn len(&self) -> usize {
        self.explicit.iter().map(|e| e.1).sum::<usize>() + self.residual.as_ref().map_or(0, RootEquation::degree)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Full predicted multiset, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .explicit
            .iter()
            .flat_map(|&(v, m)| std::iter::repeat_n(v, m))
            .collect();
        if let Some(eq) = &self.residual {
            out.extend(eq.roots());
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

fn require_noiseless(spec: &BlockSpec) -> Result<()> {
    spec.validate()?;
    if spec.jitter != 0.0 {
        return Err(Error::UnsupportedCorruptionCombination(
            "closed forms require zero jitter".into(),
        ));
    }
    Ok(())
}

/// Spectrum of a target matrix.
///
/// Generalized: `0` with multiplicity K, then `N_i / (N_i - 1)` with
/// multiplicity `N_i - 1`. Standard: `0` with multiplicity K, then `N_i w_i`.
pub fn predict_eigs_target(spec: &BlockSpec, mode: EigenMode) -> Result<SpectrumPrediction> {
    require_noiseless(spec)?;
    let mut explicit = vec![(0.0, spec.n_blocks())];
    for (&n, &w) in spec.sizes.iter().zip(&spec.within) {
        let nf = n as f64;
        let value = match mode {
            EigenMode::Generalized => nf / (nf - 1.0),
            EigenMode::Standard => nf * w,
        };
        explicit.push((value, n - 1));
    }
    Ok(SpectrumPrediction {
        explicit,
        residual: None,
    })
}

/// Spectrum of a target matrix plus one outlier vertex joined to every member
/// of block `j` with weight `coefficients[j]`.
pub fn predict_eigs_type2(spec: &BlockSpec, coefficients: &[f64], mode: EigenMode) -> Result<SpectrumPrediction> {
    require_noiseless(spec)?;
    if coefficients.len() != spec.n_blocks() {
        return Err(Error::LengthMismatch(coefficients.len(), spec.n_blocks()));
    }
    let mut explicit = vec![(0.0, 1)];
    let (mut poles, mut weights) = (Vec::new(), Vec::new());
    let mut outlier_degree = 0.0;
    for ((&n, &w), &a) in spec.sizes.iter().zip(&spec.within).zip(coefficients) {
        let nf = n as f64;
        let degree = (nf - 1.0) * w + a;
        let stiff = nf * w + a;
        match mode {
            EigenMode::Generalized => {
                explicit.push((stiff / degree, n - 1));
                poles.push(a / degree);
            }
            EigenMode::Standard => {
                explicit.push((stiff, n - 1));
                poles.push(a);
            }
        }
        weights.push(nf * a);
        outlier_degree += nf * a;
    }
    let c0 = match mode {
        EigenMode::Generalized => {
            if outlier_degree <= 0.0 {
                return Err(Error::SingularDegree(spec.n_vertices()));
            }
            outlier_degree
        }
        EigenMode::Standard => 1.0,
    };
    Ok(SpectrumPrediction {
        explicit,
        residual: Some(RootEquation { c0, poles, weights }),
    })
}

/// Spectrum of a target matrix where block `block` (0-based) shares
/// similarity `coefficients[j]` with every member of each other block `j`.
/// `coefficients[block]` is ignored.
pub fn predict_eigs_group(
    spec: &BlockSpec,
    block: usize,
    coefficients: &[f64],
    mode: EigenMode,
) -> Result<SpectrumPrediction> {
    require_noiseless(spec)?;
    let k = spec.n_blocks();
    if coefficients.len() != k {
        return Err(Error::LengthMismatch(coefficients.len(), k));
    }
    if block >= k {
        return Err(Error::InvalidSpec(format!("block {block} out of range for K = {k}")));
    }
    let ni = spec.sizes[block] as f64;
    let wi = spec.within[block];
    let others: Vec<usize> = (0..k).filter(|&j| j != block).collect();
    let cross: f64 = others.iter().map(|&j| spec.sizes[j] as f64 * coefficients[j]).sum();
    let di = (ni - 1.0) * wi + cross;

    let mut explicit = vec![(0.0, 1)];
    let stiff_i = ni * wi + cross;
    explicit.push((
        match mode {
            EigenMode::Generalized => stiff_i / di,
            EigenMode::Standard => stiff_i,
        },
        spec.sizes[block] - 1,
    ));
    let (mut poles, mut weights) = (Vec::new(), Vec::new());
    for &j in &others {
        let nj = spec.sizes[j] as f64;
        let b = coefficients[j];
        let dj = (nj - 1.0) * spec.within[j] + ni * b;
        let stiff = nj * spec.within[j] + ni * b;
        match mode {
            EigenMode::Generalized => {
                explicit.push((stiff / dj, spec.sizes[j] - 1));
                poles.push(ni * b / dj);
            }
            EigenMode::Standard => {
                explicit.push((stiff, spec.sizes[j] - 1));
                poles.push(ni * b);
            }
        }
        weights.push(nj * b);
    }
    let c0 = match mode {
        EigenMode::Generalized => di,
        EigenMode::Standard => 1.0,
    };
    Ok(SpectrumPrediction {
        explicit,
        residual: Some(RootEquation { c0, poles, weights }),
    })
}

/// Closed-form `v` of a corrupted matrix built by [`inject_corruption`].
///
/// Supported: any number of Type I vertices combined with either at most one
/// Type II outlier (and no group similarity) or arbitrary group similarity
/// (and no Type II outlier). The construction must be noiseless.
pub fn predict_v(spec: &BlockSpec, c: &CorruptionSpec) -> Result<Vec<f64>> {
    require_noiseless(spec)?;
    c.validate(spec.n_blocks())?;
    if c.jitter != 0.0 {
        return Err(Error::UnsupportedCorruptionCombination(
            "closed forms require zero jitter".into(),
        ));
    }
    if c.type2.len() > 1 {
        return Err(Error::UnsupportedCorruptionCombination(format!(
            "{} Type II outliers; at most one is supported",
            c.type2.len()
        )));
    }
    if !c.type2.is_empty() && c.has_group_similarity() {
        return Err(Error::UnsupportedCorruptionCombination(
            "Type II outlier combined with group similarity".into(),
        ));
    }

    let k = spec.n_blocks();
    let mut roles: Vec<VertexRole> = spec.block_of_vertex().into_iter().map(VertexRole::Block).collect();
    if let Some(t) = c.type2.first() {
        if t.position == 0 || t.position > roles.len() + 1 {
            return Err(Error::PositionOutOfRange {
                position: t.position,
                max: roles.len() + 1,
            });
        }
        roles.insert(t.position - 1, VertexRole::Type2(0));
    }

    let mut seen = vec![0usize; k];
    let mut outlier_before = false;
    let mut v = Vec::with_capacity(roles.len() + c.type1_count);
    for role in roles {
        match role {
            VertexRole::Block(b) => {
                let ramp = seen[b] as f64 * spec.within[b];
                let shift: f64 = (0..b).map(|j| spec.sizes[j] as f64 * c.group(b, j)).sum();
                let outlier = if outlier_before {
                    c.type2[0].coefficients[b]
                } else {
                    0.0
                };
                v.push(ramp + shift + outlier);
                seen[b] += 1;
            }
            VertexRole::Type2(t) => {
                let coeffs = &c.type2[t].coefficients;
                v.push((0..k).map(|j| seen[j] as f64 * coeffs[j]).sum());
                outlier_before = true;
            }
            VertexRole::Type1 => unreachable!("Type I vertices are appended below"),
        }
    }
    v.extend(std::iter::repeat_n(0.0, c.type1_count));
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{eigenvalues, vector_v};
    use approx::assert_abs_diff_eq;

    fn assert_spectra(pred: &SpectrumPrediction, g: &SymmetricGraph, mode: EigenMode, tol: f64) {
        let expected = pred.eigenvalues();
        let actual = eigenvalues(g, mode).unwrap();
        assert_eq!(expected.len(), actual.len());
        for (e, a) in expected.iter().zip(&actual) {
            assert!((e - a).abs() <= tol, "{expected:?}\nvs\n{actual:?}");
        }
    }

    fn type2_graph(spec: &BlockSpec, coeffs: Vec<f64>) -> SymmetricGraph {
        let c = CorruptionSpec {
            type2: vec![Type2Outlier {
                position: spec.n_vertices() + 1,
                coefficients: coeffs,
            }],
            ..Default::default()
        };
        inject_corruption(&gen_target_bd(spec, 0).unwrap(), spec, &c, 0)
            .unwrap()
            .graph
    }

    fn group_row(k: usize, block: usize, coeffs: &[f64]) -> Vec<Vec<f64>> {
        let mut g = vec![vec![0.0; k]; k];
        for j in 0..k {
            if j != block {
                g[block][j] = coeffs[j];
                g[j][block] = coeffs[j];
            }
        }
        g
    }

    #[test]
    fn small_target() {
        let spec = BlockSpec::new(vec![2, 2], vec![0.5, 0.5]);
        let g = gen_target_bd(&spec, 1).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.5, 0.0,
            ],
        );
        assert_eq!(g.affinity(), &expected);
    }

    #[test]
    fn target_spectrum_examples() {
        let pred = predict_eigs_target(&BlockSpec::new(vec![2, 3], vec![1.0, 1.0]), EigenMode::Generalized).unwrap();
        assert_abs_diff_eq!(
            pred.eigenvalues().as_slice(),
            [0.0, 0.0, 1.5, 1.5, 2.0].as_slice(),
            epsilon = 1e-15
        );
        let pred = predict_eigs_target(&BlockSpec::new(vec![5], vec![0.3]), EigenMode::Generalized).unwrap();
        assert_abs_diff_eq!(
            pred.eigenvalues().as_slice(),
            [0.0, 1.25, 1.25, 1.25, 1.25].as_slice(),
            epsilon = 1e-15
        );

        let spec = BlockSpec::new(vec![10, 8, 12], vec![0.6, 0.3, 0.9]);
        let g = gen_target_bd(&spec, 0).unwrap();
        for mode in [EigenMode::Generalized, EigenMode::Standard] {
            assert_spectra(&predict_eigs_target(&spec, mode).unwrap(), &g, mode, 1e-9);
        }
    }

    #[test]
    fn jitter_is_deterministic() {
        let spec = BlockSpec::new(vec![3, 3], vec![0.4, 0.7]).with_jitter(0.01);
        let a = gen_target_bd(&spec, 42).unwrap();
        let b = gen_target_bd(&spec, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_target_bd(&spec, 43).unwrap());
        let w = a.affinity();
        assert!((w[(0, 1)] - 0.4).abs() <= 0.01 && w[(0, 1)] != 0.4);
    }

    #[test]
    fn invalid_specs() {
        assert!(gen_target_bd(&BlockSpec::new(vec![1, 3], vec![0.5, 0.5]), 0).is_err());
        assert!(gen_target_bd(&BlockSpec::new(vec![2], vec![0.0]), 0).is_err());
        assert!(gen_target_bd(&BlockSpec::new(vec![2, 2], vec![0.5]), 0).is_err());
        assert!(gen_target_bd(&BlockSpec::new(vec![], vec![]), 0).is_err());
    }

    #[test]
    fn type1_vertex_has_zero_degree() {
        let spec = BlockSpec::new(vec![2, 2], vec![0.5, 0.5]);
        let c = CorruptionSpec {
            type1_count: 1,
            ..Default::default()
        };
        let out = inject_corruption(&gen_target_bd(&spec, 0).unwrap(), &spec, &c, 0).unwrap();
        assert_eq!(out.graph.len(), 5);
        assert_eq!(out.graph.degrees()[4], 0.0);
        assert_eq!(out.roles[4], VertexRole::Type1);
    }

    #[test]
    fn type2_degree() {
        let spec = BlockSpec::new(vec![2, 2], vec![0.5, 0.5]);
        let g = type2_graph(&spec, vec![0.1, 0.2]);
        assert_abs_diff_eq!(g.degrees()[4], 0.6, epsilon = 1e-15);
    }

    #[test]
    fn type2_position_out_of_range() {
        let spec = BlockSpec::new(vec![2, 2], vec![0.5, 0.5]);
        for position in [0, 6] {
            let c = CorruptionSpec {
                type2: vec![Type2Outlier {
                    position,
                    coefficients: vec![0.1, 0.1],
                }],
                ..Default::default()
            };
            let err = inject_corruption(&gen_target_bd(&spec, 0).unwrap(), &spec, &c, 0).unwrap_err();
            assert_eq!(err, Error::PositionOutOfRange { position, max: 5 });
        }
    }

    #[test]
    fn group_similarity_fills_rectangle() {
        let spec = BlockSpec::new(vec![2, 3], vec![0.5, 0.6]);
        let c = CorruptionSpec {
            group_sim: vec![vec![0.0, 0.2], vec![0.2, 0.0]],
            ..Default::default()
        };
        let base = gen_target_bd(&spec, 0).unwrap();
        let out = inject_corruption(&base, &spec, &c, 0).unwrap();
        let mut added = 0;
        for a in 0..5 {
            for b in (a + 1)..5 {
                if base.affinity()[(a, b)] == 0.0 && out.graph.affinity()[(a, b)] != 0.0 {
                    added += 1;
                }
            }
        }
        assert_eq!(added, 6);
    }

    #[test]
    fn theorem1_single_block() {
        let spec = BlockSpec::new(vec![2], vec![0.5]);
        let pred = predict_eigs_type2(&spec, &[0.1], EigenMode::Generalized).unwrap();
        assert_eq!(pred.explicit, vec![(0.0, 1), ((2.0 * 0.5 + 0.1) / 0.6, 1)]);
        assert_spectra(&pred, &type2_graph(&spec, vec![0.1]), EigenMode::Generalized, 1e-8);
    }

    #[test]
    fn theorem1_three_blocks_both_modes() {
        let spec = BlockSpec::new(vec![10, 8, 12], vec![0.6, 0.3, 0.9]);
        let coeffs = vec![0.2, 0.1, 0.3];
        let g = type2_graph(&spec, coeffs.clone());
        for mode in [EigenMode::Generalized, EigenMode::Standard] {
            let pred = predict_eigs_type2(&spec, &coeffs, mode).unwrap();
            assert_eq!(pred.len(), 31);
            assert_spectra(&pred, &g, mode, 1e-8);
        }
    }

    #[test]
    fn theorem1_vanishing_coefficients() {
        let spec = BlockSpec::new(vec![3, 4], vec![0.5, 0.7]);
        let pred = predict_eigs_type2(&spec, &[1e-9, 1e-9], EigenMode::Standard).unwrap();
        let mut limit = predict_eigs_target(&spec, EigenMode::Standard).unwrap().eigenvalues();
        limit.push(0.0);
        limit.sort_by(f64::total_cmp);
        for (a, b) in pred.eigenvalues().iter().zip(&limit) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn theorem2_examples() {
        let spec = BlockSpec::new(vec![2, 2], vec![0.5, 0.6]);
        let coeffs = [0.0, 0.1];
        let c = CorruptionSpec {
            group_sim: group_row(2, 0, &coeffs),
            ..Default::default()
        };
        let g = inject_corruption(&gen_target_bd(&spec, 0).unwrap(), &spec, &c, 0)
            .unwrap()
            .graph;
        for mode in [EigenMode::Generalized, EigenMode::Standard] {
            assert_spectra(&predict_eigs_group(&spec, 0, &coeffs, mode).unwrap(), &g, mode, 1e-8);
        }

        let spec = BlockSpec::new(vec![10, 8, 12], vec![0.6, 0.3, 0.9]);
        let coeffs = [0.2, 0.0, 0.1];
        let c = CorruptionSpec {
            group_sim: group_row(3, 1, &coeffs),
            ..Default::default()
        };
        let g = inject_corruption(&gen_target_bd(&spec, 0).unwrap(), &spec, &c, 0)
            .unwrap()
            .graph;
        for mode in [EigenMode::Generalized, EigenMode::Standard] {
            assert_spectra(&predict_eigs_group(&spec, 1, &coeffs, mode).unwrap(), &g, mode, 1e-8);
        }
    }

    #[test]
    fn theorem2_zero_coupling_is_target() {
        let spec = BlockSpec::new(vec![3, 5], vec![0.5, 0.6]);
        let a = predict_eigs_group(&spec, 0, &[0.0, 0.0], EigenMode::Generalized).unwrap();
        let b = predict_eigs_target(&spec, EigenMode::Generalized).unwrap();
        assert_abs_diff_eq!(a.eigenvalues().as_slice(), b.eigenvalues().as_slice(), epsilon = 1e-12);
    }

    #[test]
    fn root_equation_handles_repeated_poles() {
        let eq = RootEquation {
            c0: 1.0,
            poles: vec![0.5, 0.5, 0.2],
            weights: vec![1.0, 2.0, 1.0],
        };
        let roots = eq.roots();
        assert_eq!(roots.len(), 3);
        assert!(roots.contains(&0.5));
        for r in roots.iter().filter(|&&r| r != 0.5) {
            assert!(eq.evaluate(*r).abs() < 1e-6);
        }
    }

    #[test]
    fn predict_v_corollary() {
        let spec = BlockSpec::new(vec![2, 3], vec![0.5, 0.6]);
        let c = CorruptionSpec {
            group_sim: vec![vec![0.0, 0.1], vec![0.1, 0.0]],
            ..Default::default()
        };
        let v = predict_v(&spec, &c).unwrap();
        assert_abs_diff_eq!(v.as_slice(), [0.0, 0.5, 0.2, 0.8, 1.4].as_slice(), epsilon = 1e-15);
        let g = inject_corruption(&gen_target_bd(&spec, 0).unwrap(), &spec, &c, 0)
            .unwrap()
            .graph;
        assert_abs_diff_eq!(vector_v(g.laplacian()).as_slice(), v.as_slice(), epsilon = 1e-12);
    }

    #[test]
    fn predict_v_type2_at_end() {
        let spec = BlockSpec::new(vec![3, 2], vec![0.5, 0.6]);
        let c = CorruptionSpec {
            type2: vec![Type2Outlier {
                position: 6,
                coefficients: vec![0.1, 0.2],
            }],
            ..Default::default()
        };
        let v = predict_v(&spec, &c).unwrap();
        assert_abs_diff_eq!(v[5], 3.0 * 0.1 + 2.0 * 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(v[..5], [0.0, 0.5, 1.0, 0.0, 0.6][..], epsilon = 1e-15);
    }

    #[test]
    fn predict_v_matches_direct_for_every_position() {
        let spec = BlockSpec::new(vec![4, 3, 3], vec![0.5, 0.6, 0.8]);
        for position in 1..=11 {
            let c = CorruptionSpec {
                type1_count: 2,
                type2: vec![Type2Outlier {
                    position,
                    coefficients: vec![0.1, 0.0, 0.3],
                }],
                ..Default::default()
            };
            let g = inject_corruption(&gen_target_bd(&spec, 0).unwrap(), &spec, &c, 0)
                .unwrap()
                .graph;
            let direct = vector_v(g.laplacian());
            let closed = predict_v(&spec, &c).unwrap();
            assert_abs_diff_eq!(direct.as_slice(), closed.as_slice(), epsilon = 1e-12);
        }
    }

    #[test]
    fn predict_v_unsupported() {
        let spec = BlockSpec::new(vec![2, 2], vec![0.5, 0.5]);
        let t = Type2Outlier {
            position: 1,
            coefficients: vec![0.1, 0.1],
        };
        let two = CorruptionSpec {
            type2: vec![t.clone(), t.clone()],
            ..Default::default()
        };
        assert!(matches!(
            predict_v(&spec, &two),
            Err(Error::UnsupportedCorruptionCombination(_))
        ));
        let mixed = CorruptionSpec {
            type2: vec![t],
            group_sim: vec![vec![0.0, 0.1], vec![0.1, 0.0]],
            ..Default::default()
        };
        assert!(matches!(
            predict_v(&spec, &mixed),
            Err(Error::UnsupportedCorruptionCombination(_))
        ));
    }

    #[test]
    fn truth_labels_follow_roles() {
        let spec = BlockSpec::new(vec![2, 2], vec![0.5, 0.5]);
        let c = CorruptionSpec {
            type1_count: 1,
            type2: vec![Type2Outlier {
                position: 3,
                coefficients: vec![0.1, 0.3],
            }],
            ..Default::default()
        };
        let out = inject_corruption(&gen_target_bd(&spec, 0).unwrap(), &spec, &c, 0).unwrap();
        assert_eq!(out.truth_labels(&c), vec![1, 1, 2, 2, 2, 0]);
    }
}
