//! Dense affinity, degree and Laplacian primitives plus the standard and
//! generalized symmetric eigen-solves used throughout the pipeline.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalues closer to zero than this are treated as zero when counting
/// multiplicities.
pub const ZERO_EIGEN_TOL: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-12;

/// Feature matrix with one sample per column (features x samples).
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() < 1 || values.ncols() < 2 {
            return Err(Error::Dimension(format!(
                "data matrix must be at least 1x2, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        check_finite(&values)?;
        Ok(Self { values })
    }

    /// Builds the matrix from samples given as rows (the usual CSV layout).
    pub fn from_sample_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(Error::Dimension(format!(
                "row {i} has {} entries, expected {m}",
                r.len()
            )));
        }
        Self::new(DMatrix::from_fn(m, n, |f, s| rows[s][f]))
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn n_features(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.values.ncols()
    }

    /// Indices of samples whose Euclidean norm is zero.
    pub fn zero_columns(&self) -> Vec<usize> {
        (0..self.n_samples())
            .filter(|&j| self.values.column(j).norm() == 0.0)
            .collect()
    }

    /// Copy with every column scaled to unit Euclidean norm.
    pub fn normalized(&self) -> Result<DMatrix<f64>> {
        let mut out = self.values.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let norm = col.norm();
            if norm == 0.0 {
                return Err(Error::ZeroColumn(j));
            }
            col /= norm;
        }
        Ok(out)
    }
}

/// Which eigenproblem to solve on a Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EigenMode {
    /// `L y = lambda y`
    Standard,
    /// `L y = lambda D y`
    #[default]
    Generalized,
}

impl std::str::FromStr for EigenMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Self::Standard),
            "generalized" => Ok(Self::Generalized),
            other => Err(Error::InvalidConfig(format!("unknown eigen mode '{other}'"))),
        }
    }
}

/// Symmetric affinity `W` (zero diagonal) together with its degrees and
/// Laplacian `L = D - W`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricGraph {
    affinity: DMatrix<f64>,
    degrees: DVector<f64>,
    laplacian: DMatrix<f64>,
}

impl SymmetricGraph {
    /// Validates symmetry and finiteness, zeroes the diagonal, and assembles
    /// degrees and Laplacian.
    pub fn from_affinity(mut affinity: DMatrix<f64>) -> Result<Self> {
        if !affinity.is_square() {
            return Err(Error::Dimension(format!(
                "affinity must be square, got {}x{}",
                affinity.nrows(),
                affinity.ncols()
            )));
        }
        check_finite(&affinity)?;
        let n = affinity.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (affinity[(i, j)], affinity[(j, i)]);
                let scale = a.abs().max(b.abs()).max(1.0);
                if (a - b).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        affinity.fill_diagonal(0.0);
        Ok(Self::assemble(affinity))
    }

    fn assemble(affinity: DMatrix<f64>) -> Self {
        let n = affinity.nrows();
        let degrees = DVector::from_iterator(n, affinity.row_iter().map(|r| r.sum()));
        let mut laplacian = -affinity.clone();
        for i in 0..n {
            laplacian[(i, i)] = degrees[i];
        }
        Self {
            affinity,
            degrees,
            laplacian,
        }
    }

    pub fn len(&self) -> usize {
        self.affinity.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn affinity(&self) -> &DMatrix<f64> {
        &self.affinity
    }

    pub fn degrees(&self) -> &DVector<f64> {
        &self.degrees
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    /// Simultaneous symmetric permutation: new vertex `a` is old vertex `order[a]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        self.submatrix(order)
    }

    /// Induced subgraph on `indices` (in the given order).
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        let k = indices.len();
        let w = DMatrix::from_fn(k, k, |a, b| self.affinity[(indices[a], indices[b])]);
        Self::assemble(w)
    }

    /// Graph whose affinity is `self` with `f` applied to every off-diagonal entry.
    pub fn map_affinity(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Self {
        let n = self.len();
        let w = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { f(i, j, self.affinity[(i, j)]) });
        Self::assemble(w)
    }
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Cosine affinity `W = X^T X` on unit-normalized samples, diagonal zeroed.
pub fn build_affinity(x: &DataMatrix) -> Result<SymmetricGraph> {
    let xn = x.normalized()?;
    let mut w = xn.transpose() * &xn;
    // Exact symmetry regardless of the product's rounding order.
    let n = w.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (w[(i, j)] + w[(j, i)]);
            w[(i, j)] = s;
            w[(j, i)] = s;
        }
    }
    SymmetricGraph::from_affinity(w)
}

/// Upper-triangular row sums of a square matrix, diagonal included:
/// `v_m = sum_{n >= m} l_{m,n}`.
pub fn vector_v(laplacian: &DMatrix<f64>) -> Vec<f64> {
    let n = laplacian.nrows();
    (0..n)
        .map(|m| (m..laplacian.ncols()).map(|c| laplacian[(m, c)]).sum())
        .collect()
}

/// Ascending eigenvalues with column-aligned eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    /// Number of eigenvalues within `tol` of zero.
    pub fn zero_multiplicity(&self, tol: f64) -> usize {
        self.values.iter().filter(|v| v.abs() <= tol).count()
    }

    /// Eigenvalues with entries inside [`ZERO_EIGEN_TOL`] of zero clamped to zero.
    pub fn clamped_values(&self) -> Vec<f64> {
        clamp_zeros(&self.values)
    }
}

pub(crate) fn clamp_zeros(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| if v.abs() <= ZERO_EIGEN_TOL { 0.0 } else { v })
        .collect()
}

/// Matrix whose ordinary eigenproblem carries the requested spectrum, plus
/// the diagonal scaling that maps its eigenvectors back (`y = s .* z`).
fn reduced_problem(g: &SymmetricGraph, mode: EigenMode) -> Result<(DMatrix<f64>, Option<DVector<f64>>)> {
    match mode {
        EigenMode::Standard => Ok((g.laplacian().clone(), None)),
        EigenMode::Generalized => {
            let mut scale = DVector::zeros(g.len());
            for (m, &d) in g.degrees().iter().enumerate() {
                if d <= 1e-12 {
                    return Err(Error::SingularDegree(m));
                }
                scale[m] = 1.0 / d.sqrt();
            }
            let l = g.laplacian();
            let mut s = DMatrix::from_fn(g.len(), g.len(), |i, j| scale[i] * l[(i, j)] * scale[j]);
            symmetrize(&mut s);
            Ok((s, Some(scale)))
        }
    }
}

fn symmetrize(s: &mut DMatrix<f64>) {
    let n = s.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
}

/// All eigenvalues of the chosen problem, ascending. Cheaper than
/// [`eig_smallest`] because no eigenvectors are formed.
pub fn eigenvalues(g: &SymmetricGraph, mode: EigenMode) -> Result<Vec<f64>> {
    if g.is_empty() {
        return Ok(Vec::new());
    }
    let (s, _) = reduced_problem(g, mode)?;
    let mut vals: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure);
    }
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// The `k` smallest eigenpairs of `L y = lambda y` or `L y = lambda D y`.
///
/// Generalized eigenvectors are returned D-orthonormal (`Y^T D Y = I`).
pub fn eig_smallest(g: &SymmetricGraph, mode: EigenMode, k: usize) -> Result<Spectrum> {
    let n = g.len();
    let k = k.min(n);
    let (s, scale) = reduced_problem(g, mode)?;
    let eig = SymmetricEigen::try_new(s, f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values: Vec<f64> = idx[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, k);
    for (c, &i) in idx[..k].iter().enumerate() {
        let col = eig.eigenvectors.column(i);
        for r in 0..n {
            vectors[(r, c)] = match &scale {
                Some(s) => s[r] * col[r],
                None => col[r],
            };
        }
    }
    Ok(Spectrum { values, vectors })
}
