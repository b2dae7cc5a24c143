//! Dense symmetric input matrices.
//!
//! [`PsdMatrix`] is the problem input `A`. Construction symmetrizes the
//! entries as `(a_ij + a_ji) / 2`, so the stored array is exactly symmetric;
//! positive semidefiniteness is checked separately by [`validate_psd`] and
//! recorded on the matrix once certified.

mod io;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{GrothError, Result};
use crate::rng;

pub use io::{
    load_edge_list, load_matrix, read_dense_csv, read_edge_list, read_matrix_market, save_matrix,
    write_dense_csv, write_matrix_market, MatrixFormat,
};

/// Default relative tolerance for PSD certification.
pub const DEFAULT_PSD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct PsdMatrix {
    m: usize,
    entries: Vec<f64>,
    scale: f64,
    psd_certified: Option<f64>,
}

impl PsdMatrix {
    /// Builds an `m×m` matrix from row-major entries, symmetrizing.
    pub fn from_row_major(m: usize, mut entries: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(GrothError::invalid("matrix order must be positive"));
        }
        if entries.len() != m * m {
            return Err(GrothError::DimensionMismatch { expected: m * m, got: entries.len() });
        }
        if let Some(pos) = entries.iter().position(|x| !x.is_finite()) {
            return Err(GrothError::invalid(format!(
                "non-finite entry at ({}, {})",
                pos / m,
                pos % m
            )));
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let s = 0.5 * (entries[i * m + j] + entries[j * m + i]);
                entries[i * m + j] = s;
                entries[j * m + i] = s;
            }
        }
        let scale = entries.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        Ok(Self { m, entries, scale, psd_certified: None })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(GrothError::DimensionMismatch { expected: m, got: bad.len() });
        }
        Self::from_row_major(m, rows.concat())
    }

    pub fn identity(m: usize) -> Result<Self> {
        let mut e = vec![0.0; m * m];
        (0..m).for_each(|i| e[i * m + i] = 1.0);
        Self::from_row_major(m, e)
    }

    pub fn ones(m: usize) -> Result<Self> {
        Self::from_row_major(m, vec![1.0; m * m])
    }

    pub fn order(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.m..(i + 1) * self.m]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Largest absolute entry.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Tolerance the matrix was certified PSD at, if it has been.
    pub fn psd_certified(&self) -> Option<f64> {
        self.psd_certified
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks_exact(self.m).map(<[f64]>::to_vec).collect()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        let mut out = Self::from_row_major(self.m, self.entries.iter().map(|x| c * x).collect())?;
        if c >= 0.0 {
            out.psd_certified = self.psd_certified;
        }
        Ok(out)
    }

    /// Runs [`validate_psd`] and returns the certified matrix, or
    /// `InvalidInput` carrying the offending eigenvalue.
    pub fn certify(mut self, tol: f64) -> Result<Self> {
        let report = validate_psd(&self, tol)?;
        if !report.pass {
            return Err(GrothError::invalid(format!(
                "matrix is not positive semidefinite: λ_min = {:e} < -{:e}·{:e}",
                report.min_eigenvalue, tol, self.scale
            )));
        }
        self.psd_certified = Some(tol);
        Ok(self)
    }

    /// SHA-256 over the order and the IEEE bit patterns of the entries.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.m as u64).to_le_bytes());
        for x in &self.entries {
            h.update(x.to_bits().to_le_bytes());
        }
        h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.m, self.m, &self.entries)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub tol: f64,
    pub scale: f64,
    pub pass: bool,
}

/// Certifies `λ_min(A) ≥ -tol·scale(A)` by a full symmetric eigensolve.
pub fn validate_psd(a: &PsdMatrix, tol: f64) -> Result<PsdReport> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(GrothError::invalid(format!("PSD tolerance must be finite and ≥ 0, got {tol}")));
    }
    if a.entries.iter().any(|x| !x.is_finite()) {
        return Err(GrothError::invalid("matrix has non-finite entries"));
    }
    let min_eigenvalue = min_eigenvalue(a.to_nalgebra());
    Ok(PsdReport {
        min_eigenvalue,
        tol,
        scale: a.scale,
        pass: min_eigenvalue >= -tol * a.scale,
    })
}

/// Smallest eigenvalue of a symmetric matrix.
pub(crate) fn min_eigenvalue(m: DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Undirected graph with nonnegative edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    m: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    /// Validates and normalizes edges to `i < j`. Rejects self-loops,
    /// duplicate pairs, out-of-range vertices and negative or non-finite
    /// weights.
    pub fn new(m: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if m == 0 {
            return Err(GrothError::invalid("graph must have at least one vertex"));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (a, b, w) in edges {
            let (i, j) = if a <= b { (a, b) } else { (b, a) };
            if i == j {
                return Err(GrothError::invalid(format!("self-loop at vertex {i}")));
            }
            if j >= m {
                return Err(GrothError::invalid(format!("edge ({a}, {b}) out of range for {m} vertices")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(GrothError::invalid(format!("edge ({a}, {b}) has invalid weight {w}")));
            }
            if !seen.insert((i, j)) {
                return Err(GrothError::invalid(format!("duplicate edge ({i}, {j})")));
            }
            out.push((i, j, w));
        }
        Ok(Self { m, edges: out })
    }

    /// Unit-weight cycle `0-1-…-(m-1)-0`.
    pub fn cycle(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(GrothError::invalid("a cycle needs at least 3 vertices"));
        }
        Self::new(m, (0..m).map(|i| (i, (i + 1) % m, 1.0)))
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }
}

/// Weighted graph Laplacian. Off-diagonals are assembled first and each
/// diagonal entry is set to the negated sum of its row's off-diagonals.
pub fn laplacian(g: &WeightedGraph) -> PsdMatrix {
    let m = g.m;
    let mut e = vec![0.0; m * m];
    for &(i, j, w) in &g.edges {
        e[i * m + j] = -w;
        e[j * m + i] = -w;
    }
    for i in 0..m {
        let off: f64 = (0..m).filter(|&j| j != i).map(|j| e[i * m + j]).sum();
        e[i * m + i] = -off;
    }
    PsdMatrix::from_row_major(m, e).expect("laplacian entries are finite")
}

/// `BᵀB` for an `r×m` standard Gaussian `B` drawn from `seed`.
pub fn random_gram(m: usize, r: usize, seed: u64) -> Result<PsdMatrix> {
    if m == 0 {
        return Err(GrothError::invalid("matrix order must be positive"));
    }
    if r < 1 || r > m {
        return Err(GrothError::invalid(format!("rank must satisfy 1 ≤ r ≤ m, got r = {r}, m = {m}")));
    }
    let mut rng = rng::stream(seed);
    let b: Vec<f64> = (0..r * m).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut e = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let s: f64 = (0..r).map(|p| b[p * m + i] * b[p * m + j]).sum();
            e[i * m + j] = s;
            e[j * m + i] = s;
        }
    }
    PsdMatrix::from_row_major(m, e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_psd() {
        let r = validate_psd(&PsdMatrix::identity(3).unwrap(), DEFAULT_PSD_TOL).unwrap();
        assert!(r.pass);
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-14);
    }

    #[test]
    fn indefinite_two_by_two_fails() {
        let a = PsdMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let r = validate_psd(&a, DEFAULT_PSD_TOL).unwrap();
        assert!(!r.pass);
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-14);
        assert!(matches!(a.certify(DEFAULT_PSD_TOL), Err(GrothError::InvalidInput(_))));
    }

    #[test]
    fn all_ones_is_psd_with_zero_min_eigenvalue() {
        let r = validate_psd(&PsdMatrix::ones(4).unwrap(), DEFAULT_PSD_TOL).unwrap();
        assert!(r.pass);
        assert!(r.min_eigenvalue.abs() < 1e-14);
    }

    #[test]
    fn non_finite_entries_rejected() {
        let err = PsdMatrix::from_row_major(2, vec![1.0, f64::NAN, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, GrothError::InvalidInput(_)));
        assert!(validate_psd(&PsdMatrix::identity(2).unwrap(), f64::NAN).is_err());
    }

    #[test]
    fn construction_symmetrizes() {
        let a = PsdMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(a.get(0, 1), 1.0);
        assert_eq!(a.get(1, 0), 1.0);
        assert_eq!(a.scale(), 1.0);
    }

    #[test]
    fn laplacian_examples() {
        let k2 = laplacian(&WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap());
        assert_eq!(k2.to_rows(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);

        let tri = laplacian(&WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(tri.get(i, j), if i == j { 2.0 } else { -1.0 });
            }
        }

        let c5 = laplacian(&WeightedGraph::cycle(5).unwrap());
        for i in 0..5 {
            assert_eq!(c5.get(i, i), 2.0);
            assert_eq!(c5.get(i, (i + 1) % 5), -1.0);
            assert_eq!(c5.get(i, (i + 2) % 5), 0.0);
        }
    }

    #[test]
    fn graph_validation() {
        assert!(WeightedGraph::new(3, [(1, 1, 1.0)]).is_err());
        assert!(WeightedGraph::new(3, [(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(WeightedGraph::new(3, [(0, 3, 1.0)]).is_err());
        assert!(WeightedGraph::new(3, [(0, 1, -1.0)]).is_err());
        let g = WeightedGraph::new(3, [(2, 0, 0.5)]).unwrap();
        assert_eq!(g.edges(), &[(0, 2, 0.5)]);
    }

    #[test]
    fn random_gram_examples() {
        let a = random_gram(1, 1, 99).unwrap();
        assert!(a.get(0, 0) >= 0.0);

        let a = random_gram(5, 2, 7).unwrap();
        let r = validate_psd(&a, DEFAULT_PSD_TOL).unwrap();
        assert!(r.pass);
        // rank 2 of order 5: three eigenvalues vanish
        assert!(r.min_eigenvalue.abs() < 1e-12 * a.scale());

        assert_eq!(random_gram(5, 5, 7).unwrap(), random_gram(5, 5, 7).unwrap());
        assert_ne!(random_gram(5, 5, 7).unwrap(), random_gram(5, 5, 8).unwrap());
        assert!(random_gram(5, 0, 7).is_err());
        assert!(random_gram(5, 6, 7).is_err());
    }

    #[test]
    fn digest_tracks_content() {
        let a = PsdMatrix::identity(3).unwrap();
        assert_eq!(a.digest(), PsdMatrix::identity(3).unwrap().digest());
        assert_ne!(a.digest(), PsdMatrix::ones(3).unwrap().digest());
        assert_eq!(a.digest().len(), 64);
    }
}
