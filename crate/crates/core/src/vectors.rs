use crate::error::{GrothError, Result};

/// `len` vectors of dimension `dim`, stored contiguously (vector `i` occupies
/// `data[i*dim..(i+1)*dim]`).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet {
    dim: usize,
    data: Vec<f64>,
}

impl VectorSet {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(GrothError::invalid("vector dimension must be positive"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(GrothError::DimensionMismatch {
                expected: dim * (data.len() / dim + 1),
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(GrothError::DimensionMismatch { expected: dim, got: bad.len() });
        }
        Self::new(dim, rows.concat())
    }

    pub fn zeros(len: usize, dim: usize) -> Self {
        Self { dim, data: vec![0.0; len * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    pub fn dot(&self, i: usize, j: usize) -> f64 {
        dot(self.get(i), self.get(j))
    }

    /// Largest deviation of any vector norm from 1.
    pub fn max_norm_defect(&self) -> f64 {
        self.iter()
            .map(|v| (dot(v, v).sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_rows() {
        let err = VectorSet::from_rows(&[vec![1.0, 0.0], vec![1.0]]).unwrap_err();
        assert!(matches!(err, GrothError::DimensionMismatch { expected: 2, got: 1 }));
    }

    #[test]
    fn indexing_and_dots() {
        let v = VectorSet::from_rows(&[vec![1.0, 0.0], vec![0.6, 0.8]]).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.get(1), &[0.6, 0.8]);
        assert!((v.dot(0, 1) - 0.6).abs() < 1e-15);
        assert!(v.max_norm_defect() < 1e-15);
    }
}
