use alloc::vec;
use alloc::vec::Vec;

use super::dot;

/// Symmetric matrix in full row-major storage.
///
/// Constructors treat the upper triangle as authoritative and mirror it into
/// the lower one, so `get(i, j) == get(j, i)` holds bit-for-bit.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSymmetric {
    dim: usize,
    data: Vec<f64>,
}

impl DenseSymmetric {
    /// Takes a full `dim × dim` buffer and overwrites its lower triangle
    /// with the upper one.
    pub fn from_upper(dim: usize, mut data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim * dim, "buffer size");
        for i in 0..dim {
            for j in 0..i {
                data[i * dim + j] = data[j * dim + i];
            }
        }
        DenseSymmetric { dim, data }
    }

    /// Calls `f(i, j)` once for each `i <= j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                data[i * dim + j] = f(i, j);
            }
        }
        Self::from_upper(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        DenseSymmetric {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let dim = d.len();
        let mut m = Self::zeros(dim);
        for (i, &v) in d.iter().enumerate() {
            m.data[i * dim + i] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal_entries(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> DenseSymmetric {
        DenseSymmetric::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    pub fn scaled(&self, c: f64) -> DenseSymmetric {
        DenseSymmetric {
            dim: self.dim,
            data: self.data.iter().map(|&x| c * x).collect(),
        }
    }
}
