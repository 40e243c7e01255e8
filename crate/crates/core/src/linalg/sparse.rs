use alloc::vec::Vec;

use super::DenseSymmetric;

/// Sparse symmetric matrix: a dense diagonal plus the strictly upper
/// triangular nonzeros in compressed-sparse-row layout.
///
/// Every stored off-diagonal value is nonzero, and `nnz` counts nonzeros of
/// the full matrix (each stored pair twice, nonzero diagonal entries once).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymmetric {
    dim: usize,
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymmetric {
    pub(crate) fn from_csr_parts(
        dim: usize,
        diag: Vec<f64>,
        row_ptr: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(diag.len(), dim);
        debug_assert_eq!(row_ptr.len(), dim + 1);
        debug_assert!(vals.iter().all(|&v| v != 0.0));
        SparseSymmetric {
            dim,
            diag,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Builds from a diagonal and `(i, j, value)` entries with `i != j`.
    /// Entries are folded into the upper triangle, duplicates are summed and
    /// zeros dropped.
    pub fn from_entries(dim: usize, diag: Vec<f64>, entries: &[(usize, usize, f64)]) -> Self {
        assert_eq!(diag.len(), dim);
        let mut upper: Vec<(usize, usize, f64)> = entries
            .iter()
            .map(|&(i, j, v)| {
                assert!(i != j && i < dim && j < dim, "bad off-diagonal entry ({i}, {j})");
                if i < j {
                    (i, j, v)
                } else {
                    (j, i, v)
                }
            })
            .collect();
        upper.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        row_ptr.push(0);
        let mut k = 0;
        for i in 0..dim {
            while k < upper.len() && upper[k].0 == i {
                let j = upper[k].1;
                let mut v = 0.0;
                while k < upper.len() && upper[k].0 == i && upper[k].1 == j {
                    v += upper[k].2;
                    k += 1;
                }
                if v != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseSymmetric {
            dim,
            diag,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Nonzeros of the full symmetric matrix.
    pub fn nnz(&self) -> usize {
        2 * self.vals.len() + self.diag.iter().filter(|&&d| d != 0.0).count()
    }

    /// Stored strictly-upper entries `(i, j, value)` with `i < j`.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let row = &self.cols[self.row_ptr[a]..self.row_ptr[a + 1]];
        match row.binary_search(&b) {
            Ok(k) => self.vals[self.row_ptr[a] + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.dim {
            y[i] = self.diag[i] * x[i];
        }
        for i in 0..self.dim {
            let xi = x[i];
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                let a = self.vals[k];
                acc += a * x[j];
                y[j] += a * xi;
            }
            y[i] += acc;
        }
    }

    pub fn to_dense(&self) -> DenseSymmetric {
        let p = self.dim;
        let mut data = alloc::vec![0.0; p * p];
        for i in 0..p {
            data[i * p + i] = self.diag[i];
        }
        for (i, j, v) in self.upper_entries() {
            data[i * p + j] = v;
        }
        DenseSymmetric::from_upper(p, data)
    }
}
