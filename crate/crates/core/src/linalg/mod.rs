//! Numerical substrate: matrices, thresholding, Gram matrices, robust scale
//! and symmetric eigensolvers.

mod dense;
mod eigen;
mod jacobi;
mod lanczos;
mod operator;
mod robust;
mod sparse;
mod tridiag;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub use dense::DenseSymmetric;
pub use eigen::{spectral_norm, top_r_eigenpairs, EigenOptions, EigenPair, Solver};
pub use operator::{GramOperator, LowRankUpdate, Negated, SymmetricOperator};
pub use robust::{mad, median, GAUSSIAN_MAD_SCALE};
pub use sparse::SparseSymmetric;

use crate::error::{Error, Result};

/// Dense row-major real matrix; rows are observations in this crate.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn view(&self) -> MatrixView<'_> {
        MatrixView {
            rows: self.rows,
            cols: self.cols,
            data: &self.data,
        }
    }

    /// Contiguous block of rows `start..end`.
    pub fn row_range(&self, start: usize, end: usize) -> MatrixView<'_> {
        assert!(start <= end && end <= self.rows);
        MatrixView {
            rows: end - start,
            cols: self.cols,
            data: &self.data[start * self.cols..end * self.cols],
        }
    }

    /// Columns permuted so that new column `j` is old column `perm[j]`.
    pub fn permute_cols(&self, perm: &[usize]) -> Matrix {
        assert_eq!(perm.len(), self.cols);
        Matrix::from_fn(self.rows, self.cols, |i, j| self.get(i, perm[j]))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }
}

/// Borrowed row-major block of a [`Matrix`].
#[derive(Clone, Copy, Debug)]
pub struct MatrixView<'a> {
    rows: usize,
    cols: usize,
    data: &'a [f64],
}

impl<'a> MatrixView<'a> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &'a [f64] {
        self.data
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `y = A x` (length `rows`).
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    /// `y = Aᵀ x` (length `cols`).
    pub fn tmul_vec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                axpy(xi, self.row(i), y);
            }
        }
    }
}

impl<'a> From<&'a Matrix> for MatrixView<'a> {
    fn from(m: &'a Matrix) -> Self {
        m.view()
    }
}

/// Soft thresholding `sgn(z) (|z| - level)_+`.
#[inline]
pub fn soft_threshold(z: f64, level: f64) -> f64 {
    if z > level {
        z - level
    } else if z < -level {
        z + level
    } else {
        0.0
    }
}

/// Entrywise soft thresholding of a symmetric matrix into sparse storage.
///
/// With `preserve_diagonal` the diagonal is copied unthresholded; the
/// estimators never set it, it exists for diagnostics.
pub fn soft_threshold_matrix(
    m: &DenseSymmetric,
    level: f64,
    preserve_diagonal: bool,
) -> SparseSymmetric {
    assert!(level >= 0.0, "threshold level must be nonnegative");
    let p = m.dim();
    let diag: Vec<f64> = (0..p)
        .map(|i| {
            let d = m.get(i, i);
            if preserve_diagonal {
                d
            } else {
                soft_threshold(d, level)
            }
        })
        .collect();
    let mut row_ptr = Vec::with_capacity(p + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for i in 0..p {
        let row = m.row(i);
        for (j, &a) in row.iter().enumerate().skip(i + 1) {
            let t = soft_threshold(a, level);
            if t != 0.0 {
                cols.push(j);
                vals.push(t);
            }
        }
        row_ptr.push(cols.len());
    }
    SparseSymmetric::from_csr_parts(p, diag, row_ptr, cols, vals)
}

/// `XᵀX / n`, minus `sigma2 · I` when `subtract_identity` is set.
///
/// The product runs block-by-block over column panels, computing only the
/// upper block triangle and mirroring it, through `matrixmultiply::dgemm`.
pub fn gram_centered(x: MatrixView<'_>, subtract_identity: bool, sigma2: f64) -> Result<DenseSymmetric> {
    let (n, p) = (x.rows(), x.cols());
    if n == 0 || p == 0 {
        return Err(Error::DimensionMismatch(format!(
            "Gram matrix of an empty {}x{} sample",
            n, p
        )));
    }
    const PANEL: usize = 256;
    let mut out = vec![0.0; p * p];
    let alpha = 1.0 / n as f64;
    let src = x.data();
    let mut c0 = 0;
    while c0 < p {
        let c1 = (c0 + PANEL).min(p);
        let mut d0 = c0;
        while d0 < p {
            let d1 = (d0 + PANEL).min(p);
            // C[c0..c1, d0..d1] = alpha * X[:, c0..c1]ᵀ X[:, d0..d1]
            unsafe {
                matrixmultiply::dgemm(
                    c1 - c0,
                    n,
                    d1 - d0,
                    alpha,
                    src.as_ptr().add(c0),
                    1,
                    p as isize,
                    src.as_ptr().add(d0),
                    p as isize,
                    1,
                    0.0,
                    out.as_mut_ptr().add(c0 * p + d0),
                    p as isize,
                    1,
                );
            }
            d0 = d1;
        }
        c0 = c1;
    }
    if subtract_identity {
        for i in 0..p {
            out[i * p + i] -= sigma2;
        }
    }
    Ok(DenseSymmetric::from_upper(p, out))
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // four accumulators so the loop vectorises; fixed order keeps it deterministic
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub(crate) fn norm2(x: &[f64]) -> f64 {
    libm::sqrt(dot(x, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn soft_threshold_examples() {
        assert!((soft_threshold(0.5, 0.2) - 0.3).abs() < 1e-15);
        assert_eq!(soft_threshold(-0.1, 0.2), 0.0);
        assert!((soft_threshold(-0.5, 0.2) + 0.3).abs() < 1e-15);
        assert_eq!(soft_threshold(0.2, 0.2), 0.0);
        assert_eq!(soft_threshold(1.5, 0.0), 1.5);
    }

    #[test]
    fn threshold_zero_matrix() {
        let m = DenseSymmetric::zeros(7);
        let s = soft_threshold_matrix(&m, 1.0, false);
        assert_eq!(s.nnz(), 0);
        assert_eq!(s.dim(), 7);
    }

    #[test]
    fn threshold_diagonal_matrix() {
        let m = DenseSymmetric::diagonal(&[3.0, 3.0]);
        let s = soft_threshold_matrix(&m, 1.0, false);
        assert_eq!(s.to_dense(), DenseSymmetric::diagonal(&[2.0, 2.0]));
        let kept = soft_threshold_matrix(&m, 1.0, true);
        assert_eq!(kept.to_dense(), m);
    }

    #[test]
    fn threshold_matches_entrywise() {
        let mut rng = Rng::new(5);
        let p = 30;
        let m = DenseSymmetric::from_fn(p, |_, _| rng.gaussian());
        let s = soft_threshold_matrix(&m, 0.7, false);
        let d = s.to_dense();
        let mut count = 0;
        for i in 0..p {
            for j in 0..p {
                let e = soft_threshold(m.get(i, j), 0.7);
                assert_eq!(d.get(i, j), e);
                assert_eq!(d.get(i, j), d.get(j, i));
                count += (e != 0.0) as usize;
            }
        }
        assert_eq!(s.nnz(), count);
    }

    /// Off-diagonal entries of a white-noise sample covariance are close to
    /// N(0, 1/n), so thresholding at 4/sqrt(n) keeps about 2Φ(-4) of them.
    #[test]
    fn wishart_threshold_keeps_gaussian_tail_fraction() {
        let (n, p) = (200, 200);
        let mut rng = Rng::new(11);
        let mut x = Matrix::zeros(n, p);
        rng.fill_gaussian(x.data_mut());
        let sigma = gram_centered(x.view(), true, 1.0).unwrap();
        let s = soft_threshold_matrix(&sigma, 4.0 / (n as f64).sqrt(), false);
        let off = s.nnz() - s.diagonal().iter().filter(|&&d| d != 0.0).count();
        let pairs = (p * (p - 1)) as f64;
        let frac = off as f64 / pairs;
        // Monte Carlo oracle over independent N(0, 1/n) entries
        let mut orng = Rng::new(99);
        let trials = 2_000_000;
        let level = 4.0;
        let hits = (0..trials).filter(|_| orng.gaussian().abs() > level).count();
        let oracle = hits as f64 / trials as f64;
        // entries are only pairwise independent; 3 s.e. computed over unordered pairs
        let se = (oracle * (1.0 - oracle) / (pairs / 2.0)).sqrt();
        assert!(
            (frac - oracle).abs() <= 3.0 * se,
            "fraction {frac}, oracle {oracle}, se {se}"
        );
    }

    #[test]
    fn gram_small_examples() {
        let x = Matrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let g = gram_centered(x.view(), false, 0.0).unwrap();
        assert_eq!(g, DenseSymmetric::diagonal(&[0.5, 0.5]));
        let g = gram_centered(x.view(), true, 1.0).unwrap();
        assert_eq!(g, DenseSymmetric::diagonal(&[-0.5, -0.5]));
        let empty = Matrix::zeros(0, 3);
        assert!(matches!(
            gram_centered(empty.view(), false, 0.0),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn gram_matches_naive_across_panels() {
        let mut rng = Rng::new(2);
        let (n, p) = (37, 300);
        let x = Matrix::from_fn(n, p, |_, _| rng.gaussian());
        let g = gram_centered(x.view(), true, 0.25).unwrap();
        for i in (0..p).step_by(7) {
            for j in (0..p).step_by(5) {
                let mut s = 0.0;
                for r in 0..n {
                    s += x.get(r, i) * x.get(r, j);
                }
                s /= n as f64;
                if i == j {
                    s -= 0.25;
                }
                assert!((g.get(i, j) - s).abs() < 1e-12, "({i},{j})");
                assert_eq!(g.get(i, j), g.get(j, i));
            }
        }
    }

    #[test]
    fn transpose_products() {
        let x = Matrix::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let mut y = [0.0; 2];
        x.view().mul_vec(&[1.0, 0.0, -1.0], &mut y);
        assert_eq!(y, [-2.0, -2.0]);
        let mut z = [0.0; 3];
        x.view().tmul_vec(&[1.0, 1.0], &mut z);
        assert_eq!(z, [5.0, 7.0, 9.0]);
    }
}
