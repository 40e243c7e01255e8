use alloc::vec;
use alloc::vec::Vec;

use super::{axpy, dot, DenseSymmetric, MatrixView, SparseSymmetric};

/// A real symmetric linear map, accessed through matrix-vector products.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;

    /// `y = M x`; `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Dense copy, used by the direct solvers. The default probes the
    /// operator with unit vectors and keeps the upper triangle.
    fn to_dense(&self) -> DenseSymmetric {
        let p = self.dim();
        let mut data = vec![0.0; p * p];
        let mut e = vec![0.0; p];
        let mut col = vec![0.0; p];
        for j in 0..p {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            e[j] = 0.0;
            for i in 0..=j {
                data[i * p + j] = col[i];
            }
        }
        DenseSymmetric::from_upper(p, data)
    }
}

impl SymmetricOperator for DenseSymmetric {
    fn dim(&self) -> usize {
        DenseSymmetric::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }

    fn to_dense(&self) -> DenseSymmetric {
        self.clone()
    }
}

impl SymmetricOperator for SparseSymmetric {
    fn dim(&self) -> usize {
        SparseSymmetric::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }

    fn to_dense(&self) -> DenseSymmetric {
        SparseSymmetric::to_dense(self)
    }
}

impl<T: SymmetricOperator + ?Sized> SymmetricOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }

    fn to_dense(&self) -> DenseSymmetric {
        (**self).to_dense()
    }
}

/// `XᵀX / m - shift · I` applied without forming the Gram matrix
/// (`m` = number of rows of `X`).
pub struct GramOperator<'a> {
    x: MatrixView<'a>,
    shift: f64,
    scratch: core::cell::RefCell<Vec<f64>>,
}

impl<'a> GramOperator<'a> {
    pub fn new(x: MatrixView<'a>, shift: f64) -> Self {
        GramOperator {
            x,
            shift,
            scratch: core::cell::RefCell::new(vec![0.0; x.rows()]),
        }
    }
}

impl SymmetricOperator for GramOperator<'_> {
    fn dim(&self) -> usize {
        self.x.cols()
    }

    fn apply(&self, v: &[f64], y: &mut [f64]) {
        let mut t = self.scratch.borrow_mut();
        self.x.mul_vec(v, &mut t);
        self.x.tmul_vec(&t, y);
        let inv = 1.0 / self.x.rows() as f64;
        for (yi, &vi) in y.iter_mut().zip(v) {
            *yi = *yi * inv - self.shift * vi;
        }
    }

    fn to_dense(&self) -> DenseSymmetric {
        super::gram_centered(self.x, self.shift != 0.0, self.shift).expect("non-empty sample")
    }
}

/// `-M`.
pub struct Negated<T>(pub T);

impl<T: SymmetricOperator> SymmetricOperator for Negated<T> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply(x, y);
        y.iter_mut().for_each(|v| *v = -*v);
    }

    fn to_dense(&self) -> DenseSymmetric {
        self.0.to_dense().scaled(-1.0)
    }
}

/// `M + Σ_q c_q u_q u_qᵀ`.
pub struct LowRankUpdate<'a, T> {
    pub base: T,
    pub terms: Vec<(f64, &'a [f64])>,
}

impl<T: SymmetricOperator> SymmetricOperator for LowRankUpdate<'_, T> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.base.apply(x, y);
        for &(c, u) in &self.terms {
            axpy(c * dot(u, x), u, y);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gram_centered, Matrix};
    use crate::rng::Rng;

    #[test]
    fn gram_operator_matches_explicit() {
        let mut rng = Rng::new(4);
        let x = Matrix::from_fn(40, 25, |_, _| rng.gaussian());
        let op = GramOperator::new(x.view(), 1.0);
        let g = gram_centered(x.view(), true, 1.0).unwrap();
        let v: Vec<f64> = (0..25).map(|_| rng.gaussian()).collect();
        let mut a = vec![0.0; 25];
        let mut b = vec![0.0; 25];
        op.apply(&v, &mut a);
        g.matvec(&v, &mut b);
        for (s, t) in a.iter().zip(&b) {
            assert!((s - t).abs() < 1e-12);
        }
        let d = SymmetricOperator::to_dense(&op);
        assert_eq!(d, g);
    }

    #[test]
    fn default_to_dense_and_low_rank() {
        let m = DenseSymmetric::diagonal(&[1.0, 2.0, 3.0]);
        let u = [1.0, 0.0, 1.0];
        let op = LowRankUpdate {
            base: &m,
            terms: vec![(2.0, &u[..])],
        };
        let d = op.to_dense();
        assert_eq!(d.get(0, 0), 3.0);
        assert_eq!(d.get(0, 2), 2.0);
        assert_eq!(d.get(2, 2), 5.0);
        assert_eq!(Negated(&m).to_dense().get(1, 1), -2.0);
    }
}
