use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::jacobi::jacobi_eigen;
use super::lanczos::lanczos_top;
use super::operator::{Negated, SymmetricOperator};
use super::tridiag::dense_eigen;
use super::{axpy, dot, norm2};
use crate::error::{Error, Result};

/// Dimension at or below which the automatic solver goes straight to dense
/// Jacobi rotations.
pub const DENSE_CUTOFF: usize = 128;

/// Eigenvalue, unit eigenvector and the residual `‖Mv − λv‖₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Solver {
    /// Dense Jacobi up to [`DENSE_CUTOFF`], Lanczos above it with a dense
    /// Householder/QL fallback if Lanczos misses the residual target.
    #[default]
    Auto,
    Lanczos,
    /// Jacobi up to [`DENSE_CUTOFF`], Householder tridiagonalisation + QL above.
    Dense,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Residual target for every returned pair.
    pub tol: f64,
    /// Matrix-vector product budget for Lanczos; `None` means `10 · dim`.
    pub max_iter: Option<usize>,
    pub solver: Solver,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-9,
            max_iter: None,
            solver: Solver::Auto,
        }
    }
}

impl EigenOptions {
    pub fn with_solver(mut self, solver: Solver) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// The `r` algebraically largest eigenpairs of `op`, in descending order.
///
/// Each vector is unit norm with its largest-magnitude entry (lowest index
/// on ties) made nonnegative, and each value is the Rayleigh quotient of its
/// vector.
pub fn top_r_eigenpairs<Op: SymmetricOperator + ?Sized>(
    op: &Op,
    r: usize,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair>> {
    let n = op.dim();
    if r > n {
        return Err(Error::InvalidConfig(format!(
            "requested {r} eigenpairs of a {n}-dimensional operator"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "eigensolver tolerance must be positive, got {}",
            opts.tol
        )));
    }
    if r == 0 {
        return Ok(Vec::new());
    }
    let max_iter = opts.max_iter.unwrap_or(10 * n).max(1);
    match opts.solver {
        Solver::Dense => dense_top(op, r, opts.tol),
        Solver::Lanczos => lanczos_path(op, r, opts.tol, max_iter),
        Solver::Auto if n <= DENSE_CUTOFF => dense_top(op, r, opts.tol),
        Solver::Auto => match lanczos_path(op, r, opts.tol, max_iter) {
            Err(Error::ConvergenceFailure { .. }) => dense_top(op, r, opts.tol),
            other => other,
        },
    }
}

/// `max(|λ_max|, |λ_min|)` from the top eigenpairs of `M` and `−M`. The
/// residual target is `tol`, which bounds the absolute eigenvalue error.
pub fn spectral_norm<Op: SymmetricOperator + ?Sized>(op: &Op, tol: f64) -> Result<f64> {
    if op.dim() == 0 {
        return Ok(0.0);
    }
    let opts = EigenOptions::default().with_tol(tol);
    let top = top_r_eigenpairs(op, 1, &opts)?[0].value;
    let bottom = top_r_eigenpairs(&Negated(op), 1, &opts)?[0].value;
    Ok(libm::fabs(top).max(libm::fabs(bottom)))
}

fn lanczos_path<Op: SymmetricOperator + ?Sized>(
    op: &Op,
    r: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<EigenPair>> {
    let out = lanczos_top(op, r, tol, max_iter);
    let iterations = out.matvecs;
    let pairs = finalize(op, out.pairs);
    let worst = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
    if !out.converged || pairs.len() < r || !(worst <= tol) {
        return Err(Error::ConvergenceFailure {
            best: pairs,
            residual: if out.converged { worst } else { worst.max(tol * 2.0) },
            iterations,
        });
    }
    Ok(pairs)
}

fn dense_top<Op: SymmetricOperator + ?Sized>(op: &Op, r: usize, tol: f64) -> Result<Vec<EigenPair>> {
    let n = op.dim();
    let a = op.to_dense();
    let (values, vectors) = if n <= DENSE_CUTOFF {
        jacobi_eigen(a.as_slice(), n)
    } else {
        dense_eigen(a.as_slice(), n).ok_or(Error::ConvergenceFailure {
            best: Vec::new(),
            residual: f64::INFINITY,
            iterations: 0,
        })?
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    let raw: Vec<(f64, Vec<f64>)> = order
        .iter()
        .take(r)
        .map(|&c| (values[c], (0..n).map(|i| vectors[i * n + c]).collect()))
        .collect();
    let pairs = finalize(op, raw);
    let worst = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
    if !(worst <= tol) {
        return Err(Error::ConvergenceFailure {
            best: pairs,
            residual: worst,
            iterations: 0,
        });
    }
    Ok(pairs)
}

/// Normalise, fix signs, replace values by Rayleigh quotients, compute
/// residuals and sort descending.
fn finalize<Op: SymmetricOperator + ?Sized>(op: &Op, raw: Vec<(f64, Vec<f64>)>) -> Vec<EigenPair> {
    let n = op.dim();
    let mut mv = vec![0.0; n];
    let mut pairs: Vec<EigenPair> = raw
        .into_iter()
        .map(|(_, mut v)| {
            let nv = norm2(&v);
            if nv > 0.0 {
                v.iter_mut().for_each(|x| *x /= nv);
            }
            apply_sign_convention(&mut v);
            op.apply(&v, &mut mv);
            let value = dot(&v, &mv);
            axpy(-value, &v, &mut mv);
            EigenPair {
                value,
                residual: norm2(&mv),
                vector: v,
            }
        })
        .collect();
    pairs.sort_by(|a, b| b.value.total_cmp(&a.value));
    pairs
}

/// Flip `v` so that its largest-magnitude entry is nonnegative. Entries
/// within a relative `SIGN_TIE` of the largest count as tied and the lowest
/// index wins, so vectors with equal-magnitude entries (localised on a
/// symmetric pair, say) get a sign that survives rounding.
pub(crate) fn apply_sign_convention(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, &x| m.max(libm::fabs(x)));
    let pick = v.iter().position(|&x| libm::fabs(x) >= max * (1.0 - SIGN_TIE));
    if let Some(i) = pick {
        if v[i] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

const SIGN_TIE: f64 = 1e-8;
