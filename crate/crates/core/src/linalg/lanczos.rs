//! Lanczos iteration with full reorthogonalisation.
//!
//! The projected tridiagonal problem is solved with implicit QL every few
//! steps. When the recurrence breaks down (an invariant subspace has been
//! found) a fresh pseudo-random start vector orthogonal to the basis opens a
//! new chain, with a zero coupling in the tridiagonal matrix. A breakdown
//! means the space outside the basis may still hold repeated copies of
//! eigenvalues seen so far, so after one the top-r set is only accepted once
//! the newest chain's leading Ritz value has converged and does not exceed
//! the r-th accepted value.

use alloc::vec;
use alloc::vec::Vec;

use super::operator::SymmetricOperator;
use super::tridiag::tridiagonal_eigen;
use super::{axpy, dot, norm2};
use crate::rng::Rng;

pub(crate) struct LanczosOutcome {
    /// Ritz pairs, descending by value. Fewer than `r` only if the basis
    /// could not be extended.
    pub pairs: Vec<(f64, Vec<f64>)>,
    pub converged: bool,
    pub matvecs: usize,
}

const START_SEED: u64 = 0x1A2C_05E5_0000_0001;

fn orthogonal_start(rng: &mut Rng, basis: &[Vec<f64>], n: usize) -> Option<Vec<f64>> {
    for _attempt in 0..4 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
        let scale = norm2(&v);
        for _ in 0..2 {
            for b in basis {
                let c = dot(b, &v);
                axpy(-c, b, &mut v);
            }
        }
        let nv = norm2(&v);
        if nv > 1e-8 * scale {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

pub(crate) fn lanczos_top<Op: SymmetricOperator + ?Sized>(
    op: &Op,
    r: usize,
    tol: f64,
    max_iter: usize,
) -> LanczosOutcome {
    let n = op.dim();
    let limit = n.min(max_iter.max(r));
    let mut rng = Rng::new(START_SEED ^ n as u64);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut chain_start = 0usize;
    let mut had_breakdown = false;
    let mut anorm: f64 = 0.0;
    let mut matvecs = 0usize;
    let mut next_check = r;
    let mut w = vec![0.0; n];
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();

    let mut v = match orthogonal_start(&mut rng, &basis, n) {
        Some(v) => v,
        None => {
            return LanczosOutcome {
                pairs: best,
                converged: false,
                matvecs,
            }
        }
    };

    loop {
        basis.push(v);
        let j = basis.len() - 1;
        op.apply(&basis[j], &mut w);
        matvecs += 1;
        let a = dot(&basis[j], &w);
        axpy(-a, &basis[j], &mut w);
        let prev_beta = if j > chain_start { beta[j - 1] } else { 0.0 };
        if j > chain_start {
            axpy(-prev_beta, &basis[j - 1], &mut w);
        }
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                axpy(-c, b, &mut w);
            }
        }
        let b = norm2(&w);
        alpha.push(a);
        anorm = anorm.max(libm::fabs(a) + b + prev_beta);
        let size = j + 1;
        let breakdown = b == 0.0 || b <= 1e-13 * anorm;
        let exhausted = size >= limit;

        if size >= r && (breakdown || exhausted || size >= next_check) {
            next_check = size + if size < 40 { 2 } else { size / 10 };
            let coupling = if breakdown { 0.0 } else { b };
            let Some((theta, s)) = tridiagonal_eigen(&alpha, &beta) else {
                return LanczosOutcome {
                    pairs: best,
                    converged: false,
                    matvecs,
                };
            };
            // theta ascending: the top r sit at the end
            let top: Vec<usize> = (size - r..size).rev().collect();
            let est = |idx: usize| coupling * libm::fabs(s[(size - 1) * size + idx]);
            let mut ok = top.iter().all(|&idx| est(idx) <= tol);
            if ok && (breakdown || had_breakdown) && size < n {
                let lo = chain_start;
                let (bt, bs) = tridiagonal_eigen(&alpha[lo..], &beta[lo..]).expect("sub-block of a solved tridiagonal");
                let m = size - lo;
                let c_top = bt[m - 1];
                let c_est = coupling * libm::fabs(bs[(m - 1) * m + (m - 1)]);
                let theta_r = theta[size - r];
                ok = c_est <= tol && c_top <= theta_r + tol;
            }
            if ok || exhausted {
                let pairs: Vec<(f64, Vec<f64>)> = top
                    .iter()
                    .map(|&idx| {
                        let mut y = vec![0.0; n];
                        for (k, bk) in basis.iter().enumerate() {
                            axpy(s[k * size + idx], bk, &mut y);
                        }
                        let ny = norm2(&y);
                        y.iter_mut().for_each(|x| *x /= ny);
                        (theta[idx], y)
                    })
                    .collect();
                let mut worst: f64 = 0.0;
                let mut my = vec![0.0; n];
                for (lam, y) in &pairs {
                    op.apply(y, &mut my);
                    matvecs += 1;
                    axpy(-lam, y, &mut my);
                    worst = worst.max(norm2(&my));
                }
                best = pairs;
                if worst <= tol {
                    return LanczosOutcome {
                        pairs: best,
                        converged: true,
                        matvecs,
                    };
                }
            }
        }
        if exhausted {
            return LanczosOutcome {
                pairs: best,
                converged: false,
                matvecs,
            };
        }
        if breakdown {
            had_breakdown = true;
            beta.push(0.0);
            chain_start = size;
            match orthogonal_start(&mut rng, &basis, n) {
                Some(next) => v = next,
                None => {
                    return LanczosOutcome {
                        pairs: best,
                        converged: false,
                        matvecs,
                    }
                }
            }
        } else {
            beta.push(b);
            v = w.iter().map(|x| x / b).collect();
        }
    }
}
