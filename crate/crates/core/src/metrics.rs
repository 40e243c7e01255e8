//! Support recovery scores, the sign-agnostic loss and the block
//! decomposition of the thresholded covariance.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{
    gram_centered, soft_threshold_matrix, spectral_norm, DenseSymmetric, LowRankUpdate, SparseSymmetric,
};
use crate::model::{Dataset, ModelParams};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportMetrics {
    pub exact: bool,
    /// `|Q̂ ∩ Q| / |Q|`; 1 when both sets are empty, 0 when only `Q` is.
    pub fraction: f64,
    pub symdiff: usize,
    pub false_pos: usize,
    pub false_neg: usize,
}

/// Compares an estimated index set with the true one. Duplicates are
/// ignored.
pub fn support_metrics(estimated: &[usize], truth: &[usize], p: usize) -> Result<SupportMetrics> {
    let mut est = vec![false; p];
    let mut tru = vec![false; p];
    for (set, mask) in [(estimated, &mut est), (truth, &mut tru)] {
        for &i in set {
            if i >= p {
                return Err(Error::IndexOutOfRange { index: i, dim: p });
            }
            mask[i] = true;
        }
    }
    let (mut both, mut false_pos, mut false_neg) = (0usize, 0usize, 0usize);
    for (&e, &t) in est.iter().zip(&tru) {
        match (e, t) {
            (true, true) => both += 1,
            (true, false) => false_pos += 1,
            (false, true) => false_neg += 1,
            (false, false) => {}
        }
    }
    let size = both + false_neg;
    let fraction = if size > 0 {
        both as f64 / size as f64
    } else if false_pos == 0 {
        1.0
    } else {
        0.0
    };
    Ok(SupportMetrics {
        exact: false_pos + false_neg == 0,
        fraction,
        symdiff: false_pos + false_neg,
        false_pos,
        false_neg,
    })
}

/// `min(‖v̂ − v‖, ‖v̂ + v‖) = √(2 − 2|⟨v̂, v⟩|)`.
pub fn vector_loss(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "vectors of length {} and {}",
            estimate.len(),
            truth.len()
        )));
    }
    for v in [estimate, truth] {
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::NotUnitNorm(norm));
        }
    }
    let ip: f64 = estimate.iter().zip(truth).map(|(a, b)| a * b).sum();
    Ok(libm::sqrt((2.0 - 2.0 * libm::fabs(ip)).max(0.0)))
}

/// `|⟨a, b⟩|`, the overlap used as "correlation" for unit vectors.
pub fn abs_overlap(a: &[f64], b: &[f64]) -> f64 {
    libm::fabs(a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
}

/// Spectral norms of the four blocks of the thresholded covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompDiagnostics {
    /// `‖S − Σ_q β_q v_q v_qᵀ‖`.
    pub norm_s_minus_signal: f64,
    pub norm_n: f64,
    pub norm_r1: f64,
    pub norm_r2: f64,
}

/// `η(Σ̂)` split by entry position. With `Q = ∪_q Q_q`:
///
/// * `s`: entries in some `Q_q × Q_q`;
/// * `n`: off-diagonal entries in `Qᶜ × Qᶜ`;
/// * `r2`: diagonal entries outside `Q`;
/// * `r1`: everything else.
///
/// The four parts are disjoint and sum to `η(Σ̂)` entry by entry.
#[derive(Clone, Debug, PartialEq)]
pub struct Blocks {
    pub s: SparseSymmetric,
    pub n: SparseSymmetric,
    pub r1: SparseSymmetric,
    pub r2: SparseSymmetric,
}

/// Splits `η(sigma)` at `level` according to the supports of `truth`.
pub fn decompose(sigma: &DenseSymmetric, level: f64, truth: &ModelParams) -> Result<Blocks> {
    let p = sigma.dim();
    if truth.p() != p {
        return Err(Error::DimensionMismatch(alloc::format!(
            "model dimension {} vs matrix dimension {p}",
            truth.p()
        )));
    }
    let eta = soft_threshold_matrix(sigma, level, false);
    // bit q of member[i] is set when i ∈ Q_q
    let words = truth.r().div_ceil(64).max(1);
    let mut member = vec![0u64; p * words];
    for q in 0..truth.r() {
        for i in truth.support(q) {
            member[i * words + q / 64] |= 1 << (q % 64);
        }
    }
    let shares = |i: usize, j: usize| (0..words).any(|w| member[i * words + w] & member[j * words + w] != 0);
    let in_union = |i: usize| (0..words).any(|w| member[i * words + w] != 0);

    let mut diag_s = vec![0.0; p];
    let mut diag_r2 = vec![0.0; p];
    for (i, &d) in eta.diagonal().iter().enumerate() {
        if in_union(i) {
            diag_s[i] = d;
        } else {
            diag_r2[i] = d;
        }
    }
    let (mut es, mut en, mut er1) = (Vec::new(), Vec::new(), Vec::new());
    for (i, j, v) in eta.upper_entries() {
        if shares(i, j) {
            es.push((i, j, v));
        } else if !in_union(i) && !in_union(j) {
            en.push((i, j, v));
        } else {
            er1.push((i, j, v));
        }
    }
    Ok(Blocks {
        s: SparseSymmetric::from_entries(p, diag_s, &es),
        n: SparseSymmetric::from_entries(p, vec![0.0; p], &en),
        r1: SparseSymmetric::from_entries(p, vec![0.0; p], &er1),
        r2: SparseSymmetric::from_entries(p, diag_r2, &[]),
    })
}

/// Block norms for `η(Σ̂)` from the first half of a synthetic dataset,
/// thresholded at `tau / √n`.
pub fn decomposition_diagnostics(data: &Dataset, tau: f64) -> Result<DecompDiagnostics> {
    let truth = data.truth.as_ref().ok_or(Error::MissingTruth)?;
    let sigma = gram_centered(data.first_half(), true, 1.0)?;
    decomposition_from_covariance(&sigma, data.n, truth, tau)
}

/// As [`decomposition_diagnostics`], reusing an already computed `Σ̂` from
/// `n` observations (useful when scanning several thresholds).
pub fn decomposition_from_covariance(
    sigma: &DenseSymmetric,
    n: usize,
    truth: &ModelParams,
    tau: f64,
) -> Result<DecompDiagnostics> {
    let blocks = decompose(sigma, tau / libm::sqrt(n as f64), truth)?;
    let tol = 1e-9;
    let signal = LowRankUpdate {
        base: &blocks.s,
        terms: truth
            .betas()
            .iter()
            .zip(truth.spikes())
            .map(|(&b, v)| (-b, v.as_slice()))
            .collect(),
    };
    Ok(DecompDiagnostics {
        norm_s_minus_signal: spectral_norm(&signal, tol)?,
        norm_n: spectral_norm(&blocks.n, tol)?,
        norm_r1: spectral_norm(&blocks.r1, tol)?,
        norm_r2: blocks.r2.diagonal().iter().fold(0.0, |m, &d| m.max(libm::fabs(d))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_examples() {
        let m = support_metrics(&[1, 2, 3], &[1, 2, 3], 5).unwrap();
        assert!(m.exact && m.fraction == 1.0 && m.symdiff == 0);
        let m = support_metrics(&[], &[1, 2], 5).unwrap();
        assert_eq!((m.fraction, m.false_neg), (0.0, 2));
        let m = support_metrics(&[1, 2, 4], &[1, 2, 3], 5).unwrap();
        assert!((m.fraction - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.symdiff, 2);
        assert_eq!(support_metrics(&[], &[], 3).unwrap().fraction, 1.0);
        assert_eq!(support_metrics(&[0], &[], 3).unwrap().fraction, 0.0);
        assert!(matches!(
            support_metrics(&[7], &[], 3),
            Err(Error::IndexOutOfRange { index: 7, dim: 3 })
        ));
    }

    #[test]
    fn loss_examples() {
        let v = [0.6, 0.8];
        assert_eq!(vector_loss(&v, &v).unwrap(), 0.0);
        assert_eq!(vector_loss(&[-0.6, -0.8], &v).unwrap(), 0.0);
        assert!((vector_loss(&[0.8, -0.6], &v).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(vector_loss(&[1.0, 1.0], &v), Err(Error::NotUnitNorm(_))));
    }

    #[test]
    fn missing_truth() {
        let d = Dataset::new(crate::linalg::Matrix::zeros(4, 3), None, None).unwrap();
        assert_eq!(decomposition_diagnostics(&d, 1.0), Err(Error::MissingTruth));
    }

    #[test]
    fn empty_supports_have_no_signal_block() {
        let sigma = DenseSymmetric::from_fn(4, |i, j| if i == j { 2.0 } else { 0.5 });
        let b = decompose(&sigma, 0.1, &ModelParams::null(4)).unwrap();
        assert_eq!(b.s.nnz(), 0);
        assert_eq!(b.r1.nnz(), 0);
        assert_eq!(b.n.nnz(), 12);
        assert_eq!(b.r2.diagonal(), &[1.9; 4]);
    }
}
