//! Estimators: covariance thresholding (with known or over-estimated
//! sparsity), diagonal thresholding, plain PCA and the data-driven pipeline.
//!
//! Covariance thresholding splits the `2n` rows in two. The first half gives
//! `Σ̂ = G − I`, whose entries (diagonal included) are soft-thresholded at
//! `τ/√n`; the top `r` eigenvectors of the result are cut at
//! `θ/(2√k_q)` and the second half scores every coordinate by
//! `|(Σ̂′ s_q)_i|`. `Σ̂′` is never formed: `Σ̂′ s = X₂ᵀ(X₂ s)/n − s`.
//!
//! The two baselines use all `2n` rows.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{
    gram_centered, mad, soft_threshold_matrix, top_r_eigenpairs, EigenOptions, EigenPair,
    GramOperator, Matrix, MatrixView, SparseSymmetric, GAUSSIAN_MAD_SCALE,
};
use crate::model::Dataset;
use crate::rng::Rng;
use crate::timing::Stopwatch;

#[derive(Clone, Debug, PartialEq)]
pub struct CTConfig {
    /// Rescaled threshold; entries are soft-thresholded at `tau / √n`.
    pub tau: f64,
    /// Cleaning threshold on the second-half scores.
    pub rho: f64,
    pub r: usize,
    /// Support sizes `k_q`, one per spike.
    pub ks: Vec<usize>,
    pub theta: f64,
    pub eigen: EigenOptions,
}

impl CTConfig {
    pub fn new(tau: f64, rho: f64, ks: Vec<usize>, theta: f64) -> Self {
        CTConfig {
            tau,
            rho,
            r: ks.len(),
            ks,
            theta,
            eigen: EigenOptions::default(),
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if !(self.tau >= 0.0) {
            return Err(Error::InvalidConfig(format!("tau must be nonnegative, got {}", self.tau)));
        }
        if !(self.rho >= 0.0) {
            return Err(Error::InvalidConfig(format!("rho must be nonnegative, got {}", self.rho)));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidConfig(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        if self.r == 0 {
            return Err(Error::InvalidConfig("at least one spike is required".into()));
        }
        if self.r > p {
            return Err(Error::InvalidConfig(format!("r = {} exceeds p = {p}", self.r)));
        }
        if self.ks.len() != self.r {
            return Err(Error::InvalidConfig(format!(
                "{} support sizes for r = {}",
                self.ks.len(),
                self.r
            )));
        }
        if let Some(&k) = self.ks.iter().find(|&&k| k == 0 || k > p) {
            return Err(Error::InvalidConfig(format!("support size {k} outside 1..={p}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CTDiagnostics {
    /// Stored nonzeros of the thresholded matrix (both triangles and the
    /// diagonal).
    pub nnz: usize,
    pub residuals: Vec<f64>,
    pub gram_ms: f64,
    pub threshold_ms: f64,
    pub eigen_ms: f64,
    pub clean_ms: f64,
    /// For the over-estimated sparsity variant with a known model: whether
    /// `Σ k_q ≤ k0 ≤ 20 Σ k_q` held.
    pub k0_in_regime: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CTResult {
    /// Estimated support `Q̂`, ascending.
    pub support_hat: Vec<usize>,
    pub eigvecs: Vec<Vec<f64>>,
    pub eigvals: Vec<f64>,
    /// The cut eigenvectors `s_q`.
    pub cleaned: Vec<Vec<f64>>,
    /// `max_q |(Σ̂′ s_q)_i|` for every coordinate.
    pub scores: Vec<f64>,
    pub diagnostics: CTDiagnostics,
}

/// `min_q β_q θ / (4 √k_q)`.
pub fn default_rho(betas: &[f64], theta: f64, ks: &[usize]) -> f64 {
    betas
        .iter()
        .zip(ks)
        .map(|(&b, &k)| b * theta / (4.0 * libm::sqrt(k as f64)))
        .fold(f64::INFINITY, f64::min)
}

/// `η(G − I)` with `G` from `x`, thresholded at `level`.
pub fn thresholded_covariance(x: MatrixView<'_>, level: f64) -> Result<SparseSymmetric> {
    let sigma = gram_centered(x, true, 1.0)?;
    Ok(soft_threshold_matrix(&sigma, level, false))
}

/// Algorithm 1 with per-spike cleaning cutoffs `θ/(2√k_q)`.
pub fn covariance_thresholding(data: &Dataset, cfg: &CTConfig) -> Result<CTResult> {
    cfg.validate(data.p())?;
    let cutoffs: Vec<f64> = cfg
        .ks
        .iter()
        .map(|&k| cfg.theta / (2.0 * libm::sqrt(k as f64)))
        .collect();
    run_ct(data, cfg.tau, cfg.rho, cfg.r, &cutoffs, false, &cfg.eigen)
}

/// The variant for an over-estimate `k0 ≥ Σ k_q`: every eigenvector is cut
/// at `|v̂_i| > θ/(2√k0)` and `Q̂` is the union of the per-spike score sets.
pub fn covariance_thresholding_k0(
    data: &Dataset,
    k0: usize,
    theta: f64,
    tau: f64,
    rho: f64,
    r: usize,
    eigen: &EigenOptions,
) -> Result<CTResult> {
    let p = data.p();
    if k0 == 0 || k0 > p {
        return Err(Error::InvalidConfig(format!("k0 = {k0} outside 1..={p}")));
    }
    let mut check = CTConfig::new(tau, rho, vec![k0; r], theta);
    check.eigen = *eigen;
    check.validate(p)?;
    let cutoffs = vec![theta / (2.0 * libm::sqrt(k0 as f64)); r];
    let mut out = run_ct(data, tau, rho, r, &cutoffs, true, eigen)?;
    out.diagnostics.k0_in_regime = data.truth.as_ref().map(|t| {
        let total: usize = t.support_sizes().iter().sum();
        total <= k0 && k0 <= 20 * total
    });
    Ok(out)
}

fn run_ct(
    data: &Dataset,
    tau: f64,
    rho: f64,
    r: usize,
    cutoffs: &[f64],
    strict: bool,
    eigen: &EigenOptions,
) -> Result<CTResult> {
    let n = data.n;
    let p = data.p();
    let mut diagnostics = CTDiagnostics::default();

    let clock = Stopwatch::start();
    let sigma = gram_centered(data.first_half(), true, 1.0)?;
    diagnostics.gram_ms = clock.elapsed_ms();

    let clock = Stopwatch::start();
    let eta = soft_threshold_matrix(&sigma, tau / libm::sqrt(n as f64), false);
    drop(sigma);
    diagnostics.nnz = eta.nnz();
    diagnostics.threshold_ms = clock.elapsed_ms();

    let clock = Stopwatch::start();
    let pairs = top_r_eigenpairs(&eta, r, eigen)?;
    diagnostics.eigen_ms = clock.elapsed_ms();
    diagnostics.residuals = pairs.iter().map(|e| e.residual).collect();

    let clock = Stopwatch::start();
    let second = data.second_half();
    let mut scores = vec![0.0f64; p];
    let mut cleaned = Vec::with_capacity(r);
    let mut t = vec![0.0; n];
    let mut y = vec![0.0; p];
    for (pair, &cut) in pairs.iter().zip(cutoffs) {
        let s: Vec<f64> = pair
            .vector
            .iter()
            .map(|&v| {
                let a = libm::fabs(v);
                let keep = if strict { a > cut } else { a >= cut };
                if keep {
                    v
                } else {
                    0.0
                }
            })
            .collect();
        second_half_apply(second, &s, &mut t, &mut y);
        for (sc, &yi) in scores.iter_mut().zip(&y) {
            *sc = sc.max(libm::fabs(yi));
        }
        cleaned.push(s);
    }
    let support_hat = (0..p).filter(|&i| scores[i] >= rho).collect();
    diagnostics.clean_ms = clock.elapsed_ms();

    Ok(CTResult {
        support_hat,
        eigvals: pairs.iter().map(|e| e.value).collect(),
        eigvecs: pairs.into_iter().map(|e| e.vector).collect(),
        cleaned,
        scores,
        diagnostics,
    })
}

/// `y = (X₂ᵀ X₂ / n − I) s`.
fn second_half_apply(x2: MatrixView<'_>, s: &[f64], t: &mut [f64], y: &mut [f64]) {
    x2.mul_vec(s, t);
    x2.tmul_vec(t, y);
    let inv = 1.0 / x2.rows() as f64;
    for (yi, &si) in y.iter_mut().zip(s) {
        *yi = *yi * inv - si;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DTResult {
    /// The `k` selected coordinates, ascending.
    pub support: Vec<usize>,
    /// Principal eigenvector of `G_JJ`, zero-padded to length `p`.
    pub vector: Vec<f64>,
    pub value: f64,
}

/// Diagonal thresholding over all `2n` rows: keep the `k` largest `G_ii`
/// (lowest index wins ties) and take the leading eigenvector of `G_JJ`.
pub fn diagonal_thresholding(data: &Dataset, k: usize, eigen: &EigenOptions) -> Result<DTResult> {
    let x = data.x.view();
    let (m, p) = (x.rows(), x.cols());
    if k == 0 || k > p {
        return Err(Error::InvalidConfig(format!("k = {k} outside 1..={p}")));
    }
    let mut diag = vec![0.0; p];
    for i in 0..m {
        for (d, &v) in diag.iter_mut().zip(x.row(i)) {
            *d += v * v;
        }
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| diag[b].total_cmp(&diag[a]).then(a.cmp(&b)));
    let mut support: Vec<usize> = order[..k].to_vec();
    support.sort_unstable();

    let sub: Vec<f64> = (0..m).flat_map(|i| support.iter().map(move |&j| x.row(i)[j])).collect();
    let sub = Matrix::new(m, k, sub)?;
    let g = gram_centered(sub.view(), false, 0.0)?;
    let top = top_r_eigenpairs(&g, 1, eigen)?.remove(0);
    let mut vector = vec![0.0; p];
    for (&j, &v) in support.iter().zip(&top.vector) {
        vector[j] = v;
    }
    Ok(DTResult {
        support,
        vector,
        value: top.value,
    })
}

/// Top-`r` eigenpairs of `G` over all `2n` rows, without forming `G`.
pub fn vanilla_pca(data: &Dataset, r: usize, eigen: &EigenOptions) -> Result<Vec<EigenPair>> {
    let p = data.p();
    if r == 0 || r > p {
        return Err(Error::InvalidConfig(format!("r = {r} outside 1..={p}")));
    }
    let op = GramOperator::new(data.x.view(), 0.0);
    top_r_eigenpairs(&op, r, eigen)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataDrivenConfig {
    /// Threshold multiplier `ν′`: the standardised covariance is
    /// soft-thresholded at `ν′/√m`, and eigenvector entries below
    /// `ν′ σ̂_ε` are zeroed.
    pub nu_prime: f64,
    /// Pure-noise replicates for the bulk edge.
    pub edge_trials: usize,
    pub edge_seed: u64,
    pub edge_safety: f64,
    /// Bulk edge for unit-variance noise at this `(m, p, ν′)`, if already
    /// known. Skips the resampling step.
    pub unit_edge: Option<f64>,
    pub eigen: EigenOptions,
}

impl Default for DataDrivenConfig {
    fn default() -> Self {
        DataDrivenConfig {
            nu_prime: 4.0,
            edge_trials: 5,
            edge_seed: 0x5EED_ED6E,
            edge_safety: 1.05,
            unit_edge: None,
            eigen: EigenOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataDrivenResult {
    pub mu_hat: Vec<f64>,
    pub sigma_hat: f64,
    pub r_hat: usize,
    /// Denoised unit components, one per eigenvalue above the edge.
    pub components: Vec<Vec<f64>>,
    /// Eigenvalues of the thresholded covariance above the edge.
    pub eigenvalues: Vec<f64>,
    pub bulk_edge: f64,
    pub nnz: usize,
}

/// The fully data-driven pipeline for an `m × p` sample.
///
/// Columns are centred by their means, the noise level is estimated as
/// `σ̂ = MAD(X̄)/Φ⁻¹(3/4)` over all entries, and the work is done on
/// `Y = X̄/σ̂`. Soft-thresholding `YᵀY/m − I` at `ν′/√m` is the same as
/// thresholding `X̄ᵀX̄/m − σ̂²I` at `ν′σ̂²/√m` and dividing by `σ̂²`, so every
/// output except `σ̂`, the eigenvalues and the edge is invariant under
/// rescaling the data. Reported eigenvalues and the edge are in the units of
/// the data.
///
/// `r̂` counts eigenvalues above the bulk edge. Each of those eigenvectors is
/// hard-thresholded at `ν′ · MAD(v̂)/Φ⁻¹(3/4)` and renormalised; if that would
/// erase every entry the raw eigenvector is kept.
pub fn data_driven_ct(x: MatrixView<'_>, cfg: &DataDrivenConfig) -> Result<DataDrivenResult> {
    let (m, p) = (x.rows(), x.cols());
    if m < 2 || p < 2 {
        return Err(Error::DimensionMismatch(format!(
            "the data-driven pipeline needs at least 2 rows and 2 columns, got {m}x{p}"
        )));
    }
    if !(cfg.nu_prime >= 0.0) {
        return Err(Error::InvalidConfig(format!("nu_prime must be nonnegative, got {}", cfg.nu_prime)));
    }
    let mut mu_hat = vec![0.0; p];
    for i in 0..m {
        for (mu, &v) in mu_hat.iter_mut().zip(x.row(i)) {
            *mu += v;
        }
    }
    mu_hat.iter_mut().for_each(|mu| *mu /= m as f64);
    let mut centred: Vec<f64> = (0..m)
        .flat_map(|i| x.row(i).iter().zip(&mu_hat).map(|(v, mu)| v - mu))
        .collect();
    let sigma_hat = mad(&centred)? / GAUSSIAN_MAD_SCALE;
    if !(sigma_hat > 0.0) || !sigma_hat.is_finite() {
        return Err(Error::DegenerateInput(format!("estimated noise level is {sigma_hat}")));
    }
    centred.iter_mut().for_each(|v| *v /= sigma_hat);
    let y = Matrix::new(m, p, centred)?;

    let unit_edge = match cfg.unit_edge {
        Some(e) => e,
        None => {
            let mut rng = Rng::new(cfg.edge_seed);
            unit_bulk_edge(m, p, cfg.nu_prime, cfg.edge_trials, cfg.edge_safety, &cfg.eigen, &mut rng)?
        }
    };

    let eta = soft_threshold_matrix(&gram_centered(y.view(), true, 1.0)?, cfg.nu_prime / libm::sqrt(m as f64), false);
    let above = eigenpairs_above(&eta, unit_edge, &cfg.eigen)?;

    let scale2 = sigma_hat * sigma_hat;
    let mut components = Vec::with_capacity(above.len());
    for pair in &above {
        components.push(denoise(&pair.vector, cfg.nu_prime)?);
    }
    Ok(DataDrivenResult {
        mu_hat,
        sigma_hat,
        r_hat: above.len(),
        components,
        eigenvalues: above.iter().map(|e| e.value * scale2).collect(),
        bulk_edge: unit_edge * scale2,
        nnz: eta.nnz(),
    })
}

/// All eigenpairs with value above `edge`, fetched in growing batches.
fn eigenpairs_above(eta: &SparseSymmetric, edge: f64, eigen: &EigenOptions) -> Result<Vec<EigenPair>> {
    let p = eta.dim();
    let mut batch = 4.min(p);
    loop {
        let pairs = top_r_eigenpairs(eta, batch, eigen)?;
        let count = pairs.iter().take_while(|e| e.value > edge).count();
        if count < batch || batch == p {
            return Ok(pairs.into_iter().take(count).collect());
        }
        batch = (2 * batch).min(p);
    }
}

fn denoise(v: &[f64], nu_prime: f64) -> Result<Vec<f64>> {
    let cut = nu_prime * mad(v)? / GAUSSIAN_MAD_SCALE;
    let mut out: Vec<f64> = v.iter().map(|&x| if libm::fabs(x) >= cut { x } else { 0.0 }).collect();
    let norm = libm::sqrt(out.iter().map(|x| x * x).sum::<f64>());
    if norm > 0.0 {
        out.iter_mut().for_each(|x| *x /= norm);
        Ok(out)
    } else {
        Ok(v.to_vec())
    }
}

/// Upper edge of the spectrum of `η(ZᵀZ/m − σ̂²I)` for pure noise
/// `Z ~ N(0, σ̂²)^{m×p}`, thresholded at `tau_rescaled · σ̂² / √m`.
///
/// `tau_rescaled` is the multiplier `ν′` of the noise variance. The
/// replicates are drawn at unit variance and the result is multiplied by
/// `σ̂²`, which has the same distribution and makes the scaling exact. The
/// return value is the largest top eigenvalue over `trials` replicates
/// (floored at zero) times the safety factor 1.05.
pub fn estimate_bulk_edge(
    m: usize,
    p: usize,
    sigma_hat: f64,
    tau_rescaled: f64,
    trials: usize,
    rng: &mut Rng,
) -> Result<f64> {
    let unit = unit_bulk_edge(m, p, tau_rescaled, trials, 1.05, &EigenOptions::default(), rng)?;
    Ok(unit * sigma_hat * sigma_hat)
}

/// [`estimate_bulk_edge`] at unit noise level with a chosen safety factor.
pub fn unit_bulk_edge(
    m: usize,
    p: usize,
    tau_rescaled: f64,
    trials: usize,
    safety: f64,
    eigen: &EigenOptions,
    rng: &mut Rng,
) -> Result<f64> {
    if trials == 0 || m == 0 || p == 0 {
        return Err(Error::InvalidConfig(format!(
            "bulk edge needs trials, m, p >= 1 (got {trials}, {m}, {p})"
        )));
    }
    let level = tau_rescaled / libm::sqrt(m as f64);
    let mut edge: f64 = 0.0;
    let mut buf = vec![0.0; m * p];
    for _ in 0..trials {
        rng.fill_gaussian(&mut buf);
        let z = Matrix::new(m, p, core::mem::take(&mut buf))?;
        let eta = soft_threshold_matrix(&gram_centered(z.view(), true, 1.0)?, level, false);
        buf = z.into_data();
        let top = top_r_eigenpairs(&eta, 1, eigen)?[0].value;
        edge = edge.max(top);
    }
    Ok(edge * safety)
}
