//! Monte Carlo trials, per-cell summaries and the Haar reconstruction demo.
//!
//! Trial `i` of a cell uses the seed `substream_seed(base_seed, i)`. From it
//! the spike is drawn with `Rng::new(substream_seed(seed, 0))` and the data
//! with `sample_dataset(.., substream_seed(seed, 1))`. Every cell of a sweep
//! shares the base seed, so cells see common random numbers.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::algorithms::{
    covariance_thresholding, covariance_thresholding_k0, data_driven_ct, default_rho, diagonal_thresholding,
    vanilla_pca, CTConfig, DataDrivenConfig,
};
use crate::error::{Error, Result};
use crate::linalg::{median, EigenOptions};
use crate::metrics::{abs_overlap, decomposition_diagnostics, support_metrics, vector_loss, DecompDiagnostics};
use crate::model::{block_constant, haar_forward, haar_inverse, sample_dataset, Dataset, ModelParams, SpikeKind};
use crate::rng::{substream_seed, Rng};
use crate::timing::Stopwatch;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Covariance thresholding with the true support size.
    Ct,
    /// Covariance thresholding with an over-estimate `k0` of the support size.
    CtK0,
    /// Diagonal thresholding keeping `k` coordinates.
    Dt,
    /// The data-driven pipeline (no tuning inputs besides `ν′`).
    DataDriven,
    /// Leading eigenvector of the Gram matrix.
    Pca,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Ct, Method::CtK0, Method::Dt, Method::DataDriven, Method::Pca];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ct => "ct",
            Method::CtK0 => "ct-k0",
            Method::Dt => "dt",
            Method::DataDriven => "data-driven",
            Method::Pca => "pca",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RhoMode {
    /// `default_rho(β, θ, k)`.
    Auto,
    Explicit(f64),
}

/// One `(p, n, k)` cell of an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct CellConfig {
    pub method: Method,
    pub p: usize,
    /// Half-sample size: datasets have `2n` rows.
    pub n: usize,
    pub k: usize,
    pub beta: f64,
    pub theta: f64,
    pub tau: f64,
    pub rho: RhoMode,
    /// `k0 = k0_factor · k` for [`Method::CtK0`].
    pub k0_factor: usize,
    pub nu_prime: f64,
    pub base_seed: u64,
    /// Also compute the block decomposition norms at `tau`.
    pub diagnostics: bool,
    pub eigen: EigenOptions,
    /// Precomputed unit-noise bulk edge for [`Method::DataDriven`].
    pub unit_edge: Option<f64>,
}

impl CellConfig {
    pub fn new(method: Method, p: usize, n: usize, k: usize, beta: f64) -> Self {
        CellConfig {
            method,
            p,
            n,
            k,
            beta,
            theta: 1.0,
            tau: 4.0,
            rho: RhoMode::Auto,
            k0_factor: 10,
            nu_prime: 4.0,
            base_seed: 0,
            diagnostics: false,
            eigen: EigenOptions::default(),
            unit_edge: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n == 0 {
            return Err(Error::InvalidConfig("p and n must be positive".into()));
        }
        if self.k == 0 || self.k > self.p {
            return Err(Error::InvalidConfig(format!("k = {} outside 1..={}", self.k, self.p)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!("beta must be finite and nonnegative, got {}", self.beta)));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidConfig(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        if !(self.tau >= 0.0) {
            return Err(Error::InvalidConfig(format!("tau must be nonnegative, got {}", self.tau)));
        }
        if let RhoMode::Explicit(r) = self.rho {
            if !(r >= 0.0) {
                return Err(Error::InvalidConfig(format!("rho must be nonnegative, got {r}")));
            }
        }
        if self.method == Method::CtK0 && (self.k0_factor == 0 || self.k0_factor * self.k > self.p) {
            return Err(Error::InvalidConfig(format!(
                "k0 = {} outside 1..={}",
                self.k0_factor * self.k,
                self.p
            )));
        }
        Ok(())
    }

    /// Uniform-magnitude entries when `θ = 1`, otherwise signed-uniform
    /// magnitudes in `[θ/√k, 1/√k]`.
    pub fn spike_kind(&self) -> SpikeKind {
        if self.theta >= 1.0 {
            SpikeKind::UniformMagnitude
        } else {
            SpikeKind::SignedUniform
        }
    }

    /// The cleaning threshold actually used by the CT variants.
    pub fn resolved_rho(&self) -> f64 {
        match self.rho {
            RhoMode::Auto => default_rho(&[self.beta], self.theta, &[self.k]),
            RhoMode::Explicit(r) => r,
        }
    }

    pub fn trial_seed(&self, trial_index: u64) -> u64 {
        substream_seed(self.base_seed, trial_index)
    }

    /// The model and dataset of trial `trial_index`.
    pub fn instance(&self, trial_index: u64) -> Result<(ModelParams, Dataset)> {
        let seed = self.trial_seed(trial_index);
        let mut rng = Rng::new(substream_seed(seed, 0));
        let model = ModelParams::disjoint(self.p, &[self.beta], &[self.k], self.spike_kind(), self.theta, &mut rng)?;
        let data = sample_dataset(&model, self.n, substream_seed(seed, 1));
        Ok((model, data))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    pub method: Method,
    pub p: usize,
    pub n: usize,
    pub k: usize,
    /// Exact support recovery.
    pub success: bool,
    pub fraction: f64,
    /// Sign-agnostic loss of the leading estimated component.
    pub loss: f64,
    pub wall_ms: f64,
    pub diag: Option<DecompDiagnostics>,
    /// Set when the estimator returned an error; the trial then counts as
    /// unsuccessful with fraction 0 and loss `√2`.
    pub error: Option<String>,
}

impl TrialResult {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

struct Estimate {
    support: Vec<usize>,
    leading: Option<Vec<f64>>,
}

fn estimate(cell: &CellConfig, data: &Dataset) -> Result<Estimate> {
    match cell.method {
        Method::Ct => {
            let mut cfg = CTConfig::new(cell.tau, cell.resolved_rho(), vec![cell.k], cell.theta);
            cfg.eigen = cell.eigen;
            let out = covariance_thresholding(data, &cfg)?;
            Ok(Estimate {
                support: out.support_hat,
                leading: out.eigvecs.into_iter().next(),
            })
        }
        Method::CtK0 => {
            let k0 = cell.k0_factor * cell.k;
            let out =
                covariance_thresholding_k0(data, k0, cell.theta, cell.tau, cell.resolved_rho(), 1, &cell.eigen)?;
            Ok(Estimate {
                support: out.support_hat,
                leading: out.eigvecs.into_iter().next(),
            })
        }
        Method::Dt => {
            let out = diagonal_thresholding(data, cell.k, &cell.eigen)?;
            Ok(Estimate {
                support: out.support,
                leading: Some(out.vector),
            })
        }
        Method::DataDriven => {
            let cfg = DataDrivenConfig {
                nu_prime: cell.nu_prime,
                unit_edge: cell.unit_edge,
                eigen: cell.eigen,
                ..DataDrivenConfig::default()
            };
            let out = data_driven_ct(data.x.view(), &cfg)?;
            let support = (0..data.p())
                .filter(|&i| out.components.iter().any(|v| v[i] != 0.0))
                .collect();
            Ok(Estimate {
                support,
                leading: out.components.into_iter().next(),
            })
        }
        Method::Pca => {
            let mut out = vanilla_pca(data, 1, &cell.eigen)?;
            let v = out.remove(0).vector;
            let support = (0..data.p()).filter(|&i| v[i] != 0.0).collect();
            Ok(Estimate {
                support,
                leading: Some(v),
            })
        }
    }
}

/// Runs trial `trial_index` of a cell. Estimator errors become a failed
/// record; an invalid cell is an error.
pub fn run_trial(cell: &CellConfig, trial_index: u64) -> Result<TrialResult> {
    cell.validate()?;
    let (model, data) = cell.instance(trial_index)?;
    let truth = model.union_support();
    let clock = Stopwatch::start();
    let outcome = estimate(cell, &data);
    let wall_ms = clock.elapsed_ms();
    let mut result = TrialResult {
        seed: cell.trial_seed(trial_index),
        method: cell.method,
        p: cell.p,
        n: cell.n,
        k: cell.k,
        success: false,
        fraction: 0.0,
        loss: core::f64::consts::SQRT_2,
        wall_ms,
        diag: None,
        error: None,
    };
    match outcome {
        Ok(est) => {
            let m = support_metrics(&est.support, &truth, cell.p)?;
            result.success = m.exact;
            result.fraction = m.fraction;
            if let Some(v) = est.leading {
                result.loss = vector_loss(&v, &model.spikes()[0])?;
            }
        }
        Err(e) => result.error = Some(e.to_string()),
    }
    if cell.diagnostics {
        match decomposition_diagnostics(&data, cell.tau) {
            Ok(d) => result.diag = Some(d),
            Err(e) => result.error = Some(e.to_string()),
        }
    }
    Ok(result)
}

/// A grid of cells over dimensions `ps` (with `n = p`) and ratios `k/√n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub method: Method,
    pub ps: Vec<usize>,
    pub ratios: Vec<f64>,
    pub beta: f64,
    pub theta: f64,
    pub tau: f64,
    pub rho: RhoMode,
    pub k0_factor: usize,
    pub nu_prime: f64,
    pub trials: usize,
    pub base_seed: u64,
}

/// `round(ratio · √n)`, at least 1.
pub fn support_size(ratio: f64, n: usize) -> usize {
    (libm::round(ratio * libm::sqrt(n as f64)) as usize).max(1)
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.ps.is_empty() || self.ratios.is_empty() {
            return Err(Error::InvalidConfig("the p and ratio grids must be nonempty".into()));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidConfig(format!("ratio {r} is not positive")));
        }
        for (_, cell) in self.cells() {
            cell.validate()?;
        }
        Ok(())
    }

    /// Cells ordered by `(p, ratio)` in grid order, each with its ratio.
    pub fn cells(&self) -> Vec<(f64, CellConfig)> {
        let mut out = Vec::with_capacity(self.ps.len() * self.ratios.len());
        for &p in &self.ps {
            for &ratio in &self.ratios {
                let mut cell = CellConfig::new(self.method, p, p, support_size(ratio, p), self.beta);
                cell.theta = self.theta;
                cell.tau = self.tau;
                cell.rho = self.rho;
                cell.k0_factor = self.k0_factor;
                cell.nu_prime = self.nu_prime;
                cell.base_seed = self.base_seed;
                out.push((ratio, cell));
            }
        }
        out
    }
}

/// One row of a sweep table.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub method: Method,
    pub p: usize,
    pub n: usize,
    pub k: usize,
    pub ratio: f64,
    pub beta: f64,
    pub tau: f64,
    /// Cleaning threshold, NaN for methods without one.
    pub rho: f64,
    pub trials: usize,
    pub success_rate: f64,
    /// `√(s(1 − s)/trials)`.
    pub success_se: f64,
    pub mean_fraction: f64,
    pub mean_loss: f64,
    pub failed_trials: usize,
    pub mean_wall_ms: f64,
}

pub fn summarize(cell: &CellConfig, ratio: f64, results: &[TrialResult]) -> CellSummary {
    let t = results.len().max(1) as f64;
    let s = results.iter().filter(|r| r.success).count() as f64 / t;
    CellSummary {
        method: cell.method,
        p: cell.p,
        n: cell.n,
        k: cell.k,
        ratio,
        beta: cell.beta,
        tau: if matches!(cell.method, Method::Ct | Method::CtK0) {
            cell.tau
        } else if cell.method == Method::DataDriven {
            cell.nu_prime
        } else {
            f64::NAN
        },
        rho: if matches!(cell.method, Method::Ct | Method::CtK0) {
            cell.resolved_rho()
        } else {
            f64::NAN
        },
        trials: results.len(),
        success_rate: s,
        success_se: libm::sqrt(s * (1.0 - s) / t),
        mean_fraction: results.iter().map(|r| r.fraction).sum::<f64>() / t,
        mean_loss: results.iter().map(|r| r.loss).sum::<f64>() / t,
        failed_trials: results.iter().filter(|r| r.failed()).count(),
        mean_wall_ms: results.iter().map(|r| r.wall_ms).sum::<f64>() / t,
    }
}

/// Sequential sweep; the CLI runs the same cells and trials in parallel.
pub fn sweep_phase_transition(cfg: &SweepConfig) -> Result<Vec<CellSummary>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (ratio, cell) in cfg.cells() {
        let results = (0..cfg.trials as u64)
            .map(|i| run_trial(&cell, i))
            .collect::<Result<Vec<_>>>()?;
        rows.push(summarize(&cell, ratio, &results));
    }
    Ok(rows)
}

/// How diagonal thresholding picks its support size in the demo.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DtSize {
    /// The number of nonzero Haar coefficients of the clean signal.
    Oracle,
    Fixed(usize),
    /// Keep coordinates whose sample variance exceeds
    /// `σ̂²(1 + √(2/m) · √(2 log p))`, with `σ̂²` the median sample variance
    /// and `m` the number of rows (at least one coordinate is kept).
    Universal,
}

/// Support size chosen by [`DtSize::Universal`].
pub fn universal_dt_size(data: &Dataset) -> Result<usize> {
    let x = data.x.view();
    let (m, p) = (x.rows(), x.cols());
    let mut var = vec![0.0; p];
    for i in 0..m {
        for (v, &a) in var.iter_mut().zip(x.row(i)) {
            *v += a * a;
        }
    }
    var.iter_mut().for_each(|v| *v /= m as f64);
    let level = median(&var)?;
    let cut = level * (1.0 + libm::sqrt(2.0 / m as f64) * libm::sqrt(2.0 * libm::log(p as f64)));
    Ok(var.iter().filter(|&&v| v >= cut).count().max(1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveletConfig {
    /// Signal length, a power of two.
    pub p: usize,
    /// Number of observations (even).
    pub n: usize,
    pub beta: f64,
    pub nu_prime: f64,
    /// Block boundaries of the clean signal.
    pub breaks: Vec<usize>,
    /// One level per block.
    pub levels: Vec<f64>,
    pub dt_size: DtSize,
    pub seed: u64,
    pub eigen: EigenOptions,
    pub unit_edge: Option<f64>,
}

impl WaveletConfig {
    /// Three blocks over `p` with breaks at roughly 30% and 70%.
    pub fn new(p: usize, n: usize, beta: f64, nu_prime: f64) -> Self {
        WaveletConfig {
            p,
            n,
            beta,
            nu_prime,
            breaks: vec![p * 3 / 10, p * 7 / 10],
            levels: vec![1.0, -1.5, 0.5],
            dt_size: DtSize::Oracle,
            seed: 0,
            eigen: EigenOptions::default(),
            unit_edge: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub method: Method,
    pub n: usize,
    /// Estimate in the signal domain, unit norm (zero when the method
    /// returned nothing).
    pub signal: Vec<f64>,
    /// `|⟨estimate, clean⟩|`.
    pub correlation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveletDemo {
    /// Unit-norm clean signal.
    pub clean: Vec<f64>,
    /// PCA, diagonal thresholding, data-driven CT, in that order.
    pub records: Vec<Reconstruction>,
    pub r_hat: usize,
    pub dt_k: usize,
}

/// Unit-norm block-constant signal and its Haar coefficients.
pub fn demo_signal(cfg: &WaveletConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    if cfg.p == 0 || !cfg.p.is_power_of_two() {
        return Err(Error::LengthNotPowerOfTwo(cfg.p));
    }
    if cfg.levels.len() != cfg.breaks.len() + 1 || cfg.breaks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("breaks must increase and levels must number breaks + 1".into()));
    }
    if cfg.breaks.iter().any(|&b| b == 0 || b >= cfg.p) {
        return Err(Error::InvalidConfig(format!("breaks must lie in 1..{}", cfg.p)));
    }
    let mut clean = block_constant(cfg.p, &cfg.breaks, &cfg.levels);
    let norm = libm::sqrt(clean.iter().map(|x| x * x).sum::<f64>());
    if !(norm > 0.0) {
        return Err(Error::InvalidConfig("the clean signal is identically zero".into()));
    }
    clean.iter_mut().for_each(|x| *x /= norm);
    let coeffs = haar_forward(&clean)?;
    Ok((clean, coeffs))
}

/// Spiked data in the Haar domain with the block signal as spike; PCA,
/// diagonal thresholding and data-driven CT estimates mapped back to the
/// signal domain.
pub fn wavelet_demo(cfg: &WaveletConfig) -> Result<WaveletDemo> {
    if cfg.n < 2 || cfg.n % 2 != 0 {
        return Err(Error::InvalidConfig(format!("n must be even and at least 2, got {}", cfg.n)));
    }
    let (clean, coeffs) = demo_signal(cfg)?;
    let (betas, spikes) = if cfg.beta > 0.0 {
        (vec![cfg.beta], vec![coeffs.clone()])
    } else {
        (Vec::new(), Vec::new())
    };
    let model = ModelParams::new(cfg.p, betas, spikes, None)?;
    let data = sample_dataset(&model, cfg.n / 2, cfg.seed);

    let mut records = Vec::with_capacity(3);

    let pca = vanilla_pca(&data, 1, &cfg.eigen)?.remove(0).vector;
    records.push(Reconstruction {
        method: Method::Pca,
        n: cfg.n,
        correlation: abs_overlap(&pca, &coeffs),
        signal: haar_inverse(&pca)?,
    });

    let dt_k = match cfg.dt_size {
        DtSize::Oracle => coeffs.iter().filter(|c| **c != 0.0).count(),
        DtSize::Fixed(k) => k,
        DtSize::Universal => universal_dt_size(&data)?,
    };
    let dt = diagonal_thresholding(&data, dt_k, &cfg.eigen)?.vector;
    records.push(Reconstruction {
        method: Method::Dt,
        n: cfg.n,
        correlation: abs_overlap(&dt, &coeffs),
        signal: haar_inverse(&dt)?,
    });

    let dd_cfg = DataDrivenConfig {
        nu_prime: cfg.nu_prime,
        unit_edge: cfg.unit_edge,
        eigen: cfg.eigen,
        ..DataDrivenConfig::default()
    };
    let dd = data_driven_ct(data.x.view(), &dd_cfg)?;
    let v = dd.components.first().cloned().unwrap_or_else(|| vec![0.0; cfg.p]);
    records.push(Reconstruction {
        method: Method::DataDriven,
        n: cfg.n,
        correlation: abs_overlap(&v, &coeffs),
        signal: haar_inverse(&v)?,
    });

    Ok(WaveletDemo {
        clean,
        records,
        r_hat: dd.r_hat,
        dt_k,
    })
}
