//! Typed views of the configuration sections.

use covthresh_core::experiments::{DtSize, Method, RhoMode, SweepConfig, WaveletConfig};
use covthresh_core::model::{sample_dataset, Dataset, ModelParams, SpikeKind};
use covthresh_core::rng::{substream_seed, Rng};

use crate::config::{Config, ConfigError};

/// A list key that may also be a single value repeated `r` times.
fn per_spike<T: Clone + std::str::FromStr>(
    cfg: &Config,
    section: &str,
    key: &str,
    r: usize,
) -> Result<Option<Vec<T>>, ConfigError> {
    match cfg.list::<T>(section, key)? {
        Some(v) if v.len() == 1 => Ok(Some(vec![v[0].clone(); r])),
        Some(v) if v.len() == r => Ok(Some(v)),
        Some(v) => Err(cfg.invalid(section, key, format!("lists {} values for r = {r}", v.len()))),
        None => Ok(None),
    }
}

fn rho_mode(cfg: &Config, section: &str) -> Result<RhoMode, ConfigError> {
    match cfg.str(section, "rho") {
        None | Some("auto") => Ok(RhoMode::Auto),
        Some(_) => Ok(RhoMode::Explicit(cfg.f64(section, "rho")?.unwrap())),
    }
}

/// `[model]`: the spiked model, all keys optional until used.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSection {
    pub p: Option<usize>,
    /// Half-sample size; generated data has `2n` rows.
    pub n: Option<usize>,
    pub r: usize,
    pub ks: Option<Vec<usize>>,
    pub betas: Option<Vec<f64>>,
    pub theta: f64,
    pub kind: Option<SpikeKind>,
    pub seed: u64,
}

impl ModelSection {
    pub fn from_config(cfg: &Config) -> Result<Self, ConfigError> {
        let r = cfg.get::<usize>("model", "r")?.unwrap_or(1);
        if r == 0 {
            return Err(cfg.invalid("model", "r", "must be at least 1"));
        }
        let betas = per_spike::<f64>(cfg, "model", "beta", r)?;
        if let Some(b) = &betas {
            if b.iter().any(|x| !x.is_finite()) {
                return Err(cfg.invalid("model", "beta", "must be finite"));
            }
        }
        let n = cfg.get::<usize>("model", "n")?;
        if n == Some(0) {
            return Err(cfg.invalid("model", "n", "must be positive"));
        }
        let kind = match cfg.str("model", "kind") {
            None => None,
            Some("uniform") => Some(SpikeKind::UniformMagnitude),
            Some("signed") => Some(SpikeKind::SignedUniform),
            Some(other) => return Err(cfg.invalid("model", "kind", format!("must be `uniform` or `signed`, got `{other}`"))),
        };
        Ok(ModelSection {
            p: cfg.get("model", "p")?,
            n,
            r,
            ks: per_spike(cfg, "model", "k", r)?,
            betas,
            theta: cfg.f64("model", "theta")?.unwrap_or(1.0),
            kind,
            seed: cfg.get("model", "seed")?.unwrap_or(0),
        })
    }

    pub fn ks(&self) -> Result<&[usize], ConfigError> {
        Config::require(self.ks.as_deref(), "model", "k")
    }

    pub fn betas(&self) -> Result<&[f64], ConfigError> {
        Config::require(self.betas.as_deref(), "model", "beta")
    }

    /// Uniform magnitudes when `θ = 1`, signed-uniform otherwise.
    pub fn spike_kind(&self) -> SpikeKind {
        self.kind.clone().unwrap_or(if self.theta >= 1.0 {
            SpikeKind::UniformMagnitude
        } else {
            SpikeKind::SignedUniform
        })
    }

    /// Draws the model and `2n` rows, with the same seed split as a
    /// Monte Carlo trial: spikes from substream 0, data from substream 1.
    pub fn sample(&self) -> Result<Dataset, crate::error::CliError> {
        let p = Config::require(self.p, "model", "p")?;
        let n = Config::require(self.n, "model", "n")?;
        let mut rng = Rng::new(substream_seed(self.seed, 0));
        let model = ModelParams::disjoint(p, self.betas()?, self.ks()?, self.spike_kind(), self.theta, &mut rng)
            .map_err(crate::error::CliError::Invalid)?;
        let mut data = sample_dataset(&model, n, substream_seed(self.seed, 1));
        data.seed = Some(self.seed);
        Ok(data)
    }
}

/// `[ct]`: thresholds for covariance thresholding.
#[derive(Clone, Debug, PartialEq)]
pub struct CtSection {
    pub tau: f64,
    pub rho: RhoMode,
    pub ks: Option<Vec<usize>>,
    pub k0: Option<usize>,
    pub theta: Option<f64>,
}

impl CtSection {
    pub fn from_config(cfg: &Config, r: usize) -> Result<Self, ConfigError> {
        Ok(CtSection {
            tau: cfg.f64("ct", "tau")?.unwrap_or(4.0),
            rho: rho_mode(cfg, "ct")?,
            ks: per_spike(cfg, "ct", "k", r)?,
            k0: cfg.get("ct", "k0")?,
            theta: cfg.f64("ct", "theta")?,
        })
    }
}

/// `[data-driven]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataDrivenSection {
    pub nu_prime: f64,
    pub edge_trials: usize,
    pub edge_safety: f64,
}

impl DataDrivenSection {
    pub fn from_config(cfg: &Config) -> Result<Self, ConfigError> {
        Ok(DataDrivenSection {
            nu_prime: cfg.f64("data-driven", "nu_prime")?.unwrap_or(4.0),
            edge_trials: cfg.get("data-driven", "edge_trials")?.unwrap_or(5),
            edge_safety: cfg.f64("data-driven", "edge_safety")?.unwrap_or(1.05),
        })
    }
}

pub fn run_methods(cfg: &Config) -> Result<Vec<Method>, ConfigError> {
    let Some(names) = cfg.list::<String>("run", "methods")? else {
        return Ok(vec![Method::Ct]);
    };
    names
        .iter()
        .map(|s| Method::parse(s).ok_or_else(|| cfg.invalid("run", "methods", format!("names unknown method `{s}`"))))
        .collect()
}

/// `[sweep]`: grid over `p` (with `n = p`) and `k/√n`.
pub fn sweep_config(cfg: &Config) -> Result<SweepConfig, ConfigError> {
    let s = "sweep";
    let method = match cfg.str(s, "method") {
        None => Method::Ct,
        Some(name) => Method::parse(name).ok_or_else(|| cfg.invalid(s, "method", format!("names unknown method `{name}`")))?,
    };
    let out = SweepConfig {
        method,
        ps: cfg.list(s, "ps")?.unwrap_or_else(|| vec![625, 1250, 2500]),
        ratios: Config::require(cfg.f64_list(s, "ratios")?, s, "ratios")?,
        beta: Config::require(cfg.f64(s, "beta")?, s, "beta")?,
        theta: cfg.f64(s, "theta")?.unwrap_or(1.0),
        tau: cfg.f64(s, "tau")?.unwrap_or(4.0),
        rho: rho_mode(cfg, s)?,
        k0_factor: cfg.get(s, "k0_factor")?.unwrap_or(10),
        nu_prime: cfg.f64(s, "nu_prime")?.unwrap_or(4.0),
        trials: cfg.get(s, "trials")?.unwrap_or(100),
        base_seed: cfg.get(s, "seed")?.unwrap_or(0),
    };
    if out.method == Method::Pca {
        return Err(cfg.invalid(s, "method", "must be one of ct, ct-k0, dt, data-driven"));
    }
    Ok(out)
}

/// `[wavelet]`: the Haar reconstruction demo, with defaults
/// `p = n = 1024`, `β = 1.4`, `ν′ = 4.5`.
pub fn wavelet_config(cfg: &Config) -> Result<WaveletConfig, ConfigError> {
    let s = "wavelet";
    let p = cfg.get(s, "p")?.unwrap_or(1024);
    let mut out = WaveletConfig::new(
        p,
        cfg.get(s, "n")?.unwrap_or(1024),
        cfg.f64(s, "beta")?.unwrap_or(1.4),
        cfg.f64(s, "nu_prime")?.unwrap_or(4.5),
    );
    out.seed = cfg.get(s, "seed")?.unwrap_or(0);
    if let Some(b) = cfg.list(s, "breaks")? {
        out.breaks = b;
    }
    if let Some(l) = cfg.f64_list(s, "levels")? {
        out.levels = l;
    }
    out.dt_size = match cfg.str(s, "dt_size") {
        None | Some("oracle") => DtSize::Oracle,
        Some("universal") => DtSize::Universal,
        Some(_) => DtSize::Fixed(
            cfg.get::<usize>(s, "dt_size")
                .map_err(|_| cfg.invalid(s, "dt_size", "must be `oracle`, `universal` or a count"))?
                .unwrap(),
        ),
    };
    Ok(out)
}
