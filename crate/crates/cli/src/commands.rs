//! The four subcommands. Each returns the process exit status on success
//! paths that still need a nonzero code (estimator failures in `run`).

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use covthresh_core::algorithms::{
    covariance_thresholding, covariance_thresholding_k0, data_driven_ct, default_rho, diagonal_thresholding,
    vanilla_pca, CTConfig, DataDrivenConfig,
};
use covthresh_core::experiments::{wavelet_demo, Method, RhoMode};
use covthresh_core::linalg::EigenOptions;
use covthresh_core::metrics::{support_metrics, vector_loss};
use covthresh_core::model::Dataset;
use serde::Serialize;
use serde_json::json;

use crate::config::{Config, ConfigError};
use crate::error::{classify, CliError, EXIT_ESTIMATOR};
use crate::io::{read_dataset, read_truth, truth_path, write_dataset, write_truth};
use crate::settings::{run_methods, sweep_config, wavelet_config, CtSection, DataDrivenSection, ModelSection};
use crate::svg::{overlay_plot, phase_plot};
use crate::sweep::{run_sweep, sig6, write_table};

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::write(path, e))
}

/// Samples a dataset from `[model]` and writes it with its truth sidecar.
pub fn generate(cfg: &Config, out: &Path) -> Result<i32, CliError> {
    let data = ModelSection::from_config(cfg)?.sample()?;
    write_dataset(out, &data.x)?;
    write_truth(&truth_path(out), data.truth.as_ref().expect("sampled data carries its model"))?;
    eprintln!("wrote {} rows x {} columns to {}", data.x.rows(), data.p(), out.display());
    Ok(0)
}

/// One estimator invocation with its parameters fully resolved.
enum Plan {
    Ct(CTConfig),
    CtK0 { k0: usize, theta: f64, tau: f64, rho: f64, r: usize },
    Dt { k: usize },
    DataDriven(DataDrivenConfig),
    Pca { r: usize },
}

impl Plan {
    fn method(&self) -> Method {
        match self {
            Plan::Ct(_) => Method::Ct,
            Plan::CtK0 { .. } => Method::CtK0,
            Plan::Dt { .. } => Method::Dt,
            Plan::DataDriven(_) => Method::DataDriven,
            Plan::Pca { .. } => Method::Pca,
        }
    }

    fn params(&self) -> serde_json::Value {
        match self {
            Plan::Ct(c) => json!({ "tau": c.tau, "rho": c.rho, "k": c.ks, "theta": c.theta }),
            Plan::CtK0 { k0, theta, tau, rho, r } => json!({ "tau": tau, "rho": rho, "k0": k0, "theta": theta, "r": r }),
            Plan::Dt { k } => json!({ "k": k }),
            Plan::DataDriven(c) => json!({ "nu_prime": c.nu_prime, "edge_trials": c.edge_trials, "edge_safety": c.edge_safety }),
            Plan::Pca { r } => json!({ "r": r }),
        }
    }
}

#[derive(Serialize, Default)]
struct RunRecord {
    method: &'static str,
    p: usize,
    rows: usize,
    params: serde_json::Value,
    /// 1-based coordinates.
    #[serde(skip_serializing_if = "Option::is_none")]
    support: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fraction: Option<f64>,
    /// Sign-agnostic loss of each estimated component against the matching
    /// true spike.
    #[serde(skip_serializing_if = "Option::is_none")]
    losses: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigenvalues: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_hat: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bulk_edge: Option<f64>,
    timings_ms: BTreeMap<&'static str, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

struct Estimate {
    support: Vec<usize>,
    components: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    r_hat: Option<usize>,
    sigma_hat: Option<f64>,
    bulk_edge: Option<f64>,
    stages: Vec<(&'static str, f64)>,
}

fn nonzero_union(p: usize, components: &[Vec<f64>]) -> Vec<usize> {
    (0..p).filter(|&i| components.iter().any(|v| v[i] != 0.0)).collect()
}

fn execute(plan: &Plan, data: &Dataset, eigen: &EigenOptions) -> covthresh_core::Result<Estimate> {
    let p = data.p();
    match plan {
        Plan::Ct(cfg) => {
            let out = covariance_thresholding(data, cfg)?;
            let d = &out.diagnostics;
            Ok(Estimate {
                support: out.support_hat.clone(),
                stages: vec![
                    ("gram", d.gram_ms),
                    ("threshold", d.threshold_ms),
                    ("eigen", d.eigen_ms),
                    ("clean", d.clean_ms),
                ],
                components: out.eigvecs,
                eigenvalues: out.eigvals,
                r_hat: None,
                sigma_hat: None,
                bulk_edge: None,
            })
        }
        Plan::CtK0 { k0, theta, tau, rho, r } => {
            let out = covariance_thresholding_k0(data, *k0, *theta, *tau, *rho, *r, eigen)?;
            Ok(Estimate {
                support: out.support_hat.clone(),
                stages: Vec::new(),
                components: out.eigvecs,
                eigenvalues: out.eigvals,
                r_hat: None,
                sigma_hat: None,
                bulk_edge: None,
            })
        }
        Plan::Dt { k } => {
            let out = diagonal_thresholding(data, *k, eigen)?;
            Ok(Estimate {
                support: out.support,
                components: vec![out.vector],
                eigenvalues: vec![out.value],
                r_hat: None,
                sigma_hat: None,
                bulk_edge: None,
                stages: Vec::new(),
            })
        }
        Plan::DataDriven(cfg) => {
            let out = data_driven_ct(data.x.view(), cfg)?;
            Ok(Estimate {
                support: nonzero_union(p, &out.components),
                components: out.components,
                eigenvalues: out.eigenvalues,
                r_hat: Some(out.r_hat),
                sigma_hat: Some(out.sigma_hat),
                bulk_edge: Some(out.bulk_edge),
                stages: Vec::new(),
            })
        }
        Plan::Pca { r } => {
            let pairs = vanilla_pca(data, *r, eigen)?;
            let components: Vec<Vec<f64>> = pairs.iter().map(|e| e.vector.clone()).collect();
            Ok(Estimate {
                support: nonzero_union(p, &components),
                eigenvalues: pairs.iter().map(|e| e.value).collect(),
                components,
                r_hat: None,
                sigma_hat: None,
                bulk_edge: None,
                stages: Vec::new(),
            })
        }
    }
}

fn resolve_plans(cfg: &Config, data: &Dataset) -> Result<Vec<Plan>, CliError> {
    let model = ModelSection::from_config(cfg)?;
    let ct = CtSection::from_config(cfg, model.r)?;
    let dd = DataDrivenSection::from_config(cfg)?;
    let truth = data.truth.as_ref();
    let missing = |section: &str, key: &str| ConfigError {
        line: None,
        message: format!("missing required key `{key}` in [{section}] (no truth sidecar to fall back on)"),
    };
    let ks = || -> Result<Vec<usize>, ConfigError> {
        ct.ks
            .clone()
            .or_else(|| model.ks.clone())
            .or_else(|| truth.map(|t| t.support_sizes()))
            .ok_or_else(|| missing("model", "k"))
    };
    let betas = || -> Result<Vec<f64>, ConfigError> {
        model
            .betas
            .clone()
            .or_else(|| truth.map(|t| t.betas().to_vec()))
            .ok_or_else(|| missing("model", "beta"))
    };
    let theta = ct.theta.unwrap_or(model.theta);
    let rho = |ks: &[usize]| -> Result<f64, ConfigError> {
        match ct.rho {
            RhoMode::Explicit(r) => Ok(r),
            RhoMode::Auto => Ok(default_rho(&betas()?, theta, ks)),
        }
    };
    let r = truth.map_or(model.r, |t| t.r().max(1));
    let p = data.p();
    let mut plans = Vec::new();
    for method in run_methods(cfg)? {
        let plan = match method {
            Method::Ct => {
                let ks = ks()?;
                let c = CTConfig::new(ct.tau, rho(&ks)?, ks, theta);
                c.validate(p).map_err(CliError::Invalid)?;
                Plan::Ct(c)
            }
            Method::CtK0 => {
                let k0 = Config::require(ct.k0, "ct", "k0")?;
                let ks = ks()?;
                Plan::CtK0 {
                    k0,
                    theta,
                    tau: ct.tau,
                    rho: rho(&ks)?,
                    r: ks.len(),
                }
            }
            Method::Dt => Plan::Dt {
                k: match cfg.get::<usize>("dt", "k")? {
                    Some(k) => k,
                    None => ks()?.iter().sum(),
                },
            },
            Method::DataDriven => Plan::DataDriven(DataDrivenConfig {
                nu_prime: dd.nu_prime,
                edge_trials: dd.edge_trials,
                edge_safety: dd.edge_safety,
                ..DataDrivenConfig::default()
            }),
            Method::Pca => Plan::Pca { r },
        };
        plans.push(plan);
    }
    Ok(plans)
}

/// Loads `--data` (with its sidecar when present) or samples from `[model]`.
fn load_run_data(cfg: &Config, data_path: Option<&Path>) -> Result<Dataset, CliError> {
    let Some(path) = data_path else {
        return ModelSection::from_config(cfg)?.sample();
    };
    let x = read_dataset(path)?;
    let sidecar = truth_path(path);
    let truth = if sidecar.exists() {
        Some(read_truth(&sidecar, x.cols())?)
    } else {
        None
    };
    Dataset::new(x, None, truth).map_err(CliError::Invalid)
}

/// Runs the `[run]` methods and writes one JSON line per method to `out`.
/// Returns 3 when any estimator failed.
pub fn run(cfg: &Config, data_path: Option<&Path>, out: &mut impl Write) -> Result<i32, CliError> {
    let data = load_run_data(cfg, data_path)?;
    let plans = resolve_plans(cfg, &data)?;
    let eigen = EigenOptions::default();
    let mut status = 0;
    for plan in &plans {
        let clock = Instant::now();
        let outcome = execute(plan, &data, &eigen);
        let wall = clock.elapsed().as_secs_f64() * 1e3;
        let mut rec = RunRecord {
            method: plan.method().name(),
            p: data.p(),
            rows: data.x.rows(),
            params: plan.params(),
            ..RunRecord::default()
        };
        rec.timings_ms.insert("total", wall);
        match outcome {
            Ok(est) => {
                if let Some(truth) = &data.truth {
                    let m = support_metrics(&est.support, &truth.union_support(), data.p()).map_err(classify)?;
                    rec.exact = Some(m.exact);
                    rec.fraction = Some(m.fraction);
                    rec.losses = Some(
                        est.components
                            .iter()
                            .zip(truth.spikes())
                            .map(|(v, s)| vector_loss(v, s))
                            .collect::<Result<_, _>>()
                            .map_err(classify)?,
                    );
                }
                rec.support = Some(est.support.iter().map(|i| i + 1).collect());
                rec.eigenvalues = Some(est.eigenvalues);
                rec.r_hat = est.r_hat;
                rec.sigma_hat = est.sigma_hat;
                rec.bulk_edge = est.bulk_edge;
                rec.timings_ms.extend(est.stages);
            }
            Err(e) => {
                rec.error = Some(e.to_string());
                status = EXIT_ESTIMATOR;
            }
        }
        let line = serde_json::to_string(&rec).expect("records serialise");
        writeln!(out, "{line}").map_err(|e| CliError::write("standard output", e))?;
    }
    Ok(status)
}

/// Runs the `[sweep]` grid and writes the table (and optionally the plot).
pub fn sweep(cfg: &Config, out: &Path, svg: Option<&Path>, threads: Option<usize>) -> Result<i32, CliError> {
    let sweep = sweep_config(cfg)?;
    let rows = run_sweep(&sweep, threads)?;
    write_table(out, &rows)?;
    if let Some(path) = svg {
        write_file(path, &phase_plot(&rows))?;
    }
    let failed: usize = rows.iter().map(|r| r.failed_trials).sum();
    if failed > 0 {
        eprintln!("{failed} trials failed and were counted as unsuccessful");
    }
    Ok(0)
}

/// Writes `<method>.csv`, `<method>.svg` and `correlations.csv` into `dir`.
pub fn demo_wavelet(cfg: &Config, dir: &Path) -> Result<i32, CliError> {
    let wcfg = wavelet_config(cfg)?;
    let demo = wavelet_demo(&wcfg).map_err(classify)?;
    fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    let mut summary = String::from("method,n,correlation\n");
    for rec in &demo.records {
        let name = rec.method.name();
        let mut csv = String::from("index,clean,estimate\n");
        for (i, (c, e)) in demo.clean.iter().zip(&rec.signal).enumerate() {
            csv.push_str(&format!("{},{c},{e}\n", i + 1));
        }
        write_file(&dir.join(format!("{name}.csv")), &csv)?;
        let title = format!("{name}, n = {}, correlation {}", rec.n, sig6(rec.correlation));
        write_file(&dir.join(format!("{name}.svg")), &overlay_plot(&title, &demo.clean, &rec.signal))?;
        summary.push_str(&format!("{name},{},{}\n", rec.n, sig6(rec.correlation)));
    }
    write_file(&dir.join("correlations.csv"), &summary)?;
    eprintln!("data-driven r_hat = {}, diagonal thresholding k = {}", demo.r_hat, demo.dt_k);
    Ok(0)
}
