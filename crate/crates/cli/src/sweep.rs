//! Parallel phase-transition sweeps and their CSV table.
//!
//! Every trial derives its randomness from `(base_seed, trial_index)`, so
//! the thread count changes only the wall time. Results are collected in
//! `(cell, trial)` order.

use std::io::Write;
use std::path::Path;

use covthresh_core::algorithms::{unit_bulk_edge, DataDrivenConfig};
use covthresh_core::experiments::{run_trial, summarize, CellSummary, Method, SweepConfig, TrialResult};
use covthresh_core::rng::Rng;
use rayon::prelude::*;

use crate::error::CliError;

pub const HEADER: &str =
    "method,p,n,k,ratio,beta,tau,rho,trials,success_rate,success_se,mean_fraction,mean_loss,failed_trials";

/// Six significant digits in the shortest of fixed or scientific notation,
/// `nan` for NaN.
pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Runs every cell of `cfg` on `threads` workers (all cores when `None`).
pub fn run_sweep(cfg: &SweepConfig, threads: Option<usize>) -> Result<Vec<CellSummary>, CliError> {
    cfg.validate().map_err(CliError::Invalid)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;
    pool.install(|| sweep_in_pool(cfg))
}

fn sweep_in_pool(cfg: &SweepConfig) -> Result<Vec<CellSummary>, CliError> {
    let mut cells = cfg.cells();
    if cfg.method == Method::DataDriven {
        // The edge depends on (rows, p, ν′) only; computing it once per
        // dimension reproduces what each trial would compute itself. On
        // failure the trials estimate it and record their own errors.
        let defaults = DataDrivenConfig::default();
        let edges: Vec<Option<f64>> = cfg
            .ps
            .par_iter()
            .map(|&p| {
                let mut rng = Rng::new(defaults.edge_seed);
                unit_bulk_edge(
                    2 * p,
                    p,
                    cfg.nu_prime,
                    defaults.edge_trials,
                    defaults.edge_safety,
                    &defaults.eigen,
                    &mut rng,
                )
                .ok()
            })
            .collect();
        for (_, cell) in &mut cells {
            let idx = cfg.ps.iter().position(|&p| p == cell.p).unwrap();
            cell.unit_edge = edges[idx];
        }
    }
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..cfg.trials as u64).map(move |t| (c, t)))
        .collect();
    let results: Vec<TrialResult> = jobs
        .par_iter()
        .map(|&(c, t)| run_trial(&cells[c].1, t))
        .collect::<Result<_, _>>()
        .map_err(CliError::Invalid)?;
    Ok(cells
        .iter()
        .zip(results.chunks(cfg.trials))
        .map(|((ratio, cell), chunk)| summarize(cell, *ratio, chunk))
        .collect())
}

pub fn format_row(r: &CellSummary) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.method.name(),
        r.p,
        r.n,
        r.k,
        sig6(r.ratio),
        sig6(r.beta),
        sig6(r.tau),
        sig6(r.rho),
        r.trials,
        sig6(r.success_rate),
        sig6(r.success_se),
        sig6(r.mean_fraction),
        sig6(r.mean_loss),
        r.failed_trials
    )
}

pub fn write_table(path: &Path, rows: &[CellSummary]) -> Result<(), CliError> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format_row(r));
        out.push('\n');
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| CliError::write(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use covthresh_core::experiments::{sweep_phase_transition, RhoMode};

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.5), "0.5");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(0.000123456789), "0.000123457");
        assert_eq!(sig6(0.0000123456789), "1.23457e-5");
        assert_eq!(sig6(-2.0 / 3.0), "-0.666667");
        assert_eq!(sig6(0.9999996), "1");
        assert_eq!(sig6(f64::NAN), "nan");
    }

    #[test]
    fn parallel_sweep_matches_sequential() {
        let cfg = SweepConfig {
            method: Method::Ct,
            ps: vec![64, 100],
            ratios: vec![0.5, 1.0],
            beta: 4.0,
            theta: 1.0,
            tau: 3.0,
            rho: RhoMode::Auto,
            k0_factor: 10,
            nu_prime: 4.0,
            trials: 3,
            base_seed: 12,
        };
        let seq = sweep_phase_transition(&cfg).unwrap();
        for threads in [1, 3] {
            let par = run_sweep(&cfg, Some(threads)).unwrap();
            let a: Vec<String> = seq.iter().map(format_row).collect();
            let b: Vec<String> = par.iter().map(format_row).collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn precomputed_edge_leaves_data_driven_rows_unchanged() {
        let cfg = SweepConfig {
            method: Method::DataDriven,
            ps: vec![48],
            ratios: vec![0.6],
            beta: 5.0,
            theta: 1.0,
            tau: 4.0,
            rho: RhoMode::Auto,
            k0_factor: 10,
            nu_prime: 4.0,
            trials: 2,
            base_seed: 1,
        };
        let seq = sweep_phase_transition(&cfg).unwrap();
        let par = run_sweep(&cfg, Some(2)).unwrap();
        assert_eq!(format_row(&seq[0]), format_row(&par[0]));
    }
}
