//! Monte Carlo experiment runner: configuration, seeded parallel replications,
//! goodness-of-fit checks, CSV and JSON reports.

pub mod config;
mod experiments;
pub mod stats;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{Experiment, ExperimentConfig, Thresholds};
pub use stats::{ks_test, mix_seed, spearman};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub statistic: String,
    pub ks_stat: Option<f64>,
    pub ks_p: Option<f64>,
    /// value of a non-KS check (median, correlation, MGF gap)
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub n_reps: usize,
    /// target law or reference description
    pub target: String,
    /// counts toward the overall verdict
    pub gating: bool,
    pub passed: Option<bool>,
}

impl ReportRow {
    fn ks(t: f64, statistic: &str, ks: Option<(f64, f64)>, n: usize, target: String, gating: bool, p_min: f64) -> Self {
        Self {
            t: Some(t),
            statistic: statistic.into(),
            ks_stat: ks.map(|k| k.0),
            ks_p: ks.map(|k| k.1),
            value: None,
            threshold: Some(p_min),
            n_reps: n,
            target,
            gating,
            passed: ks.map(|k| k.1 > p_min),
        }
    }

    fn check(t: Option<f64>, statistic: &str, value: f64, threshold: f64, passed: bool, n: usize, target: String, gating: bool) -> Self {
        Self {
            t,
            statistic: statistic.into(),
            ks_stat: None,
            ks_p: None,
            value: Some(value),
            threshold: Some(threshold),
            n_reps: n,
            target,
            gating,
            passed: Some(passed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub experiment: String,
    pub master_seed: u64,
    pub replications: usize,
    /// "pass", "fail" or "insufficient-n"
    pub status: String,
    pub passed: bool,
    pub failed_replications: usize,
    pub failure_messages: Vec<String>,
    pub thresholds: Thresholds,
    pub rows: Vec<ReportRow>,
    pub outputs: Vec<String>,
}

impl TestReport {
    fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            experiment: cfg.experiment.name().into(),
            master_seed: cfg.master_seed,
            replications: cfg.replications,
            status: String::new(),
            passed: false,
            failed_replications: 0,
            failure_messages: Vec::new(),
            thresholds: cfg.thresholds,
            rows: Vec::new(),
            outputs: Vec::new(),
        }
    }

    fn finish(&mut self) {
        if self.replications < stats::KS_MIN_N {
            self.status = "insufficient-n".into();
            self.passed = true;
            return;
        }
        self.passed = self.rows.iter().filter(|r| r.gating).all(|r| r.passed == Some(true));
        self.status = if self.passed { "pass" } else { "fail" }.into();
    }

    pub fn failed_checks(&self) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.gating && r.passed == Some(false)).collect()
    }
}

pub(crate) struct Replicated<T> {
    pub ok: Vec<(usize, u64, T)>,
    pub failed: Vec<(usize, String)>,
}

/// Runs `f(i, seed_i)` for every replication on `pool`, preserving replication order.
pub(crate) fn replicate<T, F>(pool: &rayon::ThreadPool, cfg: &ExperimentConfig, f: F) -> Result<Replicated<T>>
where
    T: Send,
    F: Fn(usize, u64) -> Result<T> + Sync,
{
    let n = cfg.replications;
    let results: Vec<(usize, u64, Result<T>)> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let seed = mix_seed(cfg.master_seed, i as u64);
                (i, seed, f(i, seed))
            })
            .collect()
    });
    let mut ok = Vec::with_capacity(n);
    let mut failed = Vec::new();
    for (i, seed, r) in results {
        match r {
            Ok(v) => ok.push((i, seed, v)),
            Err(e) => failed.push((i, e.to_string())),
        }
    }
    if failed.len() as f64 > cfg.thresholds.failure_rate_max * n as f64 {
        return Err(Error::Aborted { failed: failed.len(), total: n });
    }
    Ok(Replicated { ok, failed })
}

pub(crate) fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

/// Runs the configured experiment, writing CSVs and `report.json` to `output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<TestReport> {
    cfg.validate()?;
    let dir = PathBuf::from(&cfg.output_dir);
    fs::create_dir_all(&dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let mut report = TestReport::new(cfg);
    match cfg.experiment {
        Experiment::Simulate => experiments::simulate(cfg, &pool, &dir, &mut report)?,
        Experiment::Estimate => experiments::estimate(cfg, &pool, &dir, &mut report)?,
        Experiment::ExactCheck => experiments::exact_check(cfg, &pool, &dir, &mut report)?,
        Experiment::LimitCheck => experiments::limit_check(cfg, &pool, &dir, &mut report)?,
        Experiment::MgfCheck => experiments::mgf_check(cfg, &pool, &dir, &mut report)?,
        Experiment::HurstGammaCheck => experiments::hurst_gamma_check(cfg, &pool, &dir, &mut report)?,
    }
    report.finish();
    report.outputs.push("report.json".into());
    fs::write(out_path(&dir, "report.json"), serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}
