use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Simulate,
    Estimate,
    ExactCheck,
    LimitCheck,
    MgfCheck,
    HurstGammaCheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Estimate => "estimate",
            Experiment::ExactCheck => "exact-check",
            Experiment::LimitCheck => "limit-check",
            Experiment::MgfCheck => "mgf-check",
            Experiment::HurstGammaCheck => "hurst-gamma-check",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown experiment {s:?}")))
    }
}

/// Pass/fail thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub ks_p_min: f64,
    pub spearman_max: f64,
    pub mgf_se_mult: f64,
    /// |median (S_T+βJ_T)/w_T − α/γ|
    pub drift_tol: f64,
    pub hurst_tol: f64,
    pub gamma_rel_tol: f64,
    pub failure_rate_max: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            ks_p_min: 1e-3,
            spearman_max: 0.1,
            mgf_se_mult: 3.0,
            drift_tol: 0.05,
            hurst_tol: 0.05,
            gamma_rel_tol: 0.05,
            failure_rate_max: 0.01,
        }
    }
}

fn default_mgf_points() -> Vec<[f64; 2]> {
    vec![[0.1, -0.05], [-0.1, -0.1], [0.2, 0.0], [0.0, -0.2], [-0.2, 0.05], [0.15, 0.02]]
}

fn default_mgf2_points() -> Vec<[f64; 4]> {
    vec![[0.05, 0.0, 0.05, -0.1]]
}

fn default_hurst_list() -> Vec<f64> {
    vec![0.6, 0.7, 0.8]
}

fn default_gamma_list() -> Vec<f64> {
    vec![0.5, 2.0]
}

fn default_bootstrap() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: ModelParams,
    #[serde(rename = "T_list")]
    pub t_list: Vec<f64>,
    pub n_grid: usize,
    pub replications: usize,
    pub master_seed: u64,
    pub workers: usize,
    pub output_dir: String,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default = "default_mgf_points")]
    pub mgf_points: Vec<[f64; 2]>,
    #[serde(default = "default_mgf2_points")]
    pub mgf2_points: Vec<[f64; 4]>,
    #[serde(default = "default_hurst_list")]
    pub hurst_list: Vec<f64>,
    #[serde(default = "default_gamma_list")]
    pub gamma_list: Vec<f64>,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, params: ModelParams, t_list: Vec<f64>, n_grid: usize, replications: usize) -> Self {
        Self {
            experiment,
            params,
            t_list,
            n_grid,
            replications,
            master_seed: 20240601,
            workers: 1,
            output_dir: "out".into(),
            thresholds: Thresholds::default(),
            mgf_points: default_mgf_points(),
            mgf2_points: default_mgf2_points(),
            hurst_list: default_hurst_list(),
            gamma_list: default_gamma_list(),
            bootstrap: default_bootstrap(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.params.validate()?;
        if self.t_list.is_empty() {
            return bad("T_list is empty".into());
        }
        if let Some(t) = self.t_list.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return bad(format!("T_list entry {t} is not positive"));
        }
        if !self.n_grid.is_power_of_two() || self.n_grid < 4 {
            return bad(format!("n_grid must be a power of two >= 4, got {}", self.n_grid));
        }
        if self.replications == 0 {
            return bad("replications must be >= 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be >= 1".into());
        }
        if matches!(self.experiment, Experiment::LimitCheck | Experiment::MgfCheck) && !(self.params.beta < 0.0) {
            return bad(format!("{} needs beta < 0", self.experiment.name()));
        }
        if self.experiment == Experiment::HurstGammaCheck {
            if let Some(h) = self.hurst_list.iter().find(|h| !(**h > 0.5 && **h < 1.0)) {
                return bad(format!("hurst_list entry {h} outside (1/2,1)"));
            }
            if let Some(g) = self.gamma_list.iter().find(|g| !(**g > 0.0)) {
                return bad(format!("gamma_list entry {g} not positive"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "experiment": "exact-check",
        "params": {"alpha": 1.0, "beta": -0.5, "gamma": 1.0, "hurst": 0.7, "x0": 0.3},
        "T_list": [5.0],
        "n_grid": 1024,
        "replications": 100,
        "master_seed": 7,
        "workers": 2,
        "output_dir": "out"
    }"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_json(SAMPLE).unwrap();
        assert_eq!(c.experiment, Experiment::ExactCheck);
        assert_eq!(c.t_list, vec![5.0]);
        assert_eq!(c.thresholds, Thresholds::default());
        assert_eq!(c.mgf_points.len(), 6);
        let back = serde_json::to_string(&c).unwrap();
        assert!(back.contains("\"T_list\""));
        assert_eq!(ExperimentConfig::from_json(&back).unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        for (from, to) in [
            ("\"n_grid\": 1024", "\"n_grid\": 1000"),
            ("\"replications\": 100", "\"replications\": 0"),
            ("[5.0]", "[]"),
            ("\"workers\": 2", "\"workers\": 0"),
            ("exact-check", "bogus"),
        ] {
            assert!(ExperimentConfig::from_json(&SAMPLE.replace(from, to)).is_err(), "{to}");
        }
        let lim = SAMPLE.replace("exact-check", "limit-check").replace("-0.5", "0.5");
        assert!(matches!(ExperimentConfig::from_json(&lim), Err(Error::Config(_))));
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in [
            Experiment::Simulate,
            Experiment::Estimate,
            Experiment::ExactCheck,
            Experiment::LimitCheck,
            Experiment::MgfCheck,
            Experiment::HurstGammaCheck,
        ] {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
    }
}
