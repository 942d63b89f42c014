use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::error::Result;
use crate::estimators::{estimate_gamma_with, estimate_hurst, mle_alpha, mle_beta, mle_joint, mle_mu_kappa};
use crate::fbm::{write_path_csv, FbmGenerator, SampleGrid};
use crate::limits::{
    alpha_law, law_i_limit, law_j_limit, law_j_limit_from_s, law_mu_kappa_limit, law_s_limit, ratio_law,
    special_case_ratio, Law, NormalLaw,
};
use crate::mgf::{mgf1_log, mgf2_log};
use crate::model::{exact_from_driver, ModelParams};
use crate::transforms::{constants, martingale_m, write_stats_csv, StatsPlan, SufficientStats};

use super::stats::{ks_test, log_mean_exp_bootstrap, median, mix_seed, spearman, KS_MIN_N};
use super::{out_path, replicate, ExperimentConfig, ReportRow, TestReport};

fn e16(x: f64) -> String {
    format!("{x:.16e}")
}

struct Horizon {
    gen: FbmGenerator,
    plan: StatsPlan,
    /// γ = 1 plan for quadratic-variation recovery
    unit: StatsPlan,
}

impl Horizon {
    fn new(p: &ModelParams, t: f64, n: usize) -> Result<Self> {
        let grid = SampleGrid::new(t, n)?;
        Ok(Self {
            gen: FbmGenerator::new(p.hurst, grid)?,
            plan: StatsPlan::new(p.hurst, p.gamma, grid)?,
            unit: StatsPlan::new(p.hurst, 1.0, grid)?,
        })
    }

    fn path(&self, p: &ModelParams, seed: u64) -> Result<Vec<f64>> {
        Ok(exact_from_driver(p, &self.gen.sample(seed), seed)?.values)
    }
}

#[derive(Debug, Clone, Copy)]
struct Est {
    st: SufficientStats,
    alpha_hat: f64,
    beta_hat: f64,
    alpha_tilde: f64,
    beta_tilde: f64,
    mu_hat: f64,
    kappa_hat: f64,
    gamma_hat: f64,
    hurst_hat: f64,
}

fn estimate_path(h: &Horizon, p: &ModelParams, values: &[f64]) -> Result<Est> {
    let st = h.plan.stats(values)?;
    let joint = mle_joint(&st, p.gamma)?;
    let mk = mle_mu_kappa(&st, p.gamma)?;
    Ok(Est {
        st,
        alpha_hat: joint.alpha_hat,
        beta_hat: joint.beta_hat,
        alpha_tilde: mle_alpha(&st, p.gamma, p.beta),
        beta_tilde: mle_beta(&st, p.gamma, p.alpha)?,
        mu_hat: mk.alpha_hat,
        kappa_hat: mk.beta_hat,
        gamma_hat: estimate_gamma_with(&h.unit, values)?,
        hurst_hat: estimate_hurst(values)?,
    })
}

fn note_failures(report: &mut TestReport, t: f64, failed: &[(usize, String)]) {
    report.failed_replications += failed.len();
    for (i, msg) in failed.iter().take(5) {
        report.failure_messages.push(format!("T={t} replication {i}: {msg}"));
    }
}

fn write_stats(dir: &Path, report: &mut TestReport, t: f64, rows: &[(usize, u64, SufficientStats)]) -> Result<()> {
    let name = format!("stats_T{t}.csv");
    write_stats_csv(BufWriter::new(File::create(out_path(dir, &name))?), rows)?;
    report.outputs.push(name);
    Ok(())
}

fn run_estimates(
    cfg: &ExperimentConfig,
    pool: &rayon::ThreadPool,
    dir: &Path,
    report: &mut TestReport,
) -> Result<Vec<(f64, Vec<(usize, u64, Est)>)>> {
    let p = cfg.params;
    let mut out = Vec::new();
    for &t in &cfg.t_list {
        let h = Horizon::new(&p, t, cfg.n_grid)?;
        let reps = replicate(pool, cfg, |_, seed| estimate_path(&h, &p, &h.path(&p, seed)?))?;
        note_failures(report, t, &reps.failed);
        let rows: Vec<_> = reps.ok.iter().map(|(i, s, e)| (*i, *s, e.st)).collect();
        write_stats(dir, report, t, &rows)?;
        out.push((t, reps.ok));
    }
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(out_path(dir, "estimates.csv"))?));
    w.write_record([
        "replication", "T", "alpha_hat", "beta_hat", "alpha_tilde", "beta_tilde", "mu_hat", "kappa_hat", "gamma_hat", "H_hat",
    ])?;
    for (t, reps) in &out {
        for (i, _, e) in reps {
            w.write_record([
                i.to_string(),
                t.to_string(),
                e16(e.alpha_hat),
                e16(e.beta_hat),
                e16(e.alpha_tilde),
                e16(e.beta_tilde),
                e16(e.mu_hat),
                e16(e.kappa_hat),
                e16(e.gamma_hat),
                e16(e.hurst_hat),
            ])?;
        }
    }
    w.flush()?;
    report.outputs.push("estimates.csv".into());
    Ok(out)
}

fn ks_or_none(x: &[f64], law: &impl Law) -> Option<(f64, f64)> {
    if x.len() < KS_MIN_N {
        return None;
    }
    ks_test(x, |v| law.cdf(v)).ok()
}

fn write_ks_csv(dir: &Path, report: &mut TestReport, name: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(out_path(dir, name))?));
    w.write_record(["T", "statistic", "ks_stat", "ks_p", "n_reps"])?;
    for r in report.rows.iter().filter(|r| r.ks_stat.is_some() || (r.value.is_none() && r.t.is_some())) {
        w.write_record([
            r.t.map(|t| t.to_string()).unwrap_or_default(),
            r.statistic.clone(),
            r.ks_stat.map(e16).unwrap_or_default(),
            r.ks_p.map(e16).unwrap_or_default(),
            r.n_reps.to_string(),
        ])?;
    }
    w.flush()?;
    report.outputs.push(name.into());
    Ok(())
}

fn describe(law: &NormalLaw) -> String {
    format!("N({:.6e}, {:.6e})", law.mean, law.variance)
}

pub(super) fn simulate(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, dir: &Path, report: &mut TestReport) -> Result<()> {
    let p = cfg.params;
    for &t in &cfg.t_list {
        let h = Horizon::new(&p, t, cfg.n_grid)?;
        let reps = replicate(pool, cfg, |_, seed| {
            let v = h.path(&p, seed)?;
            Ok((h.plan.stats(&v)?, v))
        })?;
        note_failures(report, t, &reps.failed);
        if let Some((i, _, (_, v))) = reps.ok.first() {
            let name = format!("path_T{t}_rep{i}.csv");
            write_path_csv(BufWriter::new(File::create(out_path(dir, &name))?), &h.plan.grid.times(), v)?;
            report.outputs.push(name);
        }
        let rows: Vec<_> = reps.ok.iter().map(|(i, s, (st, _))| (*i, *s, *st)).collect();
        write_stats(dir, report, t, &rows)?;
    }
    Ok(())
}

pub(super) fn estimate(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, dir: &Path, report: &mut TestReport) -> Result<()> {
    let p = cfg.params;
    for (t, reps) in run_estimates(cfg, pool, dir, report)? {
        let n = reps.len();
        let errs: Vec<f64> = reps.iter().map(|(_, _, e)| (e.alpha_hat - p.alpha).abs()).collect();
        report.rows.push(ReportRow::check(Some(t), "alpha_hat_median_abs_error", median(&errs), f64::NAN, true, n, "reported".into(), false));
        let errs: Vec<f64> = reps.iter().map(|(_, _, e)| (e.beta_hat - p.beta).abs()).collect();
        report.rows.push(ReportRow::check(Some(t), "beta_hat_median_abs_error", median(&errs), f64::NAN, true, n, "reported".into(), false));
    }
    Ok(())
}

pub(super) fn exact_check(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, dir: &Path, report: &mut TestReport) -> Result<()> {
    let p = cfg.params;
    let kc = constants(p.hurst, p.gamma)?;
    let std = NormalLaw::new(0.0, 1.0)?;
    let alaw = alpha_law(&p)?;
    let p_min = cfg.thresholds.ks_p_min;
    for (t, reps) in run_estimates(cfg, pool, dir, report)? {
        let n = reps.len();
        let m: Vec<f64> = reps
            .iter()
            .map(|(_, _, e)| kc.lambda.sqrt() * t.powf(p.hurst - 1.0) * martingale_m(&e.st, &p))
            .collect();
        report.rows.push(ReportRow::ks(t, "M_T", ks_or_none(&m, &std), n, describe(&std), true, p_min));
        let a: Vec<f64> = reps.iter().map(|(_, _, e)| t.powf(1.0 - p.hurst) * (e.alpha_tilde - p.alpha)).collect();
        report.rows.push(ReportRow::ks(t, "alpha_tilde", ks_or_none(&a, &alaw), n, describe(&alaw), true, p_min));
    }
    write_ks_csv(dir, report, "exact_check.csv")
}

pub(super) fn limit_check(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, dir: &Path, report: &mut TestReport) -> Result<()> {
    let p = cfg.params;
    let th = cfg.thresholds;
    let h = p.hurst;
    let t_max = cfg.t_list.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let alaw = alpha_law(&p)?;
    let rlaw = ratio_law(&p)?;
    let (nu, _) = law_mu_kappa_limit(&p)?;
    let slaw = law_s_limit(&p)?;
    let ilaw = law_i_limit(&p)?;
    let jlaw = law_j_limit(&p)?;
    let jalt = law_j_limit_from_s(&p)?;
    let special = (p.x0 - p.alpha / p.beta).abs() < 1e-12;
    let sp = special_case_ratio(h)?;
    let ratio_desc = format!("eta/zeta, zeta ~ {}", describe(&rlaw.zeta));
    let mut medians = Vec::new();
    for (t, reps) in run_estimates(cfg, pool, dir, report)? {
        let gate = t == t_max;
        let n = reps.len();
        let col = |f: &dyn Fn(&Est) -> f64| reps.iter().map(|(_, _, e)| f(e)).collect::<Vec<f64>>();
        let up = t.powf(1.0 - h);
        let eb = (-p.beta * t).exp();
        let sn = t.powf(h - 0.5) * (p.beta * t).exp();

        let a = col(&|e| up * (e.alpha_hat - p.alpha));
        let b = col(&|e| eb * (e.beta_hat - p.beta));
        report.rows.push(ReportRow::ks(t, "alpha_hat", ks_or_none(&a, &alaw), n, describe(&alaw), gate, th.ks_p_min));
        report.rows.push(ReportRow::ks(t, "beta_hat", ks_or_none(&b, &rlaw), n, ratio_desc.clone(), gate, th.ks_p_min));
        if n >= KS_MIN_N {
            let rho = spearman(&a, &b)?;
            report.rows.push(ReportRow::check(Some(t), "spearman_alpha_beta", rho, th.spearman_max, rho.abs() < th.spearman_max, n, "0".into(), gate));
        }
        let at = col(&|e| up * (e.alpha_tilde - p.alpha));
        let bt = col(&|e| eb * (e.beta_tilde - p.beta));
        report.rows.push(ReportRow::ks(t, "alpha_tilde", ks_or_none(&at, &alaw), n, describe(&alaw), gate, th.ks_p_min));
        report.rows.push(ReportRow::ks(t, "beta_tilde", ks_or_none(&bt, &rlaw), n, ratio_desc.clone(), gate, th.ks_p_min));
        let mu = col(&|e| up * (e.mu_hat - p.alpha / p.beta));
        let ka = col(&|e| eb * (e.kappa_hat - p.beta));
        report.rows.push(ReportRow::ks(t, "mu_hat", ks_or_none(&mu, &nu), n, describe(&nu), false, th.ks_p_min));
        report.rows.push(ReportRow::ks(t, "kappa_hat", ks_or_none(&ka, &rlaw), n, ratio_desc.clone(), false, th.ks_p_min));
        if special {
            let r = col(&|e| eb * (e.beta_hat - p.beta) / (2.0 * p.beta));
            let desc = format!("X*sqrt(sin(pi*{h}))/Y");
            report.rows.push(ReportRow::ks(t, "beta_hat_special", ks_or_none(&r, &sp), n, desc, gate, th.ks_p_min));
        }

        let s = col(&|e| sn * e.st.s_t);
        let i = col(&|e| (2.0 * p.beta * t).exp() * e.st.i_t);
        let j = col(&|e| sn * e.st.j_t);
        report.rows.push(ReportRow::ks(t, "S_T", ks_or_none(&s, &slaw), n, describe(&slaw), false, th.ks_p_min));
        let idesc = format!("{} * zeta^2, zeta ~ {}", ilaw.factor, describe(&ilaw.zeta));
        report.rows.push(ReportRow::ks(t, "I_T", ks_or_none(&i, &ilaw), n, idesc, gate, th.ks_p_min));
        report.rows.push(ReportRow::ks(t, "J_T", ks_or_none(&j, &jlaw), n, describe(&jlaw), false, th.ks_p_min));
        report.rows.push(ReportRow::ks(t, "J_T_from_S", ks_or_none(&j, &jalt), n, describe(&jalt), false, th.ks_p_min));

        if n > 0 {
            let drift = median(&col(&|e| (e.st.s_t + p.beta * e.st.j_t) / e.st.w_t)) - p.alpha / p.gamma;
            let ok = drift.abs() < th.drift_tol;
            report.rows.push(ReportRow::check(Some(t), "drift_ratio", drift, th.drift_tol, ok, n, format!("{}", p.alpha / p.gamma), gate));
        }
        medians.push((
            t,
            median(&col(&|e| (e.alpha_tilde - p.alpha).abs())),
            median(&col(&|e| (e.beta_tilde - p.beta).abs())),
            n,
        ));
    }
    if medians.len() >= 2 {
        medians.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = medians.iter().map(|m| m.3).min().unwrap_or(0);
        for (name, k) in [("alpha_tilde_median_abs_monotone", 1), ("beta_tilde_median_abs_monotone", 2)] {
            let vals: Vec<f64> = medians.iter().map(|m| if k == 1 { m.1 } else { m.2 }).collect();
            let violations = vals.windows(2).filter(|w| !(w[1] < w[0])).count();
            report.rows.push(ReportRow::check(None, name, violations as f64, 0.0, violations == 0, n, "decreasing in T".into(), true));
        }
    }
    write_ks_csv(dir, report, "limit_check.csv")
}

pub(super) fn mgf_check(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, dir: &Path, report: &mut TestReport) -> Result<()> {
    let p = cfg.params;
    let t = cfg.t_list[0];
    let mult = cfg.thresholds.mgf_se_mult;
    let h = Horizon::new(&p, t, cfg.n_grid)?;
    let reps = replicate(pool, cfg, |_, seed| h.plan.stats(&h.path(&p, seed)?))?;
    note_failures(report, t, &reps.failed);
    let stats: Vec<SufficientStats> = reps.ok.iter().map(|r| r.2).collect();
    write_stats(dir, report, t, &reps.ok.iter().map(|(i, s, st)| (*i, *s, *st)).collect::<Vec<_>>())?;
    let n = stats.len();
    let gate = n >= KS_MIN_N;
    let boot_seed = |k: usize| mix_seed(cfg.master_seed ^ 0xB007_5742_u64, k as u64);

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(out_path(dir, "mgf_check.csv"))?));
    w.write_record(["xi1", "xi2", "log_m1_closed", "log_m1_mc", "se"])?;
    for (k, [x1, x2]) in cfg.mgf_points.iter().copied().enumerate() {
        let v: Vec<f64> = stats.iter().map(|s| x1 * s.s_t + x2 * s.i_t).collect();
        let (mc, se) = log_mean_exp_bootstrap(&v, cfg.bootstrap, boot_seed(k));
        let closed = mgf1_log(x1, x2, &p, t).unwrap_or(f64::NAN);
        let gap = (closed - mc).abs();
        w.write_record([x1.to_string(), x2.to_string(), e16(closed), e16(mc), e16(se)])?;
        let name = format!("log_m1({x1},{x2})");
        report.rows.push(ReportRow::check(Some(t), &name, gap / se, mult, gap <= mult * se, n, e16(closed), gate));
    }
    w.flush()?;
    report.outputs.push("mgf_check.csv".into());

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(out_path(dir, "mgf2_check.csv"))?));
    w.write_record(["theta1", "theta2", "theta3", "theta4", "log_m2_closed", "log_m2_mc", "se"])?;
    for (k, th) in cfg.mgf2_points.iter().copied().enumerate() {
        let v: Vec<f64> = stats
            .iter()
            .map(|s| th[0] * s.s_t + th[1] * s.i_t + th[2] * s.j_t + th[3] * s.k_t)
            .collect();
        let (mc, se) = log_mean_exp_bootstrap(&v, cfg.bootstrap, boot_seed(1000 + k));
        let closed = mgf2_log(th, &p, t).unwrap_or(f64::NAN);
        let gap = (closed - mc).abs();
        let mut rec: Vec<String> = th.iter().map(|x| x.to_string()).collect();
        rec.extend([e16(closed), e16(mc), e16(se)]);
        w.write_record(&rec)?;
        let name = format!("log_m2({},{},{},{})", th[0], th[1], th[2], th[3]);
        report.rows.push(ReportRow::check(Some(t), &name, gap / se, mult, gap <= mult * se, n, e16(closed), gate));
    }
    w.flush()?;
    report.outputs.push("mgf2_check.csv".into());
    Ok(())
}

pub(super) fn hurst_gamma_check(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, dir: &Path, report: &mut TestReport) -> Result<()> {
    let base = cfg.params;
    let t = cfg.t_list[0];
    let th = cfg.thresholds;
    let mut settings: Vec<(ModelParams, bool)> = cfg
        .hurst_list
        .iter()
        .map(|&h| (ModelParams { hurst: h, ..base }, true))
        .collect();
    settings.extend(cfg.gamma_list.iter().map(|&g| (ModelParams { gamma: g, ..base }, false)));

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(out_path(dir, "recovery.csv"))?));
    w.write_record(["replication", "seed", "hurst", "gamma", "H_hat", "gamma_hat"])?;
    for (p, is_hurst) in settings {
        let hz = Horizon::new(&p, t, cfg.n_grid)?;
        let reps = replicate(pool, cfg, |_, seed| {
            let v = hz.path(&p, seed)?;
            Ok((estimate_hurst(&v)?, estimate_gamma_with(&hz.unit, &v)?))
        })?;
        note_failures(report, t, &reps.failed);
        for (i, seed, (hh, gh)) in &reps.ok {
            w.write_record([i.to_string(), seed.to_string(), p.hurst.to_string(), p.gamma.to_string(), e16(*hh), e16(*gh)])?;
        }
        let n = reps.ok.len();
        let gate = n >= 1;
        if is_hurst {
            let err = median(&reps.ok.iter().map(|r| r.2 .0).collect::<Vec<_>>()) - p.hurst;
            let name = format!("H_hat(H={})", p.hurst);
            report.rows.push(ReportRow::check(Some(t), &name, err, th.hurst_tol, err.abs() < th.hurst_tol, n, p.hurst.to_string(), gate));
        } else {
            let err = median(&reps.ok.iter().map(|r| r.2 .1).collect::<Vec<_>>()) / p.gamma - 1.0;
            let name = format!("gamma_hat(gamma={})", p.gamma);
            report.rows.push(ReportRow::check(Some(t), &name, err, th.gamma_rel_tol, err.abs() < th.gamma_rel_tol, n, p.gamma.to_string(), gate));
        }
    }
    w.flush()?;
    report.outputs.push("recovery.csv".into());
    Ok(())
}
