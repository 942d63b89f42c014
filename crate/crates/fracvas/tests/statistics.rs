mod common;

use fracvas::estimators::{estimate_gamma, estimate_hurst, loglik, mle_alpha, mle_beta, mle_joint, mle_mu_kappa};
use fracvas::fbm::{FbmGenerator, SampleGrid};
use fracvas::harness::ks_test;
use fracvas::limits::{Law, NormalLaw};
use fracvas::mgf::{mgf1_log, mgf2_log};
use fracvas::model::{exact_from_driver, simulate_exact, ModelParams};
use fracvas::transforms::{constants, martingale_m, reconstruct_x, StatsPlan, SufficientStats};

fn stats_sample(p: &ModelParams, t: f64, n: usize, reps: u64, base: u64) -> Vec<SufficientStats> {
    let grid = SampleGrid::new(t, n).unwrap();
    let gen = FbmGenerator::new(p.hurst, grid).unwrap();
    let plan = StatsPlan::new(p.hurst, p.gamma, grid).unwrap();
    (0..reps)
        .map(|r| {
            let x = exact_from_driver(p, &gen.sample(base + r), base + r).unwrap();
            plan.stats(&x.values).unwrap()
        })
        .collect()
}

#[test]
fn reconstruct_inverts_s() {
    let p = common::desk();
    let grid = SampleGrid::new(2.0, 1 << 14).unwrap();
    let x = simulate_exact(&p, grid, 11).unwrap();
    let plan = StatsPlan::new(p.hurst, p.gamma, grid).unwrap();
    let s = plan.s_panel(&x.values).unwrap();
    let (times, back) = reconstruct_x(&s, grid, &p, 1024).unwrap();
    assert_eq!(times.len(), 17);
    for (k, v) in back.iter().enumerate() {
        let orig = x.values[k * 1024];
        assert!((v - orig).abs() <= 0.02, "t={}: {v} vs {orig}", times[k]);
    }
}

#[test]
fn martingale_is_standard_normal() {
    let p = common::desk();
    let t = 2.0;
    let kc = constants(p.hurst, p.gamma).unwrap();
    let sample = stats_sample(&p, t, 512, 400, 500);
    let m: Vec<f64> = sample.iter().map(|st| martingale_m(st, &p) / kc.w(t).sqrt()).collect();
    let (_, pv) = ks_test(&m, |x| NormalLaw::new(0.0, 1.0).unwrap().cdf(x)).unwrap();
    assert!(pv > 1e-3, "{pv}");
    for st in &sample {
        assert!((st.w_t - kc.w(t)).abs() < 1e-12 * kc.w(t));
        assert!(st.k_t > 0.0 && st.horizon == t);
    }
}

#[test]
fn estimators_maximize_likelihood() {
    let p = common::desk();
    let st = stats_sample(&p, 6.0, 1024, 1, 3)[0];
    let e = mle_joint(&st, p.gamma).unwrap();
    let best = loglik(e.alpha_hat, e.beta_hat, &st, p.gamma);
    for (da, db) in [(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-4), (0.0, -1e-4), (1e-3, 1e-4)] {
        assert!(loglik(e.alpha_hat + da, e.beta_hat + db, &st, p.gamma) < best);
    }
    let a = mle_alpha(&st, p.gamma, p.beta);
    let b = mle_beta(&st, p.gamma, p.alpha).unwrap();
    let alpha_side = loglik(a, p.beta, &st, p.gamma);
    assert!(loglik(a + 1e-3, p.beta, &st, p.gamma) < alpha_side);
    assert!(loglik(a - 1e-3, p.beta, &st, p.gamma) < alpha_side);
    let beta_side = loglik(p.alpha, b, &st, p.gamma);
    assert!(loglik(p.alpha, b + 1e-4, &st, p.gamma) < beta_side);
    let mk = mle_mu_kappa(&st, p.gamma).unwrap();
    assert!((mk.beta_hat - e.beta_hat).abs() < 1e-12 * e.beta_hat.abs());
    assert!((mk.alpha_hat - e.alpha_hat / e.beta_hat).abs() < 1e-10);
}

#[test]
fn beta_is_consistent_at_rate_e_beta_t() {
    let p = common::desk();
    let mut errs = Vec::new();
    for t in [4.0, 8.0] {
        let sample = stats_sample(&p, t, 1024, 60, 900);
        let mut v: Vec<f64> = sample.iter().map(|st| (mle_joint(st, p.gamma).unwrap().beta_hat - p.beta).abs()).collect();
        v.sort_by(f64::total_cmp);
        errs.push(v[v.len() / 2]);
    }
    assert!(errs[1] < errs[0] * 0.5, "{errs:?}");
}

#[test]
fn hurst_and_gamma_recovered() {
    let p = ModelParams::new(1.0, -0.5, 1.5, 0.65, 0.3).unwrap();
    let grid = SampleGrid::new(1.0, 1 << 14).unwrap();
    let x = simulate_exact(&p, grid, 4).unwrap();
    let h = estimate_hurst(&x.values).unwrap();
    let g = estimate_gamma(&x.values, grid, p.hurst).unwrap();
    assert!((h - p.hurst).abs() < 0.03, "{h}");
    assert!((g / p.gamma - 1.0).abs() < 0.05, "{g}");
}

#[test]
fn mgf_moments_match_simulation() {
    let p = common::desk();
    let t = 1.0;
    let sample = stats_sample(&p, t, 256, 4000, 77_000);
    let n = sample.len() as f64;
    // log-MGF derivatives at the origin give E S_T and E I_T
    let h = 1e-4;
    let es = (mgf1_log(h, 0.0, &p, t).unwrap() - mgf1_log(-h, 0.0, &p, t).unwrap()) / (2.0 * h);
    let ei = (mgf1_log(0.0, h, &p, t).unwrap() - mgf1_log(0.0, -h, &p, t).unwrap()) / (2.0 * h);
    let ej = (mgf2_log([0.0, 0.0, h, 0.0], &p, t).unwrap() - mgf2_log([0.0, 0.0, -h, 0.0], &p, t).unwrap()) / (2.0 * h);
    let check = |name: &str, want: f64, v: Vec<f64>| {
        let m = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((m - want).abs() < 4.0 * sd / n.sqrt(), "{name}: mc {m} closed {want}");
    };
    check("S", es, sample.iter().map(|s| s.s_t).collect());
    check("I", ei, sample.iter().map(|s| s.i_t).collect());
    check("J", ej, sample.iter().map(|s| s.j_t).collect());
}
