//! KS test, rank correlation, log-mean-exp with bootstrap SE, seed mixing.

use rand::Rng;

use crate::error::{Error, Result};
use crate::fbm::rng_from_seed;

pub const KS_MIN_N: usize = 20;

/// splitmix64 finalizer of (master, i).
pub fn mix_seed(master: u64, i: u64) -> u64 {
    let mut z = master ^ i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Kolmogorov survival function Q(λ) = 2Σ(−1)^{k−1}e^{−2k²λ²}.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS statistic and asymptotic p-value (Stephens' small-n correction).
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let n = samples.len();
    if n < KS_MIN_N {
        return Err(Error::SampleSize { got: n, need: KS_MIN_N });
    }
    let mut xs = samples.to_vec();
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("NaN in KS sample".into()));
    }
    xs.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            (f - i as f64 / nf).max((i + 1) as f64 / nf - f)
        })
        .fold(0.0, f64::max);
    let sn = nf.sqrt();
    Ok((d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)))
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|a, b| v[*a].total_cmp(&v[*b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Misaligned(a.len(), b.len()));
    }
    if a.len() < 3 {
        return Err(Error::SampleSize { got: a.len(), need: 3 });
    }
    Ok(pearson(&ranks(a), &ranks(b)))
}

pub fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

pub fn log_mean_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + (v.iter().map(|x| (x - m).exp()).sum::<f64>() / v.len() as f64).ln()
}

/// log-mean-exp of `v` and its bootstrap standard error over `resamples` draws.
pub fn log_mean_exp_bootstrap(v: &[f64], resamples: usize, seed: u64) -> (f64, f64) {
    let est = log_mean_exp(v);
    if resamples < 2 || v.len() < 2 {
        return (est, f64::NAN);
    }
    let mut rng = rng_from_seed(seed);
    let n = v.len();
    let mut buf = vec![0.0; n];
    let reps: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = v[rng.random_range(0..n)];
            }
            log_mean_exp(&buf)
        })
        .collect();
    let mean = reps.iter().sum::<f64>() / resamples as f64;
    let var = reps.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (resamples - 1) as f64;
    (est, var.sqrt())
}
