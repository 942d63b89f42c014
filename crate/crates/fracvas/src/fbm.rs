//! Fractional Brownian motion on a uniform grid.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Error, Result};

pub const ORACLE_LIMIT: usize = 2048;
const NEG_EIG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub horizon: f64,
    pub n: usize,
}

impl SampleGrid {
    pub fn new(horizon: f64, n: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return domain(format!("horizon must be positive, got {horizon}"));
        }
        if n < 2 {
            return domain(format!("grid needs n >= 2, got {n}"));
        }
        Ok(Self { horizon, n })
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.n {
            self.horizon
        } else {
            i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.time(i)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct FbmPath {
    pub grid: SampleGrid,
    pub values: Vec<f64>,
    pub hurst: f64,
}

pub(crate) fn check_hurst(h: f64) -> Result<()> {
    if !(h > 0.0 && h < 1.0) {
        return domain(format!("Hurst index must lie in (0,1), got {h}"));
    }
    Ok(())
}

/// ½(t^{2H} + s^{2H} − |t−s|^{2H})
pub fn fbm_cov(s: f64, t: f64, h: f64) -> Result<f64> {
    if s < 0.0 || t < 0.0 {
        return domain(format!("times must be nonnegative, got ({s}, {t})"));
    }
    check_hurst(h)?;
    let e = 2.0 * h;
    Ok(0.5 * (t.powf(e) + s.powf(e) - (t - s).abs().powf(e)))
}

fn fgn_autocov(k: usize, h: f64) -> f64 {
    let k = k as f64;
    let e = 2.0 * h;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Circulant embedding of unit-step fractional Gaussian noise, reusable across draws.
#[derive(Clone)]
pub struct FbmGenerator {
    hurst: f64,
    grid: SampleGrid,
    sqrt_eig: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FbmGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FbmGenerator")
            .field("hurst", &self.hurst)
            .field("grid", &self.grid)
            .finish()
    }
}

impl FbmGenerator {
    pub fn new(hurst: f64, grid: SampleGrid) -> Result<Self> {
        check_hurst(hurst)?;
        let n = grid.n;
        let m = 2 * n;
        let mut c: Vec<Complex64> = Vec::with_capacity(m);
        for k in 0..=n {
            c.push(Complex64::new(fgn_autocov(k, hurst), 0.0));
        }
        for k in (1..n).rev() {
            c.push(Complex64::new(fgn_autocov(k, hurst), 0.0));
        }
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut c);
        let max = c.iter().map(|z| z.re).fold(f64::MIN, f64::max);
        let min = c.iter().map(|z| z.re).fold(f64::MAX, f64::min);
        if min < -NEG_EIG_TOL * max {
            return Err(Error::Embedding { min, max });
        }
        let sqrt_eig = c.iter().map(|z| (z.re.max(0.0) / m as f64).sqrt()).collect();
        Ok(Self { hurst, grid, sqrt_eig, fft })
    }

    pub fn grid(&self) -> SampleGrid {
        self.grid
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// One fBm path from a given generator state.
    pub fn sample_with<R: rand::Rng>(&self, rng: &mut R) -> FbmPath {
        let n = self.grid.n;
        let mut buf: Vec<Complex64> = self
            .sqrt_eig
            .iter()
            .map(|&s| {
                let a: f64 = StandardNormal.sample(rng);
                let b: f64 = StandardNormal.sample(rng);
                Complex64::new(s * a, s * b)
            })
            .collect();
        self.fft.process(&mut buf);
        let scale = self.grid.dt().powf(self.hurst);
        let mut values = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for z in &buf[..n] {
            acc += z.re * scale;
            values.push(acc);
        }
        FbmPath { grid: self.grid, values, hurst: self.hurst }
    }

    pub fn sample(&self, seed: u64) -> FbmPath {
        self.sample_with(&mut rng_from_seed(seed))
    }
}

pub fn generate_fbm(hurst: f64, grid: SampleGrid, seed: u64) -> Result<FbmPath> {
    Ok(FbmGenerator::new(hurst, grid)?.sample(seed))
}

/// Dense covariance matrix of (B_{t_1}, …, B_{t_n}).
pub fn covariance_matrix(hurst: f64, grid: SampleGrid) -> Result<DMatrix<f64>> {
    let n = grid.n;
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = fbm_cov(grid.time(i + 1), grid.time(j + 1), hurst)?;
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    Ok(c)
}

/// Draw by Cholesky factor of the dense covariance; slow, for checking.
pub fn exact_gaussian_oracle(hurst: f64, grid: SampleGrid, seed: u64) -> Result<FbmPath> {
    check_hurst(hurst)?;
    if grid.n > ORACLE_LIMIT {
        return Err(Error::SizeLimit { n: grid.n, limit: ORACLE_LIMIT });
    }
    let chol = covariance_matrix(hurst, grid)?
        .cholesky()
        .ok_or_else(|| Error::Domain("covariance not positive definite".into()))?;
    let mut rng = rng_from_seed(seed);
    let z: Vec<f64> = (0..grid.n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let x = chol.l() * nalgebra::DVector::from_vec(z);
    let mut values = Vec::with_capacity(grid.n + 1);
    values.push(0.0);
    values.extend(x.iter().copied());
    Ok(FbmPath { grid, values, hurst })
}

/// CSV `t,value` with 17 significant digits.
pub fn write_path_csv<W: std::io::Write>(w: W, times: &[f64], values: &[f64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "value"])?;
    for (t, v) in times.iter().zip(values) {
        out.write_record([format!("{t:.16e}"), format!("{v:.16e}")])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cov_examples() {
        assert!((fbm_cov(1.0, 1.0, 0.7).unwrap() - 1.0).abs() < 1e-15);
        assert!((fbm_cov(1.0, 2.0, 0.75).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert!((fbm_cov(0.3, 2.1, 0.6).unwrap() - 0.323_589_332_598_309_5).abs() < 1e-14);
        assert!(fbm_cov(-0.1, 1.0, 0.7).is_err());
    }

    #[test]
    fn grid_rules() {
        assert!(SampleGrid::new(1.0, 1).is_err());
        assert!(SampleGrid::new(0.0, 8).is_err());
        let g = SampleGrid::new(3.0, 6).unwrap();
        assert_eq!(g.time(6), 3.0);
        assert!((g.dt() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn deterministic_in_seed() {
        let g = SampleGrid::new(1.0, 256).unwrap();
        let a = generate_fbm(0.7, g, 42).unwrap();
        let b = generate_fbm(0.7, g, 42).unwrap();
        let c = generate_fbm(0.7, g, 43).unwrap();
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
        assert_eq!(a.values[0], 0.0);
        assert_eq!(a.values.len(), 257);
    }

    #[test]
    fn oracle_two_point_covariance() {
        let g = SampleGrid::new(1.0, 2).unwrap();
        let c = covariance_matrix(0.75, g).unwrap();
        let d: f64 = 0.5;
        assert!((c[(0, 0)] - d.powf(1.5)).abs() < 1e-15);
        assert!((c[(1, 1)] - 1.0).abs() < 1e-15);
        let cov = 0.5 * (1.0 + d.powf(1.5) - d.powf(1.5));
        assert!((c[(0, 1)] - cov).abs() < 1e-15);
        let g = SampleGrid::new(1.0, 4).unwrap();
        let c = covariance_matrix(0.5, g).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((c[(i, j)] - g.time(i.min(j) + 1)).abs() < 1e-15);
            }
        }
        assert!(exact_gaussian_oracle(0.7, SampleGrid::new(1.0, 4096).unwrap(), 1).is_err());
    }

    #[test]
    fn csv_format() {
        let mut buf = Vec::new();
        write_path_csv(&mut buf, &[0.0, 0.5], &[0.0, 1.0 / 3.0]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("t,value\n"));
        assert!(s.contains("3.3333333333333331e-1"));
    }
}
