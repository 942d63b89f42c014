//! Fractional Vasicek model dX = (α − βX)dt + γ dB^H.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fbm::{FbmGenerator, FbmPath, SampleGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub hurst: f64,
    pub x0: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, hurst: f64, x0: f64) -> Result<Self> {
        let p = Self { alpha, beta, gamma, hurst, x0 };
        p.validate()?;
        Ok(p)
    }

    /// α=1, β=−0.5, γ=1, H=0.7, x₀=0.3
    pub fn desk() -> Self {
        Self { alpha: 1.0, beta: -0.5, gamma: 1.0, hurst: 0.7, x0: 0.3 }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.beta, self.gamma, self.hurst, self.x0];
        if all.iter().any(|v| !v.is_finite()) {
            return domain("parameters must be finite");
        }
        if !(self.gamma > 0.0) {
            return domain(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.hurst > 0.5 && self.hurst < 1.0) {
            return domain(format!("hurst must lie in (1/2,1), got {}", self.hurst));
        }
        if self.beta == 0.0 {
            return domain("beta must be nonzero");
        }
        Ok(())
    }

    /// x₀ − α/β
    pub fn offset(&self) -> f64 {
        self.x0 - self.alpha / self.beta
    }

    /// x₀e^{−βt} + (α/β)(1 − e^{−βt})
    pub fn mean_at(&self, t: f64) -> f64 {
        let e = (-self.beta * t).exp();
        self.x0 * e + self.alpha / self.beta * (1.0 - e)
    }
}

#[derive(Debug, Clone)]
pub struct VasicekPath {
    pub grid: SampleGrid,
    pub values: Vec<f64>,
    pub params: ModelParams,
    pub driver_seed: u64,
}

fn check_driver(params: &ModelParams, driver: &FbmPath) -> Result<()> {
    params.validate()?;
    if driver.values.len() != driver.grid.n + 1 {
        return Err(Error::Misaligned(driver.values.len(), driver.grid.n + 1));
    }
    Ok(())
}

/// Explicit solution with the stochastic convolution integrated by parts:
/// ∫e^{−β(t−s)}dB_s = B_t − β∫e^{−β(t−s)}B_s ds, trapezoid in s.
pub fn exact_from_driver(params: &ModelParams, driver: &FbmPath, seed: u64) -> Result<VasicekPath> {
    check_driver(params, driver)?;
    let grid = driver.grid;
    let dt = grid.dt();
    let b = &driver.values;
    let e = (-params.beta * dt).exp();
    let mut values = Vec::with_capacity(grid.n + 1);
    let mut y = 0.0;
    values.push(params.x0);
    for i in 0..grid.n {
        y = e * y + 0.5 * dt * (e * b[i] + b[i + 1]);
        let t = grid.time(i + 1);
        values.push(params.mean_at(t) + params.gamma * (b[i + 1] - params.beta * y));
    }
    Ok(VasicekPath { grid, values, params: *params, driver_seed: seed })
}

/// X_{i+1} = X_i + (α − βX_i)Δ + γΔB_i
pub fn euler_from_driver(params: &ModelParams, driver: &FbmPath, seed: u64) -> Result<VasicekPath> {
    check_driver(params, driver)?;
    let grid = driver.grid;
    let dt = grid.dt();
    let b = &driver.values;
    let mut values = Vec::with_capacity(grid.n + 1);
    let mut x = params.x0;
    values.push(x);
    for i in 0..grid.n {
        x += (params.alpha - params.beta * x) * dt + params.gamma * (b[i + 1] - b[i]);
        values.push(x);
    }
    Ok(VasicekPath { grid, values, params: *params, driver_seed: seed })
}

pub fn simulate_exact(params: &ModelParams, grid: SampleGrid, seed: u64) -> Result<VasicekPath> {
    let driver = FbmGenerator::new(params.hurst, grid)?.sample(seed);
    exact_from_driver(params, &driver, seed)
}

pub fn simulate_euler(params: &ModelParams, grid: SampleGrid, seed: u64) -> Result<VasicekPath> {
    let driver = FbmGenerator::new(params.hurst, grid)?.sample(seed);
    euler_from_driver(params, &driver, seed)
}
