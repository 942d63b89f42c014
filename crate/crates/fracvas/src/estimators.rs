//! Maximum-likelihood drift estimators, the log-likelihood, and γ / H recovery.

use crate::error::{domain, Error, Result};
use crate::fbm::SampleGrid;
use crate::transforms::{ksum, StatsPlan, SufficientStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Joint,
    AlphaOnly,
    BetaOnly,
    MuKappa,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftEstimate {
    /// α̂ (or μ̂ for the MuKappa variant)
    pub alpha_hat: f64,
    /// β̂ (or κ̂)
    pub beta_hat: f64,
    pub variant: Variant,
    pub horizon: f64,
    pub hurst: f64,
    pub gamma: f64,
}

fn joint_den(st: &SufficientStats) -> Result<f64> {
    let den = st.w_t * st.k_t - st.j_t * st.j_t;
    if !(den > 1e-14 * (st.w_t * st.k_t).abs()) || !den.is_finite() {
        return Err(Error::Degenerate("w_T K_T - J_T^2"));
    }
    Ok(den)
}

/// α̂ = γ(S K − I J)/(w K − J²), β̂ = (S J − w I)/(w K − J²)
pub fn mle_joint(st: &SufficientStats, gamma: f64) -> Result<DriftEstimate> {
    let den = joint_den(st)?;
    Ok(DriftEstimate {
        alpha_hat: gamma * (st.s_t * st.k_t - st.i_t * st.j_t) / den,
        beta_hat: (st.s_t * st.j_t - st.w_t * st.i_t) / den,
        variant: Variant::Joint,
        horizon: st.horizon,
        hurst: st.hurst,
        gamma,
    })
}

/// α̃ = (γ/w)(S + βJ), β known.
pub fn mle_alpha(st: &SufficientStats, gamma: f64, beta_known: f64) -> f64 {
    gamma / st.w_t * (st.s_t + beta_known * st.j_t)
}

/// β̃ = ((α/γ)J − I)/K, α known.
pub fn mle_beta(st: &SufficientStats, gamma: f64, alpha_known: f64) -> Result<f64> {
    if !(st.k_t > 0.0) {
        return Err(Error::Degenerate("K_T"));
    }
    Ok((alpha_known / gamma * st.j_t - st.i_t) / st.k_t)
}

/// μ̂ = γ(S K − I J)/(S J − w I), κ̂ = (S J − w I)/(w K − J²)
pub fn mle_mu_kappa(st: &SufficientStats, gamma: f64) -> Result<DriftEstimate> {
    let den = joint_den(st)?;
    let num = st.s_t * st.j_t - st.w_t * st.i_t;
    if num == 0.0 || !num.is_finite() {
        return Err(Error::Degenerate("S_T J_T - w_T I_T"));
    }
    Ok(DriftEstimate {
        alpha_hat: gamma * (st.s_t * st.k_t - st.i_t * st.j_t) / num,
        beta_hat: num / den,
        variant: Variant::MuKappa,
        horizon: st.horizon,
        hurst: st.hurst,
        gamma,
    })
}

/// log dP_{α,β}/dP_{0,0}
pub fn loglik(alpha: f64, beta: f64, st: &SufficientStats, gamma: f64) -> f64 {
    alpha / gamma * st.s_t - beta * st.i_t - alpha * alpha / (2.0 * gamma * gamma) * st.w_t
        + alpha * beta / gamma * st.j_t
        - 0.5 * beta * beta * st.k_t
}

/// γ̂² = Σ(ΔZ)²/w_T with Z_t = ∫_0^t k_H(t,s) dX_s = γS_t.
pub fn estimate_gamma(values: &[f64], grid: SampleGrid, hurst: f64) -> Result<f64> {
    let plan = StatsPlan::new(hurst, 1.0, grid)?;
    estimate_gamma_with(&plan, values)
}

/// Same as [`estimate_gamma`] with a plan built for γ = 1.
pub fn estimate_gamma_with(plan: &StatsPlan, values: &[f64]) -> Result<f64> {
    if plan.consts.gamma != 1.0 {
        return domain("gamma recovery needs a plan built with gamma = 1");
    }
    let z = plan.s_panel(values)?;
    let qv = ksum(z.windows(2).map(|p| (p[1] - p[0]) * (p[1] - p[0])));
    if !(qv > 0.0) {
        return Err(Error::Degenerate("quadratic variation"));
    }
    let w_t = plan.w_panel()[plan.grid.n];
    Ok((qv / w_t).sqrt())
}

fn second_variation(values: &[f64], step: usize) -> f64 {
    let pts: Vec<f64> = values.iter().step_by(step).copied().collect();
    ksum(pts.windows(3).map(|p| {
        let d = p[2] - 2.0 * p[1] + p[0];
        d * d
    }))
}

/// Ĥ = ½ − ½ log₂(V_fine / V_coarse), second-order variations on the grid and on every other point.
pub fn estimate_hurst(values: &[f64]) -> Result<f64> {
    let n = values.len().saturating_sub(1);
    if n < 4 || n % 2 != 0 {
        return domain(format!("hurst recovery needs an even step count >= 4, got {n}"));
    }
    let fine = second_variation(values, 1);
    let coarse = second_variation(values, 2);
    if !(fine > 0.0 && coarse > 0.0) {
        return Err(Error::Degenerate("second-order variation"));
    }
    Ok(0.5 - 0.5 * (fine / coarse).log2())
}
