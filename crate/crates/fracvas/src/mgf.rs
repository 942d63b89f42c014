//! Closed-form moment generating functions of (S_T, I_T) and (S_T, I_T, J_T, K_T),
//! plus bivariate-normal product MGFs.
//!
//! With z = −βT/2 every term carries e^{4z} at most; terms are assembled from
//! e^{−z}I_ν(z) and divided by e^{4z} analytically, so nothing overflows.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::model::ModelParams;
use crate::specfun::{bessel_i_scaled, gamma};
use crate::transforms::constants;

/// Which c₂, c₄, c₅ to use in the (S_T, I_T) MGF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MgfConstants {
    /// c₂ = −c₁α/(βγ), c₄ = −2c₃α/(βγ), c₅ = c₃α²/(β²γ²); matches simulation.
    #[default]
    Corrected,
    /// c₂, c₄, c₅ with (x₀ − α/β) factors.
    OffsetFactored,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mgf1Parts {
    /// D·e^{−4z}
    pub d_scaled: f64,
    /// (A₁ + A₂ + A₃ + A₄)·e^{−4z}
    pub a_scaled: [f64; 4],
    pub c: [f64; 6],
    pub lambda_star: f64,
    pub rho: f64,
    pub z: f64,
}

impl Mgf1Parts {
    pub fn log_d(&self) -> f64 {
        4.0 * self.z + self.d_scaled.ln()
    }
}

fn check_beta(p: &ModelParams) -> Result<()> {
    p.validate()?;
    if !(p.beta < 0.0) {
        return domain(format!("MGF formulas need beta < 0, got {}", p.beta));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("horizon must be positive, got {t}"));
    }
    Ok(())
}

struct Bessels {
    i1mh: f64,
    ihm1: f64,
    imh: f64,
    ih: f64,
}

fn bessels(h: f64, z: f64) -> Result<Bessels> {
    Ok(Bessels {
        i1mh: bessel_i_scaled(1.0 - h, z)?,
        ihm1: bessel_i_scaled(h - 1.0, z)?,
        imh: bessel_i_scaled(-h, z)?,
        ih: bessel_i_scaled(h, z)?,
    })
}

fn d_scaled(xi2: f64, beta: f64, h: f64, t: f64, z: f64, b: &Bessels) -> f64 {
    let lead = (1.0 - xi2 / (2.0 * beta)).powi(2) * (-4.0 * z).exp();
    let sq = xi2 * xi2 / (4.0 * beta * beta);
    let mix = (xi2 / beta - xi2 * xi2 / (2.0 * beta * beta)) * (-beta) * PI * t / (4.0 * (PI * h).sin())
        * (b.imh * b.ihm1 + b.i1mh * b.ih);
    lead + sq + mix
}

/// D^{(α,β)}(ξ₂)
pub fn mgf1_d(xi2: f64, params: &ModelParams, t: f64) -> Result<f64> {
    check_beta(params)?;
    check_t(t)?;
    let z = -params.beta * t / 2.0;
    let b = bessels(params.hurst, z)?;
    Ok(d_scaled(xi2, params.beta, params.hurst, t, z, &b) * (4.0 * z).exp())
}

pub fn mgf1_parts(xi1: f64, xi2: f64, params: &ModelParams, t: f64, which: MgfConstants) -> Result<Mgf1Parts> {
    check_beta(params)?;
    check_t(t)?;
    let ModelParams { alpha, beta, gamma: g, hurst: h, .. } = *params;
    let kc = constants(h, g)?;
    let (ls, rho) = (kc.lambda_star, kc.rho);
    let d = params.offset();
    let c1 = 4.0 * d * rho;
    let c3 = 2.0 * gamma(h) * gamma(1.0 - h) / ls;
    let c6 = d * d * 2.0 * ls * rho * rho;
    let (c2, c4, c5) = match which {
        MgfConstants::Corrected => {
            let s = alpha / (beta * g);
            (-c1 * s, -2.0 * c3 * s, c3 * s * s)
        }
        MgfConstants::OffsetFactored => (
            d * d * ls * 2f64.powf(2.0 * h + 1.0) * rho * rho / gamma(1.0 - h),
            d * rho * 2f64.powf(2.0 * h + 1.0) * gamma(h),
            d * d * ls * 2f64.powf(4.0 * h - 1.0) * rho * rho * gamma(h) / gamma(1.0 - h),
        ),
    };
    let z = -beta * t / 2.0;
    let b = bessels(h, z)?;
    let nb = -beta;
    let lin = c1 * xi1 - c2 * xi2;
    let p1 = nb.powf(h - 1.0) * t.powf(1.0 - h);
    let a1 = xi2 * lin * p1 * b.i1mh;
    let a2 = (xi1 * xi1 * c3 - xi1 * xi2 * c4 + xi2 * xi2 * c5) * t.powf(2.0 - 2.0 * h) * b.i1mh * b.ihm1;
    let a3 = xi2 * (xi2 - 2.0 * beta) * c6 * nb.powf(2.0 * h - 1.0) * t * b.i1mh * b.imh;
    let a4 = lin * (xi2 - 2.0 * beta) * p1 * (-2.0 * z).exp() * b.i1mh;
    Ok(Mgf1Parts {
        d_scaled: d_scaled(xi2, beta, h, t, z, &b),
        a_scaled: [a1, a2, a3, a4],
        c: [c1, c2, c3, c4, c5, c6],
        lambda_star: ls,
        rho,
        z,
    })
}

/// log E exp{ξ₁S_T + ξ₂I_T}
pub fn mgf1_log_with(xi1: f64, xi2: f64, params: &ModelParams, t: f64, which: MgfConstants) -> Result<f64> {
    let p = mgf1_parts(xi1, xi2, params, t, which)?;
    if !(p.d_scaled > 0.0) {
        return Err(Error::MgfDomain(p.d_scaled * (4.0 * p.z).exp()));
    }
    let sum: f64 = p.a_scaled.iter().sum();
    Ok(-0.5 * p.log_d() + sum / (8.0 * p.d_scaled) - xi2 * t / 2.0)
}

pub fn mgf1_log(xi1: f64, xi2: f64, params: &ModelParams, t: f64) -> Result<f64> {
    mgf1_log_with(xi1, xi2, params, t, MgfConstants::Corrected)
}

/// Smallest ξ₂ > 0 with D(ξ₂) = 0, if one exists below `limit`.
pub fn mgf1_domain_boundary(params: &ModelParams, t: f64, limit: f64) -> Result<Option<f64>> {
    let d = |x: f64| -> Result<f64> {
        let z = -params.beta * t / 2.0;
        Ok(d_scaled(x, params.beta, params.hurst, t, z, &bessels(params.hurst, z)?))
    };
    check_beta(params)?;
    check_t(t)?;
    let mut lo = 0.0;
    let mut hi = 1e-3;
    while d(hi)? > 0.0 {
        lo = hi;
        hi *= 1.5;
        if hi > limit {
            return Ok(None);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if d(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Reparameterization of the quadruple MGF: returns (α₁, β₁).
pub fn quadruple_shift(theta3: f64, theta4: f64, params: &ModelParams) -> Result<(f64, f64)> {
    let disc = params.beta * params.beta - 2.0 * theta4;
    if !(disc > 0.0) {
        return domain(format!("theta4 must be below beta^2/2, got {theta4}"));
    }
    let r = disc.sqrt();
    Ok((-(params.gamma * theta3 + params.alpha * params.beta) / r, -r))
}

struct Shift {
    alpha1: f64,
    beta1: f64,
    /// α − α₁
    d_alpha: f64,
    /// β₁ − β
    d_beta: f64,
}

fn shift(theta3: f64, theta4: f64, params: &ModelParams) -> Result<Shift> {
    let (alpha1, beta1) = quadruple_shift(theta3, theta4, params)?;
    let ModelParams { alpha, beta, gamma: g, .. } = *params;
    let r = -beta1;
    let d_beta = 2.0 * theta4 / (r - beta);
    let d_alpha = (alpha * (-d_beta) + g * theta3) / r;
    Ok(Shift { alpha1, beta1, d_alpha, d_beta })
}

fn mgf2_shifted(xi1: f64, xi2: f64, sh: &Shift, params: &ModelParams, t: f64, which: MgfConstants) -> Result<f64> {
    let shifted = ModelParams { alpha: sh.alpha1, beta: sh.beta1, ..*params };
    let w_t = constants(params.hurst, params.gamma)?.w(t);
    let g = params.gamma;
    let m1 = mgf1_log_with(xi1, xi2, &shifted, t, which)?;
    Ok(m1 - sh.d_alpha * (sh.alpha1 + params.alpha) * w_t / (2.0 * g * g))
}

/// log E exp{θ₁S_T + θ₂I_T + θ₃J_T + θ₄K_T}
pub fn mgf2_log_with(theta: [f64; 4], params: &ModelParams, t: f64, which: MgfConstants) -> Result<f64> {
    check_beta(params)?;
    let [t1, t2, t3, t4] = theta;
    let sh = shift(t3, t4, params)?;
    mgf2_shifted(t1 + sh.d_alpha / params.gamma, t2 + sh.d_beta, &sh, params, t, which)
}

pub fn mgf2_log(theta: [f64; 4], params: &ModelParams, t: f64) -> Result<f64> {
    mgf2_log_with(theta, params, t, MgfConstants::Corrected)
}

/// Log-MGF of (T^{H−1}M_T, e^{βT}(I_T+βK_T), e^{2βT}K_T) at finite T.
pub fn scaled_vector_log(theta: [f64; 3], params: &ModelParams, t: f64) -> Result<f64> {
    check_beta(params)?;
    let [t1, t2, t3] = theta;
    let h = params.hurst;
    let b = params.beta;
    let s1 = t1 * t.powf(h - 1.0);
    let e1 = (b * t).exp();
    let (th2, th4) = (t2 * e1, t2 * b * e1 + t3 * e1 * e1);
    let sh = shift(s1 * b, th4, params)?;
    // shifted ξ₁, ξ₂ with the leading parts cancelled analytically
    let r = -sh.beta1;
    let xi1 = -sh.d_beta * (s1 + params.alpha / params.gamma) / r;
    let xi2 = -2.0 * th2 * th4 / ((r - b) * (r - b)) + 2.0 * t3 * e1 * e1 / (r - b);
    let w_t = constants(h, params.gamma)?.w(t);
    let m2 = mgf2_shifted(xi1, xi2, &sh, params, t, MgfConstants::Corrected)?;
    Ok(m2 - s1 * params.alpha * w_t / params.gamma)
}

/// T → ∞ limit of [`scaled_vector_log`].
pub fn scaled_vector_limit_log(theta: [f64; 3], params: &ModelParams) -> Result<f64> {
    check_beta(params)?;
    let [t1, t2, t3] = theta;
    let h = params.hurst;
    let b = params.beta;
    let kc = constants(h, params.gamma)?;
    let c6 = params.offset().powi(2) * 2.0 * kc.lambda_star * kc.rho * kc.rho;
    let q = t2 * t2 + 2.0 * t3;
    let den = 1.0 - q / (4.0 * b * b * (PI * h).sin());
    if !(den > 0.0) {
        return Err(Error::MgfDomain(den));
    }
    Ok(t1 * t1 / (2.0 * kc.lambda) - 0.5 * den.ln() + c6 * (-b).powf(2.0 * h - 2.0) * q / (8.0 * PI * den))
}

/// E exp{tXY} for a bivariate normal (X, Y) with means m₁, m₂, sds s₁, s₂, correlation r.
pub fn mgf_product_bivariate(t: f64, m1: f64, m2: f64, s1: f64, s2: f64, r: f64) -> Result<f64> {
    if !(r.abs() <= 1.0) {
        return domain(format!("correlation must lie in [-1,1], got {r}"));
    }
    let ss = s1 * s2 * t;
    let d = (1.0 - (1.0 + r) * ss) * (1.0 + (1.0 - r) * ss);
    if !(d > 0.0) {
        return Err(Error::MgfDomain(d));
    }
    let num = (m1 * m1 * s2 * s2 + m2 * m2 * s1 * s1 - 2.0 * r * m1 * m2 * s1 * s2) * t * t + 2.0 * m1 * m2 * t;
    Ok(d.powf(-0.5) * (num / (2.0 * d)).exp())
}

/// E exp{θ₁XY + θ₂X²}, X ~ N(m, σ²), Y ~ N(0,1) independent.
pub fn mgf_quadratic_pair(theta1: f64, theta2: f64, m: f64, sigma: f64) -> Result<f64> {
    let q = theta1 * theta1 + 2.0 * theta2;
    let d = 1.0 - sigma * sigma * q;
    if !(d > 0.0) {
        return Err(Error::MgfDomain(d));
    }
    Ok(d.powf(-0.5) * (m * m * q / (2.0 * d)).exp())
}
