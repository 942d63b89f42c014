//! Limiting laws: normals, the normal-ratio η/ζ, the scaled square −βζ², and the
//! vector (ξ, ηζ, ζ²). CDFs and seeded samplers.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{domain, Error, Result};
use crate::fbm::rng_from_seed;
use crate::model::ModelParams;
use crate::specfun::gamma;
use crate::transforms::constants;

pub trait Law {
    fn cdf(&self, x: f64) -> f64;
    fn draw<R: Rng>(&self, rng: &mut R) -> f64;
}

pub(crate) fn std_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

fn z<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalLaw {
    pub mean: f64,
    pub variance: f64,
}

impl NormalLaw {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance >= 0.0) || !mean.is_finite() {
            return domain(format!("invalid normal law N({mean}, {variance})"));
        }
        Ok(Self { mean, variance })
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }
}

impl Law for NormalLaw {
    fn cdf(&self, x: f64) -> f64 {
        if self.variance == 0.0 {
            return if x >= self.mean { 1.0 } else { 0.0 };
        }
        std_normal_cdf((x - self.mean) / self.sd())
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        self.mean + self.sd() * z(rng)
    }
}

/// η/ζ with η ~ N(0,1) independent of ζ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioLaw {
    pub zeta: NormalLaw,
}

impl RatioLaw {
    pub fn new(zeta: NormalLaw) -> Result<Self> {
        if !(zeta.variance > 0.0) {
            return domain("ratio law needs a denominator with positive variance");
        }
        Ok(Self { zeta })
    }
}

fn simpson_step(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson on [a, b].
pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // start from a few panels so narrow features are not skipped
    let panels = 16;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = lo + h;
            let mid = 0.5 * (lo + hi);
            let (fa, fb, fm) = (f(lo), f(hi), f(mid));
            let whole = h / 6.0 * (fa + 4.0 * fm + fb);
            simpson_step(f, lo, fa, hi, fb, mid, fm, whole, tol / panels as f64, 40)
        })
        .sum()
}

const TAIL_SDS: f64 = 10.0;

/// P(η/ζ ≤ x) by quadrature over the density of ζ.
pub fn ratio_cdf(x: f64, law: &RatioLaw) -> Result<f64> {
    if x.is_nan() {
        return domain("ratio_cdf at NaN");
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    if x == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let (m, s) = (law.zeta.mean, law.zeta.sd());
    let dens = |u: f64| (-0.5 * ((u - m) / s).powi(2)).exp() / (s * (2.0 * PI).sqrt());
    let pos = |u: f64| dens(u) * std_normal_cdf(x * u);
    let neg = |u: f64| dens(u) * std_normal_cdf(-x * u);
    let lo = m - TAIL_SDS * s;
    let hi = m + TAIL_SDS * s;
    let tol = 1e-11;
    let mut p = 0.0;
    if hi > 0.0 {
        p += adaptive_simpson(&pos, lo.max(0.0), hi, tol);
    }
    if lo < 0.0 {
        p += adaptive_simpson(&neg, lo, hi.min(0.0), tol);
    }
    if !p.is_finite() {
        return Err(Error::Quadrature("ratio_cdf".into()));
    }
    Ok(p.clamp(0.0, 1.0))
}

impl Law for RatioLaw {
    fn cdf(&self, x: f64) -> f64 {
        ratio_cdf(x, self).unwrap_or(f64::NAN)
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let eta = z(rng);
        eta / self.zeta.draw(rng)
    }
}

/// c·ζ² with c > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledSquareLaw {
    pub factor: f64,
    pub zeta: NormalLaw,
}

impl Law for ScaledSquareLaw {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let r = (x / self.factor).sqrt();
        let (m, s) = (self.zeta.mean, self.zeta.sd());
        std_normal_cdf((r - m) / s) - std_normal_cdf((-r - m) / s)
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let v = self.zeta.draw(rng);
        self.factor * v * v
    }
}

/// (ξ, ηζ, ζ²) with ξ, η, ζ independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorLimit {
    pub xi: NormalLaw,
    pub zeta: NormalLaw,
}

impl VectorLimit {
    pub fn draw<R: Rng>(&self, rng: &mut R) -> [f64; 3] {
        let xi = self.xi.draw(rng);
        let eta = z(rng);
        let zeta = self.zeta.draw(rng);
        [xi, eta * zeta, zeta * zeta]
    }

    pub fn sample(&self, seed: u64, count: usize) -> Vec<[f64; 3]> {
        let mut rng = rng_from_seed(seed);
        (0..count).map(|_| self.draw(&mut rng)).collect()
    }
}

pub fn sample_limit<L: Law>(law: &L, seed: u64, count: usize) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..count).map(|_| law.draw(&mut rng)).collect()
}

fn need_negative_beta(p: &ModelParams) -> Result<()> {
    p.validate()?;
    if !(p.beta < 0.0) {
        return domain(format!("limit laws need beta < 0, got {}", p.beta));
    }
    Ok(())
}

/// Limit of T^{H−½}e^{βT}S_T.
pub fn law_s_limit(p: &ModelParams) -> Result<NormalLaw> {
    need_negative_beta(p)?;
    let kc = constants(p.hurst, p.gamma)?;
    let nb = -p.beta;
    let h = p.hurst;
    NormalLaw::new(
        p.offset() * kc.rho * nb.powf(h - 0.5) / PI.sqrt(),
        gamma(h) * gamma(1.0 - h) / (2.0 * PI * nb * kc.lambda_star),
    )
}

/// Limit of T^{H−½}e^{βT}J_T with factors 8 and 4.
pub fn law_j_limit(p: &ModelParams) -> Result<NormalLaw> {
    need_negative_beta(p)?;
    let kc = constants(p.hurst, p.gamma)?;
    let nb = -p.beta;
    let h = p.hurst;
    NormalLaw::new(
        8.0 * p.offset() * kc.rho * nb.powf(h - 1.5) / PI.sqrt(),
        4.0 * gamma(h) * gamma(1.0 - h) / (kc.lambda_star * nb.powi(3) * PI),
    )
}

/// Limit of T^{H−½}e^{βT}J_T implied by −βJ ≈ S: the S-limit scaled by 1/(−β).
pub fn law_j_limit_from_s(p: &ModelParams) -> Result<NormalLaw> {
    let s = law_s_limit(p)?;
    let nb = -p.beta;
    NormalLaw::new(s.mean / nb, s.variance / (nb * nb))
}

/// ζ of the non-ergodic limit.
pub fn zeta_law(p: &ModelParams) -> Result<NormalLaw> {
    need_negative_beta(p)?;
    let kc = constants(p.hurst, p.gamma)?;
    let nb = -p.beta;
    NormalLaw::new(
        p.offset() * kc.rho * kc.lambda_star.sqrt() * nb.powf(p.hurst - 1.0) / (2.0 * PI).sqrt(),
        1.0 / (4.0 * p.beta * p.beta * (PI * p.hurst).sin()),
    )
}

/// Limit of e^{2βT}I_T: −βζ².
pub fn law_i_limit(p: &ModelParams) -> Result<ScaledSquareLaw> {
    Ok(ScaledSquareLaw { factor: -p.beta, zeta: zeta_law(p)? })
}

/// Limit of e^{−βT}(β̂ − β) (and of the single-parameter β̃).
pub fn ratio_law(p: &ModelParams) -> Result<RatioLaw> {
    RatioLaw::new(zeta_law(p)?)
}

/// Limit of T^{1−H}(α̂ − α): N(0, λγ²).
pub fn alpha_law(p: &ModelParams) -> Result<NormalLaw> {
    p.validate()?;
    NormalLaw::new(0.0, constants(p.hurst, p.gamma)?.lambda * p.gamma * p.gamma)
}

pub fn vector_limit(p: &ModelParams) -> Result<VectorLimit> {
    let kc = constants(p.hurst, p.gamma)?;
    Ok(VectorLimit { xi: NormalLaw::new(0.0, 1.0 / kc.lambda)?, zeta: zeta_law(p)? })
}

/// Law of X√(sin πH)/Y, the x₀ = α/β limit of e^{−βT}(β̂−β)/(2β).
pub fn special_case_ratio(hurst: f64) -> Result<RatioLaw> {
    if !(hurst > 0.5 && hurst < 1.0) {
        return domain(format!("hurst must lie in (1/2,1), got {hurst}"));
    }
    RatioLaw::new(NormalLaw::new(0.0, 1.0 / (PI * hurst).sin())?)
}

/// Limits of T^{1−H}(μ̂−μ) and e^{−κT}(κ̂−κ) for dX = κ(μ − X)dt + γdB^H,
/// given in the (α, β) form with κ = β, μ = α/β.
pub fn law_mu_kappa_limit(p: &ModelParams) -> Result<(NormalLaw, RatioLaw)> {
    need_negative_beta(p)?;
    let kappa = p.beta;
    let kc = constants(p.hurst, p.gamma)?;
    let nu = NormalLaw::new(0.0, kc.lambda * p.gamma * p.gamma / (kappa * kappa))?;
    Ok((nu, ratio_law(p)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_limits_and_symmetry() {
        let law = special_case_ratio(0.7).unwrap();
        assert_eq!(ratio_cdf(f64::INFINITY, &law).unwrap(), 1.0);
        assert_eq!(ratio_cdf(f64::NEG_INFINITY, &law).unwrap(), 0.0);
        assert!((ratio_cdf(0.0, &law).unwrap() - 0.5).abs() < 1e-9);
        assert!(ratio_cdf(1e6, &law).unwrap() > 0.999_99);
        // centered ratio is Cauchy with scale √(sin πH)
        let s = (0.7 * PI).sin().sqrt();
        for x in [-3.0, -0.4, 0.2, 1.0, 5.0] {
            let want = 0.5 + (x / s).atan() / PI;
            assert!((ratio_cdf(x, &law).unwrap() - want).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn special_case_iqr() {
        let law = special_case_ratio(0.7).unwrap();
        let s = (0.7 * PI).sin().sqrt();
        assert!((ratio_cdf(s, &law).unwrap() - 0.75).abs() < 1e-8);
        assert!((ratio_cdf(-s, &law).unwrap() - 0.25).abs() < 1e-8);
    }

    #[test]
    fn s_limit_properties() {
        let p = ModelParams::new(1.0, -0.5, 1.0, 0.7, -2.0).unwrap();
        assert_eq!(law_s_limit(&p).unwrap().mean, 0.0);
        let q = ModelParams::desk();
        let a = law_s_limit(&q).unwrap();
        assert!((a.variance - law_s_limit(&p).unwrap().variance).abs() < 1e-15);
        let kc = constants(0.7, 1.0).unwrap();
        let v = gamma(0.7) * gamma(0.3) / (2.0 * PI * 0.5 * kc.lambda_star);
        assert!((a.variance - v).abs() < 1e-14);
        assert!(law_s_limit(&ModelParams::new(1.0, 0.5, 1.0, 0.7, 0.3).unwrap()).is_err());
    }

    #[test]
    fn zeta_mean_linear_in_offset() {
        let a = zeta_law(&ModelParams::new(1.0, -0.5, 1.0, 0.7, 0.3).unwrap()).unwrap();
        let b = zeta_law(&ModelParams::new(1.0, -0.5, 1.0, 0.7, 2.6).unwrap()).unwrap();
        assert!((b.mean - 2.0 * a.mean).abs() < 1e-14);
        assert_eq!(a.variance, b.variance);
        let c = zeta_law(&ModelParams::new(1.0, -0.5, 1.0, 0.7, -2.0).unwrap()).unwrap();
        assert_eq!(c.mean, 0.0);
    }

    #[test]
    fn j_law_factor_discrepancy() {
        let p = ModelParams::desk();
        let eight = law_j_limit(&p).unwrap();
        let derived = law_j_limit_from_s(&p).unwrap();
        assert!((eight.mean / derived.mean - 8.0).abs() < 1e-12);
        assert!((eight.variance / derived.variance - 8.0).abs() < 1e-12);
    }

    #[test]
    fn mu_kappa_scaling() {
        let p = ModelParams::desk();
        let (nu, r) = law_mu_kappa_limit(&p).unwrap();
        let a = alpha_law(&p).unwrap();
        assert!((nu.variance - a.variance / 0.25).abs() < 1e-13);
        assert_eq!(r, ratio_law(&p).unwrap());
        let c = ModelParams::new(1.0, -0.5, 1.0, 0.7, -2.0).unwrap();
        assert_eq!(law_mu_kappa_limit(&c).unwrap().1.zeta.mean, 0.0);
    }

    #[test]
    fn i_limit_support() {
        let l = law_i_limit(&ModelParams::desk()).unwrap();
        assert_eq!(l.cdf(-1.0), 0.0);
        assert!(l.factor > 0.0);
        let draws = sample_limit(&l, 3, 1000);
        assert!(draws.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn samplers_deterministic() {
        let l = ratio_law(&ModelParams::desk()).unwrap();
        assert_eq!(sample_limit(&l, 11, 50), sample_limit(&l, 11, 50));
        let v = vector_limit(&ModelParams::desk()).unwrap();
        assert_eq!(v.sample(2, 10), v.sample(2, 10));
    }
}
