//! Kernel constants, the fundamental semimartingale S, P_H, and the statistics
//! S_T, I_T, J_T, K_T.
//!
//! Paths are treated as piecewise linear between grid points. With s = Δu the kernel
//! integrals reduce to cell weights C(m, j) = ∫_j^{j+1} u^a (m−u)^a du, a = ½ − H.
//! All S values for one path come from a handful of FFT convolutions: interior cells
//! use a fixed Gauss–Legendre rule (which makes each node a convolution), the cells
//! next to the two singular endpoints are patched with accurate weights.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Error, Result};
use crate::fbm::SampleGrid;
use crate::model::{ModelParams, VasicekPath};
use crate::quadrature::{gauss_jacobi01, gauss_legendre01, Rule};
use crate::specfun::{gamma, log_gamma};

const EDGE: usize = 6;
const INTERIOR_NODES: usize = 6;
const EDGE_NODES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    pub kappa: f64,
    pub lambda: f64,
    pub lambda_star: f64,
    pub rho: f64,
    pub hurst: f64,
    pub gamma: f64,
}

fn check_h(h: f64) -> Result<()> {
    if !(h >= 0.5 && h < 1.0) {
        return domain(format!("kernel needs H in [1/2, 1), got {h}"));
    }
    Ok(())
}

pub fn constants(hurst: f64, gamma_: f64) -> Result<KernelConstants> {
    check_h(hurst)?;
    if !(gamma_ > 0.0) {
        return domain(format!("gamma must be positive, got {gamma_}"));
    }
    let h = hurst;
    let kappa = 2.0 * h * gamma(1.5 - h) * gamma(h + 0.5);
    let lambda = 2.0 * h * gamma(3.0 - 2.0 * h) * gamma(h + 0.5) / gamma(1.5 - h);
    let lambda_star = lambda / (2.0 - 2.0 * h);
    let rho = PI.sqrt() * gamma(1.5 - h) / (gamma_ * kappa);
    Ok(KernelConstants { kappa, lambda, lambda_star, rho, hurst, gamma: gamma_ })
}

impl KernelConstants {
    /// w_t = λ⁻¹ t^{2−2H}
    pub fn w(&self, t: f64) -> f64 {
        t.powf(2.0 - 2.0 * self.hurst) / self.lambda
    }
}

/// k_H(t,s) = κ⁻¹ s^{½−H}(t−s)^{½−H}, 0 < s < t.
pub fn kernel_k(t: f64, s: f64, hurst: f64) -> Result<f64> {
    check_h(hurst)?;
    if !(s > 0.0 && s < t) {
        return domain(format!("kernel needs 0 < s < t, got s={s}, t={t}"));
    }
    let kappa = constants(hurst, 1.0)?.kappa;
    let a = 0.5 - hurst;
    Ok((s * (t - s)).powf(a) / kappa)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SufficientStats {
    pub s_t: f64,
    pub i_t: f64,
    pub j_t: f64,
    pub k_t: f64,
    pub w_t: f64,
    pub horizon: f64,
    pub hurst: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone)]
pub struct ProcessPanel {
    pub times: Vec<f64>,
    pub s: Vec<f64>,
    pub p: Vec<f64>,
    pub w: Vec<f64>,
}

/// Neumaier-compensated sum.
pub(crate) fn ksum(it: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for x in it {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

struct CellRules {
    a: f64,
    left: Rule,
    both: Rule,
    edge: Rule,
    beta: f64,
}

impl CellRules {
    fn new(a: f64) -> Result<Self> {
        let beta = (2.0 * log_gamma(a + 1.0)? - log_gamma(2.0 * a + 2.0)?).exp();
        Ok(Self {
            a,
            left: gauss_jacobi01(EDGE_NODES, a, 0.0)?,
            both: gauss_jacobi01(EDGE_NODES, a, a)?,
            edge: gauss_legendre01(EDGE_NODES)?,
            beta,
        })
    }

    /// ∫_r^{r+1} u^a (m−u)^a φ(u−r) du with accurate endpoint handling.
    fn cell(&self, m: usize, r: usize, phi: impl Fn(f64) -> f64) -> f64 {
        let a = self.a;
        let mf = m as f64;
        let rf = r as f64;
        if m == 1 {
            return self.both.integrate(phi);
        }
        if r == 0 {
            return self.left.integrate(|u| (mf - u).powf(a) * phi(u));
        }
        if r + 1 == m {
            // v = m − u
            return self.left.integrate(|v| (mf - v).powf(a) * phi(1.0 - v));
        }
        self.edge.integrate(|x| {
            let u = rf + x;
            (u * (mf - u)).powf(a) * phi(x)
        })
    }

    fn cell_plain(&self, m: usize, r: usize) -> f64 {
        if m == 1 {
            return self.beta;
        }
        self.cell(m, r, |_| 1.0)
    }
}

/// Hat-function weights ∫_0^m u^a (m−u)^a φ_j(u) du, j = 0..m.
fn hat_weights(rules: &CellRules, interior: &Rule, m: usize) -> Vec<f64> {
    let a = rules.a;
    let mf = m as f64;
    let mut w = vec![0.0; m + 1];
    for j in 0..m {
        let near = j < EDGE || m - 1 - j < EDGE;
        let (lo, hi) = if near {
            (rules.cell(m, j, |x| 1.0 - x), rules.cell(m, j, |x| x))
        } else {
            let mut lo = 0.0;
            let mut hi = 0.0;
            for (&x, &wq) in interior.nodes.iter().zip(&interior.weights) {
                let u = j as f64 + x;
                let k = wq * (u * (mf - u)).powf(a);
                lo += k * (1.0 - x);
                hi += k * x;
            }
            (lo, hi)
        };
        w[j] += lo;
        w[j + 1] += hi;
    }
    w
}

struct Convolver {
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    // per interior node: (j + x_q)^a for j < n, and FFT of g_q[k] = (k − x_q)^a
    left_pow: Vec<Vec<f64>>,
    g_hat: Vec<Vec<Complex64>>,
    // C(m, r) − GL approximation, r < EDGE, both ends
    delta: Vec<[f64; EDGE]>,
}

/// Precomputed weights for one (H, γ, grid); reuse across replications.
pub struct StatsPlan {
    pub grid: SampleGrid,
    pub consts: KernelConstants,
    a: f64,
    s_scale: f64,
    small: Vec<Vec<f64>>,
    conv: Option<Convolver>,
    j_weights: Vec<f64>,
    w: Vec<f64>,
    r: Vec<f64>,
    rules_interior: Rule,
}

impl std::fmt::Debug for StatsPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StatsPlan").field("grid", &self.grid).field("consts", &self.consts).finish()
    }
}

impl StatsPlan {
    pub fn new(hurst: f64, gamma_: f64, grid: SampleGrid) -> Result<Self> {
        let consts = constants(hurst, gamma_)?;
        let a = 0.5 - hurst;
        let n = grid.n;
        let dt = grid.dt();
        let rules = CellRules::new(a)?;
        let interior = gauss_legendre01(INTERIOR_NODES)?;
        let s_scale = dt.powf(2.0 * a) / (consts.kappa * gamma_);

        let direct_max = (2 * EDGE).min(n);
        let small: Vec<Vec<f64>> = (0..=direct_max)
            .map(|m| (0..m).map(|r| rules.cell_plain(m, r)).collect())
            .collect();

        let conv = if n > direct_max {
            let len = 2 * n;
            let mut planner = FftPlanner::new();
            let fwd = planner.plan_fft_forward(len);
            let inv = planner.plan_fft_inverse(len);
            let mut left_pow = Vec::with_capacity(INTERIOR_NODES);
            let mut g_hat = Vec::with_capacity(INTERIOR_NODES);
            for (&x, &wq) in interior.nodes.iter().zip(&interior.weights) {
                left_pow.push((0..n).map(|j| (j as f64 + x).powf(a)).collect::<Vec<_>>());
                let mut g = vec![Complex64::new(0.0, 0.0); len];
                for (k, gk) in g.iter_mut().enumerate().take(n + 1).skip(1) {
                    *gk = Complex64::new(wq * (k as f64 - x).powf(a), 0.0);
                }
                fwd.process(&mut g);
                g_hat.push(g);
            }
            let mut delta = vec![[0.0; EDGE]; n + 1];
            for (m, d) in delta.iter_mut().enumerate().skip(direct_max + 1) {
                for (r, dr) in d.iter_mut().enumerate() {
                    let approx: f64 = interior
                        .nodes
                        .iter()
                        .zip(&interior.weights)
                        .map(|(&x, &wq)| {
                            let u = r as f64 + x;
                            wq * (u * (m as f64 - u)).powf(a)
                        })
                        .sum();
                    *dr = rules.cell_plain(m, r) - approx;
                }
            }
            Some(Convolver { len, fwd, inv, left_pow, g_hat, delta })
        } else {
            None
        };

        let j_scale = dt.powf(1.0 + 2.0 * a) / (consts.kappa * gamma_);
        let j_weights = hat_weights(&rules, &interior, n).into_iter().map(|v| v * j_scale).collect();
        let times = grid.times();
        let w = times.iter().map(|&t| consts.w(t)).collect();
        let r = times.iter().map(|&t| t.powf(2.0 * hurst - 1.0)).collect();
        Ok(Self {
            grid,
            consts,
            a,
            s_scale,
            small,
            conv,
            j_weights,
            w,
            r,
            rules_interior: interior,
        })
    }

    pub fn for_path(path: &VasicekPath) -> Result<Self> {
        Self::new(path.params.hurst, path.params.gamma, path.grid)
    }

    fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.grid.n + 1 {
            return Err(Error::Misaligned(values.len(), self.grid.n + 1));
        }
        Ok(())
    }

    pub fn w_panel(&self) -> &[f64] {
        &self.w
    }

    /// S_{t_m}, m = 0..n.
    pub fn s_panel(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_len(values)?;
        let n = self.grid.n;
        let dx: Vec<f64> = values.windows(2).map(|p| p[1] - p[0]).collect();
        let mut s = vec![0.0; n + 1];
        for (m, row) in self.small.iter().enumerate() {
            s[m] = self.s_scale * ksum(row.iter().zip(&dx).map(|(c, d)| c * d));
        }
        if let Some(cv) = &self.conv {
            let mut acc = vec![Complex64::new(0.0, 0.0); cv.len];
            let mut buf = vec![Complex64::new(0.0, 0.0); cv.len];
            for (lp, gh) in cv.left_pow.iter().zip(&cv.g_hat) {
                for (b, (d, l)) in buf.iter_mut().zip(dx.iter().zip(lp)) {
                    *b = Complex64::new(d * l, 0.0);
                }
                for b in buf.iter_mut().skip(n) {
                    *b = Complex64::new(0.0, 0.0);
                }
                cv.fwd.process(&mut buf);
                for ((a, b), g) in acc.iter_mut().zip(&buf).zip(gh) {
                    *a += b * g;
                }
            }
            cv.inv.process(&mut acc);
            let norm = 1.0 / cv.len as f64;
            for m in self.small.len()..=n {
                let mut v = acc[m].re * norm;
                let d = &cv.delta[m];
                for r in 0..EDGE {
                    v += d[r] * (dx[r] + dx[m - 1 - r]);
                }
                s[m] = self.s_scale * v;
            }
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::Quadrature("non-finite S panel".into()));
        }
        Ok(s)
    }

    /// J_T = (1/γ)∫_0^T k_H(T,s) X_s ds
    pub fn j_stat(&self, values: &[f64]) -> Result<f64> {
        self.check_len(values)?;
        Ok(ksum(self.j_weights.iter().zip(values).map(|(w, x)| w * x)))
    }

    /// P_H from S through P_H(t) = x₀/γ + (λ*/2)(t^{2H−1}S_t + ∫_0^t r^{2H−1}dS_r).
    pub fn p_panel(&self, x0: f64, s: &[f64]) -> Result<Vec<f64>> {
        self.check_len(s)?;
        let c = &self.consts;
        let mut p = Vec::with_capacity(s.len());
        let mut cum = 0.0;
        let mut comp = 0.0;
        p.push(x0 / c.gamma + 0.5 * c.lambda_star * self.r[0] * s[0]);
        for j in 0..self.grid.n {
            let inc = 0.5 * (self.r[j] + self.r[j + 1]) * (s[j + 1] - s[j]);
            // compensated running sum
            let y = inc - comp;
            let t = cum + y;
            comp = (t - cum) - y;
            cum = t;
            p.push(x0 / c.gamma + 0.5 * c.lambda_star * (self.r[j + 1] * s[j + 1] + cum));
        }
        Ok(p)
    }

    pub fn panels(&self, values: &[f64]) -> Result<ProcessPanel> {
        let s = self.s_panel(values)?;
        let p = self.p_panel(values[0], &s)?;
        Ok(ProcessPanel { times: self.grid.times(), s, p, w: self.w.clone() })
    }

    pub fn stats(&self, values: &[f64]) -> Result<SufficientStats> {
        let panel = self.panels(values)?;
        let (i_t, k_t) = compute_i_k(&panel.p, &panel.s, &panel.w, self.grid.horizon)?;
        Ok(SufficientStats {
            s_t: panel.s[self.grid.n],
            i_t,
            j_t: self.j_stat(values)?,
            k_t,
            w_t: self.w[self.grid.n],
            horizon: self.grid.horizon,
            hurst: self.consts.hurst,
            gamma: self.consts.gamma,
        })
    }

    /// F(t_m) = (1/γ)∫_0^{t_m} k_H(t_m,s)X_s ds for one m.
    fn f_at(&self, rules: &CellRules, values: &[f64], m: usize) -> f64 {
        let wts = hat_weights(rules, &self.rules_interior, m);
        let scale = self.grid.dt().powf(1.0 + 2.0 * self.a) / (self.consts.kappa * self.consts.gamma);
        scale * ksum(wts.iter().zip(values).map(|(w, x)| w * x))
    }

    /// P_H by centered differences of F in the w-clock on every `stride`-th point.
    /// Returns (times, values) at interior inner-grid points.
    pub fn p_centered_difference(&self, values: &[f64], stride: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_len(values)?;
        if stride == 0 || 2 * stride > self.grid.n {
            return domain(format!("stride {stride} incompatible with n = {}", self.grid.n));
        }
        let rules = CellRules::new(self.a)?;
        let pts: Vec<usize> = (0..=self.grid.n / stride).map(|k| k * stride).collect();
        let f: Vec<f64> = pts.iter().map(|&m| if m == 0 { 0.0 } else { self.f_at(&rules, values, m) }).collect();
        let mut times = Vec::new();
        let mut out = Vec::new();
        for k in 1..pts.len() - 1 {
            let (lo, hi) = (pts[k - 1], pts[k + 1]);
            times.push(self.grid.time(pts[k]));
            out.push((f[k + 1] - f[k - 1]) / (self.w[hi] - self.w[lo]));
        }
        Ok((times, out))
    }
}

/// I_T = ∫P dS as the trapezoid sum minus ½⟨P,S⟩_T (= T/2); K_T = ∫P² dw.
pub fn compute_i_k(p: &[f64], s: &[f64], w: &[f64], horizon: f64) -> Result<(f64, f64)> {
    if p.len() != s.len() {
        return Err(Error::Misaligned(p.len(), s.len()));
    }
    if p.len() != w.len() {
        return Err(Error::Misaligned(p.len(), w.len()));
    }
    let strat = ksum((0..p.len() - 1).map(|j| 0.5 * (p[j] + p[j + 1]) * (s[j + 1] - s[j])));
    let k = ksum((0..p.len() - 1).map(|j| 0.5 * (p[j] * p[j] + p[j + 1] * p[j + 1]) * (w[j + 1] - w[j])));
    Ok((strat - 0.5 * horizon, k.max(0.0)))
}

pub fn compute_s(path: &VasicekPath) -> Result<Vec<f64>> {
    StatsPlan::for_path(path)?.s_panel(&path.values)
}

pub fn compute_j(path: &VasicekPath) -> Result<f64> {
    StatsPlan::for_path(path)?.j_stat(&path.values)
}

pub fn compute_ph(path: &VasicekPath) -> Result<Vec<f64>> {
    let plan = StatsPlan::for_path(path)?;
    let s = plan.s_panel(&path.values)?;
    plan.p_panel(path.params.x0, &s)
}

pub fn sufficient_stats(path: &VasicekPath) -> Result<SufficientStats> {
    StatsPlan::for_path(path)?.stats(&path.values)
}

/// Q_H(t) = α/γ − βP_H(t)
pub fn q_panel(p: &[f64], params: &ModelParams) -> Vec<f64> {
    p.iter().map(|v| params.alpha / params.gamma - params.beta * v).collect()
}

/// M_T = S_T + βJ_T − (α/γ)w_T
pub fn martingale_m(stats: &SufficientStats, params: &ModelParams) -> f64 {
    stats.s_t + params.beta * stats.j_t - params.alpha / params.gamma * stats.w_t
}

/// K_H(t,s) = γH(2H−1)∫_s^t r^{H−½}(r−s)^{H−3/2}dr
pub fn kernel_big_k(t: f64, s: f64, hurst: f64, gamma_: f64) -> Result<f64> {
    Ok(BigK::new(hurst)?.eval(t, s, gamma_))
}

const BIG_K_TERMS: usize = 90;

struct BigK {
    h: f64,
    rule: Rule,
    /// c_k/(k+1−2H) for (1−u)^{H−3/2} = Σ c_k u^k
    low: Vec<f64>,
    /// Σ c_k 2^{−(k+1−2H)}/(k+1−2H)
    low_half: f64,
    /// ∫_{1/2}^1 u^{−2H}(1−u)^{H−3/2} du
    upper: f64,
}

impl BigK {
    fn new(h: f64) -> Result<Self> {
        if !(h > 0.5 && h < 1.0) {
            return domain(format!("K_H needs H in (1/2,1), got {h}"));
        }
        let b = h - 1.5;
        let mut low = Vec::with_capacity(BIG_K_TERMS);
        let (mut c, mut d) = (1.0, 1.0);
        let (mut low_half, mut upper) = (0.0, 0.0);
        for k in 0..BIG_K_TERMS {
            let kf = k as f64;
            let e = kf + 1.0 - 2.0 * h;
            low.push(c / e);
            low_half += c / e * 0.5f64.powf(e);
            let f = kf + h - 0.5;
            upper += d * 0.5f64.powf(f) / f;
            c *= (kf - b) / (kf + 1.0);
            d *= (kf + 2.0 * h) / (kf + 1.0);
        }
        Ok(Self { h, rule: gauss_jacobi01(16, b, 0.0)?, low, low_half, upper })
    }

    /// ∫_s^t r^{H−1/2}(r−s)^{H−3/2} dr
    fn integral(&self, t: f64, s: f64) -> f64 {
        let h = self.h;
        if s >= t {
            return 0.0;
        }
        if s <= 0.0 {
            return t.powf(2.0 * h - 1.0) / (2.0 * h - 1.0);
        }
        if 2.0 * s < t {
            let x = s / t;
            let mut p = x.powf(1.0 - 2.0 * h);
            let mut tail = 0.0;
            for c in &self.low {
                tail += c * p;
                p *= x;
            }
            return s.powf(2.0 * h - 1.0) * (self.low_half - tail + self.upper);
        }
        let d = t - s;
        d.powf(h - 0.5) * self.rule.integrate(|v| (s + d * v).powf(h - 0.5))
    }

    fn eval(&self, t: f64, s: f64, g: f64) -> f64 {
        g * self.h * (2.0 * self.h - 1.0) * self.integral(t, s)
    }
}

/// X_t = x₀ + ∫_0^t K_H(t,s) dS_s at every `stride`-th grid point; returns (times, values).
pub fn reconstruct_x(
    s: &[f64],
    grid: SampleGrid,
    params: &ModelParams,
    stride: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    params.validate()?;
    if s.len() != grid.n + 1 {
        return Err(Error::Misaligned(s.len(), grid.n + 1));
    }
    if stride == 0 {
        return domain("stride must be positive");
    }
    let h = params.hurst;
    let kern = BigK::new(h)?;
    let dt = grid.dt();
    let mut times = Vec::new();
    let mut xs = Vec::new();
    let mut m = 0;
    while m <= grid.n {
        let t = grid.time(m);
        let v = ksum((0..m).map(|j| {
            let mid = (j as f64 + 0.5) * dt;
            kern.eval(t, mid, params.gamma) * (s[j + 1] - s[j])
        }));
        if !v.is_finite() {
            return Err(Error::Quadrature("non-finite reconstruction".into()));
        }
        times.push(t);
        xs.push(params.x0 + v);
        m += stride;
    }
    Ok((times, xs))
}

/// CSV `replication,seed,S_T,I_T,J_T,K_T,w_T`
pub fn write_stats_csv<W: std::io::Write>(w: W, rows: &[(usize, u64, SufficientStats)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["replication", "seed", "S_T", "I_T", "J_T", "K_T", "w_T"])?;
    for (i, seed, st) in rows {
        out.write_record([
            i.to_string(),
            seed.to_string(),
            format!("{:.16e}", st.s_t),
            format!("{:.16e}", st.i_t),
            format!("{:.16e}", st.j_t),
            format!("{:.16e}", st.k_t),
            format!("{:.16e}", st.w_t),
        ])?;
    }
    out.flush()?;
    Ok(())
}
