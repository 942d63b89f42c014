//! Gauss rules on [0, 1] via Golub–Welsch.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{domain, Result};
use crate::specfun::log_gamma;

#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Rule for ∫_0^1 f(u) u^p (1-u)^q du, p, q > -1.
pub fn gauss_jacobi01(n: usize, p: f64, q: f64) -> Result<Rule> {
    if n == 0 {
        return domain("quadrature order must be positive");
    }
    if !(p > -1.0 && q > -1.0) {
        return domain(format!("Jacobi exponents must exceed -1, got ({p}, {q})"));
    }
    // Jacobi polynomial P^{(al, be)} on [-1,1] with weight (1-x)^al (1+x)^be
    let (al, be) = (q, p);
    let ab = al + be;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for (k, d) in diag.iter_mut().enumerate() {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        *d = if k == 0 {
            (be - al) / (ab + 2.0)
        } else {
            (be * be - al * al) / (s * (s + 2.0))
        };
    }
    for (i, o) in off.iter_mut().enumerate() {
        let k = (i + 1) as f64;
        let s = 2.0 * k + ab;
        let num = 4.0 * k * (k + al) * (k + be) * (k + ab);
        let den = s * s * (s + 1.0) * (s - 1.0);
        *o = (num / den).sqrt();
    }
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jm[(k, k)] = diag[k];
        if k + 1 < n {
            jm[(k, k + 1)] = off[k];
            jm[(k + 1, k)] = off[k];
        }
    }
    let eig = SymmetricEigen::new(jm);
    // total mass of u^p (1-u)^q on [0,1]
    let mass = (log_gamma(p + 1.0)? + log_gamma(q + 1.0)? - log_gamma(p + q + 2.0)?).exp();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (0.5 * (1.0 + eig.eigenvalues[i]), mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

/// Gauss–Legendre on [0, 1].
pub fn gauss_legendre01(n: usize) -> Result<Rule> {
    gauss_jacobi01(n, 0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_polynomials_exact() {
        let r = gauss_legendre01(6).unwrap();
        for k in 0..12 {
            let got = r.integrate(|u| u.powi(k));
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "k={k}");
        }
        // symmetric nodes with equal weights
        for i in 0..6 {
            assert!((r.nodes[i] + r.nodes[5 - i] - 1.0).abs() < 1e-14);
            assert!((r.weights[i] - r.weights[5 - i]).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobi_moments() {
        let a = -0.2;
        let r = gauss_jacobi01(16, a, 0.0).unwrap();
        let s: f64 = r.weights.iter().sum();
        assert!((s - 1.0 / (a + 1.0)).abs() < 1e-14);
        // ∫ u^a u^2 du = 1/(a+3)
        assert!((r.integrate(|u| u * u) - 1.0 / (a + 3.0)).abs() < 1e-14);
        // beta integral with both ends singular
        let r = gauss_jacobi01(10, -0.3, -0.3).unwrap();
        let b = (log_gamma(0.7).unwrap() * 2.0 - log_gamma(1.4).unwrap()).exp();
        assert!((r.integrate(|_| 1.0) - b).abs() < 1e-13);
        let r = gauss_jacobi01(10, 0.0, -0.8).unwrap();
        assert!((r.integrate(|u| 1.0 - u) - 1.0 / 1.2).abs() < 1e-13);
    }
}
