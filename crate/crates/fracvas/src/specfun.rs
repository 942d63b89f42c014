//! Modified Bessel functions of the first kind and log-gamma.
//!
//! Everything is evaluated in the scaled form `e^{-x} I_nu(x)`; the unscaled value
//! is derived from it.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Series below, asymptotic expansion above.
pub const CROSSOVER: f64 = 30.0;

const GAMMLN_COF: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

/// ln Γ(x) for x > 0 (Lanczos-type, g = 671/128).
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("log_gamma needs x > 0, got {x}"));
    }
    Ok(lgamma_pos(x))
}

fn lgamma_pos(x: f64) -> f64 {
    let tmp = x + 5.242_187_5;
    let tmp = (x + 0.5) * tmp.ln() - tmp;
    let mut ser = 0.999_999_999_999_997_092;
    let mut y = x;
    for c in GAMMLN_COF {
        y += 1.0;
        ser += c / y;
    }
    tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}

/// Γ(x) for any non-pole real x (reflection below zero).
pub(crate) fn gamma_signed(x: f64) -> f64 {
    if x > 0.0 {
        lgamma_pos(x).exp()
    } else {
        PI / ((PI * x).sin() * lgamma_pos(1.0 - x).exp())
    }
}

pub(crate) fn gamma(x: f64) -> f64 {
    gamma_signed(x)
}

fn check(nu: f64, x: f64) -> Result<()> {
    if !(nu > -1.0) || !nu.is_finite() {
        return domain(format!("Bessel order must satisfy nu > -1, got {nu}"));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return domain(format!("Bessel argument must be finite and >= 0, got {x}"));
    }
    Ok(())
}

/// I_nu(x), nu > -1, x >= 0.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    check(nu, x)?;
    Ok(scaled_unchecked(nu, x) * x.exp())
}

/// e^{-x} I_nu(x).
pub fn bessel_i_scaled(nu: f64, x: f64) -> Result<f64> {
    check(nu, x)?;
    Ok(scaled_unchecked(nu, x))
}

/// ln(e^{-x} I_nu(x)); finite for x > 0.
pub fn log_bessel_i_scaled(nu: f64, x: f64) -> Result<f64> {
    check(nu, x)?;
    Ok(scaled_unchecked(nu, x).ln())
}

/// I_nu(x)/x^nu continued evenly to negative x.
pub fn bessel_ratio_even(nu: f64, x: f64) -> Result<f64> {
    if !(nu > -1.0) || !nu.is_finite() {
        return domain(format!("Bessel order must satisfy nu > -1, got {nu}"));
    }
    let ax = x.abs();
    if ax <= CROSSOVER {
        let q = 0.25 * ax * ax;
        let mut t = 2f64.powf(-nu) / gamma_signed(1.0 + nu);
        let mut sum = t;
        let mut j = 0.0;
        loop {
            j += 1.0;
            t *= q / (j * (j + nu));
            sum += t;
            if t.abs() <= 1e-17 * sum.abs() && j > 0.5 * ax {
                break;
            }
        }
        Ok(sum)
    } else {
        Ok((scaled_unchecked(nu, ax).ln() + ax - nu * ax.ln()).exp())
    }
}

/// e^{-x} I_nu(x) without order checks; non-integer nu < -1 allowed.
pub(crate) fn scaled_unchecked(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    if x <= CROSSOVER {
        series(nu, x) * (-x).exp()
    } else {
        asymptotic(nu, x)
    }
}

fn series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut t = half.powf(nu) / gamma_signed(1.0 + nu);
    let mut sum = t;
    let mut j = 0.0;
    loop {
        j += 1.0;
        t *= q / (j * (j + nu));
        sum += t;
        if t.abs() <= 1e-17 * sum.abs() && j > half {
            break;
        }
    }
    sum
}

fn asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * k * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn log_gamma_table() {
        let table = [
            (0.01, 4.599_479_878_042_021_7),
            (0.3, 1.095_797_994_818_075_5),
            (0.5, 0.572_364_942_924_700_09),
            (1.2, -0.085_374_090_003_315_85),
            (1.5, -0.120_782_237_635_245_22),
            (2.5, 0.284_682_870_472_919_16),
            (3.7, 1.428_072_326_665_387_9),
            (10.0, 12.801_827_480_081_47),
            (57.25, 173.361_912_830_627_24),
            (199.5, 855.286_389_273_452_6),
        ];
        for (x, want) in table {
            let got = log_gamma(x).unwrap();
            assert!(rel(got, want) < 1e-13, "lgamma({x}) = {got}, want {want}");
        }
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-15);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
    }

    #[test]
    fn gamma_reflection() {
        // Γ(-0.5) = -2√π
        assert!(rel(gamma_signed(-0.5), -2.0 * PI.sqrt()) < 1e-13);
        assert!(rel(gamma_signed(0.5), PI.sqrt()) < 1e-14);
    }

    #[test]
    fn bessel_examples() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i_scaled(0.0, 0.0).unwrap(), 1.0);
        let want = (2.0 / (PI * 2.0)).sqrt() * 2f64.sinh();
        assert!(rel(bessel_i(0.5, 2.0).unwrap(), want) < 1e-14);
        assert!(rel(bessel_i(0.5, 2.0).unwrap(), 2.046_236_863_089_055) < 1e-14);
        assert!(rel(bessel_i(0.3, 10.0).unwrap(), 2_802.362_488_974_458_5) < 1e-12);
        let want = (1.0 - (-100f64).exp()) / (2.0 * PI * 50.0).sqrt();
        assert!(rel(bessel_i_scaled(0.5, 50.0).unwrap(), want) < 1e-14);
        let two_term = (2.0 * PI * 200.0f64).powf(-0.5) * (1.0 - (4.0 * 0.49 - 1.0) / 1600.0);
        assert!(rel(bessel_i_scaled(0.7, 200.0).unwrap(), two_term) < 1e-4);
    }

    #[test]
    fn bessel_domain() {
        assert!(bessel_i(-1.0, 1.0).is_err());
        assert!(bessel_i(0.3, -1.0).is_err());
        assert!(bessel_i_scaled(-1.2, 1.0).is_err());
        assert!(bessel_ratio_even(-1.0, 1.0).is_err());
    }

    #[test]
    fn ratio_even() {
        let a = bessel_ratio_even(0.3, -1.7).unwrap();
        let b = bessel_ratio_even(0.3, 1.7).unwrap();
        assert_eq!(a, b);
        let a = bessel_ratio_even(0.3, -41.0).unwrap();
        let b = bessel_ratio_even(0.3, 41.0).unwrap();
        assert_eq!(a, b);
        let z = bessel_ratio_even(0.4, 0.0).unwrap();
        assert!(rel(z, 0.854_152_134_128_440_6) < 1e-13);
        assert!(rel(bessel_ratio_even(0.0, 3.0).unwrap(), bessel_i(0.0, 3.0).unwrap()) < 1e-14);
        assert!(rel(bessel_i(0.0, 3.0).unwrap(), 4.880_792_585_865_024) < 1e-14);
        let direct = bessel_i(0.7, 12.0).unwrap() / 12f64.powf(0.7);
        assert!(rel(bessel_ratio_even(0.7, 12.0).unwrap(), direct) < 1e-13);
    }

    #[test]
    fn unchecked_orders_below_minus_one() {
        let table = [
            (-1.7, 0.5, -1.350_223_323_705_253_3),
            (-1.7, 3.0, 0.135_518_400_253_514_08),
            (-1.7, 20.0, 0.083_367_100_666_604_55),
            (-1.7, 45.0, 0.057_732_608_818_977_59),
            (-1.3, 0.5, -0.664_821_664_762_943_7),
            (-1.3, 3.0, 0.170_662_235_306_120_87),
            (-1.3, 20.0, 0.085_971_385_852_192_24),
            (-1.3, 45.0, 0.058_516_259_158_284_03),
        ];
        for (nu, x, want) in table {
            let got = scaled_unchecked(nu, x);
            assert!(rel(got, want) < 1e-12, "nu={nu} x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn scaled_times_exp_is_unscaled() {
        for &nu in &[-0.7, -0.3, 0.0, 0.3, 0.7] {
            for i in 0..60 {
                let x = 0.05 + i as f64 * 1.3;
                let s = bessel_i_scaled(nu, x).unwrap() * x.exp();
                assert!(rel(s, bessel_i(nu, x).unwrap()) < 1e-12);
            }
        }
    }

    #[test]
    fn three_term_recurrence() {
        for &nu in &[-0.7, -0.3, 0.3, 0.7] {
            for i in 0..100 {
                let x = 0.1 + i as f64 * (49.9 / 99.0);
                let lhs = scaled_unchecked(nu - 1.0, x) - scaled_unchecked(nu + 1.0, x);
                let rhs = 2.0 * nu / x * scaled_unchecked(nu, x);
                assert!(rel(lhs, rhs) < 1e-10, "nu={nu} x={x}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn two_term_remainder_bounded() {
        for &nu in &[-0.7, -0.3, 0.3, 0.7] {
            let mu: f64 = 4.0 * nu * nu;
            let c_max = ((mu - 1.0) * (mu - 9.0)).abs() / 128.0;
            for i in 0..=45 {
                let x = 50.0 + 10.0 * i as f64;
                let r = bessel_i_scaled(nu, x).unwrap() * (2.0 * PI * x).sqrt() - (1.0 - (mu - 1.0) / (8.0 * x));
                assert!(r.abs() * x * x <= 1.05 * c_max, "nu={nu} x={x}");
            }
        }
    }
}
