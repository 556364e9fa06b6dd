//! Special functions: digamma, exponential integral, normal CDF helpers.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Result, VmpError};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `log Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Digamma function ψ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(VmpError::domain("digamma argument", format!("{x} is not a positive finite number")));
    }
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Asymptotic series with Bernoulli numbers B2..B14.
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    shift + x.ln() - 0.5 / x - series
}

/// Exponential integral `Ei(x) = −∫_{−x}^∞ e^{−t}/t dt`, `x ≠ 0`.
pub fn exponential_integral_ei(x: f64) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        return Err(VmpError::domain("Ei argument", format!("{x} must be finite and non-zero")));
    }
    if x < 0.0 {
        Ok(-expint_e1(-x))
    } else {
        Ok(ei_positive(x))
    }
}

/// `e^z·E₁(z)` for z > 0, finite for arbitrarily large z.
pub(crate) fn expint_e1_scaled(z: f64) -> f64 {
    if z <= 1.0 {
        z.exp() * expint_e1(z)
    } else {
        e1_continued_fraction(z)
    }
}

/// `E₁(z) = ∫_z^∞ e^{−t}/t dt` for z > 0. Series below 1, Lentz continued fraction above.
fn expint_e1(z: f64) -> f64 {
    if z > 1.0 {
        return e1_continued_fraction(z) * (-z).exp();
    }
    {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -z / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - z.ln() - sum
    }
}

/// Continued fraction for `e^z·E₁(z)`, z > 1.
fn e1_continued_fraction(z: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

fn ei_positive(x: f64) -> f64 {
    if x < 40.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..500 {
            term *= x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add < 1e-17 * sum {
                break;
            }
        }
        EULER_GAMMA + x.ln() + sum
    } else {
        let mut sum = 1.0;
        let mut term = 1.0;
        for k in 1..40 {
            let next = term * k as f64 / x;
            if next > term {
                break;
            }
            term = next;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        x.exp() / x * sum
    }
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x * FRAC_1_SQRT_2)
}

/// Mills ratio `(1 − Φ(t))/φ(t)` for large positive t, by continued fraction.
fn mills_ratio(t: f64) -> f64 {
    let mut acc = t;
    for k in (1..=200).rev() {
        acc = t + k as f64 / acc;
    }
    1.0 / acc
}

/// `log Φ(x)`, stable in the lower tail.
pub fn log_norm_cdf(x: f64) -> f64 {
    if x < -8.0 {
        let t = -x;
        -0.5 * t * t - 0.5 * (2.0 * PI).ln() + mills_ratio(t).ln()
    } else {
        norm_cdf(x).ln()
    }
}

/// `ζ′(x) = φ(x)/Φ(x)`, the derivative of `log Φ`.
pub fn zeta_prime(x: f64) -> f64 {
    if x < -8.0 {
        1.0 / mills_ratio(-x)
    } else {
        norm_pdf(x) / norm_cdf(x)
    }
}

/// Standard normal quantile.
pub fn norm_quantile(p: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::standard().inverse_cdf(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn digamma_reference_values() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-15);
        let half = -EULER_GAMMA - 2.0 * 2f64.ln();
        assert!((digamma(0.5).unwrap() - half).abs() < 1e-14);
        assert!((digamma(0.5).unwrap() + 1.963_510_026_021_423).abs() < 1e-14);
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.0).is_err());
    }

    #[test]
    fn digamma_large_argument() {
        // ψ(x) ≈ ln x − 1/(2x) − 1/(12x²) for large x.
        let x: f64 = 1e6;
        let approx = x.ln() - 0.5 / x - 1.0 / (12.0 * x * x);
        assert!(((digamma(x).unwrap() - approx) / approx).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn digamma_recurrence(x in 1e-3f64..1e4) {
            let lhs = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
            prop_assert!((lhs - 1.0 / x).abs() <= 1e-12 * (1.0 / x).max(1.0));
        }
    }

    #[test]
    fn ei_reference_values() {
        let e1 = exponential_integral_ei(-1.0).unwrap();
        assert!((e1 + 0.219_383_934_395_520_3).abs() < 1e-15);
        let e10 = exponential_integral_ei(-10.0).unwrap();
        assert!(((e10 + 4.156_968_929_685_324e-6) / 4.156_968_929_685_324e-6).abs() < 1e-12);
        assert!(exponential_integral_ei(0.0).is_err());
        // Ei(1) = 1.8951178163559368
        assert!((exponential_integral_ei(1.0).unwrap() - 1.895_117_816_355_936_8).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn ei_tail_bound(x in -700f64..-1.0) {
            let v = exponential_integral_ei(x).unwrap();
            prop_assert!(v < 0.0);
            prop_assert!(v.abs() <= x.exp() / x.abs());
        }
    }

    #[test]
    fn zeta_prime_values() {
        assert!((zeta_prime(0.0) - (2.0 / PI).sqrt()).abs() < 1e-15);
        let z = zeta_prime(-30.0);
        assert!((z - 30.033_259_667_433_677).abs() < 1e-10, "{z}");
        // Continuity across the switch.
        assert!((zeta_prime(-8.0 - 1e-12) - zeta_prime(-8.0 + 1e-12)).abs() < 1e-9);
        let mut prev = zeta_prime(0.0);
        for i in 1..370 {
            let z = zeta_prime(i as f64 * 0.1);
            assert!(z > 0.0 && z <= prev);
            prev = z;
        }
    }

    #[test]
    fn log_norm_cdf_tail() {
        assert!((log_norm_cdf(-8.0 - 1e-12) - log_norm_cdf(-8.0 + 1e-12)).abs() < 1e-9);
        assert!((log_norm_cdf(0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!(log_norm_cdf(-40.0).is_finite());
    }
}
