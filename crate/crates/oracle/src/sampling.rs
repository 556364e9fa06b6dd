//! Samplers for the variance-prior chains and a one-sample Kolmogorov-Smirnov test.

use std::f64::consts::PI;

use nalgebra::Cholesky;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};

use crate::{Matrix, OracleError, Result};

/// `x ~ Inverse-χ²(κ, λ)`, i.e. `1/x ~ Gamma(κ/2, rate λ/2)`.
pub fn inv_chisq<R: Rng>(kappa: f64, lambda: f64, rng: &mut R) -> f64 {
    1.0 / Gamma::new(0.5 * kappa, 2.0 / lambda).expect("positive shape and scale").sample(rng)
}

/// `X ~ Inverse-Wishart(κ, Λ)` through a Bartlett draw of `X⁻¹ ~ Wishart(κ, Λ⁻¹)`.
pub fn inverse_wishart<R: Rng>(kappa: f64, lambda: &Matrix, rng: &mut R) -> Result<Matrix> {
    let d = lambda.nrows();
    if !(kappa > d as f64 - 1.0) {
        return Err(OracleError::Invalid(format!("κ = {kappa} must exceed d − 1")));
    }
    let lambda_inv = Cholesky::new(lambda.clone()).ok_or(OracleError::Invalid("Λ is not SPD".into()))?.inverse();
    let l = Cholesky::new(lambda_inv).ok_or(OracleError::Invalid("Λ⁻¹ is not SPD".into()))?.l();
    let mut a = Matrix::zeros(d, d);
    for i in 0..d {
        a[(i, i)] = ChiSquared::new(kappa - i as f64).expect("positive df").sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(rng);
        }
    }
    let la = l * a;
    let w = &la * la.transpose();
    Cholesky::new(w).map(|c| c.inverse()).ok_or(OracleError::Invalid("Wishart draw is singular".into()))
}

/// Diagonal `X` with independent `X_ii ~ Inverse-χ²(κ + d − 1, Λ_ii)`.
pub fn inverse_g_wishart_diag<R: Rng>(kappa: f64, lambda_diag: &[f64], rng: &mut R) -> Matrix {
    let d = lambda_diag.len();
    let shape = kappa + d as f64 - 1.0;
    Matrix::from_diagonal(&nalgebra::DVector::from_iterator(d, lambda_diag.iter().map(|&l| inv_chisq(shape, l, rng))))
}

/// `(2/π)·atan(x/A)` for `x ≥ 0`.
pub fn half_cauchy_cdf(x: f64, a: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        2.0 / PI * (x / a).atan()
    }
}

/// Standard deviations from the original two-level Half-Cauchy construction
/// `σ²|a ~ Inverse-Gamma(½, 1/a)`, `a ~ Inverse-Gamma(½, 1/A²)`.
pub fn half_cauchy_reference<R: Rng>(a_hyper: f64, draws: usize, rng: &mut R) -> Vec<f64> {
    (0..draws)
        .map(|_| {
            let a = 1.0 / Gamma::new(0.5, a_hyper * a_hyper).expect("valid").sample(rng);
            let s2 = 1.0 / Gamma::new(0.5, a).expect("valid").sample(rng);
            s2.sqrt()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov survival function `Q(λ) = 2Σ(−1)^{k−1}exp(−2k²λ²)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test of `sample` against a continuous `cdf`.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    KsResult { statistic: d, p_value: kolmogorov_q((sn + 0.12 + 0.11 / sn) * d) }
}
