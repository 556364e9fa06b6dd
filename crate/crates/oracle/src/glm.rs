//! Coordinate-ascent MFVB for binary-response penalized splines:
//! `β ~ N(0, σ_β² I)`, `u ~ N(0, σ_u² I)`, `σ_u ~ Half-Cauchy(A)` through the
//! auxiliary chain, with Jaakkola-Jordan (logit) or Albert-Chib (probit) augmentation.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::Cholesky;
use statrs::function::erf::erfc;

use crate::{Matrix, OracleError, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryLink {
    Logit,
    Probit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryFit {
    pub mu: Vector,
    pub sigma: Matrix,
    /// `q(σ_u²) = Inverse-χ²(K + 1, λ)`.
    pub lambda_q_sigsq_u: f64,
    /// `q(a_u) = Inverse-χ²(2, λ)`.
    pub lambda_q_a_u: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn jj(xi: f64) -> f64 {
    let x = xi.abs();
    if x < 1e-6 {
        0.125
    } else {
        (0.5 * x).tanh() / (4.0 * x)
    }
}

/// `φ(x)/Φ(x)`.
fn mills_ratio(x: f64) -> f64 {
    if x < -35.0 {
        // Leading terms of the asymptotic expansion.
        let x2 = x * x;
        return -x / (1.0 - 1.0 / x2 + 3.0 / (x2 * x2));
    }
    let pdf = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    pdf / (0.5 * erfc(-x / SQRT_2))
}

/// `C = [X Z]` with the first `d0` columns unpenalized.
#[allow(clippy::too_many_arguments)]
pub fn mfvb_binary_spline(
    y: &[f64],
    c: &Matrix,
    d0: usize,
    sigma_beta_sq: f64,
    a_hyper: f64,
    link: BinaryLink,
    tol: f64,
    max_iter: usize,
) -> Result<BinaryFit> {
    let (n, p) = c.shape();
    if y.len() != n || d0 > p {
        return Err(OracleError::Invalid("dimension mismatch".into()));
    }
    let k = (p - d0) as f64;
    let s: Vec<f64> = y.iter().map(|&v| 2.0 * v - 1.0).collect();
    let ct = c.transpose();
    let ctc = &ct * c;
    let mut fit = BinaryFit {
        mu: Vector::zeros(p),
        sigma: Matrix::identity(p, p),
        lambda_q_sigsq_u: 1.0,
        lambda_q_a_u: 1.0,
        iterations: 0,
        converged: false,
    };
    let mut xi = vec![1.0; n];
    for _ in 0..max_iter {
        let old = (fit.mu.clone(), fit.lambda_q_sigsq_u);
        let e_inv_u = (k + 1.0) / fit.lambda_q_sigsq_u;
        let mut prec = match link {
            BinaryLink::Logit => {
                let mut g = Matrix::zeros(p, p);
                for i in 0..n {
                    let row = c.row(i);
                    g += row.transpose() * row * (2.0 * jj(xi[i]));
                }
                g
            }
            BinaryLink::Probit => ctc.clone(),
        };
        for j in 0..p {
            prec[(j, j)] += if j < d0 { 1.0 / sigma_beta_sq } else { e_inv_u };
        }
        fit.sigma = Cholesky::new(prec).ok_or(OracleError::Singular("Σ_q(β,u)"))?.inverse();
        let rhs: Vector = match link {
            BinaryLink::Logit => &ct * Vector::from_iterator(n, y.iter().map(|v| v - 0.5)),
            BinaryLink::Probit => {
                let nu = c * &fit.mu;
                &ct * Vector::from_fn(n, |i, _| nu[i] + s[i] * mills_ratio(s[i] * nu[i]))
            }
        };
        fit.mu = &fit.sigma * rhs;
        if link == BinaryLink::Logit {
            let second = &fit.sigma + &fit.mu * fit.mu.transpose();
            for i in 0..n {
                let row = c.row(i);
                xi[i] = (row * &second * row.transpose())[(0, 0)].sqrt();
            }
        }
        fit.lambda_q_a_u = e_inv_u + a_hyper.powi(-2);
        let mu_u = fit.mu.rows(d0, p - d0);
        let tr: f64 = (d0..p).map(|j| fit.sigma[(j, j)]).sum();
        fit.lambda_q_sigsq_u = mu_u.dot(&mu_u) + tr + 2.0 / fit.lambda_q_a_u;
        fit.iterations += 1;
        let dmu = (&fit.mu - &old.0).iter().zip(fit.mu.iter()).map(|(d, m)| d.abs() / m.abs().max(1.0)).fold(0.0, f64::max);
        let dl = (fit.lambda_q_sigsq_u - old.1).abs() / fit.lambda_q_sigsq_u;
        if dmu.max(dl) < tol {
            fit.converged = true;
            break;
        }
    }
    Ok(fit)
}
