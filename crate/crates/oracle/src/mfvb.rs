//! Coordinate-ascent MFVB for `y|β,σ² ~ N(Xβ, σ²I)`, `β ~ N(μ_β, Σ_β)`,
//! `σ²|a ~ Inverse-χ²(1, 1/a)`, `a ~ Inverse-χ²(1, 1/A²)`.

use std::f64::consts::PI;

use nalgebra::Cholesky;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::{Matrix, OracleError, Result, Vector};

/// `q(β) = N(μ, Σ)`, `q(σ²) = Inverse-χ²(n + 1, λ_σ)`, `q(a) = Inverse-χ²(2, λ_a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MfvbState {
    pub mu_q_beta: Vector,
    pub sigma_q_beta: Matrix,
    pub lambda_q_sigsq: f64,
    pub lambda_q_a: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfvbFit {
    pub state: MfvbState,
    pub iterations: usize,
    pub converged: bool,
    pub elbo_trace: Vec<f64>,
}

/// Which form of the cycle to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfvbVariant {
    /// Updates exactly as printed: `λ_q(a) ← 2{(n+1)/λ_q(σ²) + A⁻²}` and the
    /// prior mean term scaled by `(n+1)/λ_q(σ²)`.
    Printed,
    /// Updates re-derived from the model.
    Corrected,
}

/// Runs the corrected cycle from `λ_q(σ²) = 1`.
pub fn mfvb_linear_regression(
    y: &[f64],
    x: &Matrix,
    mu_beta: &Vector,
    sigma_beta: &Matrix,
    a_hyper: f64,
    tol: f64,
    max_iter: usize,
) -> Result<MfvbFit> {
    mfvb_linear_regression_variant(y, x, mu_beta, sigma_beta, a_hyper, tol, max_iter, MfvbVariant::Corrected)
}

#[allow(clippy::too_many_arguments)]
pub fn mfvb_linear_regression_variant(
    y: &[f64],
    x: &Matrix,
    mu_beta: &Vector,
    sigma_beta: &Matrix,
    a_hyper: f64,
    tol: f64,
    max_iter: usize,
    variant: MfvbVariant,
) -> Result<MfvbFit> {
    let n = y.len();
    let d = x.ncols();
    if x.nrows() != n || mu_beta.len() != d || sigma_beta.shape() != (d, d) {
        return Err(OracleError::Invalid("dimension mismatch".into()));
    }
    let y = Vector::from_column_slice(y);
    let xtx = x.transpose() * x;
    let xty = x.transpose() * &y;
    let yty = y.dot(&y);
    let prior_prec = Cholesky::new(sigma_beta.clone()).ok_or(OracleError::Singular("Σ_β"))?.inverse();
    let prior_term = &prior_prec * mu_beta;
    let nf = n as f64;

    let mut state = MfvbState {
        mu_q_beta: Vector::zeros(d),
        sigma_q_beta: Matrix::identity(d, d),
        lambda_q_sigsq: 1.0,
        lambda_q_a: 1.0,
    };
    let mut fit = MfvbFit { state: state.clone(), iterations: 0, converged: false, elbo_trace: Vec::new() };
    for _ in 0..max_iter {
        let old = state.clone();
        let e_inv_sigsq = (nf + 1.0) / state.lambda_q_sigsq;
        let prec = &xtx * e_inv_sigsq + &prior_prec;
        state.sigma_q_beta = Cholesky::new(prec).ok_or(OracleError::Singular("Σ_q(β) update"))?.inverse();
        state.mu_q_beta = match variant {
            MfvbVariant::Printed => &state.sigma_q_beta * (&xty + &prior_term) * e_inv_sigsq,
            MfvbVariant::Corrected => &state.sigma_q_beta * (&xty * e_inv_sigsq + &prior_term),
        };
        state.lambda_q_a = match variant {
            MfvbVariant::Printed => 2.0 * (e_inv_sigsq + a_hyper.powi(-2)),
            MfvbVariant::Corrected => e_inv_sigsq + a_hyper.powi(-2),
        };
        let mu = &state.mu_q_beta;
        let second = &state.sigma_q_beta + mu * mu.transpose();
        state.lambda_q_sigsq = yty - 2.0 * mu.dot(&xty) + (&xtx * second).trace() + 2.0 / state.lambda_q_a;
        if !(state.lambda_q_sigsq > 0.0) {
            return Err(OracleError::Singular("λ_q(σ²) update"));
        }
        fit.iterations += 1;
        let q = LinRegQ::from_state(&state, n);
        fit.elbo_trace.push(linreg_elbo(y.as_slice(), x, mu_beta, sigma_beta, a_hyper, &q));
        let change = rel_change(&old, &state);
        if change < tol {
            fit.converged = true;
            break;
        }
    }
    fit.state = state;
    Ok(fit)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn rel_change(old: &MfvbState, new: &MfvbState) -> f64 {
    let mut m = rel(old.lambda_q_sigsq, new.lambda_q_sigsq).max(rel(old.lambda_q_a, new.lambda_q_a));
    for (a, b) in old.mu_q_beta.iter().zip(new.mu_q_beta.iter()) {
        m = m.max((a - b).abs() / b.abs().max(1.0));
    }
    for (a, b) in old.sigma_q_beta.iter().zip(new.sigma_q_beta.iter()) {
        m = m.max((a - b).abs() / b.abs().max(1e-12));
    }
    m
}

/// Product-form q-densities of the linear regression model with free shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinRegQ {
    pub mu: Vector,
    pub sigma: Matrix,
    pub kappa_sigsq: f64,
    pub lambda_sigsq: f64,
    pub kappa_a: f64,
    pub lambda_a: f64,
}

impl LinRegQ {
    pub fn from_state(s: &MfvbState, n: usize) -> Self {
        LinRegQ {
            mu: s.mu_q_beta.clone(),
            sigma: s.sigma_q_beta.clone(),
            kappa_sigsq: n as f64 + 1.0,
            lambda_sigsq: s.lambda_q_sigsq,
            kappa_a: 2.0,
            lambda_a: s.lambda_q_a,
        }
    }
}

/// `log` of the Inverse-χ²(κ, λ) density.
pub fn inv_chisq_log_pdf(x: f64, kappa: f64, lambda: f64) -> f64 {
    0.5 * kappa * (0.5 * lambda).ln() - ln_gamma(0.5 * kappa) - (0.5 * kappa + 1.0) * x.ln() - 0.5 * lambda / x
}

fn inv_chisq_e_log(kappa: f64, lambda: f64) -> f64 {
    (0.5 * lambda).ln() - digamma(0.5 * kappa)
}

fn inv_chisq_entropy(kappa: f64, lambda: f64) -> f64 {
    0.5 * kappa + (0.5 * lambda).ln() + ln_gamma(0.5 * kappa) - (1.0 + 0.5 * kappa) * digamma(0.5 * kappa)
}

fn log_det_spd(m: &Matrix) -> f64 {
    let c = Cholesky::new(m.clone()).expect("SPD matrix");
    2.0 * c.l().diagonal().iter().map(|v| v.ln()).sum::<f64>()
}

/// Closed-form ELBO of the linear regression model under `q`.
pub fn linreg_elbo(y: &[f64], x: &Matrix, mu_beta: &Vector, sigma_beta: &Matrix, a_hyper: f64, q: &LinRegQ) -> f64 {
    let n = y.len() as f64;
    let d = x.ncols() as f64;
    let yv = Vector::from_column_slice(y);
    let resid = &yv - x * &q.mu;
    let e_sq = resid.dot(&resid) + (x.transpose() * x * &q.sigma).trace();
    let e_inv_s = q.kappa_sigsq / q.lambda_sigsq;
    let e_log_s = inv_chisq_e_log(q.kappa_sigsq, q.lambda_sigsq);
    let e_inv_a = q.kappa_a / q.lambda_a;
    let e_log_a = inv_chisq_e_log(q.kappa_a, q.lambda_a);

    let lik = -0.5 * n * (2.0 * PI).ln() - 0.5 * n * e_log_s - 0.5 * e_inv_s * e_sq;
    let prior_prec = Cholesky::new(sigma_beta.clone()).expect("SPD prior").inverse();
    let dm = &q.mu - mu_beta;
    let p_beta = -0.5 * d * (2.0 * PI).ln() - 0.5 * log_det_spd(sigma_beta)
        - 0.5 * ((&prior_prec * &q.sigma).trace() + dm.dot(&(&prior_prec * &dm)));
    let half_lg = ln_gamma(0.5);
    let p_s = -0.5 * 2f64.ln() - 0.5 * e_log_a - half_lg - 1.5 * e_log_s - 0.5 * e_inv_a * e_inv_s;
    let inv_a2 = a_hyper.powi(-2);
    let p_a = 0.5 * (0.5 * inv_a2).ln() - half_lg - 1.5 * e_log_a - 0.5 * inv_a2 * e_inv_a;
    let h_beta = 0.5 * d * (1.0 + (2.0 * PI).ln()) + 0.5 * log_det_spd(&q.sigma);
    let h_s = inv_chisq_entropy(q.kappa_sigsq, q.lambda_sigsq);
    let h_a = inv_chisq_entropy(q.kappa_a, q.lambda_a);
    lik + p_beta + p_s + p_a + h_beta + h_s + h_a
}

/// Monte-Carlo estimate of the same ELBO with its standard error.
#[allow(clippy::too_many_arguments)]
pub fn linreg_elbo_monte_carlo(
    y: &[f64],
    x: &Matrix,
    mu_beta: &Vector,
    sigma_beta: &Matrix,
    a_hyper: f64,
    q: &LinRegQ,
    draws: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = x.ncols();
    let yv = Vector::from_column_slice(y);
    let n = y.len() as f64;
    let l_q = Cholesky::new(q.sigma.clone()).expect("SPD q covariance").l();
    let prior_prec = Cholesky::new(sigma_beta.clone()).expect("SPD prior").inverse();
    let ld_prior = log_det_spd(sigma_beta);
    let ld_q = log_det_spd(&q.sigma);
    let g_s = Gamma::new(0.5 * q.kappa_sigsq, 2.0 / q.lambda_sigsq).expect("valid shape");
    let g_a = Gamma::new(0.5 * q.kappa_a, 2.0 / q.lambda_a).expect("valid shape");
    let log2pi = (2.0 * PI).ln();
    let inv_a2 = a_hyper.powi(-2);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..draws {
        let z = Vector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
        let beta = &q.mu + &l_q * &z;
        let s2 = 1.0 / g_s.sample(&mut rng);
        let a = 1.0 / g_a.sample(&mut rng);
        let r = &yv - x * &beta;
        let log_lik = -0.5 * n * (log2pi + s2.ln()) - 0.5 * r.dot(&r) / s2;
        let db = &beta - mu_beta;
        let log_pb = -0.5 * (d as f64 * log2pi + ld_prior + db.dot(&(&prior_prec * &db)));
        let log_ps = inv_chisq_log_pdf(s2, 1.0, 1.0 / a);
        let log_pa = inv_chisq_log_pdf(a, 1.0, inv_a2);
        let log_qb = -0.5 * (d as f64 * log2pi + ld_q + z.dot(&z));
        let log_qs = inv_chisq_log_pdf(s2, q.kappa_sigsq, q.lambda_sigsq);
        let log_qa = inv_chisq_log_pdf(a, q.kappa_a, q.lambda_a);
        let v = log_lik + log_pb + log_ps + log_pa - log_qb - log_qs - log_qa;
        sum += v;
        sum_sq += v * v;
    }
    let m = draws as f64;
    let mean = sum / m;
    let var = (sum_sq / m - mean * mean).max(0.0) * m / (m - 1.0);
    (mean, (var / m).sqrt())
}
