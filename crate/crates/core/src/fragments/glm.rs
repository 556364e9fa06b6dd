//! Generalized-response likelihood fragments: Jaakkola-Jordan logistic,
//! Albert-Chib probit and fixed-point Poisson.

use crate::error::{Result, VmpError};
use crate::exec;
use crate::expfam::{softplus, NaturalParameterVector};
use crate::fragments::FragmentCtx;
use crate::linalg::{DenseMatrix, MvnMoments, Vector};
use crate::special::{ln_gamma, log_norm_cdf, zeta_prime};

/// Largest linear predictor `Aμ + ½diag(AΣAᵀ)` the Poisson fragment will exponentiate.
pub const POISSON_OVERFLOW_CAP: f64 = 700.0;

/// `tanh(ξ/2)/(4ξ)`, even in ξ, with limit 1/8 at 0.
pub fn jj_weight(xi: f64) -> f64 {
    if xi.abs() < 1e-4 {
        let x2 = xi * xi;
        0.125 - x2 / 96.0 + x2 * x2 / 960.0
    } else {
        (0.5 * xi).tanh() / (4.0 * xi)
    }
}

fn check_design(a: &DenseMatrix, y: &[f64]) -> Result<()> {
    if y.is_empty() {
        return Err(VmpError::domain("y", "at least one observation is required"));
    }
    if a.nrows() != y.len() {
        return Err(VmpError::Dimension(format!("A has {} rows but y has length {}", a.nrows(), y.len())));
    }
    Ok(())
}

fn check_binary(y: &[f64]) -> Result<()> {
    match y.iter().position(|&v| v != 0.0 && v != 1.0) {
        Some(i) => Err(VmpError::domain("y", format!("entry {i} is {}, expected 0 or 1", y[i]))),
        None => Ok(()),
    }
}

fn moments(q: &NaturalParameterVector, d: usize) -> Result<MvnMoments> {
    MvnMoments::from_natural(q.eta.as_slice(), d, false)
}

fn pack_mvn(eta1: &Vector, eta2: &DenseMatrix, scale: f64) -> Vector {
    let d = eta1.len();
    let mut out = Vector::zeros(d + d * d);
    out.rows_mut(0, d).copy_from(eta1);
    for (k, v) in eta2.iter().enumerate() {
        out[d + k] = scale * v;
    }
    out
}

/// `yᵢ | θ ~ Bernoulli(logit⁻¹((Aθ)ᵢ))` via the Jaakkola-Jordan bound.
#[derive(Debug, Clone)]
pub struct LogisticSpec {
    y: Vec<f64>,
    a: DenseMatrix,
    eta1: Vector,
}

impl LogisticSpec {
    pub fn new(y: Vec<f64>, a: DenseMatrix, exec: exec::Exec) -> Result<Self> {
        check_design(&a, &y)?;
        check_binary(&y)?;
        let centered: Vec<f64> = y.iter().map(|v| v - 0.5).collect();
        let eta1 = exec::transpose_mul(&a, &centered, exec);
        Ok(LogisticSpec { y, a, eta1 })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    /// Optimal `ξ = sqrt(diagonal(A E(θθᵀ) Aᵀ))` for the current q-density.
    pub fn optimal_xi(&self, q: &NaturalParameterVector, ctx: FragmentCtx) -> Result<Vec<f64>> {
        let second = moments(q, self.dim())?.second_moment();
        let quad = exec::row_quadratic(&self.a, &second, ctx.exec);
        Ok(quad.into_iter().map(|v| v.max(0.0).sqrt()).collect())
    }

    /// Returns the new message and the new ξ.
    pub fn update(&self, q: &NaturalParameterVector, ctx: FragmentCtx) -> Result<(Vector, Vec<f64>)> {
        let xi = self.optimal_xi(q, ctx)?;
        let w: Vec<f64> = xi.iter().map(|&x| jj_weight(x)).collect();
        let gram = exec::weighted_gram(&self.a, &w, ctx.exec);
        Ok((pack_mvn(&self.eta1, &gram, -1.0), xi))
    }

    /// Jaakkola-Jordan lower bound on `E_q{log p(y|θ)}` at the given ξ, or at
    /// the optimal ξ for `q` when `xi` is `None`.
    pub fn local_bound(&self, q: &NaturalParameterVector, xi: Option<&[f64]>, ctx: FragmentCtx) -> Result<f64> {
        let mm = moments(q, self.dim())?;
        let nu = exec::mul(&self.a, &mm.mean, ctx.exec);
        let quad = exec::row_quadratic(&self.a, &mm.second_moment(), ctx.exec);
        let optimal: Vec<f64>;
        let xi = match xi {
            Some(x) => {
                if x.len() != self.n() {
                    return Err(VmpError::Dimension(format!("ξ has length {}, expected {}", x.len(), self.n())));
                }
                x
            }
            None => {
                optimal = quad.iter().map(|v| v.max(0.0).sqrt()).collect();
                &optimal
            }
        };
        let mut total = 0.0;
        for i in 0..self.n() {
            let w = jj_weight(xi[i]);
            let c = 0.5 * xi[i] - softplus(xi[i]) + w * xi[i] * xi[i];
            total += (self.y[i] - 0.5) * nu[i] - w * quad[i] + c;
        }
        Ok(total)
    }
}

/// `yᵢ | θ ~ Bernoulli(Φ((Aθ)ᵢ))` through Albert-Chib auxiliaries that are
/// integrated out inside the fragment.
#[derive(Debug, Clone)]
pub struct ProbitSpec {
    sign: Vec<f64>,
    a: DenseMatrix,
    eta2: DenseMatrix,
}

impl ProbitSpec {
    pub fn new(y: Vec<f64>, a: DenseMatrix, exec: exec::Exec) -> Result<Self> {
        check_design(&a, &y)?;
        check_binary(&y)?;
        let eta2 = exec::weighted_gram(&a, &vec![1.0; y.len()], exec);
        let sign = y.iter().map(|v| 2.0 * v - 1.0).collect();
        Ok(ProbitSpec { sign, a, eta2 })
    }

    pub fn n(&self) -> usize {
        self.sign.len()
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    /// Returns the new message and `ν = Aμ_q`.
    pub fn update(&self, q: &NaturalParameterVector, ctx: FragmentCtx) -> Result<(Vector, Vec<f64>)> {
        let mm = moments(q, self.dim())?;
        let nu = exec::mul(&self.a, &mm.mean, ctx.exec);
        let mean_a: Vec<f64> = nu.iter().zip(&self.sign).map(|(&v, &s)| v + s * zeta_prime(s * v)).collect();
        let eta1 = exec::transpose_mul(&self.a, &mean_a, ctx.exec);
        Ok((pack_mvn(&eta1, &self.eta2, -0.5), nu))
    }

    /// `Σᵢ log Φ(sᵢνᵢ) − ½ diagonal(AΣ_qAᵀ)`, the bound with the auxiliaries at their optimum.
    pub fn local_bound(&self, q: &NaturalParameterVector, ctx: FragmentCtx) -> Result<f64> {
        let mm = moments(q, self.dim())?;
        let nu = exec::mul(&self.a, &mm.mean, ctx.exec);
        let var = exec::row_quadratic(&self.a, &mm.cov, ctx.exec);
        Ok(nu.iter().zip(&self.sign).zip(&var).map(|((&v, &s), &w)| log_norm_cdf(s * v) - 0.5 * w).sum())
    }
}

/// `yᵢ | θ ~ Poisson(exp((Aθ)ᵢ))` with a non-conjugate fixed-point update.
#[derive(Debug, Clone)]
pub struct PoissonSpec {
    y: Vec<f64>,
    a: DenseMatrix,
    log_factorial_sum: f64,
}

impl PoissonSpec {
    pub fn new(y: Vec<f64>, a: DenseMatrix) -> Result<Self> {
        check_design(&a, &y)?;
        if let Some(i) = y.iter().position(|&v| !(v >= 0.0) || v.fract() != 0.0 || !v.is_finite()) {
            return Err(VmpError::domain("y", format!("entry {i} is {}, expected a nonnegative integer", y[i])));
        }
        let log_factorial_sum = y.iter().map(|&v| ln_gamma(v + 1.0)).sum();
        Ok(PoissonSpec { y, a, log_factorial_sum })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    /// `(Aμ, ω)` with `ω = exp(Aμ + ½diagonal(AΣAᵀ))`.
    fn intensities(&self, mm: &MvnMoments, ctx: FragmentCtx) -> Result<(Vec<f64>, Vec<f64>)> {
        let lin = exec::mul(&self.a, &mm.mean, ctx.exec);
        let var = exec::row_quadratic(&self.a, &mm.cov, ctx.exec);
        let mut omega = Vec::with_capacity(lin.len());
        for (l, v) in lin.iter().zip(&var) {
            let t = l + 0.5 * v;
            if !(t <= POISSON_OVERFLOW_CAP) {
                return Err(VmpError::Overflow { value: t, cap: POISSON_OVERFLOW_CAP });
            }
            omega.push(t.exp());
        }
        Ok((lin, omega))
    }

    /// Returns the new message and ω.
    pub fn update(&self, q: &NaturalParameterVector, ctx: FragmentCtx) -> Result<(Vector, Vec<f64>)> {
        let mm = moments(q, self.dim())?;
        let (lin, omega) = self.intensities(&mm, ctx)?;
        let resid: Vec<f64> = (0..self.n()).map(|i| self.y[i] - omega[i] + omega[i] * lin[i]).collect();
        let eta1 = exec::transpose_mul(&self.a, &resid, ctx.exec);
        let gram = exec::weighted_gram(&self.a, &omega, ctx.exec);
        Ok((pack_mvn(&eta1, &gram, -0.5), omega))
    }

    /// Working-response message at the saturated fit `Aθ = log(y + ½)`,
    /// `ω = y + ½`. A vague start makes `ω` overflow on the first sweep.
    pub fn initial_message(&self, ctx: FragmentCtx) -> Vector {
        let w: Vec<f64> = self.y.iter().map(|&v| v + 0.5).collect();
        let wz: Vec<f64> = w.iter().map(|&v| v * v.ln()).collect();
        let eta1 = exec::transpose_mul(&self.a, &wz, ctx.exec);
        let gram = exec::weighted_gram(&self.a, &w, ctx.exec);
        pack_mvn(&eta1, &gram, -0.5)
    }

    /// `yᵀAμ − 1ᵀω − Σ log yᵢ!`.
    pub fn expected_log_factor(&self, q: &NaturalParameterVector, ctx: FragmentCtx) -> Result<f64> {
        let mm = moments(q, self.dim())?;
        let (lin, omega) = self.intensities(&mm, ctx)?;
        let fit: f64 = (0..self.n()).map(|i| self.y[i] * lin[i] - omega[i]).sum();
        Ok(fit - self.log_factorial_sum)
    }
}
