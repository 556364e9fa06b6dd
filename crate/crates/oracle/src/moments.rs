//! `E{T(x)}` and entropy by numerical integration or simulation, working from
//! textbook densities rather than log-partition formulas.

use std::f64::consts::PI;

use nalgebra::Cholesky;
use quadrature::double_exponential;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, ChiSquared, Distribution, Gamma, InverseGaussian, Normal, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::{Matrix, OracleError, Result, Vector};

/// Exponential-family member, with the sufficient statistics
/// Bernoulli `x`; Normal `(x, x²)`; Inverse-χ² `(log x, 1/x)`; Beta
/// `(log x, log(1−x))`; Inverse Gaussian `(x, 1/x)`; Multivariate Normal
/// `(x, vec xxᵀ)`; Inverse Wishart and diagonal Inverse G-Wishart `(log|X|, vec X⁻¹)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Bernoulli,
    UnivariateNormal,
    InverseChiSquared,
    Beta,
    InverseGaussian,
    MultivariateNormal(usize),
    InverseWishart(usize),
    InverseGWishartDiag(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Tanh-sinh quadrature with the requested absolute tolerance (scalar families).
    Quadrature { tol: f64 },
    /// Seeded simulation with `draws` samples.
    MonteCarlo { draws: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub e_t: Vec<f64>,
    /// Standard errors (Monte Carlo) or error estimates (quadrature).
    pub se: Vec<f64>,
    pub entropy: f64,
    pub entropy_se: f64,
    /// Set when quadrature could not meet its tolerance.
    pub flagged: bool,
}

fn vec_inverse(eta2: &[f64], d: usize) -> Matrix {
    let m = Matrix::from_column_slice(d, d, eta2);
    (&m + m.transpose()) * 0.5
}

fn spd_inverse(m: &Matrix) -> Result<Matrix> {
    Cholesky::new(m.clone()).map(|c| c.inverse()).ok_or(OracleError::Invalid("matrix is not SPD".into()))
}

fn log_det(m: &Matrix) -> f64 {
    let c = Cholesky::new(m.clone()).expect("SPD");
    2.0 * c.l().diagonal().iter().map(|v| v.ln()).sum::<f64>()
}

fn ln_multi_gamma(d: usize, a: f64) -> f64 {
    0.25 * (d * (d - 1)) as f64 * PI.ln() + (1..=d).map(|j| ln_gamma(a + 0.5 * (1.0 - j as f64))).sum::<f64>()
}

/// Scalar family as a log-density, sufficient statistic, support map and sampler.
enum Scalar {
    Normal { mu: f64, sd: f64 },
    InvChiSq { kappa: f64, lambda: f64 },
    Beta { a: f64, b: f64 },
    InvGauss { mu: f64, lambda: f64 },
}

impl Scalar {
    fn log_pdf(&self, x: f64) -> f64 {
        self.log_pdf_at(x, 1.0 - x)
    }

    fn stat(&self, x: f64) -> [f64; 2] {
        self.stat_at(x, 1.0 - x)
    }

    /// `xc = 1 − x`, supplied separately so that the Beta tails keep precision.
    fn log_pdf_at(&self, x: f64, xc: f64) -> f64 {
        match *self {
            Scalar::Normal { mu, sd } => -0.5 * ((x - mu) / sd).powi(2) - sd.ln() - 0.5 * (2.0 * PI).ln(),
            Scalar::InvChiSq { kappa, lambda } => {
                0.5 * kappa * (0.5 * lambda).ln() - ln_gamma(0.5 * kappa) - (0.5 * kappa + 1.0) * x.ln() - 0.5 * lambda / x
            }
            Scalar::Beta { a, b } => {
                (a - 1.0) * x.ln() + (b - 1.0) * xc.ln() + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
            }
            Scalar::InvGauss { mu, lambda } => {
                0.5 * (lambda / (2.0 * PI * x * x * x)).ln() - lambda * (x - mu).powi(2) / (2.0 * mu * mu * x)
            }
        }
    }

    fn stat_at(&self, x: f64, xc: f64) -> [f64; 2] {
        match self {
            Scalar::Normal { .. } => [x, x * x],
            Scalar::InvChiSq { .. } => [x.ln(), 1.0 / x],
            Scalar::Beta { .. } => [x.ln(), xc.ln()],
            Scalar::InvGauss { .. } => [x, 1.0 / x],
        }
    }

    /// `(x(v), 1 − x(v), dx/dv)` for `v` in `(−1, 1)`. Positive supports are integrated on
    /// the log scale and the unit interval on the logit scale, then
    /// `t = c + w·v/(1 − v²)` maps the real line onto `(−1, 1)`.
    fn transform(&self) -> Box<dyn Fn(f64) -> (f64, f64, f64)> {
        let real = |c: f64, w: f64, v: f64| (c + w * v / (1.0 - v * v), w * (1.0 + v * v) / (1.0 - v * v).powi(2));
        match *self {
            Scalar::Normal { mu, sd } => Box::new(move |v: f64| {
                let (x, dx) = real(mu, sd, v);
                (x, 1.0 - x, dx)
            }),
            Scalar::Beta { a, b } => Box::new(move |v: f64| {
                let (t, dt) = real((a / b).ln(), 2.0, v);
                let (x, xc) = (1.0 / (1.0 + (-t).exp()), 1.0 / (1.0 + t.exp()));
                (x, xc, x * xc * dt)
            }),
            Scalar::InvChiSq { kappa, lambda } => Box::new(move |v: f64| {
                let (t, dt) = real((lambda / (kappa + 2.0)).ln(), 2.0 * (2.0 / kappa).sqrt().max(1.0), v);
                (t.exp(), 1.0 - t.exp(), t.exp() * dt)
            }),
            Scalar::InvGauss { mu, lambda } => Box::new(move |v: f64| {
                let (t, dt) = real(mu.ln(), 2.0 * (mu / lambda).sqrt().max(1.0), v);
                (t.exp(), 1.0 - t.exp(), t.exp() * dt)
            }),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Scalar::Normal { mu, sd } => Normal::new(mu, sd).expect("sd > 0").sample(rng),
            Scalar::InvChiSq { kappa, lambda } => 1.0 / Gamma::new(0.5 * kappa, 2.0 / lambda).expect("shape > 0").sample(rng),
            Scalar::Beta { a, b } => Beta::new(a, b).expect("positive shapes").sample(rng),
            Scalar::InvGauss { mu, lambda } => InverseGaussian::new(mu, lambda).expect("positive parameters").sample(rng),
        }
    }
}

fn scalar_of(family: Family, eta: &[f64]) -> Result<Scalar> {
    let bad = |m: &str| Err(OracleError::Invalid(format!("{family:?}: {m}")));
    match family {
        Family::UnivariateNormal => {
            if !(eta[1] < 0.0) {
                return bad("η₂ must be negative");
            }
            let var = -0.5 / eta[1];
            Ok(Scalar::Normal { mu: eta[0] * var, sd: var.sqrt() })
        }
        Family::InverseChiSquared => {
            let (kappa, lambda) = (-2.0 * eta[0] - 2.0, -2.0 * eta[1]);
            if !(kappa > 0.0 && lambda > 0.0) {
                return bad("improper");
            }
            Ok(Scalar::InvChiSq { kappa, lambda })
        }
        Family::Beta => {
            let (a, b) = (eta[0] + 1.0, eta[1] + 1.0);
            if !(a > 0.0 && b > 0.0) {
                return bad("improper");
            }
            Ok(Scalar::Beta { a, b })
        }
        Family::InverseGaussian => {
            if !(eta[0] < 0.0 && eta[1] < 0.0) {
                return bad("improper");
            }
            let lambda = -2.0 * eta[1];
            Ok(Scalar::InvGauss { mu: (lambda / (-2.0 * eta[0])).sqrt(), lambda })
        }
        _ => bad("not a scalar continuous family"),
    }
}

fn quadrature(s: &Scalar, tol: f64) -> MomentEstimate {
    let map = s.transform();
    let mut flagged = false;
    // Composite rule over `PIECES` equal sub-intervals of (−1, 1).
    const PIECES: usize = 8;
    let mut integrate = |g: &dyn Fn(f64, f64) -> f64| {
        let f = |u: f64| {
            let (x, xc, jac) = map(u);
            let lp = s.log_pdf_at(x, xc);
            if !x.is_finite() || !lp.is_finite() || jac == 0.0 {
                return 0.0;
            }
            let v = g(x, xc) * lp.exp() * jac;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        let (mut integral, mut error) = (0.0, 0.0);
        for k in 0..PIECES {
            let lo = -1.0 + 2.0 * k as f64 / PIECES as f64;
            let out = double_exponential::integrate(f, lo, lo + 2.0 / PIECES as f64, tol / PIECES as f64);
            integral += out.integral;
            error += out.error_estimate;
        }
        if !(error <= tol.max(1e-15) * 10.0) {
            flagged = true;
        }
        (integral, error)
    };
    let (t0, e0) = integrate(&|x, xc| s.stat_at(x, xc)[0]);
    let (t1, e1) = integrate(&|x, xc| s.stat_at(x, xc)[1]);
    let (h, eh) = integrate(&|x, xc| -s.log_pdf_at(x, xc));
    MomentEstimate { e_t: vec![t0, t1], se: vec![e0, e1], entropy: h, entropy_se: eh, flagged }
}

/// Running mean and standard error of vector-valued draws.
struct Accumulator {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    n: usize,
}

impl Accumulator {
    fn new(k: usize) -> Self {
        Accumulator { sum: vec![0.0; k], sum_sq: vec![0.0; k], n: 0 }
    }

    fn push(&mut self, v: &[f64]) {
        for (i, x) in v.iter().enumerate() {
            self.sum[i] += x;
            self.sum_sq[i] += x * x;
        }
        self.n += 1;
    }

    fn finish(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n as f64;
        let mean: Vec<f64> = self.sum.iter().map(|s| s / n).collect();
        let se = self
            .sum_sq
            .iter()
            .zip(&mean)
            .map(|(s2, m)| ((s2 / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt())
            .collect();
        (mean, se)
    }
}

fn monte_carlo(family: Family, eta: &[f64], draws: usize, seed: u64) -> Result<MomentEstimate> {
    if draws < 2 {
        return Err(OracleError::Invalid("need at least two draws".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Each draw yields T(x) followed by −log p(x).
    let mut draw: Box<dyn FnMut(&mut ChaCha8Rng) -> Vec<f64>> = match family {
        Family::Bernoulli => {
            let p = 1.0 / (1.0 + (-eta[0]).exp());
            Box::new(move |r| {
                let x = if rand::Rng::random::<f64>(r) < p { 1.0 } else { 0.0 };
                vec![x, -(if x == 1.0 { p } else { 1.0 - p }).ln()]
            })
        }
        Family::UnivariateNormal | Family::InverseChiSquared | Family::Beta | Family::InverseGaussian => {
            let s = scalar_of(family, eta)?;
            Box::new(move |r| {
                let x = s.sample(r);
                let t = s.stat(x);
                vec![t[0], t[1], -s.log_pdf(x)]
            })
        }
        Family::MultivariateNormal(d) => {
            let prec = vec_inverse(&eta[d..], d) * -2.0;
            let sigma = spd_inverse(&prec)?;
            let mu = &sigma * Vector::from_column_slice(&eta[..d]);
            let l = Cholesky::new(sigma.clone()).expect("SPD").l();
            let log_norm = -0.5 * (d as f64 * (2.0 * PI).ln() + log_det(&sigma));
            Box::new(move |r| {
                let z = Vector::from_fn(d, |_, _| StandardNormal.sample(r));
                let x = &mu + &l * &z;
                let mut out: Vec<f64> = x.iter().copied().collect();
                out.extend((&x * x.transpose()).iter());
                out.push(-(log_norm - 0.5 * z.dot(&z)));
                out
            })
        }
        Family::InverseWishart(d) => {
            let kappa = -2.0 * eta[0] - d as f64 - 1.0;
            let lambda = vec_inverse(&eta[1..], d) * -2.0;
            if !(kappa > d as f64 - 1.0) {
                return Err(OracleError::Invalid("Inverse Wishart: κ ≤ d − 1".into()));
            }
            let l = Cholesky::new(spd_inverse(&lambda)?).expect("SPD").l();
            let chis: Vec<ChiSquared<f64>> =
                (0..d).map(|i| ChiSquared::new(kappa - i as f64).expect("positive df")).collect();
            let log_norm = 0.5 * kappa * log_det(&lambda) - 0.5 * kappa * d as f64 * 2f64.ln() - ln_multi_gamma(d, 0.5 * kappa);
            Box::new(move |r| {
                let mut a = Matrix::zeros(d, d);
                for i in 0..d {
                    a[(i, i)] = chis[i].sample(r).sqrt();
                    for j in 0..i {
                        a[(i, j)] = StandardNormal.sample(r);
                    }
                }
                let la = &l * a;
                let w = &la * la.transpose();
                let ld = -log_det(&w);
                let mut out = vec![ld];
                out.extend(w.iter());
                let lp = log_norm - 0.5 * (kappa + d as f64 + 1.0) * ld - 0.5 * (&lambda * &w).trace();
                out.push(-lp);
                out
            })
        }
        Family::InverseGWishartDiag(d) => {
            let kappa = -2.0 * eta[0] - d as f64 - 1.0;
            let shape = kappa + d as f64 - 1.0;
            let lambdas: Vec<f64> = (0..d).map(|i| -2.0 * eta[1 + i * (d + 1)]).collect();
            if !(shape > 0.0) || lambdas.iter().any(|&l| !(l > 0.0)) {
                return Err(OracleError::Invalid("Inverse G-Wishart diag: improper".into()));
            }
            let comps: Vec<Scalar> = lambdas.iter().map(|&lambda| Scalar::InvChiSq { kappa: shape, lambda }).collect();
            Box::new(move |r| {
                let xs: Vec<f64> = comps.iter().map(|c| c.sample(r)).collect();
                let mut out = vec![xs.iter().map(|x| x.ln()).sum()];
                let mut inv = Matrix::zeros(d, d);
                for i in 0..d {
                    inv[(i, i)] = 1.0 / xs[i];
                }
                out.extend(inv.iter());
                out.push(-comps.iter().zip(&xs).map(|(c, &x)| c.log_pdf(x)).sum::<f64>());
                out
            })
        }
    };
    let first = draw(&mut rng);
    let mut acc = Accumulator::new(first.len());
    acc.push(&first);
    for _ in 1..draws {
        acc.push(&draw(&mut rng));
    }
    let (mut mean, mut se) = acc.finish();
    let entropy = mean.pop().expect("entropy slot");
    let entropy_se = se.pop().expect("entropy slot");
    Ok(MomentEstimate { e_t: mean, se, entropy, entropy_se, flagged: false })
}

/// Estimates `E{T(x)}` and the entropy of the member with natural parameter `eta`.
pub fn moment_oracle(family: Family, eta: &[f64], method: Method) -> Result<MomentEstimate> {
    let expected_len = match family {
        Family::Bernoulli => 1,
        Family::MultivariateNormal(d) => d + d * d,
        Family::InverseWishart(d) | Family::InverseGWishartDiag(d) => 1 + d * d,
        _ => 2,
    };
    if eta.len() != expected_len {
        return Err(OracleError::Invalid(format!("{family:?} needs {expected_len} natural parameters")));
    }
    match (family, method) {
        (Family::Bernoulli, _) => {
            let p = 1.0 / (1.0 + (-eta[0]).exp());
            let h = -(p * p.ln() + (1.0 - p) * (1.0 - p).ln());
            Ok(MomentEstimate { e_t: vec![p], se: vec![0.0], entropy: h, entropy_se: 0.0, flagged: false })
        }
        (_, Method::Quadrature { tol }) => Ok(quadrature(&scalar_of(family, eta)?, tol)),
        (_, Method::MonteCarlo { draws, seed }) => monte_carlo(family, eta, draws, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_chi_squared_reciprocal_mean() {
        // κ = 3, λ = 2: E(1/x) = κ/λ.
        let est = moment_oracle(Family::InverseChiSquared, &[-2.5, -1.0], Method::Quadrature { tol: 1e-12 }).unwrap();
        assert!((est.e_t[1] - 1.5).abs() < 1e-8);
        assert!(!est.flagged);
    }

    #[test]
    fn bernoulli_mean() {
        let est = moment_oracle(Family::Bernoulli, &[2.0], Method::Quadrature { tol: 1e-10 }).unwrap();
        assert!((est.e_t[0] - 0.880797).abs() < 1e-6);
    }

    #[test]
    fn standard_normal_second_moment() {
        let n = 200_000;
        let est = moment_oracle(
            Family::MultivariateNormal(2),
            &[0.0, 0.0, -0.5, 0.0, 0.0, -0.5],
            Method::MonteCarlo { draws: n, seed: 1 },
        )
        .unwrap();
        let want = [0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
        for i in 0..6 {
            assert!((est.e_t[i] - want[i]).abs() < 4.0 * est.se[i], "{i}: {} ± {}", est.e_t[i], est.se[i]);
        }
    }

    #[test]
    fn quadrature_and_simulation_agree() {
        let eta = [-1.2, -0.8];
        let q = moment_oracle(Family::InverseGaussian, &eta, Method::Quadrature { tol: 1e-12 }).unwrap();
        let m = moment_oracle(Family::InverseGaussian, &eta, Method::MonteCarlo { draws: 100_000, seed: 2 }).unwrap();
        for i in 0..2 {
            assert!((q.e_t[i] - m.e_t[i]).abs() < 4.0 * m.se[i]);
        }
        assert!((q.entropy - m.entropy).abs() < 4.0 * m.entropy_se);
    }

    #[test]
    fn seeded_runs_repeat() {
        let a = moment_oracle(Family::InverseWishart(2), &[-3.0, -1.0, 0.2, 0.2, -1.0], Method::MonteCarlo { draws: 100, seed: 9 });
        let b = moment_oracle(Family::InverseWishart(2), &[-3.0, -1.0, 0.2, 0.2, -1.0], Method::MonteCarlo { draws: 100, seed: 9 });
        assert_eq!(a, b);
    }
}
