//! Exponential-family catalog in natural-parameter form.
//!
//! Every member is written `p(x) = h(x) exp{T(x)ᵀη − A(η)}`. Messages may be
//! improper; only the moment, entropy and log-partition functions demand a
//! normalizable member.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VmpError};
use crate::linalg::{symmetrize, vec_inverse, DenseMatrix, MvnMoments, SpdFactor, Vector};
use crate::special::{digamma_unchecked, expint_e1_scaled, ln_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", content = "d")]
pub enum FamilyTag {
    Bernoulli,
    UnivariateNormal,
    InverseChiSquared,
    Beta,
    InverseGaussian,
    MultivariateNormal(usize),
    InverseWishart(usize),
    InverseGWishartDiag(usize),
}

impl FamilyTag {
    /// Length of the natural parameter vector.
    pub fn eta_len(&self) -> usize {
        match *self {
            FamilyTag::Bernoulli => 1,
            FamilyTag::UnivariateNormal
            | FamilyTag::InverseChiSquared
            | FamilyTag::Beta
            | FamilyTag::InverseGaussian => 2,
            FamilyTag::MultivariateNormal(d) => d + d * d,
            FamilyTag::InverseWishart(d) | FamilyTag::InverseGWishartDiag(d) => 1 + d * d,
        }
    }

    /// Matrix or vector dimension `d`; 1 for scalar families.
    pub fn dim(&self) -> usize {
        match *self {
            FamilyTag::MultivariateNormal(d)
            | FamilyTag::InverseWishart(d)
            | FamilyTag::InverseGWishartDiag(d) => d,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilyTag::Bernoulli => "Bernoulli",
            FamilyTag::UnivariateNormal => "UnivariateNormal",
            FamilyTag::InverseChiSquared => "InverseChiSquared",
            FamilyTag::Beta => "Beta",
            FamilyTag::InverseGaussian => "InverseGaussian",
            FamilyTag::MultivariateNormal(_) => "MultivariateNormal",
            FamilyTag::InverseWishart(_) => "InverseWishart",
            FamilyTag::InverseGWishartDiag(_) => "InverseGWishartDiag",
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(VmpError::domain("family dimension", "d must be at least 1"));
        }
        Ok(())
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyTag::MultivariateNormal(d)
            | FamilyTag::InverseWishart(d)
            | FamilyTag::InverseGWishartDiag(d) => write!(f, "{}({d})", self.name()),
            _ => f.write_str(self.name()),
        }
    }
}

/// A family member identified by its natural parameter vector η.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaturalParameterVector {
    pub family: FamilyTag,
    pub eta: Vector,
}

impl NaturalParameterVector {
    pub fn new(family: FamilyTag, eta: Vector) -> Result<Self> {
        family.validate()?;
        if eta.len() != family.eta_len() {
            return Err(VmpError::Dimension(format!(
                "{family} expects a natural parameter of length {}, got {}",
                family.eta_len(),
                eta.len()
            )));
        }
        if !eta.iter().all(|v| v.is_finite()) {
            return Err(VmpError::numeric(family.to_string(), "non-finite natural parameter"));
        }
        let mut out = NaturalParameterVector { family, eta };
        out.enforce_symmetry();
        Ok(out)
    }

    pub fn from_slice(family: FamilyTag, eta: &[f64]) -> Result<Self> {
        Self::new(family, Vector::from_column_slice(eta))
    }

    pub fn zeros(family: FamilyTag) -> Self {
        NaturalParameterVector { family, eta: Vector::zeros(family.eta_len()) }
    }

    /// Symmetrizes the stored `vec(η₂)` block of matrix families.
    pub fn enforce_symmetry(&mut self) {
        let (offset, d) = match self.family {
            FamilyTag::MultivariateNormal(d) => (d, d),
            FamilyTag::InverseWishart(d) | FamilyTag::InverseGWishartDiag(d) => (1, d),
            _ => return,
        };
        for j in 0..d {
            for i in (j + 1)..d {
                let a = offset + i + j * d;
                let b = offset + j + i * d;
                let avg = 0.5 * (self.eta[a] + self.eta[b]);
                self.eta[a] = avg;
                self.eta[b] = avg;
            }
        }
    }

    /// True when the member is a normalizable density.
    pub fn is_proper(&self) -> bool {
        self.check_proper().is_ok()
    }

    pub fn check_proper(&self) -> Result<()> {
        let e = &self.eta;
        let fam = self.family;
        let bad = |reason: &str| Err(VmpError::improper(fam.to_string(), reason));
        match fam {
            FamilyTag::Bernoulli => Ok(()),
            FamilyTag::UnivariateNormal => {
                if e[1] < 0.0 {
                    Ok(())
                } else {
                    bad("η₂ must be negative")
                }
            }
            FamilyTag::InverseChiSquared => {
                if e[0] < -1.0 && e[1] < 0.0 {
                    Ok(())
                } else {
                    bad("requires η₁ < −1 and η₂ < 0")
                }
            }
            FamilyTag::Beta => {
                if e[0] > -1.0 && e[1] > -1.0 {
                    Ok(())
                } else {
                    bad("requires η₁ > −1 and η₂ > −1")
                }
            }
            FamilyTag::InverseGaussian => {
                if e[0] < 0.0 && e[1] < 0.0 {
                    Ok(())
                } else {
                    bad("requires η₁ < 0 and η₂ < 0")
                }
            }
            FamilyTag::MultivariateNormal(d) => {
                let s = vec_inverse(&e.as_slice()[d..], d)?;
                SpdFactor::new(&(-s), "MVN −vec⁻¹(η₂)", false)
                    .map(|_| ())
                    .map_err(|_| VmpError::improper(fam.to_string(), "vec⁻¹(η₂) is not negative definite"))
            }
            FamilyTag::InverseWishart(d) => {
                if !(e[0] < -(d as f64)) {
                    return bad("requires η₁ < −d");
                }
                let s = vec_inverse(&e.as_slice()[1..], d)?;
                SpdFactor::new(&(-s), "Inverse-Wishart −vec⁻¹(η₂)", false)
                    .map(|_| ())
                    .map_err(|_| VmpError::improper(fam.to_string(), "vec⁻¹(η₂) is not negative definite"))
            }
            FamilyTag::InverseGWishartDiag(d) => {
                if !(e[0] < -1.0) {
                    return bad("requires η₁ < −1");
                }
                if (0..d).all(|i| e[1 + i * (d + 1)] < 0.0) {
                    Ok(())
                } else {
                    bad("diagonal of vec⁻¹(η₂) must be negative")
                }
            }
        }
    }

    pub fn add(&self, other: &NaturalParameterVector) -> Result<NaturalParameterVector> {
        if self.family != other.family {
            return Err(VmpError::Graph(format!(
                "cannot add natural parameters of {} and {}",
                self.family, other.family
            )));
        }
        Ok(NaturalParameterVector { family: self.family, eta: &self.eta + &other.eta })
    }
}

/// Family-specific common parameterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum CommonParameters {
    Bernoulli { p: f64 },
    UnivariateNormal { mu: f64, sigma_sq: f64 },
    InverseChiSquared { kappa: f64, lambda: f64 },
    Beta { alpha: f64, beta: f64 },
    InverseGaussian { mu: f64, lambda: f64 },
    MultivariateNormal { mu: Vector, sigma: DenseMatrix },
    InverseWishart { kappa: f64, lambda: DenseMatrix },
    InverseGWishartDiag { kappa: f64, lambda: DenseMatrix },
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(VmpError::domain(field, format!("{v} must be positive and finite")))
    }
}

fn pack_matrix_family(first: f64, m: &DenseMatrix, scale: f64) -> Vector {
    let d = m.nrows();
    let mut eta = Vector::zeros(1 + d * d);
    eta[0] = first;
    for (k, v) in m.iter().enumerate() {
        eta[1 + k] = scale * v;
    }
    eta
}

/// Maps common parameters to the natural parameter vector of `family`.
pub fn common_to_natural(family: FamilyTag, common: &CommonParameters) -> Result<NaturalParameterVector> {
    family.validate()?;
    let eta = match (family, common) {
        (FamilyTag::Bernoulli, CommonParameters::Bernoulli { p }) => {
            if !(*p > 0.0 && *p < 1.0) {
                return Err(VmpError::domain("p", format!("{p} must lie in (0, 1)")));
            }
            Vector::from_element(1, (p / (1.0 - p)).ln())
        }
        (FamilyTag::UnivariateNormal, CommonParameters::UnivariateNormal { mu, sigma_sq }) => {
            positive("sigma_sq", *sigma_sq)?;
            Vector::from_column_slice(&[mu / sigma_sq, -0.5 / sigma_sq])
        }
        (FamilyTag::InverseChiSquared, CommonParameters::InverseChiSquared { kappa, lambda }) => {
            positive("kappa", *kappa)?;
            positive("lambda", *lambda)?;
            Vector::from_column_slice(&[-0.5 * (kappa + 2.0), -0.5 * lambda])
        }
        (FamilyTag::Beta, CommonParameters::Beta { alpha, beta }) => {
            positive("alpha", *alpha)?;
            positive("beta", *beta)?;
            Vector::from_column_slice(&[alpha - 1.0, beta - 1.0])
        }
        (FamilyTag::InverseGaussian, CommonParameters::InverseGaussian { mu, lambda }) => {
            positive("mu", *mu)?;
            positive("lambda", *lambda)?;
            Vector::from_column_slice(&[-lambda / (2.0 * mu * mu), -0.5 * lambda])
        }
        (FamilyTag::MultivariateNormal(d), CommonParameters::MultivariateNormal { mu, sigma }) => {
            if mu.len() != d || sigma.shape() != (d, d) {
                return Err(VmpError::Dimension(format!("MVN common parameters do not match d={d}")));
            }
            crate::linalg::mvn_natural(mu, sigma, "Sigma")
                .map_err(|e| VmpError::domain("sigma", e.to_string()))?
        }
        (FamilyTag::InverseWishart(d), CommonParameters::InverseWishart { kappa, lambda }) => {
            check_scale_matrix(lambda, d, false)?;
            if !(*kappa > d as f64 - 1.0) {
                return Err(VmpError::domain("kappa", format!("{kappa} must exceed d − 1 = {}", d - 1)));
            }
            pack_matrix_family(-0.5 * (kappa + d as f64 + 1.0), &symmetrize(lambda), -0.5)
        }
        (FamilyTag::InverseGWishartDiag(d), CommonParameters::InverseGWishartDiag { kappa, lambda }) => {
            check_scale_matrix(lambda, d, true)?;
            if !(*kappa + d as f64 - 1.0 > 0.0) {
                return Err(VmpError::domain("kappa", format!("{kappa} must exceed 1 − d = {}", 1.0 - d as f64)));
            }
            pack_matrix_family(-0.5 * (kappa + d as f64 + 1.0), lambda, -0.5)
        }
        _ => {
            return Err(VmpError::domain("common", format!("parameters do not belong to {family}")));
        }
    };
    NaturalParameterVector::new(family, eta)
}

fn check_scale_matrix(lambda: &DenseMatrix, d: usize, diagonal: bool) -> Result<()> {
    if lambda.shape() != (d, d) {
        return Err(VmpError::Dimension(format!("scale matrix is {:?}, expected {d}x{d}", lambda.shape())));
    }
    if diagonal {
        for j in 0..d {
            for i in 0..d {
                if i != j && lambda[(i, j)] != 0.0 {
                    return Err(VmpError::domain("lambda", "scale matrix must be diagonal"));
                }
            }
            positive("lambda", lambda[(j, j)])?;
        }
        Ok(())
    } else {
        SpdFactor::new(lambda, "Lambda", false)
            .map(|_| ())
            .map_err(|e| VmpError::domain("lambda", e.to_string()))
    }
}

/// Inverse of [`common_to_natural`]; requires a proper member.
pub fn natural_to_common(x: &NaturalParameterVector) -> Result<CommonParameters> {
    x.check_proper()?;
    let e = &x.eta;
    Ok(match x.family {
        FamilyTag::Bernoulli => CommonParameters::Bernoulli { p: sigmoid(e[0]) },
        FamilyTag::UnivariateNormal => {
            CommonParameters::UnivariateNormal { mu: -0.5 * e[0] / e[1], sigma_sq: -0.5 / e[1] }
        }
        FamilyTag::InverseChiSquared => {
            CommonParameters::InverseChiSquared { kappa: -2.0 - 2.0 * e[0], lambda: -2.0 * e[1] }
        }
        FamilyTag::Beta => CommonParameters::Beta { alpha: e[0] + 1.0, beta: e[1] + 1.0 },
        FamilyTag::InverseGaussian => {
            CommonParameters::InverseGaussian { mu: (e[1] / e[0]).sqrt(), lambda: -2.0 * e[1] }
        }
        FamilyTag::MultivariateNormal(d) => {
            let m = MvnMoments::from_natural(e.as_slice(), d, false)?;
            CommonParameters::MultivariateNormal { mu: m.mean, sigma: m.cov }
        }
        FamilyTag::InverseWishart(d) => CommonParameters::InverseWishart {
            kappa: -(d as f64) - 1.0 - 2.0 * e[0],
            lambda: symmetrize(&vec_inverse(&e.as_slice()[1..], d)?) * -2.0,
        },
        FamilyTag::InverseGWishartDiag(d) => {
            let mut lambda = DenseMatrix::zeros(d, d);
            for i in 0..d {
                lambda[(i, i)] = -2.0 * e[1 + i * (d + 1)];
            }
            CommonParameters::InverseGWishartDiag { kappa: -(d as f64) - 1.0 - 2.0 * e[0], lambda }
        }
    })
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let ex = x.exp();
        ex / (1.0 + ex)
    }
}

/// `log(1 + eˣ)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Pieces of the Inverse-Wishart natural parameter that recur in its formulas.
struct IwParts {
    d: usize,
    eta1: f64,
    /// log|−vec⁻¹(η₂)|
    log_det_neg_s: f64,
    neg_s: SpdFactor,
}

impl IwParts {
    fn new(eta: &Vector, d: usize) -> Result<Self> {
        let s = symmetrize(&vec_inverse(&eta.as_slice()[1..], d)?);
        let neg_s = SpdFactor::new(&(-&s), "Inverse-Wishart −vec⁻¹(η₂)", false)?;
        Ok(IwParts { d, eta1: eta[0], log_det_neg_s: neg_s.log_det(), neg_s })
    }

    fn gamma_arg(&self, j: usize) -> f64 {
        -self.eta1 - 0.5 * (self.d + j) as f64
    }
}

/// `E{T(x)}` in natural parameters.
pub fn expected_sufficient_statistic(x: &NaturalParameterVector) -> Result<Vector> {
    x.check_proper()?;
    let e = &x.eta;
    Ok(match x.family {
        FamilyTag::Bernoulli => Vector::from_element(1, sigmoid(e[0])),
        FamilyTag::UnivariateNormal => Vector::from_column_slice(&[
            -e[0] / (2.0 * e[1]),
            (e[0] * e[0] - 2.0 * e[1]) / (4.0 * e[1] * e[1]),
        ]),
        FamilyTag::InverseChiSquared => Vector::from_column_slice(&[
            (-e[1]).ln() - digamma_unchecked(-e[0] - 1.0),
            (e[0] + 1.0) / e[1],
        ]),
        FamilyTag::Beta => {
            let total = digamma_unchecked(e[0] + e[1] + 2.0);
            Vector::from_column_slice(&[
                digamma_unchecked(e[0] + 1.0) - total,
                digamma_unchecked(e[1] + 1.0) - total,
            ])
        }
        FamilyTag::InverseGaussian => Vector::from_column_slice(&[
            (e[1] / e[0]).sqrt(),
            (e[0] / e[1]).sqrt() - 1.0 / (2.0 * e[1]),
        ]),
        FamilyTag::MultivariateNormal(d) => {
            let m = MvnMoments::from_natural(e.as_slice(), d, false)?;
            let mut out = Vector::zeros(d + d * d);
            out.rows_mut(0, d).copy_from(&m.mean);
            out.rows_mut(d, d * d).copy_from_slice(m.second_moment().as_slice());
            out
        }
        FamilyTag::InverseWishart(d) => {
            let p = IwParts::new(e, d)?;
            let psi_sum: f64 = (1..=d).map(|j| digamma_unchecked(p.gamma_arg(j))).sum();
            // (vec⁻¹η₂)⁻¹ = −(−vec⁻¹η₂)⁻¹
            let s_inv = -p.neg_s.inverse();
            let scale = p.eta1 + 0.5 * (d + 1) as f64;
            let mut out = Vector::zeros(1 + d * d);
            out[0] = p.log_det_neg_s - psi_sum;
            for (k, v) in s_inv.iter().enumerate() {
                out[1 + k] = scale * v;
            }
            out
        }
        FamilyTag::InverseGWishartDiag(d) => {
            let mut out = Vector::zeros(1 + d * d);
            for i in 0..d {
                let e2 = e[1 + i * (d + 1)];
                out[0] += (-e2).ln() - digamma_unchecked(-e[0] - 1.0);
                out[1 + i * (d + 1)] = (e[0] + 1.0) / e2;
            }
            out
        }
    })
}

/// Log-partition function `A(η)`.
pub fn log_partition(x: &NaturalParameterVector) -> Result<f64> {
    x.check_proper()?;
    let e = &x.eta;
    Ok(match x.family {
        FamilyTag::Bernoulli => softplus(e[0]),
        FamilyTag::UnivariateNormal => -0.25 * e[0] * e[0] / e[1] - 0.5 * (-2.0 * e[1]).ln(),
        FamilyTag::InverseChiSquared => inv_chisq_log_partition(e[0], e[1]),
        FamilyTag::Beta => ln_gamma(e[0] + 1.0) + ln_gamma(e[1] + 1.0) - ln_gamma(e[0] + e[1] + 2.0),
        FamilyTag::InverseGaussian => -2.0 * (e[0] * e[1]).sqrt() - 0.5 * (-2.0 * e[1]).ln(),
        FamilyTag::MultivariateNormal(d) => {
            let m = MvnMoments::from_natural(e.as_slice(), d, false)?;
            // −¼η₁ᵀS⁻¹η₁ − ½log|−2S| with S⁻¹ = −2Σ and −2S the precision.
            let eta1 = e.rows(0, d);
            0.5 * eta1.dot(&m.mean) - 0.5 * m.precision.log_det()
        }
        FamilyTag::InverseWishart(d) => {
            let p = IwParts::new(e, d)?;
            (p.eta1 + 0.5 * (d + 1) as f64) * p.log_det_neg_s
                + (1..=d).map(|j| ln_gamma(p.gamma_arg(j))).sum::<f64>()
        }
        FamilyTag::InverseGWishartDiag(d) => {
            (0..d).map(|i| inv_chisq_log_partition(e[0], e[1 + i * (d + 1)])).sum()
        }
    })
}

fn inv_chisq_log_partition(e1: f64, e2: f64) -> f64 {
    (e1 + 1.0) * (-e2).ln() + ln_gamma(-e1 - 1.0)
}

fn inv_chisq_entropy(e1: f64, e2: f64) -> f64 {
    let g = -e1 - 1.0;
    ln_gamma(g) + e1 * digamma_unchecked(g) + (-e2).ln() - e1 - 1.0
}

/// `e^{4√(η₁η₂)}·Ei(−4√(η₁η₂))`, evaluated without overflow.
fn inverse_gaussian_ei_term(e1: f64, e2: f64) -> f64 {
    -expint_e1_scaled(4.0 * (e1 * e2).sqrt())
}

/// Differential (or discrete, for Bernoulli) entropy.
pub fn entropy(x: &NaturalParameterVector) -> Result<f64> {
    x.check_proper()?;
    let e = &x.eta;
    Ok(match x.family {
        FamilyTag::Bernoulli => softplus(e[0]) - e[0] * sigmoid(e[0]),
        FamilyTag::UnivariateNormal => 0.5 * (1.0 + (2.0 * PI).ln()) + 0.5 * (-0.5 / e[1]).ln(),
        FamilyTag::InverseChiSquared => inv_chisq_entropy(e[0], e[1]),
        FamilyTag::Beta => {
            let a = log_partition(x)?;
            a - e[0] * digamma_unchecked(e[0] + 1.0) - e[1] * digamma_unchecked(e[1] + 1.0)
                + (e[0] + e[1]) * digamma_unchecked(e[0] + e[1] + 2.0)
        }
        FamilyTag::InverseGaussian => {
            0.5 + 0.25 * (PI * PI * e[1] / (e[0] * e[0] * e[0])).ln() + 1.5 * inverse_gaussian_ei_term(e[0], e[1])
        }
        FamilyTag::MultivariateNormal(d) => {
            let m = MvnMoments::from_natural(e.as_slice(), d, false)?;
            0.5 * d as f64 * (1.0 + (2.0 * PI).ln()) - 0.5 * m.precision.log_det()
        }
        FamilyTag::InverseWishart(d) => {
            let p = IwParts::new(e, d)?;
            let df = d as f64;
            (1..=d)
                .map(|j| {
                    let g = p.gamma_arg(j);
                    ln_gamma(g) + p.eta1 * digamma_unchecked(g)
                })
                .sum::<f64>()
                + 0.5 * (df + 1.0) * p.log_det_neg_s
                - df * p.eta1
                - 0.5 * df * (df + 1.0)
                + 0.25 * df * (df - 1.0) * PI.ln()
        }
        FamilyTag::InverseGWishartDiag(d) => (0..d).map(|i| inv_chisq_entropy(e[0], e[1 + i * (d + 1)])).sum(),
    })
}

/// `E{log h(x)}` for the family's base measure.
pub fn expected_log_base_measure(x: &NaturalParameterVector) -> Result<f64> {
    x.check_proper()?;
    let e = &x.eta;
    Ok(match x.family {
        FamilyTag::Bernoulli | FamilyTag::InverseChiSquared | FamilyTag::Beta => 0.0,
        FamilyTag::InverseGWishartDiag(_) => 0.0,
        FamilyTag::UnivariateNormal => -0.5 * (2.0 * PI).ln(),
        FamilyTag::InverseGaussian => {
            let e_log_x = 0.5 * (e[1] / e[0]).ln() + inverse_gaussian_ei_term(e[0], e[1]);
            -0.5 * (2.0 * PI).ln() - 1.5 * e_log_x
        }
        FamilyTag::MultivariateNormal(d) => -0.5 * d as f64 * (2.0 * PI).ln(),
        FamilyTag::InverseWishart(d) => -0.25 * (d * (d - 1)) as f64 * PI.ln(),
    })
}

/// Convenience: `E(X⁻¹)` for Inverse-χ², Inverse-Wishart and diagonal
/// Inverse G-Wishart members, as a `d×d` matrix.
pub fn expected_inverse(x: &NaturalParameterVector) -> Result<DenseMatrix> {
    let d = x.family.dim();
    match x.family {
        FamilyTag::InverseChiSquared => {
            let et = expected_sufficient_statistic(x)?;
            Ok(DenseMatrix::from_element(1, 1, et[1]))
        }
        FamilyTag::InverseWishart(_) | FamilyTag::InverseGWishartDiag(_) => {
            let et = expected_sufficient_statistic(x)?;
            vec_inverse(&et.as_slice()[1..], d)
        }
        other => Err(VmpError::domain("family", format!("E(X⁻¹) is not defined for {other}"))),
    }
}

/// Convenience: `E(log|X|)` for the same families as [`expected_inverse`].
pub fn expected_log_det(x: &NaturalParameterVector) -> Result<f64> {
    match x.family {
        FamilyTag::InverseChiSquared | FamilyTag::InverseWishart(_) | FamilyTag::InverseGWishartDiag(_) => {
            Ok(expected_sufficient_statistic(x)?[0])
        }
        other => Err(VmpError::domain("family", format!("E(log|X|) is not defined for {other}"))),
    }
}

/// Log normalizer `log C_{d,κ}` of the Inverse-Wishart density
/// `|Λ|^{κ/2} |X|^{−(κ+d+1)/2} exp{−½tr(ΛX⁻¹)} / C_{d,κ}`.
pub fn log_inverse_wishart_normalizer(d: usize, kappa: f64) -> f64 {
    let df = d as f64;
    0.5 * df * kappa * 2f64.ln()
        + 0.25 * df * (df - 1.0) * PI.ln()
        + (1..=d).map(|j| ln_gamma(0.5 * (kappa + 1.0 - j as f64))).sum::<f64>()
}
