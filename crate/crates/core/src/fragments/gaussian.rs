//! Gaussian prior, Inverse Wishart prior, iterated Inverse G-Wishart,
//! Gaussian penalization and Gaussian likelihood fragments.

use std::f64::consts::{LN_2, PI};

use crate::error::{Result, VmpError};
use crate::exec::{self, Exec};
use crate::expfam::{
    expected_inverse, expected_log_base_measure, expected_log_det, expected_sufficient_statistic,
    log_inverse_wishart_normalizer, log_partition, FamilyTag, NaturalParameterVector,
};
use crate::fragments::is_scalar_variance;
use crate::linalg::{g_vmp, mvn_natural, DenseMatrix, GvmpArgs, MvnMoments, SpdFactor, Vector};
use crate::special::{digamma_unchecked, ln_gamma};

fn ln_2pi() -> f64 {
    (2.0 * PI).ln()
}

/// `E_q{log p}` when the factor `p` is itself a member of the node's family:
/// `E_q{T}ᵀη_p − A(η_p) + E_q{log h}`.
fn conjugate_prior_expectation(eta_p: &Vector, q: &NaturalParameterVector) -> Result<f64> {
    let prior = NaturalParameterVector::new(q.family, eta_p.clone())?;
    let et = expected_sufficient_statistic(q)?;
    Ok(et.dot(eta_p) - log_partition(&prior)? + expected_log_base_measure(q)?)
}

/// `θ ~ N(μ_θ, Σ_θ)`.
#[derive(Debug, Clone)]
pub struct GaussianPriorSpec {
    mu: Vector,
    sigma: DenseMatrix,
    eta: Vector,
}

impl GaussianPriorSpec {
    pub fn new(mu: Vector, sigma: DenseMatrix) -> Result<Self> {
        if sigma.nrows() != mu.len() || sigma.ncols() != mu.len() {
            return Err(VmpError::Dimension(format!(
                "Gaussian prior: μ has length {}, Σ is {}x{}",
                mu.len(),
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        let eta = mvn_natural(&mu, &sigma, "Gaussian prior Σ_θ")?;
        Ok(GaussianPriorSpec { mu, sigma, eta })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &Vector {
        &self.mu
    }

    pub fn sigma(&self) -> &DenseMatrix {
        &self.sigma
    }

    /// `(Σ_θ⁻¹μ_θ, −½vec(Σ_θ⁻¹))`, constant across sweeps.
    pub fn message(&self) -> &Vector {
        &self.eta
    }

    pub fn expected_log_factor(&self, q: &NaturalParameterVector) -> Result<f64> {
        conjugate_prior_expectation(&self.eta, q)
    }
}

/// `Θ ~ Inverse-Wishart(κ_Θ, Λ_Θ)`. Also serves as the diagonal Inverse
/// G-Wishart prior when bound to a diagonal node, and as the Inverse-χ²
/// prior when `d = 1`.
#[derive(Debug, Clone)]
pub struct InverseWishartPriorSpec {
    kappa: f64,
    lambda: DenseMatrix,
    eta: Vector,
}

impl InverseWishartPriorSpec {
    pub fn new(kappa: f64, lambda: DenseMatrix) -> Result<Self> {
        let d = lambda.nrows();
        if d == 0 || lambda.ncols() != d {
            return Err(VmpError::Dimension(format!(
                "Inverse-Wishart prior: Λ is {}x{}",
                lambda.nrows(),
                lambda.ncols()
            )));
        }
        let diagonal = (0..d).all(|j| (0..d).all(|i| i == j || lambda[(i, j)] == 0.0));
        // A diagonal Λ may feed an IGW-diag node, which only needs κ + d − 1 > 0.
        let floor = if diagonal { 1.0 - d as f64 } else { d as f64 - 1.0 };
        if !(kappa > floor) || !kappa.is_finite() {
            return Err(VmpError::domain("κ_Θ", format!("{kappa} must exceed {floor}")));
        }
        SpdFactor::new(&lambda, "Inverse-Wishart prior Λ_Θ", false)?;
        let mut eta = Vector::zeros(1 + d * d);
        eta[0] = -0.5 * (kappa + d as f64 + 1.0);
        for (k, v) in lambda.iter().enumerate() {
            eta[1 + k] = -0.5 * v;
        }
        Ok(InverseWishartPriorSpec { kappa, lambda, eta })
    }

    pub fn dim(&self) -> usize {
        self.lambda.nrows()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn lambda(&self) -> &DenseMatrix {
        &self.lambda
    }

    fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|j| (0..d).all(|i| i == j || self.lambda[(i, j)] == 0.0))
    }

    pub(crate) fn accepts(&self, family: FamilyTag) -> bool {
        let d = self.dim();
        match family {
            FamilyTag::InverseWishart(k) => k == d && self.kappa > d as f64 - 1.0,
            FamilyTag::InverseGWishartDiag(k) => k == d && self.is_diagonal(),
            FamilyTag::InverseChiSquared => d == 1,
            _ => false,
        }
    }

    /// `(−½(κ_Θ + d + 1), −½vec(Λ_Θ))`.
    pub fn message(&self) -> &Vector {
        &self.eta
    }

    pub fn expected_log_factor(&self, q: &NaturalParameterVector) -> Result<f64> {
        conjugate_prior_expectation(&self.eta, q)
    }
}

/// Graph `G` of the conditional `Θ₁|Θ₂ ~ Inverse-G-Wishart(G, κ, Θ₂⁻¹)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IgwGraph {
    /// Both nodes are scalar variances.
    ScalarD1,
    /// Ordinary Inverse Wishart conditional.
    TotallyConnected,
    /// Diagonal `Θ₁` given diagonal `Θ₂`.
    TotallyDisconnected,
}

#[derive(Debug, Clone)]
pub struct IteratedIgwSpec {
    graph: IgwGraph,
    kappa: f64,
    d: usize,
}

impl IteratedIgwSpec {
    pub fn new(graph: IgwGraph, kappa: f64, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(VmpError::domain("d_Θ", "must be at least 1"));
        }
        if graph == IgwGraph::ScalarD1 && d != 1 {
            return Err(VmpError::domain("d_Θ", format!("scalar_d1 requires d = 1, got {d}")));
        }
        let floor = match graph {
            IgwGraph::TotallyDisconnected => 1.0 - d as f64,
            _ => d as f64 - 1.0,
        };
        if !(kappa > floor) || !kappa.is_finite() {
            return Err(VmpError::domain("κ", format!("{kappa} must exceed {floor}")));
        }
        Ok(IteratedIgwSpec { graph, kappa, d })
    }

    pub fn scalar(kappa: f64) -> Result<Self> {
        Self::new(IgwGraph::ScalarD1, kappa, 1)
    }

    pub fn graph(&self) -> IgwGraph {
        self.graph
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub(crate) fn accepts(&self, port: usize, family: FamilyTag) -> bool {
        let d = self.d;
        if d == 1 && is_scalar_variance(family) {
            return true;
        }
        match (self.graph, port) {
            (IgwGraph::ScalarD1, _) => false,
            (IgwGraph::TotallyConnected, 0) => family == FamilyTag::InverseWishart(d),
            (IgwGraph::TotallyConnected, _) => {
                family == FamilyTag::InverseWishart(d) || family == FamilyTag::InverseGWishartDiag(d)
            }
            (IgwGraph::TotallyDisconnected, _) => family == FamilyTag::InverseGWishartDiag(d),
        }
    }

    /// First natural parameter of the message to `Θ₂`: the exponent of `|Θ₂|`
    /// in the conditional density's normalizer.
    fn theta2_shape(&self) -> f64 {
        match self.graph {
            IgwGraph::TotallyDisconnected => -0.5 * (self.kappa + self.d as f64 - 1.0),
            _ => -0.5 * self.kappa,
        }
    }

    /// Message to `Θ₁` (`port = 0`) or `Θ₂` (`port = 1`).
    pub fn message(&self, port: usize, q1: &NaturalParameterVector, q2: &NaturalParameterVector) -> Result<Vector> {
        match (self.graph, port) {
            (IgwGraph::ScalarD1, 0) => {
                let e_inv = scalar_reciprocal_mean(&q2.eta, "iterated IGW: (η↔Θ₂)₂")?;
                Ok(Vector::from_column_slice(&[-0.5 * (self.kappa + 2.0), -0.5 * e_inv]))
            }
            (IgwGraph::ScalarD1, _) => {
                let e_inv = scalar_reciprocal_mean(&q1.eta, "iterated IGW: (η↔Θ₁)₂")?;
                Ok(Vector::from_column_slice(&[-0.5 * self.kappa, -0.5 * e_inv]))
            }
            (_, 0) => Ok(pack(-0.5 * (self.kappa + self.d as f64 + 1.0), &expected_inverse(q2)?, -0.5)),
            (_, _) => Ok(pack(self.theta2_shape(), &expected_inverse(q1)?, -0.5)),
        }
    }

    pub fn expected_log_factor(&self, q1: &NaturalParameterVector, q2: &NaturalParameterVector) -> Result<f64> {
        q1.check_proper()?;
        q2.check_proper()?;
        let k = self.kappa;
        let df = self.d as f64;
        match self.graph {
            IgwGraph::ScalarD1 => {
                let (a1, b1) = (q1.eta[0], q1.eta[1]);
                let (a2, b2) = (q2.eta[0], q2.eta[1]);
                let e_log1 = (-b1).ln() - digamma_unchecked(-a1 - 1.0);
                let e_inv1 = (a1 + 1.0) / b1;
                let e_inv2 = (a2 + 1.0) / b2;
                let e_log2 = (-b2).ln() - digamma_unchecked(-a2 - 1.0);
                Ok(-0.5 * (k + 2.0) * e_log1 - 0.5 * e_inv2 * e_inv1 - 0.5 * k * e_log2
                    - 0.5 * k * LN_2
                    - ln_gamma(0.5 * k))
            }
            IgwGraph::TotallyConnected => {
                let et1 = expected_sufficient_statistic(q1)?;
                let e_inv2 = expected_inverse(q2)?;
                let cross: f64 = e_inv2.iter().zip(et1.iter().skip(1)).map(|(a, b)| a * b).sum();
                Ok(-0.5 * (k + df + 1.0) * et1[0] - 0.5 * cross - 0.5 * k * expected_log_det(q2)?
                    - log_inverse_wishart_normalizer(self.d, k))
            }
            IgwGraph::TotallyDisconnected => {
                let e_log1 = expected_log_det(q1)?;
                let e_inv1 = expected_inverse(q1)?;
                let e_inv2 = expected_inverse(q2)?;
                let cross: f64 = (0..self.d).map(|i| e_inv1[(i, i)] * e_inv2[(i, i)]).sum();
                let shape = 0.5 * (k + df - 1.0);
                Ok(-0.5 * (k + df + 1.0) * e_log1 - 0.5 * cross - shape * expected_log_det(q2)?
                    - df * (shape * LN_2 + ln_gamma(shape)))
            }
        }
    }
}

/// `((η)₁ + 1)/(η)₂`, the Inverse-χ² mean of the reciprocal.
fn scalar_reciprocal_mean(eta: &Vector, context: &str) -> Result<f64> {
    if eta[1] == 0.0 {
        return Err(VmpError::numeric(context, "zero denominator"));
    }
    Ok((eta[0] + 1.0) / eta[1])
}

fn pack(first: f64, m: &DenseMatrix, scale: f64) -> Vector {
    let mut out = Vector::zeros(1 + m.len());
    out[0] = first;
    for (k, v) in m.iter().enumerate() {
        out[1 + k] = scale * v;
    }
    out
}

/// Shape of one penalized block: `m` exchangeable sub-vectors of length `d`
/// sharing the covariance `Θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PenaltyBlock {
    pub m: usize,
    pub d: usize,
}

/// `θ₀ ~ N(μ_θ₀, Σ_θ₀)`, `θ_ℓ | Θ_ℓ ~ N(0, I_{m_ℓ} ⊗ Θ_ℓ)`.
#[derive(Debug, Clone)]
pub struct GaussianPenalizationSpec {
    mu0: Vector,
    prec0: DenseMatrix,
    prec0_mu0: Vector,
    log_det_sigma0: f64,
    blocks: Vec<PenaltyBlock>,
    offsets: Vec<usize>,
    dim: usize,
}

impl GaussianPenalizationSpec {
    pub fn new(mu0: Vector, sigma0: DenseMatrix, blocks: Vec<PenaltyBlock>) -> Result<Self> {
        let d0 = mu0.len();
        if sigma0.nrows() != d0 || sigma0.ncols() != d0 {
            return Err(VmpError::Dimension(format!(
                "penalization: μ_θ₀ has length {d0}, Σ_θ₀ is {}x{}",
                sigma0.nrows(),
                sigma0.ncols()
            )));
        }
        if blocks.is_empty() {
            return Err(VmpError::domain("penalization blocks", "at least one block is required"));
        }
        if let Some(b) = blocks.iter().find(|b| b.m == 0 || b.d == 0) {
            return Err(VmpError::domain("penalization blocks", format!("empty block {b:?}")));
        }
        let (prec0, log_det_sigma0) = if d0 > 0 {
            let f = SpdFactor::new(&sigma0, "penalization Σ_θ₀", false)?;
            (f.inverse(), f.log_det())
        } else {
            (DenseMatrix::zeros(0, 0), 0.0)
        };
        let prec0_mu0 = &prec0 * &mu0;
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut dim = d0;
        for b in &blocks {
            offsets.push(dim);
            dim += b.m * b.d;
        }
        Ok(GaussianPenalizationSpec { mu0, prec0, prec0_mu0, log_det_sigma0, blocks, offsets, dim })
    }

    pub fn blocks(&self) -> &[PenaltyBlock] {
        &self.blocks
    }

    /// Length of the stacked coefficient vector `(θ₀, …, θ_L)`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn d0(&self) -> usize {
        self.mu0.len()
    }

    pub(crate) fn accepts(&self, port: usize, family: FamilyTag) -> bool {
        if port == 0 {
            return family == FamilyTag::MultivariateNormal(self.dim);
        }
        let Some(b) = self.blocks.get(port - 1) else { return false };
        (b.d == 1 && is_scalar_variance(family))
            || family == FamilyTag::InverseWishart(b.d)
            || family == FamilyTag::InverseGWishartDiag(b.d)
    }

    /// The selector `D_ℓ` (1-based `ell`) that picks the `ℓ`th block's
    /// `d×d` diagonal sub-blocks out of `E(θθᵀ)`.
    pub fn selector(&self, ell: usize) -> Result<DenseMatrix> {
        let b = *self
            .blocks
            .get(ell.wrapping_sub(1))
            .ok_or_else(|| VmpError::domain("block index", format!("{ell} is not in 1..={}", self.blocks.len())))?;
        let mut out = DenseMatrix::zeros(self.dim, self.dim);
        let off = self.offsets[ell - 1];
        for k in 0..b.m {
            out.view_mut((off + k * b.d, off + k * b.d), (b.d, b.d)).fill(1.0);
        }
        Ok(out)
    }

    /// `Σ_k E(θ_ℓk θ_ℓkᵀ)` for 0-based block index `l`.
    fn block_second_moment(&self, l: usize, second: &DenseMatrix) -> DenseMatrix {
        let b = self.blocks[l];
        let off = self.offsets[l];
        let mut acc = DenseMatrix::zeros(b.d, b.d);
        for k in 0..b.m {
            acc += second.view((off + k * b.d, off + k * b.d), (b.d, b.d));
        }
        acc
    }

    pub fn message(&self, port: usize, q: &[&NaturalParameterVector]) -> Result<Vector> {
        if port == 0 {
            let d0 = self.d0();
            let mut prec = DenseMatrix::zeros(self.dim, self.dim);
            prec.view_mut((0, 0), (d0, d0)).copy_from(&self.prec0);
            for (l, b) in self.blocks.iter().enumerate() {
                let omega = expected_inverse(q[l + 1])?;
                for k in 0..b.m {
                    let at = self.offsets[l] + k * b.d;
                    prec.view_mut((at, at), (b.d, b.d)).copy_from(&omega);
                }
            }
            let mut eta = Vector::zeros(self.dim + self.dim * self.dim);
            eta.rows_mut(0, d0).copy_from(&self.prec0_mu0);
            for (k, v) in prec.iter().enumerate() {
                eta[self.dim + k] = -0.5 * v;
            }
            return Ok(eta);
        }
        let l = port - 1;
        let b = self.blocks[l];
        let m = MvnMoments::from_natural(q[0].eta.as_slice(), self.dim, false)?;
        let s = self.block_second_moment(l, &m.second_moment());
        Ok(pack(-0.5 * b.m as f64, &s, -0.5))
    }

    pub fn expected_log_factor(&self, q: &[&NaturalParameterVector]) -> Result<f64> {
        let mm = MvnMoments::from_natural(q[0].eta.as_slice(), self.dim, false)?;
        let second = mm.second_moment();
        let d0 = self.d0();
        let mut total = 0.0;
        if d0 > 0 {
            let m00 = second.view((0, 0), (d0, d0));
            let mu_part = mm.mean.rows(0, d0);
            total += -0.5 * self.prec0.component_mul(&m00).sum() + self.prec0_mu0.dot(&mu_part)
                - 0.5 * self.prec0_mu0.dot(&self.mu0)
                - 0.5 * d0 as f64 * ln_2pi()
                - 0.5 * self.log_det_sigma0;
        }
        for (l, b) in self.blocks.iter().enumerate() {
            let omega = expected_inverse(q[l + 1])?;
            let s = self.block_second_moment(l, &second);
            total += -0.5 * omega.component_mul(&s).sum()
                - 0.5 * (b.m * b.d) as f64 * ln_2pi()
                - 0.5 * b.m as f64 * expected_log_det(q[l + 1])?;
        }
        Ok(total)
    }
}

/// `y | θ₁, θ₂ ~ N(Aθ₁, θ₂ I)`, stored through its sufficient summaries.
#[derive(Debug, Clone)]
pub struct GaussianLikelihoodSpec {
    n: usize,
    ata: DenseMatrix,
    aty: Vector,
    yty: f64,
}

impl GaussianLikelihoodSpec {
    pub fn new(y: &Vector, a: &DenseMatrix, exec: Exec) -> Result<Self> {
        if y.is_empty() {
            return Err(VmpError::domain("y", "at least one observation is required"));
        }
        if a.nrows() != y.len() {
            return Err(VmpError::Dimension(format!("A has {} rows but y has length {}", a.nrows(), y.len())));
        }
        let ata = exec::weighted_gram(a, &vec![1.0; y.len()], exec);
        let aty = exec::transpose_mul(a, y.as_slice(), exec);
        Ok(GaussianLikelihoodSpec { n: y.len(), ata, aty, yty: y.dot(y) })
    }

    pub fn dim(&self) -> usize {
        self.aty.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn message(&self, port: usize, q1: &NaturalParameterVector, q2: &NaturalParameterVector) -> Result<Vector> {
        let d = self.dim();
        if port == 0 {
            q2.check_proper()?;
            let e_inv = scalar_reciprocal_mean(&q2.eta, "Gaussian likelihood: (η↔θ₂)₂")?;
            let mut eta = Vector::zeros(d + d * d);
            eta.rows_mut(0, d).copy_from(&(&self.aty * e_inv));
            for (k, v) in self.ata.iter().enumerate() {
                eta[d + k] = -0.5 * v * e_inv;
            }
            return Ok(eta);
        }
        let g = g_vmp(&GvmpArgs { eta: q1.eta.as_slice(), q: &self.ata, r: &self.aty, s: self.yty })?;
        Ok(Vector::from_column_slice(&[-0.5 * self.n as f64, g]))
    }

    pub fn expected_log_factor(&self, q1: &NaturalParameterVector, q2: &NaturalParameterVector) -> Result<f64> {
        q2.check_proper()?;
        let mm = MvnMoments::from_natural(q1.eta.as_slice(), self.dim(), false)?;
        let e_inv = (q2.eta[0] + 1.0) / q2.eta[1];
        let e_log = expected_log_det(q2)?;
        let n = self.n as f64;
        let quad = self.aty.dot(&mm.mean) - 0.5 * self.ata.component_mul(&mm.second_moment()).sum() - 0.5 * self.yty;
        Ok(e_inv * quad - 0.5 * n * e_log - 0.5 * n * ln_2pi())
    }
}
