//! Factor graph fragments: a factor together with its ordered ports and the
//! closed-form rules for the messages it emits.
//!
//! A fragment never reads the message store directly. The engine hands it,
//! for every port, the combined vector `η↔ = η(node→factor) + η(factor→node)`,
//! which equals the current q-density natural parameter of the port's node.

pub mod gaussian;
pub mod glm;

use crate::error::{Result, VmpError};
use crate::exec::Exec;
use crate::expfam::{FamilyTag, NaturalParameterVector};
use crate::linalg::Vector;

pub use gaussian::{
    GaussianLikelihoodSpec, GaussianPenalizationSpec, GaussianPriorSpec, IgwGraph, InverseWishartPriorSpec,
    IteratedIgwSpec, PenaltyBlock,
};
pub use glm::{jj_weight, LogisticSpec, PoissonSpec, ProbitSpec, POISSON_OVERFLOW_CAP};

/// Per-factor variational state kept between sweeps.
#[derive(Debug, Clone, PartialEq)]
pub enum FragmentState {
    Stateless,
    /// Jaakkola-Jordan variational parameters ξ.
    Logistic { xi: Vec<f64> },
    /// Albert-Chib truncation means ν.
    Probit { nu: Vec<f64> },
    /// Poisson fixed-point intensities ω.
    Poisson { omega: Vec<f64> },
}

/// Evaluation context shared by all fragment kernels.
#[derive(Debug, Clone, Copy, Default)]
pub struct FragmentCtx {
    pub exec: Exec,
}

#[derive(Debug, Clone)]
pub enum FragmentSpec {
    GaussianPrior(GaussianPriorSpec),
    InverseWishartPrior(InverseWishartPriorSpec),
    IteratedIgw(IteratedIgwSpec),
    GaussianPenalization(GaussianPenalizationSpec),
    GaussianLikelihood(GaussianLikelihoodSpec),
    Logistic(LogisticSpec),
    Probit(ProbitSpec),
    Poisson(PoissonSpec),
}

impl FragmentSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            FragmentSpec::GaussianPrior(_) => "gaussian_prior",
            FragmentSpec::InverseWishartPrior(_) => "inverse_wishart_prior",
            FragmentSpec::IteratedIgw(_) => "iterated_inverse_g_wishart",
            FragmentSpec::GaussianPenalization(_) => "gaussian_penalization",
            FragmentSpec::GaussianLikelihood(_) => "gaussian_likelihood",
            FragmentSpec::Logistic(_) => "jaakkola_jordan_logistic",
            FragmentSpec::Probit(_) => "albert_chib_probit",
            FragmentSpec::Poisson(_) => "poisson_fixed_point",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            FragmentSpec::GaussianPrior(_)
            | FragmentSpec::InverseWishartPrior(_)
            | FragmentSpec::Logistic(_)
            | FragmentSpec::Probit(_)
            | FragmentSpec::Poisson(_) => 1,
            FragmentSpec::IteratedIgw(_) | FragmentSpec::GaussianLikelihood(_) => 2,
            FragmentSpec::GaussianPenalization(s) => 1 + s.blocks().len(),
        }
    }

    /// True for fragments whose message depends on the receiving node's own
    /// q-density, which voids the monotone-ELBO guarantee.
    pub fn is_non_conjugate(&self) -> bool {
        matches!(self, FragmentSpec::Poisson(_))
    }

    /// Checks that `family` may be bound to `port`.
    pub fn check_port(&self, port: usize, family: FamilyTag) -> Result<()> {
        let ok = match self {
            FragmentSpec::GaussianPrior(s) => family == FamilyTag::MultivariateNormal(s.dim()),
            FragmentSpec::InverseWishartPrior(s) => s.accepts(family),
            FragmentSpec::IteratedIgw(s) => s.accepts(port, family),
            FragmentSpec::GaussianPenalization(s) => s.accepts(port, family),
            FragmentSpec::GaussianLikelihood(s) => match port {
                0 => family == FamilyTag::MultivariateNormal(s.dim()),
                _ => is_scalar_variance(family),
            },
            FragmentSpec::Logistic(s) => family == FamilyTag::MultivariateNormal(s.dim()),
            FragmentSpec::Probit(s) => family == FamilyTag::MultivariateNormal(s.dim()),
            FragmentSpec::Poisson(s) => family == FamilyTag::MultivariateNormal(s.dim()),
        };
        if port >= self.arity() {
            return Err(VmpError::Graph(format!("{} has {} ports, got port {port}", self.kind(), self.arity())));
        }
        if ok {
            Ok(())
        } else {
            Err(VmpError::Graph(format!("{} port {port} cannot bind a {family} node", self.kind())))
        }
    }

    /// Fragment-specific starting message for `port`, when the generic vague
    /// start is unsuitable.
    pub fn initial_message(&self, _port: usize, ctx: FragmentCtx) -> Option<Vector> {
        match self {
            FragmentSpec::Poisson(s) => Some(s.initial_message(ctx)),
            _ => None,
        }
    }

    pub fn initial_state(&self) -> FragmentState {
        match self {
            FragmentSpec::Logistic(s) => FragmentState::Logistic { xi: vec![0.0; s.n()] },
            FragmentSpec::Probit(s) => FragmentState::Probit { nu: vec![0.0; s.n()] },
            FragmentSpec::Poisson(s) => FragmentState::Poisson { omega: vec![1.0; s.n()] },
            _ => FragmentState::Stateless,
        }
    }

    /// New factor→node natural parameter for `port`, plus the updated state
    /// when the fragment carries one. `q[i]` is the combined vector of port `i`.
    pub fn message(
        &self,
        port: usize,
        q: &[&NaturalParameterVector],
        ctx: FragmentCtx,
    ) -> Result<(Vector, Option<FragmentState>)> {
        if q.len() != self.arity() {
            return Err(VmpError::Graph(format!("{} expects {} inputs, got {}", self.kind(), self.arity(), q.len())));
        }
        let msg = match self {
            FragmentSpec::GaussianPrior(s) => s.message().clone(),
            FragmentSpec::InverseWishartPrior(s) => s.message().clone(),
            FragmentSpec::IteratedIgw(s) => s.message(port, q[0], q[1])?,
            FragmentSpec::GaussianPenalization(s) => s.message(port, q)?,
            FragmentSpec::GaussianLikelihood(s) => s.message(port, q[0], q[1])?,
            FragmentSpec::Logistic(s) => {
                let (msg, xi) = s.update(q[0], ctx)?;
                return Ok((msg, Some(FragmentState::Logistic { xi })));
            }
            FragmentSpec::Probit(s) => {
                let (msg, nu) = s.update(q[0], ctx)?;
                return Ok((msg, Some(FragmentState::Probit { nu })));
            }
            FragmentSpec::Poisson(s) => {
                let (msg, omega) = s.update(q[0], ctx)?;
                return Ok((msg, Some(FragmentState::Poisson { omega })));
            }
        };
        Ok((msg, None))
    }

    /// `E_q{log f}` for this factor under the product of port q-densities.
    pub fn expected_log_factor(&self, q: &[&NaturalParameterVector], ctx: FragmentCtx) -> Result<f64> {
        match self {
            FragmentSpec::GaussianPrior(s) => s.expected_log_factor(q[0]),
            FragmentSpec::InverseWishartPrior(s) => s.expected_log_factor(q[0]),
            FragmentSpec::IteratedIgw(s) => s.expected_log_factor(q[0], q[1]),
            FragmentSpec::GaussianPenalization(s) => s.expected_log_factor(q),
            FragmentSpec::GaussianLikelihood(s) => s.expected_log_factor(q[0], q[1]),
            FragmentSpec::Logistic(s) => s.local_bound(q[0], None, ctx),
            FragmentSpec::Probit(s) => s.local_bound(q[0], ctx),
            FragmentSpec::Poisson(s) => s.expected_log_factor(q[0], ctx),
        }
    }
}

pub(crate) fn is_scalar_variance(family: FamilyTag) -> bool {
    matches!(family, FamilyTag::InverseChiSquared | FamilyTag::InverseWishart(1))
}

/// Zeroes the off-diagonal `η₂` entries that a diagonal Inverse G-Wishart
/// node cannot carry; other families pass through unchanged.
pub fn conform_to_family(family: FamilyTag, eta: &mut Vector) {
    if let FamilyTag::InverseGWishartDiag(d) = family {
        for j in 0..d {
            for i in 0..d {
                if i != j {
                    eta[1 + i + j * d] = 0.0;
                }
            }
        }
    }
}
