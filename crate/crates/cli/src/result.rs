//! JSON result document.

use std::path::Path;

use fragvmp::engine::{ConvergenceReport, Link, ModelSpec, QDensity};
use fragvmp::expfam::{natural_to_common, CommonParameters, FamilyTag, NaturalParameterVector};
use fragvmp::linalg::DenseMatrix;
use fragvmp::models::{BuiltModel, CurveTarget, FittedCurve, Layout};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Points in every emitted curve grid.
pub const GRID_POINTS: usize = 201;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub meta: Meta,
    pub q_densities: Vec<QDensityRecord>,
    pub elbo_trace: Vec<f64>,
    pub convergence: ConvergenceRecord,
    pub curves: Vec<CurveRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub model: String,
    pub data: String,
    pub n: usize,
    pub response: String,
    pub predictors: Vec<String>,
    pub group: Option<String>,
    pub label: Option<String>,
    pub knots: usize,
    pub group_knots: usize,
    pub spline: String,
    pub link: String,
    pub iters: usize,
    pub tol: f64,
    pub sigma_beta_sq: f64,
    pub a_hyper: f64,
    pub seed: u64,
    pub rng_algorithm: String,
    /// Node whose q-density drives the curves.
    pub coef_node: String,
    /// Coefficient column names when there is no curve layout.
    pub design_columns: Vec<String>,
    pub layout: Option<Layout>,
    /// Subject labels in id order for group models.
    pub subjects: Vec<String>,
    /// Intercept and slope of the linear part on the original predictor scale.
    pub original_scale_line: Option<(f64, f64)>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QDensityRecord {
    pub node: String,
    pub family: String,
    pub d: usize,
    /// Flat natural parameter vector; matrix blocks are column-major.
    pub eta: Vec<f64>,
    pub common: CommonRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CommonRecord {
    Gaussian { mu: Vec<f64>, sigma: Vec<Vec<f64>> },
    Matrix { kappa: f64, lambda: Vec<Vec<f64>> },
    Scalar(std::collections::BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub iterations: usize,
    pub converged: bool,
    pub max_relative_delta: f64,
    pub monotone_expected: bool,
    pub final_elbo: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveScale {
    Response,
    LinearPredictor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub target: CurveTarget,
    pub scale: CurveScale,
    #[serde(flatten)]
    pub curve: FittedCurve,
}

fn rows_of(m: &DenseMatrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl From<&CommonParameters> for CommonRecord {
    fn from(c: &CommonParameters) -> Self {
        use CommonParameters as C;
        let scalar = |pairs: &[(&str, f64)]| CommonRecord::Scalar(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect());
        match c {
            C::Bernoulli { p } => scalar(&[("p", *p)]),
            C::UnivariateNormal { mu, sigma_sq } => scalar(&[("mu", *mu), ("sigma_sq", *sigma_sq)]),
            C::InverseChiSquared { kappa, lambda } => scalar(&[("kappa", *kappa), ("lambda", *lambda)]),
            C::Beta { alpha, beta } => scalar(&[("alpha", *alpha), ("beta", *beta)]),
            C::InverseGaussian { mu, lambda } => scalar(&[("mu", *mu), ("lambda", *lambda)]),
            C::MultivariateNormal { mu, sigma } => CommonRecord::Gaussian { mu: mu.iter().copied().collect(), sigma: rows_of(sigma) },
            C::InverseWishart { kappa, lambda } | C::InverseGWishartDiag { kappa, lambda } => {
                CommonRecord::Matrix { kappa: *kappa, lambda: rows_of(lambda) }
            }
        }
    }
}

impl From<&QDensity> for QDensityRecord {
    fn from(q: &QDensity) -> Self {
        QDensityRecord {
            node: q.node.clone(),
            family: q.family.name().to_string(),
            d: q.family.dim(),
            eta: q.eta_q.eta.iter().copied().collect(),
            common: CommonRecord::from(&q.common),
        }
    }
}

pub fn family_from_name(name: &str, d: usize) -> Result<FamilyTag, CliError> {
    Ok(match name {
        "Bernoulli" => FamilyTag::Bernoulli,
        "UnivariateNormal" => FamilyTag::UnivariateNormal,
        "InverseChiSquared" => FamilyTag::InverseChiSquared,
        "Beta" => FamilyTag::Beta,
        "InverseGaussian" => FamilyTag::InverseGaussian,
        "MultivariateNormal" => FamilyTag::MultivariateNormal(d),
        "InverseWishart" => FamilyTag::InverseWishart(d),
        "InverseGWishartDiag" => FamilyTag::InverseGWishartDiag(d),
        other => return Err(CliError::Usage(format!("unknown family '{other}'"))),
    })
}

impl QDensityRecord {
    /// Rebuilds the density from its natural parameters alone.
    pub fn to_q_density(&self) -> Result<QDensity, CliError> {
        let family = family_from_name(&self.family, self.d)?;
        let eta_q = NaturalParameterVector::from_slice(family, &self.eta)?;
        let common = natural_to_common(&eta_q).map_err(|e| e.in_node(&self.node))?;
        Ok(QDensity { node: self.node.clone(), family, eta_q, common })
    }
}

impl From<&ConvergenceReport> for ConvergenceRecord {
    fn from(r: &ConvergenceReport) -> Self {
        ConvergenceRecord {
            iterations: r.iterations,
            converged: r.converged,
            max_relative_delta: r.max_relative_delta,
            monotone_expected: r.monotone_expected,
            final_elbo: r.elbo_trace.last().copied(),
        }
    }
}

pub fn link_from_name(name: &str) -> Result<Link, CliError> {
    Ok(match name {
        "identity" => Link::Identity,
        "logit" => Link::Logit,
        "probit" => Link::Probit,
        "log" => Link::Log,
        other => return Err(CliError::Usage(format!("unknown link '{other}'"))),
    })
}

pub fn link_name(link: Link) -> &'static str {
    match link {
        Link::Identity => "identity",
        Link::Logit => "logit",
        Link::Probit => "probit",
        Link::Log => "log",
    }
}

/// Posterior curves of `model` under `q_coef` on the standard grid.
pub fn curves_for(model: &BuiltModel, q_coef: &QDensity) -> Result<Vec<CurveRecord>, CliError> {
    let (lo, hi) = model.range();
    let grid = fragvmp::models::uniform_grid(lo, hi, GRID_POINTS);
    let mut out = Vec::new();
    for target in model.curve_targets() {
        out.push(CurveRecord { target, scale: CurveScale::Response, curve: model.curve(q_coef, target, &grid)? });
        if model.link() != Link::Identity {
            out.push(CurveRecord {
                target,
                scale: CurveScale::LinearPredictor,
                curve: model.linear_predictor_curve(q_coef, target, &grid)?,
            });
        }
    }
    Ok(out)
}

impl FitResult {
    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let s = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        Self::from_json(&s)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json()?).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
    }

    /// Recomputes the curves from the stored layout and coefficient η.
    pub fn recompute_curves(&self) -> Result<Vec<CurveRecord>, CliError> {
        let Some(layout) = &self.meta.layout else {
            return Ok(Vec::new());
        };
        let q = self
            .q_densities
            .iter()
            .find(|q| q.node == self.meta.coef_node)
            .ok_or_else(|| CliError::Usage(format!("no q-density for '{}'", self.meta.coef_node)))?
            .to_q_density()?;
        let model = BuiltModel {
            spec: ModelSpec::new(link_from_name(&self.meta.link)?),
            coef_node: self.meta.coef_node.clone(),
            layout: layout.clone(),
            warnings: Vec::new(),
        };
        curves_for(&model, &q)
    }
}
