//! `fragvmp fit`.

use std::path::PathBuf;

use fragvmp::engine::{build_factor_graph, Link, VmpOptions};
use fragvmp::exec::Exec;
use fragvmp::linalg::DenseMatrix;
use fragvmp::models::{
    build_glm_spline, build_group_curves, build_linear_regression_with, build_penalized_spline, build_simple_linear,
    BuiltModel, Hyper, SplineKind,
};
use serde::{Deserialize, Serialize};

use crate::data::Table;
use crate::error::CliError;
use crate::result::{curves_for, link_name, ConvergenceRecord, FitResult, Meta, QDensityRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Linreg,
    Penspline,
    Groupcurves,
    Glmspline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LinkArg {
    Logit,
    Probit,
    /// Poisson counts.
    Log,
}

impl From<LinkArg> for Link {
    fn from(l: LinkArg) -> Self {
        match l {
            LinkArg::Logit => Link::Logit,
            LinkArg::Probit => Link::Probit,
            LinkArg::Log => Link::Log,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRequest {
    pub model: ModelKind,
    pub data: PathBuf,
    pub response: String,
    pub predictors: Vec<String>,
    pub group: Option<String>,
    pub label: Option<String>,
    pub knots: usize,
    pub group_knots: usize,
    pub link: Option<LinkArg>,
    pub spline: SplineKind,
    pub iters: usize,
    pub tol: f64,
    pub sigma_beta_sq: f64,
    pub a_hyper: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl FitRequest {
    /// Request with the documented defaults.
    pub fn new(model: ModelKind, data: impl Into<PathBuf>, response: &str, predictors: &[&str]) -> Self {
        FitRequest {
            model,
            data: data.into(),
            response: response.to_string(),
            predictors: predictors.iter().map(|s| s.to_string()).collect(),
            group: None,
            label: None,
            knots: 25,
            group_knots: 0,
            link: None,
            spline: SplineKind::TruncatedLinear,
            iters: 200,
            tol: 1e-8,
            sigma_beta_sq: 1e10,
            a_hyper: 1e5,
            seed: 0,
            exec: Exec::default(),
        }
    }

    fn check(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.predictors.is_empty() {
            return usage("at least one --predictor is required".into());
        }
        if self.model != ModelKind::Linreg && self.predictors.len() != 1 {
            return usage(format!("{:?} takes exactly one --predictor", self.model));
        }
        if self.model == ModelKind::Groupcurves && (self.group.is_none() || self.label.is_none()) {
            return usage("groupcurves needs --group and --label".into());
        }
        if self.model == ModelKind::Glmspline && self.link.is_none() {
            return usage("glmspline needs --link".into());
        }
        if self.model != ModelKind::Glmspline && self.link.is_some() {
            return usage("--link only applies to glmspline".into());
        }
        if self.iters == 0 {
            return usage("--iters must be positive".into());
        }
        if !(self.tol > 0.0) {
            return usage("--tol must be positive".into());
        }
        Ok(())
    }
}

enum Built {
    Curves(BuiltModel),
    Plain { spec: fragvmp::engine::ModelSpec, coef_node: String, columns: Vec<String> },
}

fn build(req: &FitRequest, table: &Table, hyper: &Hyper) -> Result<(Built, Vec<String>), CliError> {
    let y = table.numeric(&req.response)?;
    let x = table.numeric(&req.predictors[0])?;
    let exec = req.exec;
    Ok(match req.model {
        ModelKind::Linreg if req.predictors.len() == 1 => (Built::Curves(build_simple_linear(&y, &x, hyper, exec)?), Vec::new()),
        ModelKind::Linreg => {
            let cols = req.predictors.iter().map(|p| table.numeric(p)).collect::<Result<Vec<_>, _>>()?;
            let design = DenseMatrix::from_fn(y.len(), cols.len() + 1, |i, j| if j == 0 { 1.0 } else { cols[j - 1][i] });
            let spec = build_linear_regression_with(&y, &design, hyper.sigma_beta_sq, hyper.a_hyper, exec)?;
            let columns = std::iter::once("(intercept)".to_string()).chain(req.predictors.iter().cloned()).collect();
            (Built::Plain { spec, coef_node: "beta".into(), columns }, Vec::new())
        }
        ModelKind::Penspline => (Built::Curves(build_penalized_spline(&y, &x, req.knots, hyper, exec)?), Vec::new()),
        ModelKind::Glmspline => {
            let link = req.link.map(Link::from).unwrap_or(Link::Logit);
            (Built::Curves(build_glm_spline(&y, &x, req.knots, link, hyper, exec)?), Vec::new())
        }
        ModelKind::Groupcurves => {
            let (ids, subjects) = table.subject_ids(req.group.as_deref().unwrap_or_default())?;
            let labels = table.numeric(req.label.as_deref().unwrap_or_default())?;
            let m = build_group_curves(&y, &x, &ids, &labels, req.knots, req.group_knots, hyper, exec)?;
            (Built::Curves(m), subjects)
        }
    })
}

fn spline_name(kind: SplineKind) -> &'static str {
    match kind {
        SplineKind::TruncatedLinear => "truncated_linear",
        SplineKind::OsullivanLike => "osullivan_like",
    }
}

/// Reads the data, fits the model and assembles the result document.
pub fn cmd_fit(req: &FitRequest) -> Result<FitResult, CliError> {
    req.check()?;
    let table = Table::read(&req.data)?;
    let hyper = Hyper { sigma_beta_sq: req.sigma_beta_sq, a_hyper: req.a_hyper, spline: req.spline };
    let (built, subjects) = build(req, &table, &hyper)?;
    let (spec, coef_node) = match &built {
        Built::Curves(m) => (&m.spec, m.coef_node.clone()),
        Built::Plain { spec, coef_node, .. } => (spec, coef_node.clone()),
    };

    let mut graph = build_factor_graph(spec)?;
    graph.set_exec(req.exec);
    let opts = VmpOptions { max_iter: req.iters, tol: req.tol, ..Default::default() };
    let report = graph.run_vmp(&graph.default_schedule(), &opts)?;
    let qs = graph.q_densities()?;
    let q_coef = graph.q_density_by_name(&coef_node)?;

    let (curves, layout, line, design_columns, warnings) = match &built {
        Built::Curves(m) => {
            let mu = match &q_coef.common {
                fragvmp::expfam::CommonParameters::MultivariateNormal { mu, .. } => mu.clone(),
                _ => return Err(CliError::Usage(format!("'{coef_node}' is not Gaussian"))),
            };
            (curves_for(m, &q_coef)?, Some(m.layout.clone()), Some(m.original_scale_line(&mu)), Vec::new(), m.warnings.clone())
        }
        Built::Plain { columns, .. } => (Vec::new(), None, None, columns.clone(), Vec::new()),
    };

    let meta = Meta {
        tool: "fragvmp".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        model: serde_json::to_value(req.model)?.as_str().unwrap_or_default().to_string(),
        data: req.data.display().to_string(),
        n: table.len(),
        response: req.response.clone(),
        predictors: req.predictors.clone(),
        group: req.group.clone(),
        label: req.label.clone(),
        knots: req.knots,
        group_knots: req.group_knots,
        spline: spline_name(req.spline).into(),
        link: link_name(spec.link).into(),
        iters: req.iters,
        tol: req.tol,
        sigma_beta_sq: req.sigma_beta_sq,
        a_hyper: req.a_hyper,
        seed: req.seed,
        rng_algorithm: fragvmp_oracle::RNG_ALGORITHM.into(),
        coef_node,
        design_columns,
        layout,
        subjects,
        original_scale_line: line,
        warnings,
    };
    Ok(FitResult {
        meta,
        q_densities: qs.iter().map(QDensityRecord::from).collect(),
        elbo_trace: report.elbo_trace.clone(),
        convergence: ConvergenceRecord::from(&report),
        curves,
    })
}

/// Human-readable digest printed after a fit.
pub fn summary(r: &FitResult) -> String {
    let c = &r.convergence;
    let mut s = format!(
        "model {} (link {}), n = {}\n{} after {} sweeps, max relative change {:.3e}\n",
        r.meta.model,
        r.meta.link,
        r.meta.n,
        if c.converged { "converged" } else { "NOT converged" },
        c.iterations,
        c.max_relative_delta
    );
    if let Some(e) = c.final_elbo {
        s.push_str(&format!("final ELBO {e:.6}\n"));
    }
    for q in &r.q_densities {
        s.push_str(&format!("  q({}) ~ {}{}\n", q.node, q.family, if q.d > 1 { format!("({})", q.d) } else { String::new() }));
    }
    if let Some((a, b)) = r.meta.original_scale_line {
        s.push_str(&format!("linear part: {a:.6} + {b:.6} x\n"));
    }
    if !r.curves.is_empty() {
        s.push_str(&format!("{} curves on {} grid points\n", r.curves.len(), crate::result::GRID_POINTS));
    }
    for w in &r.meta.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s
}
