use serde::{Deserialize, Serialize};

use crate::engine::{Link, ModelSpec, QDensity};
use crate::error::{Result, VmpError};
use crate::exec::Exec;
use crate::expfam::FamilyTag;
use crate::fragments::{
    FragmentSpec, GaussianLikelihoodSpec, GaussianPenalizationSpec, GaussianPriorSpec, IgwGraph,
    InverseWishartPriorSpec, IteratedIgwSpec, LogisticSpec, PenaltyBlock, PoissonSpec, ProbitSpec,
};
use crate::linalg::{DenseMatrix, Vector};
use crate::models::curve::{fitted_curve, FittedCurve};
use crate::models::spline::{hstack, linear_design, spline_design, SplineBasis, SplineKind, Standardization};

/// Prior hyperparameters and basis choice shared by the builders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    /// Prior variance of each fixed effect.
    pub sigma_beta_sq: f64,
    /// Half-Cauchy scale of every standard deviation parameter.
    pub a_hyper: f64,
    pub spline: SplineKind,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper { sigma_beta_sq: 1e10, a_hyper: 1e5, spline: SplineKind::TruncatedLinear }
    }
}

impl Hyper {
    fn validate(&self) -> Result<()> {
        if !(self.sigma_beta_sq > 0.0 && self.sigma_beta_sq.is_finite()) {
            return Err(VmpError::domain("sigma_beta_sq", format!("{} must be positive", self.sigma_beta_sq)));
        }
        if !(self.a_hyper > 0.0 && self.a_hyper.is_finite()) {
            return Err(VmpError::domain("A", format!("{} must be positive", self.a_hyper)));
        }
        Ok(())
    }
}

/// Curves that a fitted model can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveTarget {
    /// Population mean curve of a single-group model.
    Mean,
    /// Group W global curve.
    White,
    /// Group B global curve.
    Black,
    /// `f_B(x) − f_W(x)`.
    Contrast,
}

/// Column layout of the coefficient vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Layout {
    /// `[1, x]` with a standardized predictor.
    Line { standardization: Standardization, range: (f64, f64) },
    /// `[1, x, Z]`.
    Spline { basis: SplineBasis },
    /// `[X, Z_gbl^W, Z_gbl^B, Z_U, Z_grp]` with `X = [1, x, I^B, I^B x]`.
    Groups { basis: SplineBasis, k_gbl: usize, subjects: usize, subject_lines: bool, k_grp: usize },
}

/// A model specification plus what is needed to turn its coefficient
/// posterior into curves.
#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub spec: ModelSpec,
    pub coef_node: String,
    pub layout: Layout,
    pub warnings: Vec<String>,
}

impl BuiltModel {
    pub fn link(&self) -> Link {
        self.spec.link
    }

    pub fn curve_targets(&self) -> Vec<CurveTarget> {
        match self.layout {
            Layout::Groups { .. } => vec![CurveTarget::White, CurveTarget::Black, CurveTarget::Contrast],
            _ => vec![CurveTarget::Mean],
        }
    }

    /// Observed predictor range.
    pub fn range(&self) -> (f64, f64) {
        match &self.layout {
            Layout::Line { range, .. } => *range,
            Layout::Spline { basis } | Layout::Groups { basis, .. } => basis.range,
        }
    }

    /// Rows `c(x)` such that the target curve at `x` is `c(x)ᵀθ`.
    pub fn curve_rows(&self, target: CurveTarget, grid: &[f64]) -> Result<DenseMatrix> {
        let bad = || VmpError::domain("curve", format!("{target:?} is not defined for this model"));
        match &self.layout {
            Layout::Line { standardization, .. } => {
                if target != CurveTarget::Mean {
                    return Err(bad());
                }
                Ok(linear_design(grid, standardization))
            }
            Layout::Spline { basis } => {
                if target != CurveTarget::Mean {
                    return Err(bad());
                }
                Ok(hstack(&[&linear_design(grid, &basis.standardization), &basis.evaluate(grid)]))
            }
            Layout::Groups { basis, k_gbl, subjects, subject_lines, k_grp } => {
                // (β_W weight, u_W weight, B-vs-W and u_B weight)
                let (base, w, b) = match target {
                    CurveTarget::White => (1.0, 1.0, 0.0),
                    CurveTarget::Black => (1.0, 0.0, 1.0),
                    CurveTarget::Contrast => (0.0, -1.0, 1.0),
                    CurveTarget::Mean => return Err(bad()),
                };
                let lin = linear_design(grid, &basis.standardization);
                let z = basis.evaluate(grid);
                let extra = if *subject_lines { 2 * subjects } else { 0 } + subjects * k_grp;
                let mut rows = DenseMatrix::zeros(grid.len(), 4 + 2 * k_gbl + extra);
                for i in 0..grid.len() {
                    rows[(i, 0)] = base;
                    rows[(i, 1)] = base * lin[(i, 1)];
                    rows[(i, 2)] = b;
                    rows[(i, 3)] = b * lin[(i, 1)];
                    for k in 0..*k_gbl {
                        rows[(i, 4 + k)] = w * z[(i, k)];
                        rows[(i, 4 + k_gbl + k)] = b * z[(i, k)];
                    }
                }
                Ok(rows)
            }
        }
    }

    /// Posterior curve on the response scale.
    pub fn curve(&self, q_coef: &QDensity, target: CurveTarget, grid: &[f64]) -> Result<FittedCurve> {
        self.curve_with_link(q_coef, target, grid, self.spec.link)
    }

    /// Posterior curve on the linear-predictor scale.
    pub fn linear_predictor_curve(&self, q_coef: &QDensity, target: CurveTarget, grid: &[f64]) -> Result<FittedCurve> {
        self.curve_with_link(q_coef, target, grid, Link::Identity)
    }

    fn curve_with_link(&self, q_coef: &QDensity, target: CurveTarget, grid: &[f64], link: Link) -> Result<FittedCurve> {
        let rows = self.curve_rows(target, grid)?;
        let (lo, hi) = self.range();
        let extrapolated = grid.iter().any(|&g| g < lo || g > hi);
        fitted_curve(q_coef, &rows, grid, link, extrapolated)
    }

    /// Intercept and slope of the linear part on the original predictor scale.
    pub fn original_scale_line(&self, mu_coef: &Vector) -> (f64, f64) {
        let s = match &self.layout {
            Layout::Line { standardization, .. } => *standardization,
            Layout::Spline { basis } | Layout::Groups { basis, .. } => basis.standardization,
        };
        let slope = mu_coef[1] / s.scale;
        (mu_coef[0] - slope * s.center, slope)
    }
}

fn check_response(y: &[f64], n: usize) -> Result<()> {
    if y.is_empty() {
        return Err(VmpError::domain("y", "no observations"));
    }
    if y.len() != n {
        return Err(VmpError::Dimension(format!("y has {} entries, design has {n} rows", y.len())));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(VmpError::domain("y", format!("entry {i} is not finite")));
    }
    Ok(())
}

/// Adds `σ²|a ~ Inverse-χ²(1, 1/a)` and `a ~ Inverse-χ²(1, 1/A²)`.
fn half_cauchy_chain(spec: ModelSpec, var: &str, aux: &str, a_hyper: f64) -> Result<ModelSpec> {
    let igw = IteratedIgwSpec::scalar(1.0)?;
    let prior = InverseWishartPriorSpec::new(1.0, DenseMatrix::from_element(1, 1, 1.0 / (a_hyper * a_hyper)))?;
    Ok(spec
        .node(var, FamilyTag::InverseChiSquared)
        .node(aux, FamilyTag::InverseChiSquared)
        .factor(&format!("p({var}|{aux})"), FragmentSpec::IteratedIgw(igw), &[var, aux])
        .factor(&format!("p({aux})"), FragmentSpec::InverseWishartPrior(prior), &[aux]))
}

/// `y | β, σ² ~ N(Xβ, σ²I)`, `β ~ N(0, σ_β² I)`, `σ ~ Half-Cauchy(A)`.
pub fn build_linear_regression(y: &[f64], x: &DenseMatrix, sigma_beta_sq: f64, a_hyper: f64) -> Result<ModelSpec> {
    build_linear_regression_with(y, x, sigma_beta_sq, a_hyper, Exec::default())
}

pub fn build_linear_regression_with(
    y: &[f64],
    x: &DenseMatrix,
    sigma_beta_sq: f64,
    a_hyper: f64,
    exec: Exec,
) -> Result<ModelSpec> {
    Hyper { sigma_beta_sq, a_hyper, ..Hyper::default() }.validate()?;
    check_response(y, x.nrows())?;
    let d = x.ncols();
    let prior = GaussianPriorSpec::new(Vector::zeros(d), DenseMatrix::identity(d, d) * sigma_beta_sq)?;
    let lik = GaussianLikelihoodSpec::new(&Vector::from_column_slice(y), x, exec)?;
    let spec = ModelSpec::new(Link::Identity)
        .node("beta", FamilyTag::MultivariateNormal(d))
        .factor("p(beta)", FragmentSpec::GaussianPrior(prior), &["beta"])
        .factor("p(y|beta,sigma_sq)", FragmentSpec::GaussianLikelihood(lik), &["beta", "sigma_sq"]);
    half_cauchy_chain(spec, "sigma_sq", "a", a_hyper)
}

/// Straight-line regression on one standardized predictor.
pub fn build_simple_linear(y: &[f64], x: &[f64], hyper: &Hyper, exec: Exec) -> Result<BuiltModel> {
    hyper.validate()?;
    check_response(y, x.len())?;
    let standardization = Standardization::fit(x)?;
    let design = linear_design(x, &standardization);
    let spec = build_linear_regression_with(y, &design, hyper.sigma_beta_sq, hyper.a_hyper, exec)?;
    let range = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok(BuiltModel { spec, coef_node: "beta".into(), layout: Layout::Line { standardization, range }, warnings: Vec::new() })
}

fn spline_parts(x: &[f64], k: usize, hyper: &Hyper) -> Result<(DenseMatrix, SplineBasis, GaussianPenalizationSpec)> {
    let (z, basis) = spline_design(x, k, hyper.spline)?;
    let c = hstack(&[&linear_design(x, &basis.standardization), &z]);
    let pen = GaussianPenalizationSpec::new(
        Vector::zeros(2),
        DenseMatrix::identity(2, 2) * hyper.sigma_beta_sq,
        vec![PenaltyBlock { m: k, d: 1 }],
    )?;
    Ok((c, basis, pen))
}

/// Gaussian-response penalized spline with Half-Cauchy priors on both standard deviations.
pub fn build_penalized_spline(y: &[f64], x: &[f64], k: usize, hyper: &Hyper, exec: Exec) -> Result<BuiltModel> {
    hyper.validate()?;
    check_response(y, x.len())?;
    let (c, basis, pen) = spline_parts(x, k, hyper)?;
    let lik = GaussianLikelihoodSpec::new(&Vector::from_column_slice(y), &c, exec)?;
    let spec = ModelSpec::new(Link::Identity)
        .node("beta_u", FamilyTag::MultivariateNormal(c.ncols()))
        .factor("p(beta,u|sigma_sq_u)", FragmentSpec::GaussianPenalization(pen), &["beta_u", "sigma_sq_u"])
        .factor(
            "p(y|beta,u,sigma_sq_eps)",
            FragmentSpec::GaussianLikelihood(lik),
            &["beta_u", "sigma_sq_eps"],
        );
    let spec = half_cauchy_chain(spec, "sigma_sq_u", "a_u", hyper.a_hyper)?;
    let spec = half_cauchy_chain(spec, "sigma_sq_eps", "a_eps", hyper.a_hyper)?;
    Ok(BuiltModel { spec, coef_node: "beta_u".into(), layout: Layout::Spline { basis }, warnings: Vec::new() })
}

/// Penalized spline with a logistic, probit or Poisson likelihood.
pub fn build_glm_spline(y: &[f64], x: &[f64], k: usize, link: Link, hyper: &Hyper, exec: Exec) -> Result<BuiltModel> {
    hyper.validate()?;
    check_response(y, x.len())?;
    let (c, basis, pen) = spline_parts(x, k, hyper)?;
    let lik = match link {
        Link::Logit => FragmentSpec::Logistic(LogisticSpec::new(y.to_vec(), c, exec)?),
        Link::Probit => FragmentSpec::Probit(ProbitSpec::new(y.to_vec(), c, exec)?),
        Link::Log => FragmentSpec::Poisson(PoissonSpec::new(y.to_vec(), c)?),
        Link::Identity => {
            return Err(VmpError::domain("link", "identity link uses build_penalized_spline"));
        }
    };
    let p = basis.ncols() + 2;
    let spec = ModelSpec::new(link)
        .node("beta_u", FamilyTag::MultivariateNormal(p))
        .factor("p(beta,u|sigma_sq_u)", FragmentSpec::GaussianPenalization(pen), &["beta_u", "sigma_sq_u"])
        .factor("p(y|beta,u)", lik, &["beta_u"]);
    let spec = half_cauchy_chain(spec, "sigma_sq_u", "a_u", hyper.a_hyper)?;
    Ok(BuiltModel { spec, coef_node: "beta_u".into(), layout: Layout::Spline { basis }, warnings: Vec::new() })
}

/// Two-population group-specific curves model.
///
/// `group_id` holds 1-based subject labels `1..=m`; `group_label[i]` is 1 for
/// group B and 0 for group W, constant within a subject. With a single subject
/// and `k_grp = 0` the subject-level terms are confounded with the fixed
/// effects and are left out.
pub fn build_group_curves(
    y: &[f64],
    x: &[f64],
    group_id: &[usize],
    group_label: &[f64],
    k_gbl: usize,
    k_grp: usize,
    hyper: &Hyper,
    exec: Exec,
) -> Result<BuiltModel> {
    hyper.validate()?;
    let n = x.len();
    check_response(y, n)?;
    if group_id.len() != n || group_label.len() != n {
        return Err(VmpError::Dimension(format!(
            "group ids ({}) and labels ({}) must match n = {n}",
            group_id.len(),
            group_label.len()
        )));
    }
    if let Some(i) = group_label.iter().position(|&l| l != 0.0 && l != 1.0) {
        return Err(VmpError::domain("group_label", format!("entry {i} is {} (must be 0 or 1)", group_label[i])));
    }
    let m = group_id.iter().copied().max().unwrap_or(0);
    if group_id.contains(&0) {
        return Err(VmpError::domain("group_id", "ids are 1-based"));
    }
    let mut seen = vec![None::<f64>; m];
    for (&g, &l) in group_id.iter().zip(group_label) {
        match seen[g - 1] {
            None => seen[g - 1] = Some(l),
            Some(prev) if prev != l => {
                return Err(VmpError::domain("group_label", format!("subject {g} has both labels")));
            }
            _ => {}
        }
    }
    if let Some(g) = seen.iter().position(Option::is_none) {
        return Err(VmpError::domain("group_id", format!("ids are not contiguous: {} is missing", g + 1)));
    }
    let mut warnings = Vec::new();
    if group_label.iter().all(|&l| l == group_label[0]) {
        warnings.push("all group labels are equal; B-vs-W columns are identically zero".to_string());
    }
    let subject_lines = !(m == 1 && k_grp == 0);
    if !subject_lines {
        warnings.push("single subject without group-level splines: subject lines omitted".to_string());
    }

    let (z, basis) = spline_design(x, k_gbl, hyper.spline)?;
    let s = basis.standardization;
    let xs: Vec<f64> = x.iter().map(|&v| s.apply(v)).collect();
    let z_grp = if k_grp > 0 { Some(spline_design(x, k_grp, hyper.spline)?.0) } else { None };

    let p_lines = if subject_lines { 2 * m } else { 0 };
    let p = 4 + 2 * k_gbl + p_lines + m * k_grp;
    let mut c = DenseMatrix::zeros(n, p);
    for i in 0..n {
        let b = group_label[i];
        let g = group_id[i] - 1;
        c[(i, 0)] = 1.0;
        c[(i, 1)] = xs[i];
        c[(i, 2)] = b;
        c[(i, 3)] = b * xs[i];
        for k in 0..k_gbl {
            c[(i, 4 + k)] = (1.0 - b) * z[(i, k)];
            c[(i, 4 + k_gbl + k)] = b * z[(i, k)];
        }
        let mut off = 4 + 2 * k_gbl;
        if subject_lines {
            c[(i, off + 2 * g)] = 1.0;
            c[(i, off + 2 * g + 1)] = xs[i];
            off += 2 * m;
        }
        if let Some(zg) = &z_grp {
            for k in 0..k_grp {
                c[(i, off + g * k_grp + k)] = zg[(i, k)];
            }
        }
    }

    let mut blocks = vec![PenaltyBlock { m: k_gbl, d: 1 }, PenaltyBlock { m: k_gbl, d: 1 }];
    let mut pen_ports = vec!["coef", "sigma_sq_gbl_w", "sigma_sq_gbl_b"];
    if subject_lines {
        blocks.push(PenaltyBlock { m, d: 2 });
        pen_ports.push("sigma_u");
    }
    if k_grp > 0 {
        blocks.push(PenaltyBlock { m: m * k_grp, d: 1 });
        pen_ports.push("sigma_sq_grp");
    }
    let pen = GaussianPenalizationSpec::new(Vector::zeros(4), DenseMatrix::identity(4, 4) * hyper.sigma_beta_sq, blocks)?;
    let lik = GaussianLikelihoodSpec::new(&Vector::from_column_slice(y), &c, exec)?;
    let mut spec = ModelSpec::new(Link::Identity)
        .node("coef", FamilyTag::MultivariateNormal(p))
        .factor("p(coef|variances)", FragmentSpec::GaussianPenalization(pen), &pen_ports)
        .factor("p(y|coef,sigma_sq_eps)", FragmentSpec::GaussianLikelihood(lik), &["coef", "sigma_sq_eps"]);
    spec = half_cauchy_chain(spec, "sigma_sq_gbl_w", "a_gbl_w", hyper.a_hyper)?;
    spec = half_cauchy_chain(spec, "sigma_sq_gbl_b", "a_gbl_b", hyper.a_hyper)?;
    if subject_lines {
        spec = half_t_covariance_2x2(spec, "sigma_u", "a_sigma_u", hyper.a_hyper)?;
    }
    if k_grp > 0 {
        spec = half_cauchy_chain(spec, "sigma_sq_grp", "a_grp", hyper.a_hyper)?;
    }
    spec = half_cauchy_chain(spec, "sigma_sq_eps", "a_eps", hyper.a_hyper)?;
    Ok(BuiltModel {
        spec,
        coef_node: "coef".into(),
        layout: Layout::Groups { basis, k_gbl, subjects: m, subject_lines, k_grp },
        warnings,
    })
}

/// Matrix Half-t prior with `ν = 2` on a 2×2 covariance:
/// `Σ|A ~ Inverse-Wishart(ν + 1, A⁻¹)`, `A ~ Inverse-G-Wishart(G_diag, 2 − d, ν⁻¹ diag(1/A²))`.
pub fn half_t_covariance_2x2(spec: ModelSpec, sigma: &str, aux: &str, a_hyper: f64) -> Result<ModelSpec> {
    let (d, nu) = (2usize, 2.0);
    let igw = IteratedIgwSpec::new(IgwGraph::TotallyConnected, nu + d as f64 - 1.0, d)?;
    let lambda = DenseMatrix::from_diagonal_element(d, d, 1.0 / (nu * a_hyper * a_hyper));
    let prior = InverseWishartPriorSpec::new(2.0 - d as f64, lambda)?;
    Ok(spec
        .node(sigma, FamilyTag::InverseWishart(d))
        .node(aux, FamilyTag::InverseGWishartDiag(d))
        .factor(&format!("p({sigma}|{aux})"), FragmentSpec::IteratedIgw(igw), &[sigma, aux])
        .factor(&format!("p({aux})"), FragmentSpec::InverseWishartPrior(prior), &[aux]))
}
