//! `fragvmp validate`: bundled invariant checks.

use std::time::Instant;

use fragvmp::engine::{build_factor_graph, VmpOptions};
use fragvmp::exec::Exec;
use fragvmp::expfam::{
    common_to_natural, entropy, expected_sufficient_statistic, log_partition, CommonParameters as C, FamilyTag,
    NaturalParameterVector,
};
use fragvmp::linalg::{DenseMatrix, Vector};
use fragvmp::models::synthetic::{gaussian_spline_sample, linear_regression_sample};
use fragvmp::models::{build_linear_regression, build_penalized_spline, Hyper};
use fragvmp_oracle::{mfvb_linear_regression, moment_oracle, Family, Method};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Deliberate corruption of one library output, used to confirm that the
/// corresponding check can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Scales every E{T} by 1 + 1e-3.
    ExpectedStatistic,
    /// Shifts every entropy by 1e-3.
    Entropy,
    /// Adds 1e-3·‖η‖² to the log-partition function.
    LogPartition,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckRow>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut s = format!("{:<width$}  {:<6}  {:>8}  detail\n", "check", "result", "seconds");
        for c in &self.checks {
            s.push_str(&format!(
                "{:<width$}  {:<6}  {:>8.3}  {}\n",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.seconds,
                c.detail
            ));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        s.push_str(&format!("{} checks, {failed} failed\n", self.checks.len()));
        s
    }
}

type CheckResult = Result<(bool, String), Box<dyn std::error::Error>>;

fn members() -> fragvmp::Result<Vec<NaturalParameterVector>> {
    let m2 = |a: [f64; 4]| DenseMatrix::from_row_slice(2, 2, &a);
    let diag = |a: f64, b: f64| DenseMatrix::from_diagonal(&Vector::from_column_slice(&[a, b]));
    let list = [
        (FamilyTag::Bernoulli, C::Bernoulli { p: 0.2 }),
        (FamilyTag::Bernoulli, C::Bernoulli { p: 0.9 }),
        (FamilyTag::UnivariateNormal, C::UnivariateNormal { mu: 0.0, sigma_sq: 1.0 }),
        (FamilyTag::UnivariateNormal, C::UnivariateNormal { mu: -2.0, sigma_sq: 4.0 }),
        (FamilyTag::InverseChiSquared, C::InverseChiSquared { kappa: 3.0, lambda: 2.0 }),
        (FamilyTag::InverseChiSquared, C::InverseChiSquared { kappa: 1.0, lambda: 1.0 }),
        (FamilyTag::Beta, C::Beta { alpha: 2.0, beta: 3.0 }),
        (FamilyTag::Beta, C::Beta { alpha: 0.5, beta: 0.5 }),
        (FamilyTag::InverseGaussian, C::InverseGaussian { mu: 1.0, lambda: 1.0 }),
        (FamilyTag::InverseGaussian, C::InverseGaussian { mu: 2.0, lambda: 0.5 }),
        (
            FamilyTag::MultivariateNormal(2),
            C::MultivariateNormal { mu: Vector::from_column_slice(&[1.0, -1.0]), sigma: m2([2.0, 0.5, 0.5, 1.0]) },
        ),
        (FamilyTag::InverseWishart(2), C::InverseWishart { kappa: 5.0, lambda: m2([2.0, 0.5, 0.5, 1.0]) }),
        (FamilyTag::InverseGWishartDiag(2), C::InverseGWishartDiag { kappa: 3.0, lambda: diag(4.0, 0.1) }),
    ];
    list.iter().map(|(f, c)| common_to_natural(*f, c)).collect()
}

fn oracle_family(f: FamilyTag) -> Family {
    match f {
        FamilyTag::Bernoulli => Family::Bernoulli,
        FamilyTag::UnivariateNormal => Family::UnivariateNormal,
        FamilyTag::InverseChiSquared => Family::InverseChiSquared,
        FamilyTag::Beta => Family::Beta,
        FamilyTag::InverseGaussian => Family::InverseGaussian,
        FamilyTag::MultivariateNormal(d) => Family::MultivariateNormal(d),
        FamilyTag::InverseWishart(d) => Family::InverseWishart(d),
        FamilyTag::InverseGWishartDiag(d) => Family::InverseGWishartDiag(d),
    }
}

fn is_matrix(f: FamilyTag) -> bool {
    matches!(f, FamilyTag::MultivariateNormal(_) | FamilyTag::InverseWishart(_) | FamilyTag::InverseGWishartDiag(_))
}

fn e_t(x: &NaturalParameterVector, fault: Option<Fault>) -> fragvmp::Result<Vector> {
    let v = expected_sufficient_statistic(x)?;
    Ok(if fault == Some(Fault::ExpectedStatistic) { v * (1.0 + 1e-3) } else { v })
}

fn entropy_of(x: &NaturalParameterVector, fault: Option<Fault>) -> fragvmp::Result<f64> {
    Ok(entropy(x)? + if fault == Some(Fault::Entropy) { 1e-3 } else { 0.0 })
}

fn log_partition_of(x: &NaturalParameterVector, fault: Option<Fault>) -> fragvmp::Result<f64> {
    Ok(log_partition(x)? + if fault == Some(Fault::LogPartition) { 1e-3 * x.eta.norm_squared() } else { 0.0 })
}

fn check_moments(fault: Option<Fault>) -> CheckResult {
    let mut bad = Vec::new();
    let mut count = 0;
    for (k, x) in members()?.iter().enumerate() {
        let matrix = is_matrix(x.family);
        let method = if matrix { Method::MonteCarlo { draws: 50_000, seed: 500 + k as u64 } } else { Method::Quadrature { tol: 1e-10 } };
        let est = moment_oracle(oracle_family(x.family), x.eta.as_slice(), method)?;
        let values = e_t(x, fault)?.iter().copied().chain([entropy_of(x, fault)?]).collect::<Vec<_>>();
        let oracle = est.e_t.iter().copied().chain([est.entropy]);
        let se = est.se.iter().copied().chain([est.entropy_se]);
        for (v, (o, s)) in values.into_iter().zip(oracle.zip(se)) {
            count += 1;
            let allowed = if matrix { 4.0 * s + 1e-12 } else { 1e-8 * o.abs().max(1.0) };
            if est.flagged || (v - o).abs() > allowed {
                bad.push(format!("{}", x.family));
            }
        }
    }
    bad.dedup();
    Ok((bad.is_empty(), if bad.is_empty() { format!("{count} values agree") } else { format!("mismatch in {}", bad.join(", ")) }))
}

/// Directions that keep matrix blocks symmetric (and diagonal for the diagonal family).
fn directions(family: FamilyTag) -> Vec<Vector> {
    let len = family.eta_len();
    let unit = |idx: &[usize]| Vector::from_fn(len, |i, _| if idx.contains(&i) { 1.0 } else { 0.0 });
    let (offset, d, diagonal) = match family {
        FamilyTag::MultivariateNormal(d) => (d, d, false),
        FamilyTag::InverseWishart(d) => (1, d, false),
        FamilyTag::InverseGWishartDiag(d) => (1, d, true),
        _ => return (0..len).map(|i| unit(&[i])).collect(),
    };
    let mut out: Vec<Vector> = (0..offset).map(|i| unit(&[i])).collect();
    for j in 0..d {
        for i in j..d {
            if i == j {
                out.push(unit(&[offset + i * (d + 1)]));
            } else if !diagonal {
                out.push(unit(&[offset + i + j * d, offset + j + i * d]));
            }
        }
    }
    out
}

fn check_gradient(fault: Option<Fault>) -> CheckResult {
    let mut worst: f64 = 0.0;
    for x in members()? {
        let et = e_t(&x, fault)?;
        for v in directions(x.family) {
            let scale = x.eta.iter().zip(v.iter()).filter(|(_, d)| **d != 0.0).map(|(e, _)| e.abs()).fold(0.1, f64::max);
            let at = |h: f64| -> fragvmp::Result<f64> {
                let plus = NaturalParameterVector::new(x.family, &x.eta + &v * h)?;
                let minus = NaturalParameterVector::new(x.family, &x.eta - &v * h)?;
                Ok((log_partition_of(&plus, fault)? - log_partition_of(&minus, fault)?) / (2.0 * h))
            };
            let h = 1e-4 * scale;
            let fd = (4.0 * at(0.5 * h)? - at(h)?) / 3.0;
            let exact = et.dot(&v);
            worst = worst.max((fd - exact).abs() / exact.abs().max(1.0));
        }
    }
    Ok((worst <= 1e-5, format!("worst relative error {worst:.2e}")))
}

fn check_mfvb(_: Option<Fault>) -> CheckResult {
    let mut worst: f64 = 0.0;
    let rel = |a: &[f64], b: &[f64]| {
        let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
    };
    for seed in 0..3 {
        let s = linear_regression_sample(50, 3, seed);
        let mut g = build_factor_graph(&build_linear_regression(&s.y, &s.x, 1e10, 1e5)?)?;
        g.run_vmp(&g.default_schedule(), &VmpOptions { tol: 1e-13, max_iter: 2000, track_elbo: false, ..Default::default() })?;
        let fit = mfvb_linear_regression(&s.y, &s.x, &Vector::zeros(3), &(DenseMatrix::identity(3, 3) * 1e10), 1e5, 1e-14, 5000)?;
        let (C::MultivariateNormal { mu, sigma }, C::InverseChiSquared { lambda, .. }) =
            (g.q_density_by_name("beta")?.common, g.q_density_by_name("sigma_sq")?.common)
        else {
            return Err("unexpected q-density families".into());
        };
        worst = worst
            .max(rel(mu.as_slice(), fit.state.mu_q_beta.as_slice()))
            .max(rel(sigma.as_slice(), fit.state.sigma_q_beta.as_slice()))
            .max(rel(&[lambda], &[fit.state.lambda_q_sigsq]));
    }
    Ok((worst <= 1e-6, format!("3 data sets, max relative difference {worst:.2e}")))
}

fn check_schedules(_: Option<Fault>) -> CheckResult {
    let s = gaussian_spline_sample(200, 0.1, 7);
    let m = build_penalized_spline(&s.y, &s.x, 12, &Hyper::default(), Exec::default())?;
    let opts = VmpOptions { tol: 1e-12, max_iter: 5000, track_elbo: false, ..Default::default() };
    let mut reference = build_factor_graph(&m.spec)?;
    let base = reference.default_schedule();
    reference.run_vmp(&base, &opts)?;
    let want = reference.q_vector();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let mut schedule = base.clone();
        schedule.shuffle(&mut rng);
        let mut g = build_factor_graph(&m.spec)?;
        g.run_vmp(&schedule, &opts)?;
        let got = g.q_vector();
        worst = got.iter().zip(want.iter()).map(|(a, b)| (a - b).abs() / b.abs().max(1.0)).fold(worst, f64::max);
    }
    Ok((worst <= 1e-6, format!("3 random schedules, max relative difference {worst:.2e}")))
}

fn check_elbo(_: Option<Fault>) -> CheckResult {
    let s = gaussian_spline_sample(300, 0.1, 1);
    let m = build_penalized_spline(&s.y, &s.x, 20, &Hyper::default(), Exec::default())?;
    let mut g = build_factor_graph(&m.spec)?;
    let r = g.run_vmp(&g.default_schedule(), &VmpOptions { tol: f64::MIN_POSITIVE, max_iter: 100, ..Default::default() })?;
    let min = r.elbo_trace.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    Ok((min >= -1e-8, format!("penalized spline, minimum increment {min:.1e} over {} sweeps", r.elbo_trace.len())))
}

/// Runs every check; `fault` corrupts the named library output inside the checks only.
pub fn cmd_validate(fault: Option<Fault>) -> ValidationReport {
    let checks: [(&'static str, fn(Option<Fault>) -> CheckResult); 6] = [
        ("expfam moments and entropies", check_moments),
        ("log-partition gradient", check_gradient),
        ("MFVB vs VMP", check_mfvb),
        ("schedule invariance", check_schedules),
        ("conjugate ELBO monotone", check_elbo),
        ("d=1 matrix families", check_d1),
    ];
    let rows = checks
        .into_iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let (passed, detail) = f(fault).unwrap_or_else(|e| (false, format!("error: {e}")));
            CheckRow { name, passed, detail, seconds: start.elapsed().as_secs_f64() }
        })
        .collect();
    ValidationReport { checks: rows }
}

fn check_d1(fault: Option<Fault>) -> CheckResult {
    let mut worst: f64 = 0.0;
    for (kappa, lambda) in [(0.7, 0.3), (3.0, 2.0), (12.0, 40.0)] {
        let scalar = common_to_natural(FamilyTag::InverseChiSquared, &C::InverseChiSquared { kappa, lambda })?;
        for family in [FamilyTag::InverseWishart(1), FamilyTag::InverseGWishartDiag(1)] {
            let m = NaturalParameterVector::new(family, scalar.eta.clone())?;
            let pairs = e_t(&m, fault)?.iter().copied().zip(expected_sufficient_statistic(&scalar)?.iter().copied()).collect::<Vec<_>>();
            for (a, b) in pairs.into_iter().chain([(entropy_of(&m, fault)?, entropy(&scalar)?)]) {
                worst = worst.max((a - b).abs() / b.abs().max(1.0));
            }
        }
    }
    Ok((worst <= 1e-14, format!("worst relative difference {worst:.1e}")))
}
