mod common;

use common::{fragment, inv_chisq_of, mvn_of, scaled_diff, TestResult};
use fragvmp::engine::{build_factor_graph, Link, VmpOptions};
use fragvmp::exec::Exec;
use fragvmp::fragments::{FragmentCtx, FragmentSpec};
use fragvmp::models::synthetic::glm_sample;
use fragvmp::models::{build_glm_spline, CurveTarget, Hyper, SplineKind};
use fragvmp_oracle::{mfvb_binary_spline, BinaryLink};
use proptest::prelude::*;

fn vmp_vs_mfvb(link: Link, oracle_link: BinaryLink, kind: SplineKind) -> TestResult<()> {
    let d = glm_sample(250, 21);
    let hyper = Hyper { spline: kind, ..Hyper::default() };
    let m = build_glm_spline(&d.y_binary, &d.x, 8, link, &hyper, Exec::default())?;
    let mut g = build_factor_graph(&m.spec)?;
    let r = g.run_vmp(&g.default_schedule(), &VmpOptions { tol: 1e-13, max_iter: 20_000, track_elbo: false, ..Default::default() })?;
    assert!(r.converged);
    let (mu, sigma) = mvn_of(&g, &m.coef_node)?;
    let (kappa, lambda) = inv_chisq_of(&g, "sigma_sq_u")?;

    let c = m.curve_rows(CurveTarget::Mean, &d.x)?;
    let fit = mfvb_binary_spline(&d.y_binary, &c, 2, hyper.sigma_beta_sq, hyper.a_hyper, oracle_link, 1e-10, 20_000)?;
    assert!(fit.converged, "oracle stopped after {} cycles", fit.iterations);
    assert_eq!(kappa, 9.0);
    assert!(scaled_diff(mu.as_slice(), fit.mu.as_slice()) < 1e-6, "{link:?} μ");
    assert!(scaled_diff(sigma.as_slice(), fit.sigma.as_slice()) < 1e-6, "{link:?} Σ");
    assert!((lambda - fit.lambda_q_sigsq_u).abs() / fit.lambda_q_sigsq_u < 1e-6, "{link:?} λ");
    Ok(())
}

#[test]
fn logistic_vmp_matches_jaakkola_jordan_mfvb() -> TestResult<()> {
    vmp_vs_mfvb(Link::Logit, BinaryLink::Logit, SplineKind::TruncatedLinear)
}

#[test]
fn probit_vmp_matches_albert_chib_mfvb() -> TestResult<()> {
    vmp_vs_mfvb(Link::Probit, BinaryLink::Probit, SplineKind::OsullivanLike)
}

#[test]
fn logistic_elbo_never_decreases() -> TestResult<()> {
    let d = glm_sample(300, 2);
    let m = build_glm_spline(&d.y_binary, &d.x, 10, Link::Logit, &Hyper::default(), Exec::default())?;
    let mut g = build_factor_graph(&m.spec)?;
    let r = g.run_vmp(&g.default_schedule(), &VmpOptions { max_iter: 300, ..Default::default() })?;
    let worst = r.elbo_trace.windows(2).map(|w| (w[1] - w[0]) / w[0].abs()).fold(f64::INFINITY, f64::min);
    assert!(worst >= -1e-10, "{worst}");
    Ok(())
}

#[test]
fn poisson_response_must_be_counts() {
    let d = glm_sample(50, 1);
    let mut y = d.y_count.clone();
    y[3] = -1.0;
    assert!(build_glm_spline(&y, &d.x, 5, Link::Log, &Hyper::default(), Exec::default()).is_err());
    y[3] = 1.5;
    assert!(build_glm_spline(&y, &d.x, 5, Link::Log, &Hyper::default(), Exec::default()).is_err());
}

#[test]
fn binary_response_must_be_zero_or_one() {
    let d = glm_sample(50, 1);
    for link in [Link::Logit, Link::Probit] {
        assert!(build_glm_spline(&d.y_count, &d.x, 5, link, &Hyper::default(), Exec::default()).is_err());
    }
    assert!(build_glm_spline(&d.y_binary, &d.x, 5, Link::Identity, &Hyper::default(), Exec::default()).is_err());
}

#[test]
fn probit_graph_has_no_likelihood_variance() -> TestResult<()> {
    let d = glm_sample(60, 1);
    let m = build_glm_spline(&d.y_binary, &d.x, 5, Link::Probit, &Hyper::default(), Exec::default())?;
    let lik = m.spec.factors.iter().find(|f| f.name == "p(y|beta,u)").ok_or("likelihood")?;
    assert_eq!(lik.ports, vec!["beta_u".to_string()]);
    assert!(m.spec.nodes.iter().all(|n| n.name != "sigma_sq_eps"));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimal_xi_dominates_any_xi(seed in 0u64..1000, xi in proptest::collection::vec(0.0f64..6.0, 40)) {
        let d = glm_sample(40, seed);
        let m = build_glm_spline(&d.y_binary, &d.x, 4, Link::Logit, &Hyper::default(), Exec::Sequential).unwrap();
        let FragmentSpec::Logistic(spec) = fragment(&m.spec, "p(y|beta,u)").unwrap() else { panic!("logistic") };
        let mut g = build_factor_graph(&m.spec).unwrap();
        g.run_vmp(&g.default_schedule(), &VmpOptions { max_iter: 3, ..Default::default() }).unwrap();
        let q = g.q_natural(g.node_id("beta_u").unwrap());
        let ctx = FragmentCtx::default();
        let best = spec.local_bound(&q, None, ctx).unwrap();
        let other = spec.local_bound(&q, Some(&xi), ctx).unwrap();
        prop_assert!(best >= other - 1e-9 * best.abs().max(1.0));
    }
}
