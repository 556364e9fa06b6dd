use fragvmp::engine::{build_factor_graph, Link, ModelSpec, VmpOptions};
use fragvmp::exec::Exec;
use fragvmp::expfam::{entropy, FamilyTag, NaturalParameterVector};
use fragvmp::fragments::{FragmentSpec, GaussianPriorSpec, InverseWishartPriorSpec, IteratedIgwSpec};
use fragvmp::linalg::{DenseMatrix, Vector};
use fragvmp::models::synthetic::{gaussian_spline_sample, linear_regression_sample};
use fragvmp::models::{build_linear_regression, build_penalized_spline, Hyper};
use fragvmp::VmpError;

fn prior(d: usize) -> FragmentSpec {
    FragmentSpec::GaussianPrior(GaussianPriorSpec::new(Vector::zeros(d), DenseMatrix::identity(d, d) * 2.0).unwrap())
}

#[test]
fn lone_prior_has_zero_elbo() {
    let spec = ModelSpec::new(Link::Identity)
        .node("theta", FamilyTag::MultivariateNormal(2))
        .factor("p(theta)", prior(2), &["theta"]);
    let mut g = build_factor_graph(&spec).unwrap();
    let report = g.run_vmp(&g.default_schedule(), &VmpOptions::default()).unwrap();
    assert!(report.converged);
    assert!(g.elbo().unwrap().abs() < 1e-12);
}

#[test]
fn linear_regression_census() {
    let s = linear_regression_sample(30, 3, 4);
    let spec = build_linear_regression(&s.y, &s.x, 1e10, 1e5).unwrap();
    let g = build_factor_graph(&spec).unwrap();
    assert_eq!(g.node_names(), vec!["beta", "sigma_sq", "a"]);
    assert_eq!(g.factors().len(), 4);
    assert_eq!(g.message_count(), 12);
}

#[test]
fn penalized_spline_census() {
    let s = gaussian_spline_sample(100, 0.1, 2);
    let m = build_penalized_spline(&s.y, &s.x, 10, &Hyper::default(), Exec::default()).unwrap();
    let g = build_factor_graph(&m.spec).unwrap();
    assert_eq!(g.factors().len(), 6);
    assert_eq!(g.nodes().len(), 5);
    assert_eq!(m.spec.node_family("beta_u"), Some(FamilyTag::MultivariateNormal(12)));
}

#[test]
fn node_to_factor_excludes_the_recipient() {
    // theta has three neighbours; its message to each is the sum of the other two.
    let spec = ModelSpec::new(Link::Identity)
        .node("theta", FamilyTag::MultivariateNormal(1))
        .factor("f1", prior(1), &["theta"])
        .factor(
            "f2",
            FragmentSpec::GaussianPrior(GaussianPriorSpec::new(Vector::from_element(1, 1.0), DenseMatrix::identity(1, 1)).unwrap()),
            &["theta"],
        )
        .factor("f3", prior(1), &["theta"]);
    let mut g = build_factor_graph(&spec).unwrap();
    for f in 0..3 {
        g.update_factor(f).unwrap();
    }
    for f in 0..3 {
        let msg = g.update_node_to_factor(0, f).unwrap();
        let mut expect = Vector::zeros(2);
        for other in (0..3).filter(|&o| o != f) {
            expect += &g.message_to_node(other, 0).eta;
        }
        assert!((msg.payload.eta - expect).amax() < 1e-15);
    }
    // A single-neighbour node sends the zero vector.
    let lone = ModelSpec::new(Link::Identity).node("t", FamilyTag::MultivariateNormal(1)).factor("f", prior(1), &["t"]);
    let mut g = build_factor_graph(&lone).unwrap();
    assert_eq!(g.update_node_to_factor(0, 0).unwrap().payload.eta.amax(), 0.0);
}

#[test]
fn graph_validation_errors() {
    let empty = ModelSpec::new(Link::Identity).node("t", FamilyTag::MultivariateNormal(1));
    assert!(matches!(build_factor_graph(&empty), Err(VmpError::Graph(_))));

    let unattached = ModelSpec::new(Link::Identity)
        .node("t", FamilyTag::MultivariateNormal(1))
        .node("u", FamilyTag::MultivariateNormal(1))
        .factor("f", prior(1), &["t"]);
    assert!(build_factor_graph(&unattached).is_err());

    let undeclared = ModelSpec::new(Link::Identity).node("t", FamilyTag::MultivariateNormal(1)).factor("f", prior(1), &["x"]);
    assert!(build_factor_graph(&undeclared).is_err());

    let wrong_family = ModelSpec::new(Link::Identity).node("t", FamilyTag::InverseChiSquared).factor("f", prior(1), &["t"]);
    assert!(build_factor_graph(&wrong_family).is_err());

    let wrong_arity = ModelSpec::new(Link::Identity).node("t", FamilyTag::MultivariateNormal(1)).factor("f", prior(1), &["t", "t"]);
    assert!(build_factor_graph(&wrong_arity).is_err());

    let igw = FragmentSpec::IteratedIgw(IteratedIgwSpec::scalar(1.0).unwrap());
    let twice = ModelSpec::new(Link::Identity).node("s", FamilyTag::InverseChiSquared).factor("f", igw, &["s", "s"]);
    assert!(build_factor_graph(&twice).is_err());

    let dup = ModelSpec::new(Link::Identity)
        .node("t", FamilyTag::MultivariateNormal(1))
        .factor("f", prior(1), &["t"])
        .factor("f", prior(1), &["t"]);
    assert!(build_factor_graph(&dup).is_err());
}

#[test]
fn options_and_schedule_are_validated() {
    let s = linear_regression_sample(30, 2, 1);
    let spec = build_linear_regression(&s.y, &s.x, 1e10, 1e5).unwrap();
    let mut g = build_factor_graph(&spec).unwrap();
    let sched = g.default_schedule();
    assert!(g.run_vmp(&sched, &VmpOptions { max_iter: 0, ..Default::default() }).is_err());
    assert!(g.run_vmp(&sched, &VmpOptions { tol: 0.0, ..Default::default() }).is_err());
    assert!(g.run_vmp(&sched, &VmpOptions { damping: 1.5, ..Default::default() }).is_err());
    assert!(g.run_vmp(&[0, 1, 2], &VmpOptions::default()).is_err());
    assert!(g.run_vmp(&[0, 1, 2, 3, 9], &VmpOptions::default()).is_err());
}

#[test]
fn one_sweep_does_not_converge() {
    let s = linear_regression_sample(50, 3, 2);
    let spec = build_linear_regression(&s.y, &s.x, 1e10, 1e5).unwrap();
    let mut g = build_factor_graph(&spec).unwrap();
    let r = g.run_vmp(&g.default_schedule(), &VmpOptions { max_iter: 1, ..Default::default() }).unwrap();
    assert!(!r.converged);
    assert_eq!(r.iterations, 1);
    assert_eq!(r.elbo_trace.len(), 1);
    assert!(r.monotone_expected);
}

#[test]
fn damping_reaches_the_same_fixed_point() {
    let s = gaussian_spline_sample(150, 0.1, 3);
    let m = build_penalized_spline(&s.y, &s.x, 10, &Hyper::default(), Exec::default()).unwrap();
    let mut a = build_factor_graph(&m.spec).unwrap();
    let mut b = build_factor_graph(&m.spec).unwrap();
    let tight = VmpOptions { tol: 1e-11, max_iter: 5000, ..Default::default() };
    assert!(a.run_vmp(&a.default_schedule(), &tight).unwrap().converged);
    assert!(b.run_vmp(&b.default_schedule(), &VmpOptions { damping: 0.6, ..tight }).unwrap().converged);
    let (qa, qb) = (a.q_vector(), b.q_vector());
    let rel = qa.iter().zip(qb.iter()).map(|(x, y)| (x - y).abs() / x.abs().max(1.0)).fold(0.0, f64::max);
    assert!(rel < 1e-7, "{rel}");
}

#[test]
fn sequential_and_parallel_fits_are_identical() {
    let s = gaussian_spline_sample(400, 0.1, 5);
    let m = build_penalized_spline(&s.y, &s.x, 15, &Hyper::default(), Exec::Sequential).unwrap();
    let mut a = build_factor_graph(&m.spec).unwrap();
    a.set_exec(Exec::Sequential);
    let mut b = build_factor_graph(&m.spec).unwrap();
    b.set_exec(Exec::default());
    let ra = a.run_vmp(&a.default_schedule(), &VmpOptions::default()).unwrap();
    let rb = b.run_vmp(&b.default_schedule(), &VmpOptions::default()).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(a.q_vector(), b.q_vector());
}

#[test]
fn elbo_with_current_q_matches_elbo() {
    let s = linear_regression_sample(40, 3, 9);
    let spec = build_linear_regression(&s.y, &s.x, 1e10, 1e5).unwrap();
    let mut g = build_factor_graph(&spec).unwrap();
    g.run_vmp(&g.default_schedule(), &VmpOptions::default()).unwrap();
    let q = g.q_natural(0);
    assert_eq!(g.elbo_with(0, &q).unwrap(), g.elbo().unwrap());
    let wrong = NaturalParameterVector::new(FamilyTag::InverseChiSquared, Vector::from_column_slice(&[-2.0, -1.0])).unwrap();
    assert!(g.elbo_with(0, &wrong).is_err());
}

#[test]
fn prior_only_variance_node_elbo() {
    // A node fed only by its prior: E log p = −entropy, so the ELBO vanishes.
    let p = InverseWishartPriorSpec::new(3.0, DenseMatrix::identity(2, 2)).unwrap();
    let spec = ModelSpec::new(Link::Identity)
        .node("s", FamilyTag::InverseWishart(2))
        .factor("p(s)", FragmentSpec::InverseWishartPrior(p), &["s"]);
    let mut g = build_factor_graph(&spec).unwrap();
    g.run_vmp(&g.default_schedule(), &VmpOptions::default()).unwrap();
    let q = g.q_natural(0);
    assert!(entropy(&q).unwrap() > -1e3);
    assert!(g.elbo().unwrap().abs() < 1e-12);
}
