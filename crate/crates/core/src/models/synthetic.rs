//! Seeded synthetic data sets. All generators use ChaCha8.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Normal, Poisson, StandardNormal};

use crate::engine::Link;
use crate::linalg::{DenseMatrix, Vector};
use crate::special::{norm_pdf, norm_quantile};

fn phi(x: f64, mu: f64, sigma: f64) -> f64 {
    norm_pdf((x - mu) / sigma) / sigma
}

/// Mean function of the binary and count simulations, with values in (0, 1) on [0, 1].
pub fn f_true(x: f64) -> f64 {
    (1.05 - 1.02 * x + 0.018 * x * x + 0.4 * phi(x, 0.38, 0.08) + 0.08 * phi(x, 0.75, 0.03)) / 2.7
}

/// `f_true` on the linear-predictor scale of `link`; counts have mean `10 f_true`.
pub fn glm_truth(link: Link, x: f64) -> f64 {
    let f = f_true(x);
    match link {
        Link::Identity => f,
        Link::Logit => (f / (1.0 - f)).ln(),
        Link::Probit => norm_quantile(f),
        Link::Log => (10.0 * f).ln(),
    }
}

#[derive(Debug, Clone)]
pub struct GlmSample {
    pub x: Vec<f64>,
    /// `Bernoulli{f_true(x)}`.
    pub y_binary: Vec<f64>,
    /// `Poisson{10 f_true(x)}`.
    pub y_count: Vec<f64>,
}

pub fn glm_sample(n: usize, seed: u64) -> GlmSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let y_binary = x
        .iter()
        .map(|&v| if Bernoulli::new(f_true(v)).expect("f_true lies in (0, 1)").sample(&mut rng) { 1.0 } else { 0.0 })
        .collect();
    let y_count = x
        .iter()
        .map(|&v| Poisson::new(10.0 * f_true(v)).expect("positive rate").sample(&mut rng))
        .collect();
    GlmSample { x, y_binary, y_count }
}

#[derive(Debug, Clone)]
pub struct GaussianSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// `y = f_true(x) + N(0, noise_sd²)` with `x ~ Uniform(0, 1)`.
pub fn gaussian_spline_sample(n: usize, noise_sd: f64, seed: u64) -> GaussianSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let noise = Normal::new(0.0, noise_sd).expect("noise sd must be positive");
    let y = x.iter().map(|&v| f_true(v) + noise.sample(&mut rng)).collect();
    GaussianSample { x, y }
}

/// Smooth price-like response against an engine-power-like predictor.
pub fn car_like_sample(n: usize, seed: u64) -> GaussianSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n).map(|_| 48.0 + 240.0 * rng.random::<f64>()).collect();
    let noise = Normal::new(0.0, 0.15).expect("positive sd");
    let y = x
        .iter()
        .map(|&v| 8.6 + 0.012 * v - 1.5e-5 * v * v + 0.15 * (v / 25.0).sin() + noise.sample(&mut rng))
        .collect();
    GaussianSample { x, y }
}

#[derive(Debug, Clone)]
pub struct LinearRegressionSample {
    /// Design with a leading column of ones.
    pub x: DenseMatrix,
    pub y: Vec<f64>,
    pub beta: Vector,
    pub sigma: f64,
}

/// `y = Xβ + N(0, σ²)` with standard normal covariates and `β_j ~ N(0, 1)`.
pub fn linear_regression_sample(n: usize, d: usize, seed: u64) -> LinearRegressionSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DenseMatrix::from_fn(n, d, |_, j| if j == 0 { 1.0 } else { rng.sample(StandardNormal) });
    let beta = Vector::from_fn(d, |_, _| rng.sample(StandardNormal));
    let sigma = 0.5 + rng.random::<f64>();
    let mean = &x * &beta;
    let y = mean.iter().map(|m| m + sigma * rng.sample::<f64, _>(StandardNormal)).collect();
    LinearRegressionSample { x, y, beta, sigma }
}

#[derive(Debug, Clone)]
pub struct GroupSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// 1-based subject ids.
    pub group_id: Vec<usize>,
    /// 1 for group B, 0 for group W.
    pub group_label: Vec<f64>,
}

/// Group W mean curve of [`group_sample`].
pub fn group_white_curve(x: f64) -> f64 {
    (2.0 * std::f64::consts::PI * x).sin()
}

/// Group B mean curve of [`group_sample`].
pub fn group_black_curve(x: f64) -> f64 {
    group_white_curve(x) + 0.5 * x - 0.2
}

/// `m` subjects with `n_per` observations each; odd subjects are in group B.
/// Each subject adds a random line and noise with sd 0.15.
pub fn group_sample(m: usize, n_per: usize, seed: u64) -> GroupSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.15).expect("positive sd");
    let (mut x, mut y, mut group_id, mut group_label) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for g in 1..=m {
        let black = g % 2 == 1;
        let a = 0.2 * rng.sample::<f64, _>(StandardNormal);
        let b = 0.1 * rng.sample::<f64, _>(StandardNormal);
        for _ in 0..n_per {
            let v: f64 = rng.random();
            let mean = if black { group_black_curve(v) } else { group_white_curve(v) };
            x.push(v);
            y.push(mean + a + b * v + noise.sample(&mut rng));
            group_id.push(g);
            group_label.push(if black { 1.0 } else { 0.0 });
        }
    }
    GroupSample { x, y, group_id, group_label }
}
