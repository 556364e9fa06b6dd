//! Reference computations that share no code with `fragvmp`: coordinate-ascent
//! MFVB fits, quadrature and Monte-Carlo moment estimates, prior samplers and
//! a Kolmogorov-Smirnov test.

pub mod glm;
pub mod mfvb;
pub mod moments;
pub mod sampling;

pub use mfvb::{mfvb_linear_regression, LinRegQ, MfvbFit, MfvbState, MfvbVariant};
pub use glm::{mfvb_binary_spline, BinaryFit, BinaryLink};
pub use moments::{moment_oracle, Family, Method, MomentEstimate};
pub use sampling::{half_cauchy_cdf, ks_test, KsResult};

use thiserror::Error;

/// Pseudo-random generator used by every seeded oracle.
pub const RNG_ALGORITHM: &str = "ChaCha8";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("singular update matrix in {0}")]
    Singular(&'static str),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, OracleError>;

pub type Matrix = nalgebra::DMatrix<f64>;
pub type Vector = nalgebra::DVector<f64>;
