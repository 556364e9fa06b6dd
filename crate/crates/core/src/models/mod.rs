//! Spline designs, model builders, curve extraction and synthetic data.

pub mod builders;
pub mod curve;
pub mod spline;
pub mod synthetic;

pub use builders::{
    build_glm_spline, build_group_curves, build_linear_regression, build_linear_regression_with,
    build_penalized_spline, build_simple_linear, half_t_covariance_2x2, BuiltModel, CurveTarget, Hyper, Layout,
};
pub use curve::{fitted_curve, uniform_grid, z975, FittedCurve};
pub use spline::{spline_design, SplineBasis, SplineKind, Standardization};
