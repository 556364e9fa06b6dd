//! CSV-driven fitting, JSON results and the bundled validation suite behind
//! the `fragvmp` binary.

pub mod data;
pub mod error;
pub mod fit;
pub mod result;
pub mod synth;
pub mod validate;

pub use error::CliError;
pub use fit::{cmd_fit, FitRequest, LinkArg, ModelKind};
pub use result::{FitResult, Meta};
pub use validate::{cmd_validate, Fault, ValidationReport};

/// Exit status of a fit that stopped at `iters` without meeting `tol`.
pub const EXIT_NOT_CONVERGED: i32 = 2;
/// Exit status for any error.
pub const EXIT_ERROR: i32 = 1;
