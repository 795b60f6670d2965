//! Parameter estimation: zero-mean normals, generalized Pareto tails and
//! the structured two-line covariance model.

mod linalg;
mod lrt;
mod optim;

pub mod gp;
pub mod normal;
pub mod structured;

pub use gp::{fit_gp, gp_loglik, GpFit, GpParams};
pub use linalg::cholesky;
pub use lrt::{lr_test, LrtResult};
pub use normal::{
    fit_pooled_normal, fit_zero_mean_normal, fit_zero_mean_normal_with, NormalFit, VarianceDivisor,
};
pub use optim::{bfgs, BfgsOptions, Minimum};
pub use structured::{
    assemble_sigma, fit_structured_mvn, fit_structured_mvn_with, loglik_structured, FitOptions,
    Observation, StartDiagnostic, StructuredConstraints, StructuredCovParams, StructuredFit,
};
