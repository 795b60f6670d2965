//! One-year insurance losses from yearly supervisory reports, the statistics
//! used to decide which companies' data can be pooled, loss-distribution
//! fitting, and solvency capital requirements (SCR) for premium and reserve
//! risk under internal models and the standard formula.
//!
//! The pipeline, bottom to top:
//!
//! * [`report`]: report snapshots and the long-form report CSV.
//! * [`loss`]: opening/closing liability valuations and normalized losses.
//! * [`stats`]: Levene (median-centred) and Spearman tests.
//! * [`fitting`]: zero-mean normal, generalized Pareto and structured
//!   multivariate normal maximum likelihood, likelihood-ratio test.
//! * [`risk`]: internal-model SCR and the mixed Gaussian/Laplace model.
//! * [`standard_formula`]: the standard-formula premium and reserve SCR.
//! * [`pipeline`]: config-driven orchestration used by the CLI.

// Guards such as `!(x > 0.0)` are written that way to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod fitting;
pub mod loss;
pub mod pipeline;
pub mod report;
pub mod risk;
pub mod sampling;
pub mod standard_formula;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
