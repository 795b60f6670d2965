use serde::Serialize;

use super::structured::StructuredFit;
use crate::error::{Error, Result};
use crate::stats::dist::chi2_sf;

/// Likelihood-ratio test between nested structured fits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LrtResult {
    pub d: f64,
    pub df: usize,
    pub p_value: f64,
    pub loglik_full: f64,
    pub loglik_reduced: f64,
}

/// Tolerance below which a negative statistic is treated as zero.
const NEGATIVE_D_TOLERANCE: f64 = 1e-6;

/// `D = 2 (l_full - l_reduced)` against chi-square with the difference in
/// free parameters as degrees of freedom.
///
/// A clearly negative `D` means the full fit did not reach its optimum and
/// is reported as an estimation error so the caller can refit.
pub fn lr_test(full: &StructuredFit, reduced: &StructuredFit) -> Result<LrtResult> {
    let nested = (!full.constraints.rho1_zero || reduced.constraints.rho1_zero)
        && (!full.constraints.rho1_equals_rho2 || reduced.constraints.rho1_equals_rho2);
    if !nested || full.free_parameters <= reduced.free_parameters {
        return Err(Error::Usage(format!(
            "models are not nested: {:?} ({} parameters) vs {:?} ({} parameters)",
            full.constraints, full.free_parameters, reduced.constraints, reduced.free_parameters
        )));
    }
    if full.n_obs != reduced.n_obs {
        return Err(Error::Usage(format!(
            "fits use different data sizes: {} vs {}",
            full.n_obs, reduced.n_obs
        )));
    }
    let mut d = 2.0 * (full.loglik - reduced.loglik);
    if d < 0.0 {
        if d < -NEGATIVE_D_TOLERANCE * (1.0 + full.loglik.abs()) {
            return Err(Error::Estimation(format!(
                "negative likelihood-ratio statistic {d:.3e}; refit the full model with more starts"
            )));
        }
        d = 0.0;
    }
    let df = full.free_parameters - reduced.free_parameters;
    Ok(LrtResult {
        d,
        df,
        p_value: chi2_sf(d, df as f64)?,
        loglik_full: full.loglik,
        loglik_reduced: reduced.loglik,
    })
}
