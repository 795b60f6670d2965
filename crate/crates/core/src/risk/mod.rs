//! Internal-model SCR: independent normals per line, and the mixed model
//! with a Gaussian part plus symmetric generalized Pareto components.

mod mixed;
mod profile;
mod quantile;
mod simple;

pub use mixed::{
    build_mixed_model, component_sigma_table, symmetric_gp_quantile, ComponentSigma,
    MixedLossModel, ModelParams, SymmetricGp,
};
pub use profile::{LiabilityProfile, LobFigures};
pub use quantile::{
    quantile_total_loss, ConvolutionSettings, MonteCarloSettings, QuantileEngine, QuantileEstimate,
    QuantileMethod, MAX_EXCLUDED_MASS, MIN_RECOMMENDED_SIMS,
};
pub use simple::{scr_simple_internal, SCR_LEVEL};

use crate::error::Result;

/// Mixed-model SCR: the 99.5% quantile of the total loss by convolution.
pub fn scr_mixed_model(profile: &LiabilityProfile, params: &ModelParams) -> Result<f64> {
    Ok(scr_mixed_model_with(profile, params, &QuantileEngine::default())?.value)
}

pub fn scr_mixed_model_with(
    profile: &LiabilityProfile,
    params: &ModelParams,
    engine: &QuantileEngine,
) -> Result<QuantileEstimate> {
    let model = build_mixed_model(profile, params)?;
    let mut estimate = quantile_total_loss(&model, SCR_LEVEL, engine)?;
    estimate.warnings.splice(0..0, model.warnings);
    Ok(estimate)
}
