use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::mixed::{symmetric_gp_quantile, MixedLossModel, SymmetricGp};
use crate::diagnostics::Warning;
use crate::error::{Error, Result};
use crate::sampling::{block_rng, blocks};
use crate::stats::dist::{normal_cdf, normal_quantile};

/// Largest probability mass allowed outside the convolution grid.
pub const MAX_EXCLUDED_MASS: f64 = 1e-8;
/// Below this many draws a Monte Carlo estimate carries a warning.
pub const MIN_RECOMMENDED_SIMS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvolutionSettings {
    /// Cells on each side of zero; each component grid has `2 * half_points + 1` cells.
    pub half_points: usize,
    /// Minimum grid half-width in standard deviations of the total loss.
    pub width_sd: f64,
    /// Two-sided tail probability each component may leave beyond the grid.
    pub component_tail: f64,
    /// Fixed grid half-width, overriding the automatic choice.
    pub half_width: Option<f64>,
    /// Largest cell width allowed relative to the spread of the loss.
    pub max_relative_step: f64,
}

impl Default for ConvolutionSettings {
    fn default() -> Self {
        Self {
            half_points: 1 << 16,
            width_sd: 12.0,
            component_tail: 1e-10,
            half_width: None,
            max_relative_step: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonteCarloSettings {
    pub n_sims: usize,
    pub seed: u64,
}

impl Default for MonteCarloSettings {
    fn default() -> Self {
        Self {
            n_sims: 1_000_000,
            seed: 20_150_101,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "engine", rename_all = "snake_case")]
pub enum QuantileEngine {
    Convolution(ConvolutionSettings),
    MonteCarlo(MonteCarloSettings),
}

impl Default for QuantileEngine {
    fn default() -> Self {
        Self::Convolution(ConvolutionSettings::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileMethod {
    /// Closed form: a single normal or a single symmetric GP.
    Analytic,
    Convolution,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantileEstimate {
    pub value: f64,
    pub method: QuantileMethod,
    pub std_error: Option<f64>,
    pub grid_step: Option<f64>,
    pub excluded_mass: Option<f64>,
    pub n_sims: Option<usize>,
    pub warnings: Vec<Warning>,
}

impl QuantileEstimate {
    fn analytic(value: f64) -> Self {
        Self {
            value,
            method: QuantileMethod::Analytic,
            std_error: None,
            grid_step: None,
            excluded_mass: None,
            n_sims: None,
            warnings: Vec::new(),
        }
    }
}

/// `p`-quantile of the total loss of a mixed model.
pub fn quantile_total_loss(
    model: &MixedLossModel,
    p: f64,
    engine: &QuantileEngine,
) -> Result<QuantileEstimate> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "quantile level must lie in (0, 1), got {p}"
        )));
    }
    if !(model.sigma_normal >= 0.0) || !model.sigma_normal.is_finite() {
        return Err(Error::Domain(format!(
            "invalid normal scale {}",
            model.sigma_normal
        )));
    }
    match engine {
        QuantileEngine::Convolution(s) => convolution_quantile(model, p, s),
        QuantileEngine::MonteCarlo(s) => monte_carlo_quantile(model, p, s),
    }
}

fn single_component_quantile(c: &SymmetricGp, p: f64) -> Result<f64> {
    Ok(if p > 0.5 {
        symmetric_gp_quantile(c.gp.beta, c.gp.xi, p)?
    } else if p < 0.5 {
        -symmetric_gp_quantile(c.gp.beta, c.gp.xi, 1.0 - p)?
    } else {
        0.0
    })
}

fn convolution_quantile(
    model: &MixedLossModel,
    p: f64,
    s: &ConvolutionSettings,
) -> Result<QuantileEstimate> {
    let sigma = model.sigma_normal;
    match (sigma > 0.0, model.components.as_slice()) {
        (_, []) => return Ok(QuantileEstimate::analytic(sigma * normal_quantile(p)?)),
        (false, [single]) => {
            return Ok(QuantileEstimate::analytic(single_component_quantile(
                single, p,
            )?))
        }
        _ => {}
    }
    if s.half_points < 1 << 15 {
        return Err(Error::Config(format!(
            "convolution grid needs at least 2^15 cells per side, got {}",
            s.half_points
        )));
    }
    if !(s.component_tail > 0.0 && s.component_tail < 1.0) {
        return Err(Error::Config(format!(
            "component tail must lie in (0, 1), got {}",
            s.component_tail
        )));
    }

    let half_width = match s.half_width {
        Some(w) if w > 0.0 && w.is_finite() => w,
        Some(w) => {
            return Err(Error::Config(format!(
                "grid half-width must be positive, got {w}"
            )))
        }
        None => {
            let sd = model.variance().sqrt();
            let mut w = if sd.is_finite() { s.width_sd * sd } else { 0.0 };
            if sigma > 0.0 {
                w = w.max(sigma * normal_quantile(1.0 - 0.5 * s.component_tail)?);
            }
            for c in &model.components {
                w = w.max(c.gp.inverse_sf(s.component_tail));
            }
            w
        }
    };
    if !half_width.is_finite() {
        return Err(Error::Resolution("grid half-width is not finite".into()));
    }

    let k = s.half_points;
    let h = half_width / k as f64;
    let edge = (k as f64 + 0.5) * h;
    let mut excluded = 0.0;
    let mut pmfs = Vec::with_capacity(model.components.len() + 1);
    if sigma > 0.0 {
        excluded += 2.0 * normal_cdf(-edge / sigma);
        pmfs.push(cell_masses(k, h, |a, b| normal_mass(sigma, a, b)));
    }
    for c in &model.components {
        excluded += c.two_sided_tail(edge);
        pmfs.push(cell_masses(k, h, |a, b| c.mass(a, b)));
    }
    if excluded > MAX_EXCLUDED_MASS {
        return Err(Error::Resolution(format!(
            "probability {excluded:.3e} lies beyond the grid half-width {half_width}; widen the grid"
        )));
    }

    let total = pmfs
        .into_iter()
        .reduce(|a, b| convolve(&a, &b))
        .unwrap_or_else(|| vec![1.0]);
    let offset = (total.len() - 1) / 2;
    let mut cum = 0.5 * excluded;
    let mut value = None;
    for (j, &m) in total.iter().enumerate() {
        let next = cum + m.max(0.0);
        if next >= p {
            let lower = (j as f64 - offset as f64 - 0.5) * h;
            let frac = if next > cum {
                (p - cum) / (next - cum)
            } else {
                0.5
            };
            value = Some(lower + frac * h);
            break;
        }
        cum = next;
    }
    let value =
        value.ok_or_else(|| Error::Resolution(format!("level {p} lies beyond the grid")))?;

    let spread = model
        .components
        .iter()
        .map(|c| c.gp.inverse_sf(0.5))
        .fold(sigma, f64::max)
        .max(value.abs());
    if h > s.max_relative_step * spread {
        return Err(Error::Resolution(format!(
            "grid step {h:.3e} is too coarse for a loss spread of {spread:.3e}; the tails are too heavy for this grid"
        )));
    }

    Ok(QuantileEstimate {
        value,
        method: QuantileMethod::Convolution,
        std_error: None,
        grid_step: Some(h),
        excluded_mass: Some(excluded),
        n_sims: None,
        warnings: Vec::new(),
    })
}

fn normal_mass(sigma: f64, a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        normal_cdf(-a / sigma) - normal_cdf(-b / sigma)
    } else {
        normal_cdf(b / sigma) - normal_cdf(a / sigma)
    }
}

/// Masses of the cells `[(i - 1/2) h, (i + 1/2) h]`, `i = -k..=k`.
fn cell_masses(k: usize, h: f64, mass: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    (0..=2 * k)
        .map(|idx| {
            let i = idx as f64 - k as f64;
            mass((i - 0.5) * h, (i + 0.5) * h)
        })
        .collect()
}

/// Linear convolution via zero-padded FFT.
fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len() + b.len() - 1;
    let size = len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    let pad = |x: &[f64]| {
        let mut v = vec![Complex::new(0.0, 0.0); size];
        for (slot, &value) in v.iter_mut().zip(x) {
            slot.re = value;
        }
        v
    };
    let (mut fa, mut fb) = (pad(a), pad(b));
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inverse.process(&mut fa);
    fa.truncate(len);
    fa.into_iter().map(|c| c.re / size as f64).collect()
}

fn monte_carlo_quantile(
    model: &MixedLossModel,
    p: f64,
    s: &MonteCarloSettings,
) -> Result<QuantileEstimate> {
    if s.n_sims < 2 {
        return Err(Error::Config(format!(
            "need at least 2 simulations, got {}",
            s.n_sims
        )));
    }
    let mut warnings = Vec::new();
    if s.n_sims < MIN_RECOMMENDED_SIMS {
        warnings.push(Warning::new(
            "Monte Carlo",
            format!(
                "{} draws is below the recommended {MIN_RECOMMENDED_SIMS}",
                s.n_sims
            ),
        ));
    }
    let plan: Vec<_> = blocks(s.n_sims).collect();
    let chunks: Vec<Vec<f64>> = plan
        .par_iter()
        .map(|&(block, count)| {
            let mut rng = block_rng(s.seed, block);
            (0..count)
                .map(|_| {
                    let mut x = model.sigma_normal * rng.sample::<f64, _>(StandardNormal);
                    for c in &model.components {
                        // 1 - u lies in (0, 1], keeping the tail draw finite.
                        let z = c.gp.inverse_sf(1.0 - rng.random::<f64>());
                        x += if rng.random::<bool>() { z } else { -z };
                    }
                    x
                })
                .collect()
        })
        .collect();
    let mut draws: Vec<f64> = chunks.concat();
    draws.sort_unstable_by(f64::total_cmp);

    let n = draws.len() as f64;
    let at = |rank: f64| draws[(rank.ceil() as usize).clamp(1, draws.len()) - 1];
    let value = at(n * p);
    let spread = (n * p * (1.0 - p)).sqrt();
    let std_error = 0.5 * (at(n * p + spread) - at(n * p - spread));
    Ok(QuantileEstimate {
        value,
        method: QuantileMethod::MonteCarlo,
        std_error: Some(std_error),
        grid_step: None,
        excluded_mass: None,
        n_sims: Some(s.n_sims),
        warnings,
    })
}
