//! Zero-mean multivariate normal model for the joint losses of two lines
//! (Home, then Motor other) across four companies.
//!
//! The 8x8 covariance has three blocks. Each line's 4x4 block is
//! equicorrelated with common variance; the cross block carries `rho_1` on
//! its diagonal (same company) and `rho_2` elsewhere (different companies),
//! scaled by `sigma_H * sigma_MO`.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linalg::{cholesky, forward_substitute, inverse_from_cholesky, log_det};
use super::optim::{bfgs, BfgsOptions};
use crate::error::{Error, Result};
use crate::sampling::block_rng;

pub const COMPANIES: usize = 4;
pub const DIM: usize = 2 * COMPANIES;

/// One accounting year: Home losses of the four companies, then their Motor
/// other losses, in the same company order.
pub type Observation = [f64; DIM];

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuredCovParams {
    pub sigma_h: f64,
    pub sigma_mo: f64,
    pub rho_h: f64,
    pub rho_mo: f64,
    pub rho_1: f64,
    pub rho_2: f64,
}

impl StructuredCovParams {
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.sigma_h,
            self.sigma_mo,
            self.rho_h,
            self.rho_mo,
            self.rho_1,
            self.rho_2,
        ]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            sigma_h: a[0],
            sigma_mo: a[1],
            rho_h: a[2],
            rho_mo: a[3],
            rho_1: a[4],
            rho_2: a[5],
        }
    }

    /// Necessary conditions checked before factorization: positive scales,
    /// equicorrelations in `(-1/3, 1)`, cross correlations in `[-1, 1]`.
    pub fn check_bounds(&self) -> Result<()> {
        let lower = -1.0 / (COMPANIES as f64 - 1.0);
        for (name, s) in [("sigma_H", self.sigma_h), ("sigma_MO", self.sigma_mo)] {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive, got {s}")));
            }
        }
        for (name, r) in [("rho_H", self.rho_h), ("rho_MO", self.rho_mo)] {
            if !(r > lower && r < 1.0) {
                return Err(Error::NotPositiveDefinite(format!(
                    "{name} = {r} outside the equicorrelation range ({lower:.4}, 1)"
                )));
            }
        }
        for (name, r) in [("rho_1", self.rho_1), ("rho_2", self.rho_2)] {
            if !(-1.0..=1.0).contains(&r) {
                return Err(Error::Domain(format!("{name} = {r} outside [-1, 1]")));
            }
        }
        Ok(())
    }
}

fn block_matrix(p: &StructuredCovParams) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::zeros(DIM, DIM);
    let c = COMPANIES;
    let cross = p.sigma_h * p.sigma_mo;
    for i in 0..c {
        for j in 0..c {
            let same = i == j;
            m[(i, j)] = p.sigma_h * p.sigma_h * if same { 1.0 } else { p.rho_h };
            m[(c + i, c + j)] = p.sigma_mo * p.sigma_mo * if same { 1.0 } else { p.rho_mo };
            let v = cross * if same { p.rho_1 } else { p.rho_2 };
            m[(i, c + j)] = v;
            m[(c + j, i)] = v;
        }
    }
    m
}

/// Assembles the 8x8 covariance and verifies it is positive definite.
pub fn assemble_sigma(params: &StructuredCovParams) -> Result<DMatrix<f64>> {
    params.check_bounds()?;
    let sigma = block_matrix(params);
    cholesky(&sigma)?;
    Ok(sigma)
}

fn validate_data(data: &[Observation]) -> Result<()> {
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Domain("observation vectors must be finite".into()));
    }
    Ok(())
}

/// Sum over observations of the zero-mean normal log-density.
pub fn loglik_structured(params: &StructuredCovParams, data: &[Observation]) -> Result<f64> {
    params.check_bounds()?;
    validate_data(data)?;
    let l = cholesky(&block_matrix(params))?;
    let ld = log_det(&l);
    let mut total = 0.0;
    for x in data {
        let mut y = x.to_vec();
        forward_substitute(&l, &mut y);
        let q: f64 = y.iter().map(|v| v * v).sum();
        total += -0.5 * (DIM as f64 * LN_2PI + ld + q);
    }
    Ok(total)
}

/// Which correlations are tied or fixed during estimation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredConstraints {
    pub rho1_equals_rho2: bool,
    pub rho1_zero: bool,
}

impl StructuredConstraints {
    pub const UNRESTRICTED: Self = Self {
        rho1_equals_rho2: false,
        rho1_zero: false,
    };
    /// Same-company and cross-company correlations share one value.
    pub const EQUAL_CROSS: Self = Self {
        rho1_equals_rho2: true,
        rho1_zero: false,
    };
    /// `EQUAL_CROSS` with the shared correlation fixed at zero.
    pub const INDEPENDENT_LINES: Self = Self {
        rho1_equals_rho2: true,
        rho1_zero: true,
    };

    pub fn free_parameters(&self) -> usize {
        4 + match (self.rho1_equals_rho2, self.rho1_zero) {
            (false, false) => 2,
            (true, false) | (false, true) => 1,
            (true, true) => 0,
        }
    }

    /// Natural-parameter indices moved by each free cross-correlation
    /// coordinate.
    fn cross_slots(&self) -> Vec<Vec<usize>> {
        match (self.rho1_equals_rho2, self.rho1_zero) {
            (false, false) => vec![vec![4], vec![5]],
            (true, false) => vec![vec![4, 5]],
            (false, true) => vec![vec![5]],
            (true, true) => vec![],
        }
    }

    fn apply(&self, p: &mut StructuredCovParams) {
        if self.rho1_equals_rho2 {
            let shared = 0.5 * (p.rho_1 + p.rho_2);
            p.rho_1 = shared;
            p.rho_2 = shared;
        }
        if self.rho1_zero {
            p.rho_1 = 0.0;
            if self.rho1_equals_rho2 {
                p.rho_2 = 0.0;
            }
        }
    }
}

/// Sufficient statistics: observation count and mean outer product.
#[derive(Clone, Debug)]
struct Scatter {
    mean_outer: DMatrix<f64>,
}

impl Scatter {
    fn new(data: &[Observation]) -> Self {
        let mut m = DMatrix::<f64>::zeros(DIM, DIM);
        for x in data {
            for i in 0..DIM {
                for j in 0..DIM {
                    m[(i, j)] += x[i] * x[j];
                }
            }
        }
        m /= data.len() as f64;
        Self { mean_outer: m }
    }

    /// Mean log-likelihood per observation and its gradient in the natural
    /// parameters.
    fn mean_loglik_and_grad(&self, p: &StructuredCovParams) -> Option<(f64, [f64; 6])> {
        p.check_bounds().ok()?;
        let sigma = block_matrix(p);
        let l = cholesky(&sigma).ok()?;
        let inv = inverse_from_cholesky(&l);
        let value = -0.5 * (DIM as f64 * LN_2PI + log_det(&l) + (&inv * &self.mean_outer).trace());
        // d/dp of the mean log-likelihood is -1/2 tr(W dSigma/dp).
        let w = &inv - &inv * &self.mean_outer * &inv;
        let mut grad = [0.0; 6];
        for (k, d) in sigma_derivatives(p).iter().enumerate() {
            grad[k] = -0.5 * w.component_mul(d).sum();
        }
        Some((value, grad))
    }
}

fn sigma_derivatives(p: &StructuredCovParams) -> [DMatrix<f64>; 6] {
    let c = COMPANIES;
    let mut d: [DMatrix<f64>; 6] = std::array::from_fn(|_| DMatrix::zeros(DIM, DIM));
    for i in 0..c {
        for j in 0..c {
            let same = i == j;
            let rh = if same { 1.0 } else { p.rho_h };
            let rm = if same { 1.0 } else { p.rho_mo };
            let rc = if same { p.rho_1 } else { p.rho_2 };
            d[0][(i, j)] = 2.0 * p.sigma_h * rh;
            d[1][(c + i, c + j)] = 2.0 * p.sigma_mo * rm;
            if !same {
                d[2][(i, j)] = p.sigma_h * p.sigma_h;
                d[3][(c + i, c + j)] = p.sigma_mo * p.sigma_mo;
            }
            let cross = [
                (0, p.sigma_mo * rc),
                (1, p.sigma_h * rc),
                (4, if same { p.sigma_h * p.sigma_mo } else { 0.0 }),
                (5, if same { 0.0 } else { p.sigma_h * p.sigma_mo }),
            ];
            for (k, v) in cross {
                d[k][(i, c + j)] = v;
                d[k][(c + j, i)] = v;
            }
        }
    }
    d
}

/// Unconstrained coordinates: log scales, a logistic map of the
/// equicorrelations onto `(-1/3, 1)` and `tanh` for cross correlations.
struct Transform {
    constraints: StructuredConstraints,
}

impl Transform {
    const EQUI_LOWER: f64 = -1.0 / 3.0;

    fn dim(&self) -> usize {
        self.constraints.free_parameters()
    }

    fn to_natural(&self, theta: &[f64]) -> (StructuredCovParams, Vec<[f64; 6]>) {
        let logistic = |t: f64| 1.0 / (1.0 + (-t).exp());
        let mut nat = [0.0; 6];
        let mut jac = vec![[0.0; 6]; theta.len()];
        for k in 0..2 {
            nat[k] = theta[k].exp();
            jac[k][k] = nat[k];
        }
        for k in 2..4 {
            let s = logistic(theta[k]);
            nat[k] = Self::EQUI_LOWER + (1.0 - Self::EQUI_LOWER) * s;
            jac[k][k] = (1.0 - Self::EQUI_LOWER) * s * (1.0 - s);
        }
        for (offset, slots) in self.constraints.cross_slots().into_iter().enumerate() {
            let t = theta[4 + offset].tanh();
            for slot in slots {
                nat[slot] = t;
                jac[4 + offset][slot] = 1.0 - t * t;
            }
        }
        (StructuredCovParams::from_array(nat), jac)
    }

    fn to_theta(&self, p: &StructuredCovParams) -> Vec<f64> {
        let logit = |s: f64| (s / (1.0 - s)).ln();
        let mut theta = vec![p.sigma_h.ln(), p.sigma_mo.ln()];
        for r in [p.rho_h, p.rho_mo] {
            theta.push(logit((r - Self::EQUI_LOWER) / (1.0 - Self::EQUI_LOWER)));
        }
        let nat = p.to_array();
        for slots in self.constraints.cross_slots() {
            theta.push(nat[slots[0]].atanh());
        }
        theta
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub n_starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub rel_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            n_starts: 8,
            seed: 0x5eed,
            max_iter: 500,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StartDiagnostic {
    pub initial_loglik: f64,
    pub final_loglik: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructuredFit {
    pub params: StructuredCovParams,
    pub loglik: f64,
    pub constraints: StructuredConstraints,
    pub n_obs: usize,
    pub free_parameters: usize,
    /// Largest gradient component (mean log-likelihood, transformed
    /// coordinates) at the optimum.
    pub grad_norm: f64,
    pub starts: Vec<StartDiagnostic>,
}

pub fn fit_structured_mvn(
    data: &[Observation],
    constraints: StructuredConstraints,
) -> Result<StructuredFit> {
    fit_structured_mvn_with(data, constraints, &FitOptions::default())
}

/// Maximum likelihood over the structured covariance, from several starting
/// points. Starts are deterministic given `options.seed`; the best converged
/// start wins, ties broken by parameter order.
pub fn fit_structured_mvn_with(
    data: &[Observation],
    constraints: StructuredConstraints,
    options: &FitOptions,
) -> Result<StructuredFit> {
    if data.len() < 3 {
        return Err(Error::Domain(format!(
            "need at least 3 observation vectors, got {}",
            data.len()
        )));
    }
    validate_data(data)?;
    if options.n_starts == 0 {
        return Err(Error::Usage("at least one start is required".into()));
    }
    let scatter = Scatter::new(data);
    let transform = Transform { constraints };
    let n = data.len() as f64;

    let objective = |theta: &[f64]| -> Option<(f64, Vec<f64>)> {
        let (p, jac) = transform.to_natural(theta);
        let (value, grad_nat) = scatter.mean_loglik_and_grad(&p)?;
        let grad = jac
            .iter()
            .map(|row| -row.iter().zip(&grad_nat).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        Some((-value, grad))
    };

    let starts = starting_points(&scatter, &transform, options);
    if starts.is_empty() {
        return Err(Error::Estimation(
            "no positive definite starting point found".into(),
        ));
    }
    let bfgs_opts = BfgsOptions {
        max_iter: options.max_iter,
        rel_tol: options.rel_tol,
        grad_tol: 1e-7,
    };

    let runs: Vec<_> = starts
        .par_iter()
        .map(|theta0| {
            let initial = objective(theta0).map(|(v, _)| -v * n);
            let min = bfgs(objective, theta0, &bfgs_opts);
            (initial, min)
        })
        .collect();

    let mut diagnostics = Vec::with_capacity(runs.len());
    let mut best: Option<(f64, StructuredCovParams, f64)> = None;
    for (initial, min) in runs {
        let Some(min) = min else { continue };
        let loglik = -min.value * n;
        diagnostics.push(StartDiagnostic {
            initial_loglik: initial.unwrap_or(f64::NEG_INFINITY),
            final_loglik: loglik,
            iterations: min.iterations,
            converged: min.converged,
        });
        if !min.converged {
            continue;
        }
        let (params, _) = transform.to_natural(&min.x);
        let better = match &best {
            None => true,
            Some((ll, bp, _)) => {
                loglik > *ll
                    || (loglik == *ll
                        && params.to_array().partial_cmp(&bp.to_array())
                            == Some(std::cmp::Ordering::Less))
            }
        };
        if better {
            best = Some((loglik, params, min.grad_norm));
        }
    }

    let (_, params, grad_norm) = best.ok_or_else(|| {
        Error::Estimation(format!(
            "no start converged; per-start (initial, final, iterations): {:?}",
            diagnostics
                .iter()
                .map(|d| (d.initial_loglik, d.final_loglik, d.iterations))
                .collect::<Vec<_>>()
        ))
    })?;
    // Report the exact per-observation sum rather than the scatter form.
    let loglik = loglik_structured(&params, data)?;
    Ok(StructuredFit {
        params,
        loglik,
        constraints,
        n_obs: data.len(),
        free_parameters: constraints.free_parameters(),
        grad_norm,
        starts: diagnostics,
    })
}

/// Moment-based start, then perturbations of it in transformed coordinates.
fn starting_points(
    scatter: &Scatter,
    transform: &Transform,
    options: &FitOptions,
) -> Vec<Vec<f64>> {
    let m = &scatter.mean_outer;
    let c = COMPANIES;
    let var_h = (0..c).map(|i| m[(i, i)]).sum::<f64>() / c as f64;
    let var_mo = (c..DIM).map(|i| m[(i, i)]).sum::<f64>() / c as f64;
    let corr = |i: usize, j: usize| m[(i, j)] / (m[(i, i)] * m[(j, j)]).sqrt();
    let mut sums = [0.0; 4];
    let mut counts = [0.0; 4];
    for i in 0..c {
        for j in 0..c {
            if i != j {
                sums[0] += corr(i, j);
                sums[1] += corr(c + i, c + j);
                sums[3] += corr(i, c + j);
                counts[0] += 1.0;
                counts[1] += 1.0;
                counts[3] += 1.0;
            } else {
                sums[2] += corr(i, c + j);
                counts[2] += 1.0;
            }
        }
    }
    let avg = |k: usize| sums[k] / counts[k];
    let mut base = StructuredCovParams {
        sigma_h: var_h.sqrt().max(1e-12),
        sigma_mo: var_mo.sqrt().max(1e-12),
        rho_h: avg(0).clamp(-0.3, 0.95),
        rho_mo: avg(1).clamp(-0.3, 0.95),
        rho_1: avg(2).clamp(-0.9, 0.9),
        rho_2: avg(3).clamp(-0.9, 0.9),
    };
    transform.constraints.apply(&mut base);
    for _ in 0..60 {
        if assemble_sigma(&base).is_ok() {
            break;
        }
        base.rho_1 *= 0.8;
        base.rho_2 *= 0.8;
        base.rho_h *= 0.9;
        base.rho_mo *= 0.9;
    }
    if assemble_sigma(&base).is_err() {
        return Vec::new();
    }

    let theta0 = transform.to_theta(&base);
    let mut starts = vec![theta0.clone()];
    for k in 1..options.n_starts {
        let mut rng = block_rng(options.seed, k as u64);
        let offsets: Vec<f64> = (0..transform.dim())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let mut scale = 1.0;
        for _ in 0..12 {
            let theta: Vec<f64> = theta0
                .iter()
                .zip(&offsets)
                .map(|(t, o)| t + scale * o)
                .collect();
            if assemble_sigma(&transform.to_natural(&theta).0).is_ok() {
                starts.push(theta);
                break;
            }
            scale *= 0.5;
        }
    }
    starts
}
