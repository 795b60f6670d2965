use serde::{Deserialize, Serialize};

use crate::diagnostics::Warning;
use crate::error::{Error, Result};

/// Below this `|xi|` the exponential limit formulas are used.
const XI_EPS: f64 = 1e-12;

/// Generalized Pareto shape and scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpParams {
    pub xi: f64,
    pub beta: f64,
}

impl GpParams {
    pub fn new(xi: f64, beta: f64) -> Result<Self> {
        if !xi.is_finite() || !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!(
                "invalid GP parameters xi = {xi}, beta = {beta}"
            )));
        }
        Ok(Self { xi, beta })
    }

    /// Upper end of the support (infinite unless `xi < 0`).
    pub fn upper_endpoint(&self) -> f64 {
        if self.xi < 0.0 {
            -self.beta / self.xi
        } else {
            f64::INFINITY
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.upper_endpoint() {
            return 1.0;
        }
        1.0 - self.sf(x)
    }

    /// `P(Z > x)` for `x >= 0`.
    pub fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        if x >= self.upper_endpoint() {
            return 0.0;
        }
        if self.xi.abs() < XI_EPS {
            (-x / self.beta).exp()
        } else {
            (-(self.xi * x / self.beta).ln_1p() / self.xi).exp()
        }
    }

    /// Value exceeded with probability `tail`.
    pub fn inverse_sf(&self, tail: f64) -> f64 {
        if self.xi.abs() < XI_EPS {
            -self.beta * tail.ln()
        } else {
            self.beta / self.xi * ((-self.xi * tail.ln()).exp_m1())
        }
    }

    pub fn variance(&self) -> f64 {
        if self.xi < 0.5 {
            self.beta * self.beta / ((1.0 - self.xi).powi(2) * (1.0 - 2.0 * self.xi))
        } else {
            f64::INFINITY
        }
    }

    pub fn mean(&self) -> f64 {
        if self.xi < 1.0 {
            self.beta / (1.0 - self.xi)
        } else {
            f64::INFINITY
        }
    }
}

/// GP log-likelihood; `-inf` if any observation is outside the support.
pub fn gp_loglik(params: &GpParams, sample: &[f64]) -> f64 {
    let n = sample.len() as f64;
    let GpParams { xi, beta } = *params;
    if sample.iter().any(|&x| x < 0.0) {
        return f64::NEG_INFINITY;
    }
    if xi.abs() < XI_EPS {
        return -n * beta.ln() - sample.iter().sum::<f64>() / beta;
    }
    let mut acc = 0.0;
    for &x in sample {
        let t = xi * x / beta;
        if t <= -1.0 {
            return f64::NEG_INFINITY;
        }
        acc += t.ln_1p();
    }
    -n * beta.ln() - (1.0 + 1.0 / xi) * acc
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GpFit {
    pub params: GpParams,
    pub loglik: f64,
    pub n_obs: usize,
    pub xi_fixed_zero: bool,
    pub warnings: Vec<Warning>,
}

/// Maximum-likelihood GP fit to positive observations.
///
/// With `fix_xi_zero` this is the exponential fit, `beta = mean`. Otherwise
/// the likelihood is profiled along `theta = xi / beta`: for fixed `theta`
/// the maximizing shape is `mean(ln(1 + theta x))`, leaving a one-dimensional
/// search over `theta > -1 / max(x)`. Shapes below `-1` are excluded since
/// the likelihood is unbounded there.
pub fn fit_gp(sample: &[f64], fix_xi_zero: bool) -> Result<GpFit> {
    if sample.len() < 2 {
        return Err(Error::Domain(format!(
            "need at least two observations, got {}",
            sample.len()
        )));
    }
    if let Some(x) = sample.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!(
            "GP fit needs positive finite values, got {x}"
        )));
    }
    let n = sample.len();
    let mut warnings = Vec::new();
    if n < 5 {
        warnings.push(Warning::new("GP fit", format!("only {n} observations")));
    }
    let mean = sample.iter().sum::<f64>() / n as f64;
    let exponential = GpParams {
        xi: 0.0,
        beta: mean,
    };
    let exp_loglik = gp_loglik(&exponential, sample);

    if fix_xi_zero {
        return Ok(GpFit {
            params: exponential,
            loglik: exp_loglik,
            n_obs: n,
            xi_fixed_zero: true,
            warnings,
        });
    }

    let x_max = sample.iter().copied().fold(f64::MIN, f64::max);
    let shape_at = |theta: f64| sample.iter().map(|&x| (theta * x).ln_1p()).sum::<f64>() / n as f64;
    let profile = |theta: f64| -> f64 {
        if theta == 0.0 {
            return exp_loglik;
        }
        let xi = shape_at(theta);
        let beta = xi / theta;
        if !(beta > 0.0) || !beta.is_finite() {
            return f64::NEG_INFINITY;
        }
        -(n as f64) * (beta.ln() + xi + 1.0)
    };

    // Search coordinate s: theta * x_max = s for s < 0 and exp(s) - 1 for
    // s >= 0, so both sides are resolved at a data-relative scale.
    let to_theta = |s: f64| {
        if s < 0.0 {
            s / x_max
        } else {
            s.exp_m1() / x_max
        }
    };

    // Lower end where the profiled shape reaches -1.
    let (mut lo, mut hi) = (-1.0 + 1e-15, 0.0);
    if shape_at(to_theta(lo)) < -1.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if shape_at(to_theta(mid)) < -1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo = hi;
    }
    let s_min = lo;
    let s_max = (1e6f64).ln_1p();

    const GRID: usize = 400;
    let grid: Vec<f64> = (0..=GRID)
        .map(|i| s_min + (s_max - s_min) * i as f64 / GRID as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&s| profile(to_theta(s))).collect();
    let best = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);

    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(GRID)]);
    let f = |s: f64| -profile(to_theta(s));
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - golden * (b - a);
    let mut d = a + golden * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-13 * (1.0 + a.abs().max(b.abs())) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - golden * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + golden * (b - a);
            fd = f(d);
        }
    }
    let theta = to_theta(0.5 * (a + b));
    let mut params = if theta == 0.0 {
        exponential
    } else {
        let xi = shape_at(theta);
        GpParams {
            xi,
            beta: xi / theta,
        }
    };
    // theta = 0 is only reached as a limit of the search coordinate.
    if gp_loglik(&params, sample) < exp_loglik {
        params = exponential;
    }
    let loglik = gp_loglik(&params, sample);
    if !loglik.is_finite() {
        return Err(Error::Estimation(format!(
            "GP profile search ended outside the support: {params:?}"
        )));
    }
    Ok(GpFit {
        params,
        loglik,
        n_obs: n,
        xi_fixed_zero: false,
        warnings,
    })
}
