use serde::{Deserialize, Serialize};

use crate::diagnostics::Warning;
use crate::error::{Error, Result};
use crate::stats::LeveneResult;

/// Divisor of the zero-mean variance estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceDivisor {
    /// Maximum likelihood, `sum(u^2) / n`.
    #[default]
    N,
    /// `sum(u^2) / (n - 1)`.
    NMinusOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormalFit {
    pub sigma: f64,
    pub n_obs: usize,
}

pub fn fit_zero_mean_normal(sample: &[f64]) -> Result<NormalFit> {
    fit_zero_mean_normal_with(sample, VarianceDivisor::N)
}

pub fn fit_zero_mean_normal_with(sample: &[f64], divisor: VarianceDivisor) -> Result<NormalFit> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::Domain(format!(
            "need at least two observations, got {n}"
        )));
    }
    if sample.iter().any(|u| !u.is_finite()) {
        return Err(Error::Domain("non-finite observation".into()));
    }
    let ss: f64 = sample.iter().map(|u| u * u).sum();
    if ss == 0.0 {
        return Err(Error::Domain("all observations are zero".into()));
    }
    let denom = match divisor {
        VarianceDivisor::N => n as f64,
        VarianceDivisor::NMinusOne => (n - 1) as f64,
    };
    Ok(NormalFit {
        sigma: (ss / denom).sqrt(),
        n_obs: n,
    })
}

/// Zero-mean fit to the concatenation of `samples`. Pooling presumes equal
/// variances; if a Levene result is supplied and rejects at 5%, a warning is
/// returned alongside the fit.
pub fn fit_pooled_normal<S: AsRef<[f64]>>(
    samples: &[S],
    divisor: VarianceDivisor,
    levene: Option<&LeveneResult>,
) -> Result<(NormalFit, Option<Warning>)> {
    if samples.is_empty() {
        return Err(Error::Domain("no samples to pool".into()));
    }
    for (i, s) in samples.iter().enumerate() {
        let s = s.as_ref();
        if s.is_empty() || s.iter().all(|&u| u == 0.0) {
            return Err(Error::Domain(format!("sample {i} is degenerate")));
        }
    }
    let pooled: Vec<f64> = samples
        .iter()
        .flat_map(|s| s.as_ref().iter().copied())
        .collect();
    let fit = fit_zero_mean_normal_with(&pooled, divisor)?;
    let warning = levene.filter(|l| l.p_value < 0.05).map(|l| {
        Warning::new(
            "pooled normal fit",
            format!(
                "pooling despite unequal variances (Levene W = {:.3}, p = {:.4})",
                l.w, l.p_value
            ),
        )
    });
    Ok((fit, warning))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_examples() {
        assert_eq!(fit_zero_mean_normal(&[1.0, -1.0]).unwrap().sigma, 1.0);
        let s = fit_zero_mean_normal(&[0.1, 0.2, -0.3]).unwrap().sigma;
        assert!((s - (0.14f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s - 0.2160).abs() < 1e-4);
        let s = fit_zero_mean_normal_with(&[1.0, -1.0], VarianceDivisor::NMinusOne)
            .unwrap()
            .sigma;
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_samples() {
        assert!(fit_zero_mean_normal(&[0.0, 0.0]).is_err());
        assert!(fit_zero_mean_normal(&[1.0]).is_err());
        assert!(fit_pooled_normal::<Vec<f64>>(&[], VarianceDivisor::N, None).is_err());
    }

    #[test]
    fn pooling() {
        let a = [0.3, -0.1, 0.25, -0.4];
        let single = fit_zero_mean_normal(&a).unwrap().sigma;
        let (two, w) = fit_pooled_normal(&[a, a], VarianceDivisor::N, None).unwrap();
        assert!((two.sigma - single).abs() < 1e-15);
        assert!(w.is_none());
        let (five, _) = fit_pooled_normal(&[a; 5], VarianceDivisor::N, None).unwrap();
        assert!((five.sigma - single).abs() < 1e-15);
        assert_eq!(five.n_obs, 20);

        let (fit, _) = fit_pooled_normal(
            &[vec![1.0, -1.0], vec![2.0, -2.0]],
            VarianceDivisor::N,
            None,
        )
        .unwrap();
        assert!((fit.sigma - 2.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn failed_levene_warns() {
        let levene = LeveneResult {
            w: 4.71,
            df1: 3,
            df2: 40,
            p_value: 0.0066,
        };
        let (_, w) = fit_pooled_normal(
            &[vec![1.0, -1.0], vec![2.0, -2.0]],
            VarianceDivisor::N,
            Some(&levene),
        )
        .unwrap();
        assert!(w.is_some());
    }
}
