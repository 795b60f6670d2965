use serde::{Deserialize, Serialize};

use super::{dist, median};
use crate::error::{Error, Result};

/// Centre used for the absolute deviations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// Brown-Forsythe: deviations from each group's median.
    #[default]
    Median,
    /// Levene's original: deviations from each group's mean.
    Mean,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LeveneResult {
    pub w: f64,
    pub df1: u32,
    pub df2: u32,
    pub p_value: f64,
}

/// Equality-of-variances test on `g` groups of common size `n`, with
/// median-centred absolute deviations. `p_value = P(F(g-1, g(n-1)) > W)`.
pub fn levene_test<S: AsRef<[f64]>>(groups: &[S]) -> Result<LeveneResult> {
    levene_test_with(groups, Centering::Median)
}

pub fn levene_test_with<S: AsRef<[f64]>>(
    groups: &[S],
    centering: Centering,
) -> Result<LeveneResult> {
    let g = groups.len();
    if g < 2 {
        return Err(Error::Unsupported(format!(
            "need at least two groups, got {g}"
        )));
    }
    let n = groups[0].as_ref().len();
    if groups.iter().any(|s| s.as_ref().len() != n) {
        let sizes: Vec<usize> = groups.iter().map(|s| s.as_ref().len()).collect();
        return Err(Error::Unsupported(format!(
            "groups must share one size, got {sizes:?}"
        )));
    }
    if n < 2 {
        return Err(Error::Unsupported(format!(
            "need at least two observations per group, got {n}"
        )));
    }
    if groups
        .iter()
        .flat_map(|s| s.as_ref())
        .any(|v| !v.is_finite())
    {
        return Err(Error::Domain("non-finite observation".into()));
    }

    let z: Vec<Vec<f64>> = groups
        .iter()
        .map(|s| {
            let s = s.as_ref();
            let centre = match centering {
                Centering::Median => median(s),
                Centering::Mean => s.iter().sum::<f64>() / n as f64,
            };
            s.iter().map(|u| (u - centre).abs()).collect()
        })
        .collect();

    let group_means: Vec<f64> = z
        .iter()
        .map(|zi| zi.iter().sum::<f64>() / n as f64)
        .collect();
    let grand_mean = group_means.iter().sum::<f64>() / g as f64;
    let between: f64 = group_means.iter().map(|m| (m - grand_mean).powi(2)).sum();
    let within: f64 = z
        .iter()
        .zip(&group_means)
        .map(|(zi, m)| zi.iter().map(|v| (v - m).powi(2)).sum::<f64>())
        .sum();
    if within == 0.0 {
        return Err(Error::Degenerate(
            "absolute deviations are constant within every group".into(),
        ));
    }

    let (gf, nf) = (g as f64, n as f64);
    let w = gf * (nf - 1.0) / (gf - 1.0) * nf * between / within;
    let df1 = (g - 1) as u32;
    let df2 = (g * (n - 1)) as u32;
    let p_value = dist::f_sf(w, df1 as f64, df2 as f64)?;
    Ok(LeveneResult {
        w,
        df1,
        df2,
        p_value,
    })
}
