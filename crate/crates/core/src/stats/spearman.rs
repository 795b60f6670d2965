use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling::{block_rng, blocks};

pub const DEFAULT_PERMUTATIONS: usize = 200_000;
pub const DEFAULT_PERMUTATION_SEED: u64 = 20_150_101;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub n_obs: usize,
}

/// Ranks starting at 1, ties sharing the average of the ranks they span.
pub(crate) fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho: the Pearson correlation of the average ranks.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "sample lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Domain(
            "need at least two paired observations".into(),
        ));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite observation".into()));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (da, db) = (a - mean, b - mean);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("constant sample has no ranking".into()));
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(CorrelationResult {
        rho,
        n_obs: x.len(),
    })
}

/// Spearman's rho of a bivariate normal pair with linear correlation
/// `rho_linear`.
pub fn spearman_from_linear(rho_linear: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&rho_linear) {
        return Err(Error::Domain(format!(
            "correlation {rho_linear} outside [-1, 1]"
        )));
    }
    Ok(6.0 / std::f64::consts::PI * (rho_linear / 2.0).asin())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalValue {
    /// Reject independence when `|rho| >= threshold`.
    pub threshold: f64,
    /// Estimated `P(|rho| >= threshold)` under independence.
    pub tail_probability: f64,
    pub n: usize,
    pub n_permutations: usize,
    pub seed: u64,
}

/// Monte Carlo critical value of `|rho|` for two independent samples of size
/// `n`: the smallest attainable `c` with estimated `P(|rho| >= c) <= level`.
///
/// Under independence rho is `1 - 6 S / (n^3 - n)` with `S` the sum of squared
/// rank differences of a uniform random permutation, so the sampler only
/// tallies `S`. Tallies are integer counts merged by addition, making the
/// result independent of thread count.
pub fn spearman_critical_value(
    n: usize,
    level: f64,
    n_permutations: usize,
    seed: u64,
) -> Result<CriticalValue> {
    if n < 3 {
        return Err(Error::Domain(format!("need n >= 3, got {n}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!(
            "level must lie in (0, 1), got {level}"
        )));
    }
    if n_permutations == 0 {
        return Err(Error::Domain("need at least one permutation".into()));
    }

    let max_s = (n * n * n - n) / 3;
    let counts = blocks(n_permutations)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(block, draws)| {
            let mut rng = block_rng(seed, block);
            let mut perm: Vec<usize> = (0..n).collect();
            let mut tally = vec![0u64; max_s + 1];
            for _ in 0..draws {
                perm.shuffle(&mut rng);
                let s: usize = perm
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| i.abs_diff(p).pow(2))
                    .sum();
                tally[s] += 1;
            }
            tally
        })
        .reduce(
            || vec![0u64; max_s + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    // |rho| * D = |D - 6 S| with D = n^3 - n, kept in integers so equal
    // statistics compare equal.
    let d = (n * n * n - n) as i64;
    let mut by_abs: Vec<(i64, u64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| ((d - 6 * s as i64).abs(), c))
        .collect();
    by_abs.sort_unstable_by_key(|&(key, _)| std::cmp::Reverse(key));

    let total = n_permutations as f64;
    let mut at_or_above = 0u64;
    let mut best: Option<(i64, f64)> = None;
    let mut i = 0;
    while i < by_abs.len() {
        let key = by_abs[i].0;
        while i < by_abs.len() && by_abs[i].0 == key {
            at_or_above += by_abs[i].1;
            i += 1;
        }
        let tail = at_or_above as f64 / total;
        if tail > level {
            break;
        }
        best = Some((key, tail));
    }
    let (key, tail_probability) = best.ok_or_else(|| {
        Error::Domain(format!(
            "no attainable threshold has tail probability <= {level} at n = {n}"
        ))
    })?;
    Ok(CriticalValue {
        threshold: key as f64 / d as f64,
        tail_probability,
        n,
        n_permutations,
        seed,
    })
}
