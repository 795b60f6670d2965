//! Pooling and dependence diagnostics: the median-centred Levene test,
//! Spearman rank correlation with a permutation critical value, and the
//! distribution functions these need.

pub mod dist;
mod levene;
mod spearman;

pub use levene::{levene_test, levene_test_with, Centering, LeveneResult};
pub use spearman::{
    spearman_critical_value, spearman_from_linear, spearman_rho, CorrelationResult, CriticalValue,
    DEFAULT_PERMUTATIONS, DEFAULT_PERMUTATION_SEED,
};

/// Median with the even-length convention of averaging the two central order
/// statistics. `values` must be non-empty.
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn median_conventions() {
        assert_eq!(super::median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(super::median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }
}
