use std::collections::BTreeMap;

use super::profile::LiabilityProfile;
use crate::error::{Error, Result};
use crate::report::Lob;
use crate::stats::dist::normal_quantile;

pub const SCR_LEVEL: f64 = 0.995;

/// SCR when every line's loss is an independent zero-mean normal with
/// standard deviation `Y0 * s`: the 99.5% normal quantile of their sum.
pub fn scr_simple_internal(profile: &LiabilityProfile, stdevs: &BTreeMap<Lob, f64>) -> Result<f64> {
    let mut variance = 0.0;
    for (&lob, figures) in profile.lobs() {
        let y0 = figures.y0();
        if y0 == 0.0 {
            continue;
        }
        let s = *stdevs.get(&lob).ok_or_else(|| {
            Error::Config(format!(
                "no standard deviation for {lob} ({} has Y0 = {y0})",
                profile.company()
            ))
        })?;
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::Config(format!(
                "standard deviation for {lob} must be nonnegative, got {s}"
            )));
        }
        variance += (y0 * s).powi(2);
    }
    Ok(normal_quantile(SCR_LEVEL)? * variance.sqrt())
}
