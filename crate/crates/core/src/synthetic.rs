//! Deterministic synthetic yearly reports for examples and tests.
//!
//! Each company and line has premiums growing at a fixed rate, ultimate
//! claims drawn around a line-specific loss ratio, a geometric payment
//! pattern and ultimo predictions whose error shrinks as claims are paid.
//! Each line has an accident-year shock shared across companies, and Motor
//! other partly shares the Home shock, so losses correlate across companies
//! and across those two lines.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::report::{HorizonTable, Lob, ReportSnapshot};
use crate::sampling::block_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub companies: Vec<String>,
    pub first_report_year: i32,
    pub last_report_year: i32,
    pub seed: u64,
    pub horizons: HorizonTable,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            companies: ["Folksam", "If", "Lansforsakringar", "Trygg-Hansa"]
                .map(String::from)
                .to_vec(),
            first_report_year: 1998,
            last_report_year: 2011,
            seed: 2015,
            horizons: HorizonTable::default(),
        }
    }
}

struct LineShape {
    loss_ratio: f64,
    volatility: f64,
    /// Share of the remaining ultimate paid each development year.
    payout: f64,
    /// Relative error of the outstanding estimate.
    estimate_error: f64,
    /// Weight of the accident-year shock shared across companies.
    common: f64,
}

fn shape(lob: Lob) -> LineShape {
    let (loss_ratio, volatility, payout, estimate_error, common) = match lob {
        Lob::IA => (0.85, 0.10, 0.25, 0.15, 0.2),
        Lob::H => (0.70, 0.09, 0.75, 0.10, 0.7),
        Lob::BLP => (0.65, 0.18, 0.35, 0.20, 0.2),
        Lob::ML => (0.90, 0.04, 0.15, 0.04, 0.1),
        Lob::MO => (0.65, 0.10, 0.85, 0.10, 0.5),
    };
    LineShape {
        loss_ratio,
        volatility,
        payout,
        estimate_error,
        common,
    }
}

/// Snapshots for every company, line and report year in `spec`.
pub fn synthetic_reports(spec: &SyntheticSpec) -> Result<Vec<ReportSnapshot>> {
    let first_accident =
        spec.first_report_year - spec.horizons.0.values().copied().max().unwrap_or(15) as i32;
    let last_accident = spec.last_report_year + 1;
    let years = (last_accident - first_accident + 1) as usize;

    // Shared accident-year shocks per line.
    let mut common_rng = block_rng(spec.seed, 0);
    let mut shocks: BTreeMap<Lob, Vec<f64>> = Lob::ALL
        .iter()
        .map(|&lob| {
            (
                lob,
                (0..years)
                    .map(|_| common_rng.sample(StandardNormal))
                    .collect(),
            )
        })
        .collect();
    // Motor other partly shares the Home shock.
    let home = shocks[&Lob::H].clone();
    for (mo, h) in shocks.get_mut(&Lob::MO).into_iter().flatten().zip(home) {
        *mo = 0.6 * h + 0.8 * *mo;
    }

    let mut out = Vec::new();
    let mut stream = 1;
    for (ci, company) in spec.companies.iter().enumerate() {
        for lob in Lob::ALL {
            let id = spec.horizons.lob_id(lob)?;
            let k = id.horizon_k as i32;
            let s = shape(lob);
            let mut rng = block_rng(spec.seed, stream);
            stream += 1;
            let base = 1.0 + 0.5 * ci as f64 + 0.25 * lob as usize as f64;

            let mut premium = BTreeMap::new();
            let mut ultimate = BTreeMap::new();
            for (idx, year) in (first_accident..=last_accident).enumerate() {
                let v = base * 1.03f64.powi(idx as i32);
                let z = s.common.sqrt() * shocks[&lob][idx]
                    + (1.0 - s.common).sqrt() * rng.sample::<f64, _>(StandardNormal);
                let c =
                    v * s.loss_ratio * (s.volatility * z - 0.5 * s.volatility * s.volatility).exp();
                premium.insert(year, v);
                ultimate.insert(year, c);
            }

            for n in spec.first_report_year..=spec.last_report_year {
                let first = n - k + 1;
                let prem: BTreeMap<i32, f64> = premium
                    .range(first.min(n - 2)..=n + 1)
                    .map(|(&y, &v)| (y, v))
                    .collect();
                let mut cum_paid = BTreeMap::new();
                let mut ultimo = BTreeMap::new();
                for i in first..=n {
                    let d = n - i;
                    let c = ultimate[&i];
                    let paid = c * (1.0 - (1.0 - s.payout).powi(d + 1));
                    let noise: f64 = rng.sample(StandardNormal);
                    let estimate = paid + (c - paid) * (s.estimate_error * noise).exp();
                    cum_paid.insert(i, paid);
                    ultimo.insert(i, estimate);
                }
                let (snapshot, _) =
                    ReportSnapshot::new(company.clone(), id, n, prem, cum_paid, ultimo)?;
                out.push(snapshot);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::build_loss_panel;
    use crate::report::DataQualityPolicy;

    #[test]
    fn default_panel_has_the_expected_size() {
        let snaps = synthetic_reports(&SyntheticSpec::default()).unwrap();
        assert_eq!(snaps.len(), 4 * 5 * 14);
        let panel = build_loss_panel(&snaps, 3, &DataQualityPolicy::keep_all());
        assert_eq!(panel.len(), 260);
        assert!(panel.skipped.is_empty());
        let panel = build_loss_panel(&snaps, 3, &DataQualityPolicy::default());
        assert_eq!(panel.len(), 220);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = synthetic_reports(&SyntheticSpec::default()).unwrap();
        let b = synthetic_reports(&SyntheticSpec::default()).unwrap();
        assert_eq!(a, b);
    }
}
