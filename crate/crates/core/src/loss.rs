//! One-year liability valuations and normalized losses.
//!
//! For accounting year `n+1` the opening valuation `Y0 = R0 + P0` splits into
//! outstanding claims already incurred (`R0`) and the expected cost of claims
//! incurring during the year (`P0 = V[n+1] * loss_ratio`). The closing
//! valuation `Y1 = R1 + P1` revalues the same cash flows with the year-`n+1`
//! report. The normalized loss is `U = (Y1 - Y0) / Y0`.
//!
//! No discounting is applied.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::Warning;
use crate::error::{Error, Result};
use crate::report::{
    validate_pair, DataQualityPolicy, Lob, PairedSnapshots, ReportSnapshot, SeriesKey,
};

/// Loss-ratio window used when none is configured.
pub const DEFAULT_LOSS_RATIO_YEARS: u32 = 3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossRecord {
    pub company: String,
    pub lob: Lob,
    pub accounting_year: i32,
    pub r0: f64,
    pub p0: f64,
    pub y0: f64,
    pub r1: f64,
    pub p1: f64,
    pub y1: f64,
    pub loss_ratio: f64,
    pub u: f64,
}

impl LossRecord {
    pub fn series(&self) -> SeriesKey {
        SeriesKey::new(self.company.clone(), self.lob)
    }
}

/// Outstanding claims at the start of the year from accident years
/// `n-k+2..=n`: the sum of ultimo minus paid, both from the year-`n` report.
pub fn compute_r0(pair: &PairedSnapshots<'_>) -> Result<f64> {
    outstanding(pair, pair.prior())
}

/// Ultimo over earned premium for accident years `n-m+1..=n`.
pub fn compute_loss_ratio(pair: &PairedSnapshots<'_>, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::Validation(
            "loss-ratio window must be at least one year".into(),
        ));
    }
    let s0 = pair.prior();
    let n = pair.n();
    let mut claims = 0.0;
    let mut premium = 0.0;
    for year in (n - m as i32 + 1)..=n {
        let (Some(c), Some(v)) = (s0.ultimo().get(&year), s0.premiums().get(&year)) else {
            return Err(Error::Validation(format!(
                "{} report {n}: loss-ratio window of {m} years needs ultimo and premium for accident year {year}",
                s0.series()
            )));
        };
        claims += c;
        premium += v;
    }
    if premium <= 0.0 {
        return Err(Error::Domain(format!(
            "{} report {n}: premium sum {premium} over the loss-ratio window is not positive",
            s0.series()
        )));
    }
    Ok(claims / premium)
}

/// Expected cost of claims incurring during the coming year.
pub fn compute_p0(pair: &PairedSnapshots<'_>, m: u32) -> Result<(f64, f64)> {
    let ratio = compute_loss_ratio(pair, m)?;
    Ok((pair.premium_next() * ratio, ratio))
}

/// Closing valuations: the incurred block revalued with the year-`n+1`
/// ultimos (paid amounts still from year `n`), and the new accident year's
/// ultimo.
pub fn compute_r1_p1(pair: &PairedSnapshots<'_>) -> Result<(f64, f64)> {
    let r1 = outstanding(pair, pair.next())?;
    let next_year = pair.accounting_year();
    let p1 = *pair
        .next()
        .ultimo()
        .get(&next_year)
        .ok_or_else(|| Error::MissingAccidentYear {
            company: pair.next().company().to_string(),
            lob: pair.next().lob().code,
            report_year: pair.next().report_year(),
            year: next_year,
        })?;
    Ok((r1, p1))
}

fn outstanding(pair: &PairedSnapshots<'_>, ultimo_source: &ReportSnapshot) -> Result<f64> {
    let s0 = pair.prior();
    let n = pair.n();
    let k = pair.horizon() as i32;
    ((n - k + 2)..=n)
        .map(|year| {
            let missing = |snap: &ReportSnapshot| Error::MissingAccidentYear {
                company: snap.company().to_string(),
                lob: snap.lob().code,
                report_year: snap.report_year(),
                year,
            };
            let paid = s0.cum_paid().get(&year).ok_or_else(|| missing(s0))?;
            let ult = ultimo_source
                .ultimo()
                .get(&year)
                .ok_or_else(|| missing(ultimo_source))?;
            Ok(ult - paid)
        })
        .sum()
}

/// Assembles the full record for one pair. A negative opening valuation is
/// reported through `warnings`.
pub fn compute_loss(
    pair: &PairedSnapshots<'_>,
    m: u32,
    warnings: &mut Vec<Warning>,
) -> Result<LossRecord> {
    let ctx = || {
        format!(
            "{} accounting year {}",
            pair.prior().series(),
            pair.accounting_year()
        )
    };
    let r0 = compute_r0(pair)?;
    let (p0, loss_ratio) = compute_p0(pair, m)?;
    let (r1, p1) = compute_r1_p1(pair)?;
    let y0 = r0 + p0;
    let y1 = r1 + p1;
    if y0 == 0.0 {
        return Err(Error::Domain(format!(
            "{}: opening valuation Y0 is zero",
            ctx()
        )));
    }
    if y0 < 0.0 {
        warnings.push(Warning::new(
            ctx(),
            format!("negative opening valuation Y0 = {y0}; loss sign inverted"),
        ));
    }
    Ok(LossRecord {
        company: pair.prior().company().to_string(),
        lob: pair.prior().lob().code,
        accounting_year: pair.accounting_year(),
        r0,
        p0,
        y0,
        r1,
        p1,
        y1,
        loss_ratio,
        u: (y1 - y0) / y0,
    })
}

/// An accounting year for which no record could be built.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedPair {
    pub company: String,
    pub lob: Lob,
    pub accounting_year: i32,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PanelMetadata {
    pub loss_ratio_years: u32,
    pub policy: DataQualityPolicy,
}

/// Normalized losses indexed by (company, lob, accounting year).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossPanel {
    records: Vec<LossRecord>,
    pub metadata: PanelMetadata,
    pub skipped: Vec<SkippedPair>,
    pub excluded: Vec<(SeriesKey, i32)>,
    pub warnings: Vec<Warning>,
}

impl LossPanel {
    pub fn records(&self) -> &[LossRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn get(&self, company: &str, lob: Lob, year: i32) -> Option<&LossRecord> {
        self.records
            .binary_search_by(|r| {
                (r.company.as_str(), r.lob, r.accounting_year).cmp(&(company, lob, year))
            })
            .ok()
            .map(|i| &self.records[i])
    }

    pub fn companies(&self) -> BTreeSet<String> {
        self.records.iter().map(|r| r.company.clone()).collect()
    }

    pub fn series(&self) -> BTreeSet<SeriesKey> {
        self.records.iter().map(LossRecord::series).collect()
    }

    /// Normalized losses of one series keyed by accounting year.
    pub fn losses(&self, company: &str, lob: Lob) -> BTreeMap<i32, f64> {
        self.records
            .iter()
            .filter(|r| r.company == company && r.lob == lob)
            .map(|r| (r.accounting_year, r.u))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("company,lob,accounting_year,R0,P0,Y0,R1,P1,Y1,loss_ratio,U\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                r.company,
                r.lob,
                r.accounting_year,
                r.r0,
                r.p0,
                r.y0,
                r.r1,
                r.p1,
                r.y1,
                r.loss_ratio,
                r.u
            ));
        }
        out
    }
}

/// Builds one record per consecutive report pair of every series, then drops
/// what `policy` excludes. Pairs that fail are recorded in `skipped`; nothing
/// is interpolated.
pub fn build_loss_panel(
    snapshots: &[ReportSnapshot],
    m: u32,
    policy: &DataQualityPolicy,
) -> LossPanel {
    let mut by_series: BTreeMap<SeriesKey, Vec<&ReportSnapshot>> = BTreeMap::new();
    for s in snapshots {
        by_series.entry(s.series()).or_default().push(s);
    }

    let per_series: Vec<_> = by_series
        .into_par_iter()
        .map(|(key, mut snaps)| {
            snaps.sort_by_key(|s| s.report_year());
            let mut records = Vec::new();
            let mut skipped = Vec::new();
            let mut warnings = Vec::new();
            for w in snaps.windows(2) {
                let (s0, s1) = (w[0], w[1]);
                let year = s0.report_year() + 1;
                if s1.report_year() != year {
                    skipped.push(SkippedPair {
                        company: key.company.clone(),
                        lob: key.lob,
                        accounting_year: year,
                        reason: format!("no report for {year}"),
                    });
                    continue;
                }
                let outcome = validate_pair(s0, s1).and_then(|pair| {
                    warnings.extend(pair.warnings.iter().cloned());
                    compute_loss(&pair, m, &mut warnings)
                });
                match outcome {
                    Ok(record) => records.push(record),
                    Err(e) => skipped.push(SkippedPair {
                        company: key.company.clone(),
                        lob: key.lob,
                        accounting_year: year,
                        reason: e.to_string(),
                    }),
                }
            }
            // The first accounting year is relative to the first report, so a
            // skipped opening pair still counts towards `skip_first`.
            let first_year = snaps
                .first()
                .map(|s| s.report_year() + 1)
                .unwrap_or_default();
            let (kept, dropped): (Vec<_>, Vec<_>) = records
                .into_iter()
                .partition(|r| !policy.excludes(&key, r.accounting_year, first_year));
            let excluded = dropped
                .into_iter()
                .map(|r| (key.clone(), r.accounting_year))
                .collect::<Vec<_>>();
            (kept, skipped, excluded, warnings)
        })
        .collect();

    let mut panel = LossPanel {
        records: Vec::new(),
        metadata: PanelMetadata {
            loss_ratio_years: m,
            policy: policy.clone(),
        },
        skipped: Vec::new(),
        excluded: Vec::new(),
        warnings: Vec::new(),
    };
    for (kept, skipped, excluded, warnings) in per_series {
        panel.records.extend(kept);
        panel.skipped.extend(skipped);
        panel.excluded.extend(excluded);
        panel.warnings.extend(warnings);
    }
    panel.records.sort_by(|a, b| {
        (&a.company, a.lob, a.accounting_year).cmp(&(&b.company, b.lob, b.accounting_year))
    });
    panel
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::report::LobId;

    /// Builds a snapshot with horizon `k` from explicit accident-year vectors,
    /// oldest first, ending at `n`.
    pub(crate) fn snapshot(
        n: i32,
        k: u32,
        premiums: &[(i32, f64)],
        cum_paid: &[f64],
        ultimo: &[f64],
    ) -> ReportSnapshot {
        assert_eq!(cum_paid.len(), k as usize);
        assert_eq!(ultimo.len(), k as usize);
        let first = n - k as i32 + 1;
        let years = first..=n;
        ReportSnapshot::new(
            "Acme",
            LobId::with_horizon(Lob::H, k).unwrap(),
            n,
            premiums.iter().copied().collect(),
            years.clone().zip(cum_paid.iter().copied()).collect(),
            years.zip(ultimo.iter().copied()).collect(),
        )
        .unwrap()
        .0
    }

    fn flat_premiums(n: i32, v: f64) -> Vec<(i32, f64)> {
        ((n - 2)..=(n + 1)).map(|y| (y, v)).collect()
    }

    #[test]
    fn r0_hand_example() {
        // k = 3: accident years n-1 and n contribute (15-10) + (20-5).
        let s0 = snapshot(
            2010,
            3,
            &flat_premiums(2010, 10.0),
            &[1.0, 10.0, 5.0],
            &[1.0, 15.0, 20.0],
        );
        let s1 = snapshot(
            2011,
            3,
            &flat_premiums(2011, 10.0),
            &[12.0, 8.0, 2.0],
            &[16.0, 19.0, 50.0],
        );
        let pair = validate_pair(&s0, &s1).unwrap();
        assert_eq!(compute_r0(&pair).unwrap(), 20.0);
        let (r1, p1) = compute_r1_p1(&pair).unwrap();
        assert_eq!(r1, 20.0);
        assert_eq!(p1, 50.0);
    }

    #[test]
    fn r0_zero_when_fully_paid() {
        let s0 = snapshot(
            2010,
            3,
            &flat_premiums(2010, 10.0),
            &[3.0, 4.0, 5.0],
            &[3.0, 4.0, 5.0],
        );
        let s1 = snapshot(
            2011,
            3,
            &flat_premiums(2011, 10.0),
            &[4.0, 5.0, 1.0],
            &[4.0, 5.0, 6.0],
        );
        let pair = validate_pair(&s0, &s1).unwrap();
        assert_eq!(compute_r0(&pair).unwrap(), 0.0);
        // Unchanged ultimos: no revaluation.
        assert_eq!(compute_r1_p1(&pair).unwrap().0, compute_r0(&pair).unwrap());
    }

    #[test]
    fn r0_single_term_can_be_negative() {
        let s0 = snapshot(
            2010,
            2,
            &flat_premiums(2010, 10.0),
            &[1.0, 7.5],
            &[1.0, 7.0],
        );
        let s1 = snapshot(
            2011,
            2,
            &flat_premiums(2011, 10.0),
            &[7.5, 1.0],
            &[7.0, 3.0],
        );
        let pair = validate_pair(&s0, &s1).unwrap();
        assert_eq!(compute_r0(&pair).unwrap(), -0.5);
    }

    #[test]
    fn loss_ratio_examples() {
        let prem = [(2008, 10.0), (2009, 10.0), (2010, 10.0), (2011, 100.0)];
        let s0 = snapshot(2010, 3, &prem, &[5.0, 5.0, 5.0], &[10.0, 12.0, 14.0]);
        let s1 = snapshot(
            2011,
            3,
            &flat_premiums(2011, 10.0),
            &[6.0, 6.0, 6.0],
            &[12.0, 14.0, 50.0],
        );
        let pair = validate_pair(&s0, &s1).unwrap();
        assert!((compute_loss_ratio(&pair, 3).unwrap() - 1.2).abs() < 1e-15);
        assert!((compute_loss_ratio(&pair, 1).unwrap() - 1.4).abs() < 1e-15);
        let (p0, ratio) = compute_p0(&pair, 3).unwrap();
        assert!((ratio - 1.2).abs() < 1e-15);
        assert!((p0 - 120.0).abs() < 1e-12);
        assert!(matches!(
            compute_loss_ratio(&pair, 4),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            compute_loss_ratio(&pair, 0),
            Err(Error::Validation(_))
        ));

        let s0 = snapshot(2010, 3, &prem, &[5.0, 5.0, 5.0], &[10.0, 12.0, 8.0]);
        let pair = validate_pair(&s0, &s1).unwrap();
        assert!((compute_loss_ratio(&pair, 1).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn identity_loss_ratio() {
        let prem = [(2008, 4.0), (2009, 5.0), (2010, 6.0), (2011, 100.0)];
        let s0 = snapshot(2010, 3, &prem, &[1.0, 1.0, 1.0], &[4.0, 5.0, 6.0]);
        let s1 = snapshot(
            2011,
            3,
            &flat_premiums(2011, 1.0),
            &[1.0, 1.0, 1.0],
            &[4.0, 5.0, 6.0],
        );
        let pair = validate_pair(&s0, &s1).unwrap();
        assert_eq!(compute_loss_ratio(&pair, 3).unwrap(), 1.0);
        assert_eq!(compute_p0(&pair, 3).unwrap().0, 100.0);
    }

    #[test]
    fn loss_sign_and_size() {
        // Y0 = R0 + P0 = (2 + 3) + 5 = 10.
        let prem = [(2008, 5.0), (2009, 5.0), (2010, 5.0), (2011, 5.0)];
        let s0 = snapshot(2010, 3, &prem, &[0.0, 3.0, 2.0], &[5.0, 5.0, 5.0]);
        let mut warnings = Vec::new();
        for (p1, expected) in [(7.0, 0.2), (5.0, 0.0), (2.0, -0.3)] {
            let s1 = snapshot(
                2011,
                3,
                &flat_premiums(2011, 5.0),
                &[4.0, 4.0, 1.0],
                &[5.0, 5.0, p1],
            );
            let pair = validate_pair(&s0, &s1).unwrap();
            let rec = compute_loss(&pair, 3, &mut warnings).unwrap();
            assert_eq!(rec.y0, 10.0);
            assert!((rec.u - expected).abs() < 1e-15, "{} vs {expected}", rec.u);
            assert_eq!(rec.y0, rec.r0 + rec.p0);
            assert_eq!(rec.y1, rec.r1 + rec.p1);
        }
        assert!(warnings.is_empty());
    }

    #[test]
    fn zero_opening_valuation_is_a_domain_error() {
        // R0 = 0 and the loss ratio is 0 -> Y0 = 0.
        let prem = [(2008, 5.0), (2009, 5.0), (2010, 5.0), (2011, 5.0)];
        let s0 = snapshot(2010, 3, &prem, &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]);
        let s1 = snapshot(
            2011,
            3,
            &flat_premiums(2011, 5.0),
            &[0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0],
        );
        let pair = validate_pair(&s0, &s1).unwrap();
        assert!(matches!(
            compute_loss(&pair, 3, &mut Vec::new()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn missing_new_accident_year_cannot_be_paired() {
        // A year-(n+1) snapshot without the accident year n+1 fails validation
        // before it can be paired.
        let err = ReportSnapshot::new(
            "Acme",
            LobId::standard(Lob::H),
            2011,
            BTreeMap::new(),
            [(2009, 1.0), (2010, 1.0), (2011, 1.0)].into(),
            [(2009, 1.0), (2010, 1.0)].into(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingAccidentYear { year: 2011, .. }));
    }

    #[test]
    fn empty_snapshot_list_gives_empty_panel() {
        let panel = build_loss_panel(&[], 3, &DataQualityPolicy::default());
        assert!(panel.is_empty());
        assert!(panel.skipped.is_empty());
    }
}
