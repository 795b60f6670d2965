//! Yearly-report data: lines of business, per-series snapshots, the long-form
//! report CSV, and the data-quality policy applied before loss construction.
//!
//! A snapshot holds what a company reports for one line of business at the end
//! of calendar year `n`: earned premiums by accident year, cumulative payments
//! `C[i, n-i]` and ultimo predictions for the last `k` accident years.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diagnostics::Warning;
use crate::error::{Error, Result};

/// The five reporting lines of business.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Lob {
    /// Illness and accident.
    IA,
    /// Home.
    H,
    /// Business liability and property.
    BLP,
    /// Motor liability.
    ML,
    /// Motor other.
    MO,
}

impl Lob {
    pub const ALL: [Lob; 5] = [Lob::IA, Lob::H, Lob::BLP, Lob::ML, Lob::MO];

    /// Number of accident years carried in a report for this line.
    pub fn default_horizon(self) -> u32 {
        match self {
            Lob::H | Lob::MO => 3,
            Lob::IA | Lob::BLP => 10,
            Lob::ML => 15,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Lob::IA => "IA",
            Lob::H => "H",
            Lob::BLP => "BLP",
            Lob::ML => "ML",
            Lob::MO => "MO",
        }
    }
}

impl fmt::Display for Lob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Lob {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "IA" => Ok(Lob::IA),
            "H" => Ok(Lob::H),
            "BLP" => Ok(Lob::BLP),
            "ML" => Ok(Lob::ML),
            "MO" => Ok(Lob::MO),
            other => Err(Error::Validation(format!(
                "unknown line of business `{other}`"
            ))),
        }
    }
}

/// A line of business together with the number of accident years its
/// reports cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LobId {
    pub code: Lob,
    pub horizon_k: u32,
}

impl LobId {
    pub fn standard(code: Lob) -> Self {
        Self {
            code,
            horizon_k: code.default_horizon(),
        }
    }

    pub fn with_horizon(code: Lob, horizon_k: u32) -> Result<Self> {
        if horizon_k == 0 {
            return Err(Error::Validation(format!(
                "{code}: horizon must be positive"
            )));
        }
        Ok(Self { code, horizon_k })
    }
}

/// Horizon overrides per line of business.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonTable(pub BTreeMap<Lob, u32>);

impl Default for HorizonTable {
    fn default() -> Self {
        Self(Lob::ALL.iter().map(|&l| (l, l.default_horizon())).collect())
    }
}

impl HorizonTable {
    pub fn lob_id(&self, code: Lob) -> Result<LobId> {
        LobId::with_horizon(
            code,
            self.0.get(&code).copied().unwrap_or(code.default_horizon()),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordType {
    Premium,
    CumPaid,
    Ultimo,
}

impl RecordType {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordType::Premium => "premium",
            RecordType::CumPaid => "cum_paid",
            RecordType::Ultimo => "ultimo",
        }
    }
}

impl FromStr for RecordType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "premium" => Ok(RecordType::Premium),
            "cum_paid" => Ok(RecordType::CumPaid),
            "ultimo" => Ok(RecordType::Ultimo),
            other => Err(Error::Validation(format!("unknown record type `{other}`"))),
        }
    }
}

/// Identifies one (company, line of business) time series.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SeriesKey {
    pub company: String,
    pub lob: Lob,
}

impl SeriesKey {
    pub fn new(company: impl Into<String>, lob: Lob) -> Self {
        Self {
            company: company.into(),
            lob,
        }
    }
}

impl fmt::Display for SeriesKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.company, self.lob)
    }
}

/// What one company reported for one line of business at the end of
/// `report_year`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportSnapshot {
    company: String,
    lob: LobId,
    report_year: i32,
    premiums: BTreeMap<i32, f64>,
    cum_paid: BTreeMap<i32, f64>,
    ultimo: BTreeMap<i32, f64>,
}

impl ReportSnapshot {
    /// Builds a snapshot, checking accident-year completeness, horizon
    /// length, positive premiums and finiteness. Ultimo predictions below
    /// cumulative payments are reported as warnings.
    pub fn new(
        company: impl Into<String>,
        lob: LobId,
        report_year: i32,
        premiums: BTreeMap<i32, f64>,
        cum_paid: BTreeMap<i32, f64>,
        ultimo: BTreeMap<i32, f64>,
    ) -> Result<(Self, Vec<Warning>)> {
        let company = company.into();
        let first = report_year - lob.horizon_k as i32 + 1;
        let ctx = format!("({company}, {}, {report_year})", lob.code);

        for (name, map) in [
            ("premium", &premiums),
            ("cum_paid", &cum_paid),
            ("ultimo", &ultimo),
        ] {
            if let Some((year, v)) = map.iter().find(|(_, v)| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "{ctx}: non-finite {name} value {v} for accident year {year}"
                )));
            }
        }
        if let Some((year, v)) = premiums.iter().find(|(_, v)| **v <= 0.0) {
            return Err(Error::Validation(format!(
                "{ctx}: premium for accident year {year} must be positive, got {v}"
            )));
        }
        for year in first..=report_year {
            if !cum_paid.contains_key(&year) || !ultimo.contains_key(&year) {
                return Err(Error::MissingAccidentYear {
                    company,
                    lob: lob.code,
                    report_year,
                    year,
                });
            }
        }
        for (name, map) in [("cum_paid", &cum_paid), ("ultimo", &ultimo)] {
            if let Some(year) = map.keys().find(|&&y| y < first || y > report_year) {
                return Err(Error::Validation(format!(
                    "{ctx}: {name} accident year {year} outside horizon {first}..={report_year}"
                )));
            }
        }

        let warnings = (first..=report_year)
            .filter(|y| ultimo[y] < cum_paid[y])
            .map(|y| {
                Warning::new(
                    ctx.clone(),
                    format!(
                        "accident year {y}: ultimo {} below cumulative payments {} (negative outstanding)",
                        ultimo[&y], cum_paid[&y]
                    ),
                )
            })
            .collect();

        Ok((
            Self {
                company,
                lob,
                report_year,
                premiums,
                cum_paid,
                ultimo,
            },
            warnings,
        ))
    }

    pub fn company(&self) -> &str {
        &self.company
    }

    pub fn lob(&self) -> LobId {
        self.lob
    }

    pub fn report_year(&self) -> i32 {
        self.report_year
    }

    pub fn series(&self) -> SeriesKey {
        SeriesKey::new(self.company.clone(), self.lob.code)
    }

    pub fn premiums(&self) -> &BTreeMap<i32, f64> {
        &self.premiums
    }

    pub fn cum_paid(&self) -> &BTreeMap<i32, f64> {
        &self.cum_paid
    }

    pub fn ultimo(&self) -> &BTreeMap<i32, f64> {
        &self.ultimo
    }

    /// First accident year in the horizon, `n - k + 1`.
    pub fn first_accident_year(&self) -> i32 {
        self.report_year - self.lob.horizon_k as i32 + 1
    }

    /// Number of value rows this snapshot corresponds to in the report CSV.
    pub fn row_count(&self) -> usize {
        self.premiums.len() + self.cum_paid.len() + self.ultimo.len()
    }

    /// Flattens back to `(record_type, accident_year, value)` rows.
    pub fn rows(&self) -> impl Iterator<Item = (RecordType, i32, f64)> + '_ {
        let tag = |rt: RecordType, m: &'_ BTreeMap<i32, f64>| {
            m.iter().map(move |(&y, &v)| (rt, y, v)).collect::<Vec<_>>()
        };
        tag(RecordType::Premium, &self.premiums)
            .into_iter()
            .chain(tag(RecordType::CumPaid, &self.cum_paid))
            .chain(tag(RecordType::Ultimo, &self.ultimo))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseMode {
    /// The first bad row or group aborts the parse.
    #[default]
    Strict,
    /// Bad rows and invalid groups become rejection records.
    Lenient,
}

/// How to interpret a report CSV.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportSchema {
    pub horizons: HorizonTable,
    pub mode: ParseMode,
}

/// A CSV row that did not make it into a snapshot.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rejection {
    pub line: u64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ParsedReports {
    pub snapshots: Vec<ReportSnapshot>,
    pub rejections: Vec<Rejection>,
    pub warnings: Vec<Warning>,
    /// Non-header rows seen in the input.
    pub rows_read: usize,
}

pub const REPORT_HEADER: [&str; 6] = [
    "company",
    "lob",
    "report_year",
    "record_type",
    "accident_year",
    "value",
];

type GroupKey = (String, Lob, i32);
type GroupRows = BTreeMap<(RecordType, i32), (f64, u64)>;

pub fn parse_report_file(path: &Path, schema: &ReportSchema) -> Result<ParsedReports> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_report_reader(file, schema)
}

pub fn parse_report_str(text: &str, schema: &ReportSchema) -> Result<ParsedReports> {
    parse_report_reader(text.as_bytes(), schema)
}

pub fn parse_report_reader<R: Read>(reader: R, schema: &ReportSchema) -> Result<ParsedReports> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().ne(REPORT_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", REPORT_HEADER.join(",")),
        });
    }

    let strict = schema.mode == ParseMode::Strict;
    let mut out = ParsedReports::default();
    let mut groups: BTreeMap<GroupKey, GroupRows> = BTreeMap::new();

    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        out.rows_read += 1;
        let line = record.position().map_or(0, |p| p.line());
        match parse_row(&record, line) {
            Ok((key, rt, year, value)) => {
                let rows = groups.entry(key.clone()).or_default();
                if let Some((_, first_line)) = rows.get(&(rt, year)) {
                    let err = Error::Validation(format!(
                        "line {line}: duplicate ({}, {year}) for ({}, {}, {}); first seen on line {first_line}",
                        rt.as_str(),
                        key.0,
                        key.1,
                        key.2
                    ));
                    if strict {
                        return Err(err);
                    }
                    out.rejections.push(Rejection {
                        line,
                        reason: err.to_string(),
                    });
                } else {
                    rows.insert((rt, year), (value, line));
                }
            }
            Err(err) => {
                if strict {
                    return Err(err);
                }
                out.rejections.push(Rejection {
                    line,
                    reason: err.to_string(),
                });
            }
        }
    }

    for ((company, lob, report_year), rows) in groups {
        let lob_id = schema.horizons.lob_id(lob)?;
        let mut maps: [BTreeMap<i32, f64>; 3] = Default::default();
        for (&(rt, year), &(value, _)) in &rows {
            let slot = match rt {
                RecordType::Premium => 0,
                RecordType::CumPaid => 1,
                RecordType::Ultimo => 2,
            };
            maps[slot].insert(year, value);
        }
        let [premiums, cum_paid, ultimo] = maps;
        match ReportSnapshot::new(company, lob_id, report_year, premiums, cum_paid, ultimo) {
            Ok((snap, warnings)) => {
                out.warnings.extend(warnings);
                out.snapshots.push(snap);
            }
            Err(err) => {
                if strict {
                    return Err(err);
                }
                let reason = err.to_string();
                out.rejections
                    .extend(rows.values().map(|&(_, line)| Rejection {
                        line,
                        reason: reason.clone(),
                    }));
            }
        }
    }
    out.rejections.sort_by_key(|r| r.line);
    Ok(out)
}

fn parse_row(record: &csv::StringRecord, line: u64) -> Result<(GroupKey, RecordType, i32, f64)> {
    let parse_err = |message: String| Error::Parse { line, message };
    if record.len() != REPORT_HEADER.len() {
        return Err(parse_err(format!(
            "expected {} columns, found {}",
            REPORT_HEADER.len(),
            record.len()
        )));
    }
    let company = record[0].to_string();
    if company.is_empty() {
        return Err(parse_err("empty company".into()));
    }
    let lob: Lob = record[1]
        .parse()
        .map_err(|e: Error| parse_err(e.to_string()))?;
    let report_year: i32 = record[2]
        .parse()
        .map_err(|_| parse_err(format!("bad report_year `{}`", &record[2])))?;
    let rt: RecordType = record[3]
        .parse()
        .map_err(|e: Error| parse_err(e.to_string()))?;
    let accident_year: i32 = record[4]
        .parse()
        .map_err(|_| parse_err(format!("bad accident_year `{}`", &record[4])))?;
    let value: f64 = record[5]
        .parse()
        .map_err(|_| parse_err(format!("bad value `{}`", &record[5])))?;
    Ok(((company, lob, report_year), rt, accident_year, value))
}

/// Writes snapshots back to the long-form report CSV, ordered by
/// (company, lob, report_year, record_type, accident_year).
pub fn write_report_csv(snapshots: &[ReportSnapshot]) -> String {
    let mut sorted: Vec<&ReportSnapshot> = snapshots.iter().collect();
    sorted.sort_by(|a, b| {
        (a.company(), a.lob().code, a.report_year()).cmp(&(
            b.company(),
            b.lob().code,
            b.report_year(),
        ))
    });
    let mut out = String::new();
    out.push_str(&REPORT_HEADER.join(","));
    out.push('\n');
    for s in sorted {
        for (rt, year, value) in s.rows() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.company(),
                s.lob().code,
                s.report_year(),
                rt.as_str(),
                year,
                value
            ));
        }
    }
    out
}

/// Two consecutive reports for the same series, with every accident year the
/// loss construction needs verified present.
#[derive(Clone, Debug)]
pub struct PairedSnapshots<'a> {
    prior: &'a ReportSnapshot,
    next: &'a ReportSnapshot,
    premium_next: f64,
    pub warnings: Vec<Warning>,
}

impl<'a> PairedSnapshots<'a> {
    pub fn prior(&self) -> &'a ReportSnapshot {
        self.prior
    }

    pub fn next(&self) -> &'a ReportSnapshot {
        self.next
    }

    /// Report year `n` of the prior snapshot.
    pub fn n(&self) -> i32 {
        self.prior.report_year
    }

    pub fn accounting_year(&self) -> i32 {
        self.prior.report_year + 1
    }

    pub fn horizon(&self) -> u32 {
        self.prior.lob.horizon_k
    }

    /// Earned premium for the coming accounting year, `V[n+1]`.
    pub fn premium_next(&self) -> f64 {
        self.premium_next
    }
}

/// Pairs the year-`n` and year-`n+1` reports of one series.
///
/// `V[n+1]` is read from the year-`n` report; if absent there it is taken
/// from the year-`n+1` report and a warning is attached.
pub fn validate_pair<'a>(
    s0: &'a ReportSnapshot,
    s1: &'a ReportSnapshot,
) -> Result<PairedSnapshots<'a>> {
    let (n0, n1) = (s0.report_year, s1.report_year);
    if s0.company != s1.company || s0.lob.code != s1.lob.code {
        return Err(Error::Pairing {
            first: n0,
            second: n1,
            reason: format!("series differ: {} vs {}", s0.series(), s1.series()),
        });
    }
    if n1 != n0 + 1 {
        return Err(Error::Pairing {
            first: n0,
            second: n1,
            reason: "report years are not consecutive".into(),
        });
    }
    if s0.lob.horizon_k != s1.lob.horizon_k {
        return Err(Error::Validation(format!(
            "{}: horizon changed from {} to {} between {n0} and {n1}",
            s0.series(),
            s0.lob.horizon_k,
            s1.lob.horizon_k
        )));
    }

    let k = s0.lob.horizon_k as i32;
    let missing = |snap: &ReportSnapshot, year: i32| Error::MissingAccidentYear {
        company: snap.company.clone(),
        lob: snap.lob.code,
        report_year: snap.report_year,
        year,
    };
    for year in (n0 - k + 2)..=n0 {
        if !s0.cum_paid.contains_key(&year) || !s0.ultimo.contains_key(&year) {
            return Err(missing(s0, year));
        }
    }
    for year in (n0 - k + 2)..=(n0 + 1) {
        if !s1.ultimo.contains_key(&year) {
            return Err(missing(s1, year));
        }
    }

    let ctx = format!("{} accounting year {}", s0.series(), n0 + 1);
    let mut warnings = Vec::new();
    let premium_next = match (s0.premiums.get(&(n0 + 1)), s1.premiums.get(&(n0 + 1))) {
        (Some(&v), _) => v,
        (None, Some(&v)) => {
            warnings.push(Warning::new(
                ctx.clone(),
                format!(
                    "V[{}] missing from the {n0} report; using the {n1} report's value",
                    n0 + 1
                ),
            ));
            v
        }
        (None, None) => {
            return Err(Error::Validation(format!(
                "{ctx}: earned premium for accident year {} is in neither report",
                n0 + 1
            )))
        }
    };

    for year in (n0 - k + 2)..=n0 {
        if let (Some(&before), Some(&after)) = (s0.cum_paid.get(&year), s1.cum_paid.get(&year)) {
            if after < before {
                warnings.push(Warning::new(
                    ctx.clone(),
                    format!("accident year {year}: cumulative payments fell from {before} to {after} (restatement?)"),
                ));
            }
        }
    }

    Ok(PairedSnapshots {
        prior: s0,
        next: s1,
        premium_next,
        warnings,
    })
}

/// An explicit set of accounting years to drop, optionally restricted to one
/// company and/or line of business.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct YearExclusion {
    #[serde(default)]
    pub company: Option<String>,
    #[serde(default)]
    pub lob: Option<Lob>,
    pub years: Vec<i32>,
}

impl YearExclusion {
    fn matches(&self, key: &SeriesKey, year: i32) -> bool {
        self.company.as_deref().is_none_or(|c| c == key.company)
            && self.lob.is_none_or(|l| l == key.lob)
            && self.years.contains(&year)
    }
}

/// Which loss records to drop before analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataQualityPolicy {
    /// Drop the first this-many accounting years of every series.
    pub skip_first_accounting_years: u32,
    pub excluded_accounting_years: Vec<YearExclusion>,
    pub excluded_series: BTreeSet<SeriesKey>,
}

impl Default for DataQualityPolicy {
    fn default() -> Self {
        Self {
            skip_first_accounting_years: 2,
            excluded_accounting_years: Vec::new(),
            excluded_series: BTreeSet::new(),
        }
    }
}

impl DataQualityPolicy {
    /// A policy that keeps everything.
    pub fn keep_all() -> Self {
        Self {
            skip_first_accounting_years: 0,
            ..Self::default()
        }
    }

    /// Every company or series the policy names must exist in `present`.
    pub fn validate_against(&self, present: &BTreeSet<SeriesKey>) -> Result<()> {
        for key in &self.excluded_series {
            if !present.contains(key) {
                return Err(Error::Config(format!(
                    "excluded series {key} not present in the data"
                )));
            }
        }
        for rule in &self.excluded_accounting_years {
            let hit = present.iter().any(|k| {
                rule.company.as_deref().is_none_or(|c| c == k.company)
                    && rule.lob.is_none_or(|l| l == k.lob)
            });
            if !hit {
                return Err(Error::Config(format!(
                    "year exclusion for company {:?}, lob {:?} matches no series in the data",
                    rule.company, rule.lob
                )));
            }
        }
        Ok(())
    }

    /// Whether the record for `key` at `year` is dropped. `first_year` is the
    /// first accounting year the series produced.
    pub fn excludes(&self, key: &SeriesKey, year: i32, first_year: i32) -> bool {
        self.excluded_series.contains(key)
            || year < first_year + self.skip_first_accounting_years as i32
            || self
                .excluded_accounting_years
                .iter()
                .any(|r| r.matches(key, year))
    }
}
