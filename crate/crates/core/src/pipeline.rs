//! Config-driven orchestration behind the command-line tool. Each command
//! returns a serializable document; writing files is left to the caller.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::diagnostics::Warning;
use crate::error::{Error, Result};
use crate::fitting::structured::{Observation, COMPANIES, DIM};
use crate::fitting::{
    fit_gp, fit_pooled_normal, fit_structured_mvn_with, fit_zero_mean_normal_with, lr_test,
    GpParams, LrtResult, StructuredConstraints, StructuredFit,
};
use crate::loss::{build_loss_panel, LossPanel};
use crate::report::{parse_report_file, Lob, Rejection, SeriesKey};
use crate::risk::{
    component_sigma_table, scr_mixed_model_with, scr_simple_internal, LiabilityProfile, LobFigures,
    ModelParams, QuantileEngine,
};
use crate::standard_formula::{benchmark_sigma_swedish, scr_standard_total, QUANTILE_MULTIPLIER};
use crate::stats::{
    levene_test_with, spearman_critical_value, spearman_rho, CriticalValue, LeveneResult,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossesReport {
    pub panel: LossPanel,
    pub rows_read: usize,
    pub rejections: Vec<Rejection>,
    pub warnings: Vec<Warning>,
}

/// Reads the configured report file and builds the loss panel.
pub fn cmd_losses(config: &PipelineConfig) -> Result<LossesReport> {
    config.validate()?;
    let path = config
        .input
        .reports
        .as_ref()
        .ok_or_else(|| Error::Config("input.reports is not set".into()))?;
    let parsed = parse_report_file(path, &config.input.schema())?;
    let present: BTreeSet<SeriesKey> = parsed.snapshots.iter().map(|s| s.series()).collect();
    config.losses.policy.validate_against(&present)?;
    let panel = build_loss_panel(
        &parsed.snapshots,
        config.losses.loss_ratio_years,
        &config.losses.policy,
    );
    let mut warnings = parsed.warnings;
    warnings.extend(panel.warnings.iter().cloned());
    Ok(LossesReport {
        panel,
        rows_read: parsed.rows_read,
        rejections: parsed.rejections,
        warnings,
    })
}

/// Companies named by the pooling configuration must exist in the panel.
fn check_pooling_companies(config: &PipelineConfig, panel: &LossPanel) -> Result<()> {
    let present = panel.companies();
    let named = config
        .pooling
        .groups
        .values()
        .flat_map(|g| g.excluded_companies.iter())
        .chain(&config.pooling.joint_companies);
    for company in named {
        if !present.contains(company) {
            return Err(Error::Config(format!(
                "pooling configuration names {company}, which is not in the data"
            )));
        }
    }
    Ok(())
}

/// Losses of `companies` on the accounting years all of them share.
fn aligned(panel: &LossPanel, lob: Lob, companies: &[String]) -> (Vec<i32>, Vec<Vec<f64>>) {
    let series: Vec<BTreeMap<i32, f64>> = companies.iter().map(|c| panel.losses(c, lob)).collect();
    let years: Vec<i32> = match series.split_first() {
        Some((first, rest)) => first
            .keys()
            .copied()
            .filter(|y| rest.iter().all(|s| s.contains_key(y)))
            .collect(),
        None => Vec::new(),
    };
    let values = series
        .iter()
        .map(|s| years.iter().map(|y| s[y]).collect())
        .collect();
    (years, values)
}

fn companies_with(panel: &LossPanel, lob: Lob) -> Vec<String> {
    panel
        .companies()
        .into_iter()
        .filter(|c| !panel.losses(c, lob).is_empty())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeveneRow {
    pub lob: Lob,
    /// `all` or `pooled` (configured exclusions removed).
    pub variant: String,
    pub companies: Vec<String>,
    pub years: Vec<i32>,
    pub result: Option<LeveneResult>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpearmanRow {
    /// `lob` for company pairs within a line, `company` for line pairs
    /// within a company.
    pub scope: String,
    pub within: String,
    pub first: String,
    pub second: String,
    pub n: usize,
    pub rho: Option<f64>,
    pub significant: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestsReport {
    pub levene: Vec<LeveneRow>,
    pub spearman: Vec<SpearmanRow>,
    pub critical_values: Vec<CriticalValue>,
    pub warnings: Vec<Warning>,
}

pub fn cmd_tests(config: &PipelineConfig) -> Result<TestsReport> {
    let losses = cmd_losses(config)?;
    tests_on_panel(config, &losses.panel)
}

/// Variance-equality and rank-correlation tests on an existing panel.
pub fn tests_on_panel(config: &PipelineConfig, panel: &LossPanel) -> Result<TestsReport> {
    check_pooling_companies(config, panel)?;
    let mut warnings = Vec::new();
    let mut levene = Vec::new();
    for lob in Lob::ALL {
        let all = companies_with(panel, lob);
        let pooled = config.pooling.members(lob, &all);
        let mut variants = vec![("all", all.clone())];
        if pooled != all {
            variants.push(("pooled", pooled));
        }
        for (variant, companies) in variants {
            let (years, groups) = aligned(panel, lob, &companies);
            let (result, error) = match levene_test_with(&groups, config.tests.centering) {
                Ok(r) => (Some(r), None),
                Err(e) => {
                    warnings.push(Warning::new(
                        format!("Levene {lob} {variant}"),
                        e.to_string(),
                    ));
                    (None, Some(e.to_string()))
                }
            };
            levene.push(LeveneRow {
                lob,
                variant: variant.to_string(),
                companies,
                years,
                result,
                error,
            });
        }
    }

    let mut spearman = Vec::new();
    for lob in Lob::ALL {
        let companies = companies_with(panel, lob);
        for (i, a) in companies.iter().enumerate() {
            for b in &companies[i + 1..] {
                let (_, v) = aligned(panel, lob, &[a.clone(), b.clone()]);
                spearman.push(rank_row("lob", lob.as_str(), a, b, &v[0], &v[1]));
            }
        }
    }
    for company in panel.companies() {
        let lobs: Vec<Lob> = Lob::ALL
            .into_iter()
            .filter(|&l| !panel.losses(&company, l).is_empty())
            .collect();
        for (i, &a) in lobs.iter().enumerate() {
            for &b in &lobs[i + 1..] {
                let (sa, sb) = (panel.losses(&company, a), panel.losses(&company, b));
                let years: Vec<i32> = sa.keys().filter(|y| sb.contains_key(y)).copied().collect();
                let x: Vec<f64> = years.iter().map(|y| sa[y]).collect();
                let y: Vec<f64> = years.iter().map(|y| sb[y]).collect();
                spearman.push(rank_row(
                    "company",
                    &company,
                    a.as_str(),
                    b.as_str(),
                    &x,
                    &y,
                ));
            }
        }
    }

    let sizes: BTreeSet<usize> = spearman.iter().map(|r| r.n).filter(|&n| n >= 3).collect();
    let mut critical_values = Vec::new();
    for n in sizes {
        match spearman_critical_value(
            n,
            config.tests.spearman_level,
            config.tests.n_permutations,
            config.seed,
        ) {
            Ok(c) => critical_values.push(c),
            Err(e) => warnings.push(Warning::new(
                format!("Spearman critical value n = {n}"),
                e.to_string(),
            )),
        }
    }
    for row in &mut spearman {
        if let (Some(rho), Some(c)) = (row.rho, critical_values.iter().find(|c| c.n == row.n)) {
            row.significant = Some(rho.abs() >= c.threshold);
        }
    }
    Ok(TestsReport {
        levene,
        spearman,
        critical_values,
        warnings,
    })
}

fn rank_row(
    scope: &str,
    within: &str,
    first: &str,
    second: &str,
    x: &[f64],
    y: &[f64],
) -> SpearmanRow {
    let (rho, error) = match spearman_rho(x, y) {
        Ok(r) => (Some(r.rho), None),
        Err(e) => (None, Some(e.to_string())),
    };
    SpearmanRow {
        scope: scope.to_string(),
        within: within.to_string(),
        first: first.to_string(),
        second: second.to_string(),
        n: x.len(),
        rho,
        significant: None,
        error,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalRow {
    pub company: String,
    pub lob: Lob,
    pub n_obs: usize,
    pub sigma: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PooledRow {
    pub lob: Lob,
    pub companies: Vec<String>,
    pub n_obs: usize,
    pub sigma: f64,
    pub levene_p_value: Option<f64>,
    pub warnings: Vec<Warning>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailFit {
    pub params: GpParams,
    pub loglik: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GpRow {
    pub lob: Lob,
    pub companies: Vec<String>,
    pub n_positive: usize,
    pub free: Option<TailFit>,
    pub exponential: Option<TailFit>,
    pub warnings: Vec<Warning>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointReport {
    pub companies: Vec<String>,
    pub years: Vec<i32>,
    /// Accounting years dropped because some entry of the vector is missing.
    pub dropped_years: Vec<i32>,
    pub unrestricted: StructuredFit,
    pub equal_cross: StructuredFit,
    pub independent: StructuredFit,
    /// Unrestricted against `rho_1 = rho_2`.
    pub test_equal_cross: LrtResult,
    /// `rho_1 = rho_2` against `rho_1 = rho_2 = 0`.
    pub test_independence: LrtResult,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitProvenance {
    pub first_accounting_year: Option<i32>,
    pub last_accounting_year: Option<i32>,
    pub loss_ratio_years: u32,
    pub seed: u64,
    pub variance_divisor: crate::fitting::VarianceDivisor,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub provenance: FitProvenance,
    pub normal: Vec<NormalRow>,
    pub pooled: Vec<PooledRow>,
    pub gp: Vec<GpRow>,
    pub joint: JointReport,
    pub warnings: Vec<Warning>,
}

pub fn cmd_fit(config: &PipelineConfig) -> Result<FitReport> {
    let losses = cmd_losses(config)?;
    fit_on_panel(config, &losses.panel)
}

/// Marginal, pooled, tail and joint fits on an existing panel.
pub fn fit_on_panel(config: &PipelineConfig, panel: &LossPanel) -> Result<FitReport> {
    check_pooling_companies(config, panel)?;
    let divisor = config.fitting.variance_divisor;
    let mut warnings = Vec::new();

    let mut normal = Vec::new();
    for key in panel.series() {
        let sample: Vec<f64> = panel.losses(&key.company, key.lob).into_values().collect();
        let (sigma, error) = match fit_zero_mean_normal_with(&sample, divisor) {
            Ok(f) => (Some(f.sigma), None),
            Err(e) => (None, Some(e.to_string())),
        };
        normal.push(NormalRow {
            company: key.company,
            lob: key.lob,
            n_obs: sample.len(),
            sigma,
            error,
        });
    }

    let mut pooled = Vec::new();
    let mut gp = Vec::new();
    for &lob in config.pooling.groups.keys() {
        let companies = config.pooling.members(lob, &companies_with(panel, lob));
        if companies.is_empty() {
            warnings.push(Warning::new(
                format!("pooled {lob}"),
                "no companies with data",
            ));
            continue;
        }
        let samples: Vec<Vec<f64>> = companies
            .iter()
            .map(|c| panel.losses(c, lob).into_values().collect())
            .collect();
        let (_, aligned_groups) = aligned(panel, lob, &companies);
        let levene = levene_test_with(&aligned_groups, config.tests.centering).ok();
        let (fit, warning) = fit_pooled_normal(&samples, divisor, levene.as_ref())?;
        pooled.push(PooledRow {
            lob,
            companies: companies.clone(),
            n_obs: fit.n_obs,
            sigma: fit.sigma,
            levene_p_value: levene.map(|l| l.p_value),
            warnings: warning.into_iter().collect(),
        });

        if matches!(lob, Lob::IA | Lob::BLP) {
            let positive: Vec<f64> = samples
                .iter()
                .flatten()
                .copied()
                .filter(|&x| x > 0.0)
                .collect();
            let mut row = GpRow {
                lob,
                companies,
                n_positive: positive.len(),
                free: None,
                exponential: None,
                warnings: Vec::new(),
            };
            match fit_gp(&positive, false) {
                Ok(f) => {
                    row.warnings.extend(f.warnings);
                    row.free = Some(TailFit {
                        params: f.params,
                        loglik: f.loglik,
                    });
                }
                Err(e) => row
                    .warnings
                    .push(Warning::new(format!("GP {lob}"), e.to_string())),
            }
            if config.fitting.gp_fix_xi_zero {
                if let Ok(f) = fit_gp(&positive, true) {
                    row.exponential = Some(TailFit {
                        params: f.params,
                        loglik: f.loglik,
                    });
                }
            }
            gp.push(row);
        }
    }

    let joint = joint_fit(config, panel)?;
    let years: Vec<i32> = panel.records().iter().map(|r| r.accounting_year).collect();
    Ok(FitReport {
        provenance: FitProvenance {
            first_accounting_year: years.iter().min().copied(),
            last_accounting_year: years.iter().max().copied(),
            loss_ratio_years: config.losses.loss_ratio_years,
            seed: config.seed,
            variance_divisor: divisor,
        },
        normal,
        pooled,
        gp,
        joint,
        warnings,
    })
}

/// Home then Motor other losses of the configured companies, one vector per
/// accounting year; years with any missing entry are dropped.
pub fn joint_observations(
    panel: &LossPanel,
    companies: &[String],
) -> (Vec<i32>, Vec<i32>, Vec<Observation>) {
    let series: Vec<BTreeMap<i32, f64>> = [Lob::H, Lob::MO]
        .iter()
        .flat_map(|&lob| companies.iter().map(move |c| panel.losses(c, lob)))
        .collect();
    let all_years: BTreeSet<i32> = series.iter().flat_map(|s| s.keys().copied()).collect();
    let (mut kept, mut dropped, mut data) = (Vec::new(), Vec::new(), Vec::new());
    for year in all_years {
        if series.iter().all(|s| s.contains_key(&year)) {
            kept.push(year);
            data.push(std::array::from_fn::<f64, DIM, _>(|i| series[i][&year]));
        } else {
            dropped.push(year);
        }
    }
    (kept, dropped, data)
}

fn joint_fit(config: &PipelineConfig, panel: &LossPanel) -> Result<JointReport> {
    let companies = config.pooling.joint_companies.clone();
    debug_assert_eq!(companies.len(), COMPANIES);
    let (years, dropped_years, data) = joint_observations(panel, &companies);
    let options = config.fitting.fit_options(config.seed);
    let unrestricted =
        fit_structured_mvn_with(&data, StructuredConstraints::UNRESTRICTED, &options)?;
    let equal_cross = fit_structured_mvn_with(&data, StructuredConstraints::EQUAL_CROSS, &options)?;
    let independent =
        fit_structured_mvn_with(&data, StructuredConstraints::INDEPENDENT_LINES, &options)?;
    let test_equal_cross = lr_test(&unrestricted, &equal_cross)?;
    let test_independence = lr_test(&equal_cross, &independent)?;
    Ok(JointReport {
        companies,
        years,
        dropped_years,
        unrestricted,
        equal_cross,
        independent,
        test_equal_cross,
        test_independence,
    })
}

/// Which SCR figures to compute.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScrSelection {
    Internal,
    Model1,
    Model2,
    Standard,
    #[default]
    All,
}

impl ScrSelection {
    fn includes(self, other: ScrSelection) -> bool {
        self == ScrSelection::All || self == other
    }
}

impl std::str::FromStr for ScrSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "internal" => Ok(Self::Internal),
            "model1" => Ok(Self::Model1),
            "model2" => Ok(Self::Model2),
            "standard" => Ok(Self::Standard),
            "all" => Ok(Self::All),
            other => Err(Error::Usage(format!(
                "unknown SCR selection {other:?}; expected internal, model1, model2, standard or all"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixedScr {
    pub value: f64,
    pub grid_step: Option<f64>,
    pub monte_carlo: Option<f64>,
    pub monte_carlo_std_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScrRow {
    pub company: String,
    pub total_y0: f64,
    pub internal: Option<f64>,
    pub model1: Option<MixedScr>,
    pub model2: Option<MixedScr>,
    pub standard: Option<f64>,
}

impl ScrRow {
    fn ratio(&self, value: Option<f64>) -> Option<f64> {
        value
            .filter(|_| self.total_y0 != 0.0)
            .map(|v| v / self.total_y0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaRow {
    pub lob: Lob,
    pub model1_sigma: f64,
    pub model1_ratio: f64,
    pub model2_sigma: f64,
    pub model2_ratio: f64,
    pub standard_sigma: Option<f64>,
    pub standard_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScrReport {
    pub which: ScrSelection,
    pub rows: Vec<ScrRow>,
    pub sigma_table: Vec<SigmaRow>,
    pub warnings: Vec<Warning>,
}

pub fn cmd_scr(config: &PipelineConfig, which: ScrSelection) -> Result<ScrReport> {
    config.validate()?;
    let scr = &config.scr;
    let sf = &config.standard_formula;
    let mut warnings = Vec::new();
    let mut rows = Vec::with_capacity(scr.profiles.len());
    for profile in &scr.profiles {
        let mut row = ScrRow {
            company: profile.company().to_string(),
            total_y0: profile.total_y0(),
            internal: None,
            model1: None,
            model2: None,
            standard: None,
        };
        if which.includes(ScrSelection::Internal) {
            let empty = BTreeMap::new();
            let stdevs = scr.internal_stdevs.get(profile.company()).unwrap_or(&empty);
            row.internal = Some(scr_simple_internal(profile, stdevs)?);
        }
        for (sel, params) in [
            (ScrSelection::Model1, &scr.model1),
            (ScrSelection::Model2, &scr.model2),
        ] {
            if which.includes(sel) {
                let value = mixed_scr(config, profile, params, &mut warnings)?;
                match sel {
                    ScrSelection::Model1 => row.model1 = Some(value),
                    _ => row.model2 = Some(value),
                }
            }
        }
        if which.includes(ScrSelection::Standard) {
            row.standard =
                Some(scr_standard_total(profile, &sf.segmentation, &sf.regulator)?.total);
        }
        rows.push(row);
    }

    let sigma_table = if which == ScrSelection::All {
        sigma_table(config)?
    } else {
        Vec::new()
    };
    Ok(ScrReport {
        which,
        rows,
        sigma_table,
        warnings,
    })
}

fn mixed_scr(
    config: &PipelineConfig,
    profile: &LiabilityProfile,
    params: &ModelParams,
    warnings: &mut Vec<Warning>,
) -> Result<MixedScr> {
    let scr = &config.scr;
    let conv = scr_mixed_model_with(
        profile,
        params,
        &QuantileEngine::Convolution(scr.convolution),
    )?;
    warnings.extend(conv.warnings);
    let mut out = MixedScr {
        value: conv.value,
        grid_step: conv.grid_step,
        monte_carlo: None,
        monte_carlo_std_error: None,
    };
    if scr.monte_carlo_check {
        let mc = scr_mixed_model_with(
            profile,
            params,
            &QuantileEngine::MonteCarlo(scr.monte_carlo(config.seed)),
        )?;
        if let Some(se) = mc.std_error {
            if (mc.value - conv.value).abs() > 3.0 * se {
                warnings.push(Warning::new(
                    profile.company(),
                    format!(
                        "simulated quantile {} differs from convolution {} by more than 3 standard errors ({se})",
                        mc.value, conv.value
                    ),
                ));
            }
        }
        out.monte_carlo = Some(mc.value);
        out.monte_carlo_std_error = mc.std_error;
    }
    Ok(out)
}

/// Per-line model standard deviations and quantile ratios next to the
/// standard-formula benchmark computed from the summed profiles.
pub fn sigma_table(config: &PipelineConfig) -> Result<Vec<SigmaRow>> {
    let m1 = component_sigma_table(&config.scr.model1, None)?;
    let m2 = component_sigma_table(&config.scr.model2, None)?;
    let mut lobs: BTreeMap<Lob, LobFigures> = BTreeMap::new();
    for p in &config.scr.profiles {
        for (&lob, f) in p.lobs() {
            let e = lobs.entry(lob).or_default();
            e.premium += f.premium;
            e.r0 += f.r0;
            e.p0 += f.p0;
        }
    }
    let aggregate = LiabilityProfile::new("aggregate", lobs)?;
    let sf = &config.standard_formula;
    let benchmark = benchmark_sigma_swedish(&aggregate, &sf.segmentation, &sf.regulator)?;
    Ok(m1
        .iter()
        .zip(&m2)
        .map(|(a, b)| SigmaRow {
            lob: a.lob,
            model1_sigma: a.sigma,
            model1_ratio: a.ratio,
            model2_sigma: b.sigma,
            model2_ratio: b.ratio,
            standard_sigma: benchmark.get(&a.lob).copied(),
            standard_ratio: QUANTILE_MULTIPLIER,
        })
        .collect())
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ScrReport {
    /// One row per company: SCRs and their ratios to total `Y0`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "company,Y0,SCR_internal,SCR_model1,SCR_model2,SCR_standard,ratio_internal,ratio_model1,ratio_model2,ratio_standard\n",
        );
        for r in &self.rows {
            let values = [
                r.internal,
                r.model1.as_ref().map(|m| m.value),
                r.model2.as_ref().map(|m| m.value),
                r.standard,
            ];
            let ratios = values.map(|v| r.ratio(v));
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.company,
                r.total_y0,
                values.map(cell).join(","),
                ratios.map(cell).join(",")
            );
        }
        out
    }

    pub fn sigma_table_csv(&self) -> String {
        let mut out =
            String::from("lob,model1_sigma,model1_ratio,model2_sigma,model2_ratio,standard_sigma,standard_ratio\n");
        for r in &self.sigma_table {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.lob,
                r.model1_sigma,
                r.model1_ratio,
                r.model2_sigma,
                r.model2_ratio,
                cell(r.standard_sigma),
                r.standard_ratio
            );
        }
        out
    }
}

impl TestsReport {
    pub fn levene_csv(&self) -> String {
        let mut out = String::from("lob,variant,companies,n,W,df1,df2,p_value\n");
        for r in &self.levene {
            let (w, df1, df2, p) = match r.result {
                Some(l) => (
                    l.w.to_string(),
                    l.df1.to_string(),
                    l.df2.to_string(),
                    l.p_value.to_string(),
                ),
                None => Default::default(),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{w},{df1},{df2},{p}",
                r.lob,
                r.variant,
                r.companies.join(";"),
                r.years.len()
            );
        }
        out
    }

    pub fn spearman_csv(&self) -> String {
        let mut out = String::from("scope,within,first,second,n,rho,significant\n");
        for r in &self.spearman {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.scope,
                r.within,
                r.first,
                r.second,
                r.n,
                cell(r.rho),
                r.significant.map(|b| b.to_string()).unwrap_or_default()
            );
        }
        out
    }
}
