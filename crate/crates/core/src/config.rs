//! Pipeline configuration. Every default reproduces the published setup:
//! pooling choices, the two pooled parameter sets, the four companies'
//! opening liabilities and per-line standard deviations, and the standard
//! formula tables.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{FitOptions, GpParams, VarianceDivisor};
use crate::report::{DataQualityPolicy, HorizonTable, Lob, ParseMode, ReportSchema};
use crate::risk::{
    ConvolutionSettings, LiabilityProfile, LobFigures, ModelParams, MonteCarloSettings,
};
use crate::standard_formula::{RegulatorTable, SegmentationMap};
use crate::stats::{Centering, DEFAULT_PERMUTATIONS, DEFAULT_PERMUTATION_SEED};

pub const FOLKSAM: &str = "Folksam";
pub const IF: &str = "If";
pub const LANSFORSAKRINGAR: &str = "Lansforsakringar";
pub const TRYGG_HANSA: &str = "Trygg-Hansa";
pub const COMPANIES: [&str; 4] = [FOLKSAM, IF, LANSFORSAKRINGAR, TRYGG_HANSA];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Seed for every random stream: permutation tests, optimizer starts
    /// and Monte Carlo cross-checks.
    pub seed: u64,
    pub input: InputConfig,
    pub losses: LossConfig,
    pub pooling: PoolingConfig,
    pub tests: TestsConfig,
    pub fitting: FittingConfig,
    pub scr: ScrConfig,
    pub standard_formula: StandardFormulaConfig,
    pub output: OutputConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_PERMUTATION_SEED,
            input: InputConfig::default(),
            losses: LossConfig::default(),
            pooling: PoolingConfig::default(),
            tests: TestsConfig::default(),
            fitting: FittingConfig::default(),
            scr: ScrConfig::default(),
            standard_formula: StandardFormulaConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    /// Long-form report CSV.
    pub reports: Option<PathBuf>,
    pub parse_mode: ParseMode,
    pub horizons: HorizonTable,
}

impl InputConfig {
    pub fn schema(&self) -> ReportSchema {
        ReportSchema {
            horizons: self.horizons.clone(),
            mode: self.parse_mode,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    /// Accident years averaged in the loss ratio used for `P0`.
    pub loss_ratio_years: u32,
    pub policy: DataQualityPolicy,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            loss_ratio_years: 3,
            policy: DataQualityPolicy::default(),
        }
    }
}

/// Companies left out when one line's data are pooled.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoolGroup {
    pub excluded_companies: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoolingConfig {
    /// Lines pooled separately: Illness and accident, Business liability and
    /// property, Motor liability.
    pub groups: BTreeMap<Lob, PoolGroup>,
    /// Company order of the joint Home / Motor other model.
    pub joint_companies: Vec<String>,
}

impl Default for PoolingConfig {
    fn default() -> Self {
        let group = |excluded: &[&str]| PoolGroup {
            excluded_companies: excluded.iter().map(|c| c.to_string()).collect(),
        };
        Self {
            groups: BTreeMap::from([
                (Lob::IA, group(&[])),
                (Lob::BLP, group(&[FOLKSAM])),
                (Lob::ML, group(&[TRYGG_HANSA])),
            ]),
            joint_companies: COMPANIES.map(String::from).to_vec(),
        }
    }
}

impl PoolingConfig {
    /// Companies pooled for `lob`, given those present in the data.
    pub fn members(&self, lob: Lob, present: &[String]) -> Vec<String> {
        let excluded = self
            .groups
            .get(&lob)
            .map(|g| g.excluded_companies.as_slice())
            .unwrap_or(&[]);
        present
            .iter()
            .filter(|c| !excluded.contains(c))
            .cloned()
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestsConfig {
    pub centering: Centering,
    /// Two-sided level for the rank-correlation critical value.
    pub spearman_level: f64,
    pub n_permutations: usize,
}

impl Default for TestsConfig {
    fn default() -> Self {
        Self {
            centering: Centering::Median,
            spearman_level: 0.05,
            n_permutations: DEFAULT_PERMUTATIONS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FittingConfig {
    pub variance_divisor: VarianceDivisor,
    /// Also report the exponential (shape zero) tail fit.
    pub gp_fix_xi_zero: bool,
    pub n_starts: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
}

impl Default for FittingConfig {
    fn default() -> Self {
        let o = FitOptions::default();
        Self {
            variance_divisor: VarianceDivisor::N,
            gp_fix_xi_zero: true,
            n_starts: o.n_starts,
            max_iter: o.max_iter,
            rel_tol: o.rel_tol,
        }
    }
}

impl FittingConfig {
    pub fn fit_options(&self, seed: u64) -> FitOptions {
        FitOptions {
            n_starts: self.n_starts,
            seed,
            max_iter: self.max_iter,
            rel_tol: self.rel_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScrConfig {
    pub profiles: Vec<LiabilityProfile>,
    /// Per company and line standard deviation of the normalized loss.
    pub internal_stdevs: BTreeMap<String, BTreeMap<Lob, f64>>,
    pub model1: ModelParams,
    pub model2: ModelParams,
    pub convolution: ConvolutionSettings,
    /// Cross-check the mixed-model quantiles by simulation.
    pub monte_carlo_check: bool,
    pub n_sims: usize,
}

impl Default for ScrConfig {
    fn default() -> Self {
        Self {
            profiles: default_profiles(),
            internal_stdevs: default_internal_stdevs(),
            model1: model1(),
            model2: model2(),
            convolution: ConvolutionSettings::default(),
            monte_carlo_check: true,
            n_sims: MonteCarloSettings::default().n_sims,
        }
    }
}

impl ScrConfig {
    pub fn monte_carlo(&self, seed: u64) -> MonteCarloSettings {
        MonteCarloSettings {
            n_sims: self.n_sims,
            seed,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StandardFormulaConfig {
    pub segmentation: SegmentationMap,
    pub regulator: RegulatorTable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

/// Pooled parameters, first set.
pub fn model1() -> ModelParams {
    ModelParams {
        sigma_h: 0.099,
        sigma_mo: 0.12,
        rho_1: 0.35,
        sigma_ml: 0.050,
        sigma_ml_overrides: BTreeMap::from([(TRYGG_HANSA.to_string(), 0.12)]),
        ia: GpParams {
            xi: 0.0,
            beta: 0.088,
        },
        blp: GpParams {
            xi: 0.0,
            beta: 0.16,
        },
    }
}

/// Pooled parameters, second set.
pub fn model2() -> ModelParams {
    ModelParams {
        sigma_h: 0.10,
        sigma_mo: 0.096,
        rho_1: 0.64,
        sigma_ml: 0.025,
        sigma_ml_overrides: BTreeMap::from([(TRYGG_HANSA.to_string(), 0.12)]),
        ia: GpParams {
            xi: 0.0,
            beta: 0.088,
        },
        blp: GpParams {
            xi: 0.0,
            beta: 0.16,
        },
    }
}

/// Opening figures `(V, R0, P0)` per company, lines ordered IA, H, BLP, ML, MO.
pub fn default_profiles() -> Vec<LiabilityProfile> {
    type Row = (&'static str, [(f64, f64, f64); 5]);
    const ROWS: [Row; 4] = [
        (
            FOLKSAM,
            [
                (1.49, 5.05, 1.11),
                (2.67, 1.12, 1.76),
                (0.26, 0.14, 0.18),
                (0.98, 4.32, 0.74),
                (1.96, 0.18, 1.13),
            ],
        ),
        (
            IF,
            [
                (0.64, 1.07, 0.42),
                (1.63, 0.59, 1.10),
                (1.85, 2.27, 1.02),
                (1.94, 11.07, 1.67),
                (3.50, 0.34, 2.19),
            ],
        ),
        (
            LANSFORSAKRINGAR,
            [
                (1.30, 3.18, 1.08),
                (3.51, 1.61, 2.51),
                (5.13, 3.71, 3.22),
                (2.87, 11.29, 2.16),
                (3.62, 0.60, 2.45),
            ],
        ),
        (
            TRYGG_HANSA,
            [
                (2.53, 6.00, 1.51),
                (1.49, 0.65, 1.08),
                (1.67, 1.26, 1.05),
                (1.70, 6.29, 0.99),
                (2.11, 0.39, 1.44),
            ],
        ),
    ];
    ROWS.iter()
        .map(|(company, figures)| {
            let lobs = Lob::ALL
                .iter()
                .zip(figures)
                .map(|(&lob, &(premium, r0, p0))| (lob, LobFigures { premium, r0, p0 }))
                .collect();
            LiabilityProfile::new(*company, lobs).expect("built-in profiles are valid")
        })
        .collect()
}

/// Sample standard deviations of normalized losses, lines ordered IA, H,
/// BLP, ML, MO.
pub fn default_internal_stdevs() -> BTreeMap<String, BTreeMap<Lob, f64>> {
    const ROWS: [(&str, [f64; 5]); 4] = [
        (FOLKSAM, [0.040, 0.082, 1.5, 0.077, 0.17]),
        (IF, [0.15, 0.10, 0.10, 0.026, 0.069]),
        (LANSFORSAKRINGAR, [0.090, 0.092, 0.18, 0.028, 0.12]),
        (TRYGG_HANSA, [0.21, 0.12, 0.22, 0.12, 0.11]),
    ];
    ROWS.iter()
        .map(|(company, s)| {
            (
                company.to_string(),
                Lob::ALL.iter().copied().zip(s.iter().copied()).collect(),
            )
        })
        .collect()
}

impl PipelineConfig {
    /// Checks every parameter set against its own invariants. Checks that
    /// need the data (companies named in pooling groups) happen when the
    /// data are loaded.
    pub fn validate(&self) -> Result<()> {
        if self.losses.loss_ratio_years == 0 {
            return Err(Error::Config(
                "losses.loss_ratio_years must be at least 1".into(),
            ));
        }
        for (lob, &k) in &self.input.horizons.0 {
            if k == 0 {
                return Err(Error::Config(format!("horizon for {lob} must be positive")));
            }
        }
        if !(self.tests.spearman_level > 0.0 && self.tests.spearman_level < 1.0) {
            return Err(Error::Config(format!(
                "tests.spearman_level must lie in (0, 1), got {}",
                self.tests.spearman_level
            )));
        }
        if self.tests.n_permutations == 0 {
            return Err(Error::Config(
                "tests.n_permutations must be positive".into(),
            ));
        }
        if self.fitting.n_starts == 0 {
            return Err(Error::Config("fitting.n_starts must be positive".into()));
        }
        if self.pooling.joint_companies.len() != crate::fitting::structured::COMPANIES {
            return Err(Error::Config(format!(
                "pooling.joint_companies must name exactly {} companies",
                crate::fitting::structured::COMPANIES
            )));
        }
        self.scr.model1.validate()?;
        self.scr.model2.validate()?;
        for p in &self.scr.profiles {
            LiabilityProfile::new(p.company(), p.lobs().clone())?;
        }
        if self.scr.n_sims == 0 {
            return Err(Error::Config("scr.n_sims must be positive".into()));
        }
        self.standard_formula.segmentation.validate()?;
        self.standard_formula.regulator.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        PipelineConfig::default().validate().unwrap();
    }

    #[test]
    fn profile_totals() {
        let total: Vec<f64> = default_profiles().iter().map(|p| p.total_y0()).collect();
        let expected = [15.73, 21.74, 31.81, 20.66];
        for (t, e) in total.iter().zip(expected) {
            assert!((t - e).abs() < 1e-9, "{t} vs {e}");
        }
    }

    #[test]
    fn pool_members_drop_excluded_companies() {
        let present: Vec<String> = COMPANIES.map(String::from).to_vec();
        let members = PoolingConfig::default().members(Lob::BLP, &present);
        assert_eq!(members, vec![IF, LANSFORSAKRINGAR, TRYGG_HANSA]);
        assert_eq!(PoolingConfig::default().members(Lob::H, &present).len(), 4);
    }
}
