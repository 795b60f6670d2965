//! Solvency II standard-formula premium and reserve risk: mapping Swedish
//! lines onto directive lines, volume measures, per-line standard
//! deviations and aggregation into the Health and Non-life modules.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::Lob;
use crate::risk::LiabilityProfile;

/// Multiplier turning a standard deviation into the 99.5% quantile under the
/// standard formula calibration.
pub const QUANTILE_MULTIPLIER: f64 = 3.0;

/// Directive lines of business used here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SiiLob {
    /// Medical expense (NonSLT Health).
    ME,
    /// Income protection (NonSLT Health).
    IP,
    /// Motor vehicle liability.
    MVL,
    /// Other motor.
    OM,
    /// Fire and other damage to property.
    FPD,
    /// General liability.
    TPL,
}

impl SiiLob {
    pub const ALL: [SiiLob; 6] = [
        SiiLob::ME,
        SiiLob::IP,
        SiiLob::MVL,
        SiiLob::OM,
        SiiLob::FPD,
        SiiLob::TPL,
    ];
    pub const HEALTH: [SiiLob; 2] = [SiiLob::ME, SiiLob::IP];
    pub const NON_LIFE: [SiiLob; 4] = [SiiLob::MVL, SiiLob::OM, SiiLob::FPD, SiiLob::TPL];

    pub fn is_health(self) -> bool {
        matches!(self, SiiLob::ME | SiiLob::IP)
    }
}

impl fmt::Display for SiiLob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Share {
    pub target: SiiLob,
    pub proportion: f64,
}

/// How each Swedish line's volumes split across directive lines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SegmentationMap(pub BTreeMap<Lob, Vec<Share>>);

impl Default for SegmentationMap {
    fn default() -> Self {
        let s = |target, proportion| Share { target, proportion };
        Self(BTreeMap::from([
            (Lob::IA, vec![s(SiiLob::ME, 0.25), s(SiiLob::IP, 0.75)]),
            (Lob::H, vec![s(SiiLob::FPD, 0.9), s(SiiLob::TPL, 0.1)]),
            (Lob::BLP, vec![s(SiiLob::FPD, 0.8), s(SiiLob::TPL, 0.2)]),
            (Lob::ML, vec![s(SiiLob::MVL, 1.0)]),
            (Lob::MO, vec![s(SiiLob::OM, 1.0)]),
        ]))
    }
}

impl SegmentationMap {
    pub fn validate(&self) -> Result<()> {
        for (lob, shares) in &self.0 {
            if shares.iter().any(|s| !(0.0..=1.0).contains(&s.proportion)) {
                return Err(Error::Config(format!(
                    "{lob}: segmentation proportions must lie in [0, 1]"
                )));
            }
            let total: f64 = shares.iter().map(|s| s.proportion).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "{lob}: segmentation proportions sum to {total}, not 1"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PremRes {
    pub prem: f64,
    pub res: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelation {
    pub a: SiiLob,
    pub b: SiiLob,
    pub rho: f64,
}

/// Regulator-specified standard deviations and correlations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegulatorTable {
    pub sigma: BTreeMap<SiiLob, PremRes>,
    /// Correlation between premium and reserve risk within a line.
    pub alpha: f64,
    pub rho_me_ip: f64,
    /// Off-diagonal Non-life correlations; unlisted pairs are zero.
    pub nonlife_correlations: Vec<PairCorrelation>,
}

impl Default for RegulatorTable {
    fn default() -> Self {
        let pr = |prem, res| PremRes { prem, res };
        let c = |a, b, rho| PairCorrelation { a, b, rho };
        use SiiLob::*;
        Self {
            sigma: BTreeMap::from([
                (ME, pr(0.05, 0.05)),
                (IP, pr(0.085, 0.14)),
                (MVL, pr(0.10, 0.09)),
                (OM, pr(0.08, 0.08)),
                (FPD, pr(0.08, 0.10)),
                (TPL, pr(0.14, 0.11)),
            ]),
            alpha: 0.5,
            rho_me_ip: 0.5,
            nonlife_correlations: vec![
                c(MVL, OM, 0.5),
                c(MVL, FPD, 0.25),
                c(MVL, TPL, 0.5),
                c(OM, FPD, 0.25),
                c(OM, TPL, 0.25),
                c(FPD, TPL, 0.25),
            ],
        }
    }
}

impl RegulatorTable {
    /// Correlation between two directive lines; Health and Non-life lines
    /// are independent.
    pub fn correlation(&self, a: SiiLob, b: SiiLob) -> f64 {
        if a == b {
            return 1.0;
        }
        if a.is_health() != b.is_health() {
            return 0.0;
        }
        if a.is_health() {
            return self.rho_me_ip;
        }
        self.nonlife_correlations
            .iter()
            .find(|c| (c.a, c.b) == (a, b) || (c.a, c.b) == (b, a))
            .map_or(0.0, |c| c.rho)
    }

    pub fn sigma_for(&self, lob: SiiLob) -> Result<PremRes> {
        self.sigma
            .get(&lob)
            .copied()
            .ok_or_else(|| Error::Config(format!("no regulator standard deviations for {lob}")))
    }

    pub fn validate(&self) -> Result<()> {
        for (lob, s) in &self.sigma {
            if !(s.prem >= 0.0 && s.res >= 0.0) {
                return Err(Error::Config(format!(
                    "{lob}: standard deviations must be nonnegative"
                )));
            }
        }
        for (name, r) in [("alpha", self.alpha), ("rho_ME_IP", self.rho_me_ip)] {
            if !(-1.0..=1.0).contains(&r) {
                return Err(Error::Config(format!("{name} = {r} outside [-1, 1]")));
            }
        }
        for c in &self.nonlife_correlations {
            if c.a == c.b || c.a.is_health() || c.b.is_health() || !(-1.0..=1.0).contains(&c.rho) {
                return Err(Error::Config(format!(
                    "invalid Non-life correlation entry {c:?}"
                )));
            }
            let duplicates = self
                .nonlife_correlations
                .iter()
                .filter(|d| (d.a, d.b) == (c.a, c.b) || (d.a, d.b) == (c.b, c.a))
                .count();
            if duplicates > 1 {
                return Err(Error::Config(format!(
                    "correlation {}-{} listed twice",
                    c.a, c.b
                )));
            }
        }
        let m = DMatrix::from_fn(4, 4, |i, j| {
            self.correlation(SiiLob::NON_LIFE[i], SiiLob::NON_LIFE[j])
        });
        let min = SymmetricEigen::new(m).eigenvalues.min();
        if min < -1e-12 {
            return Err(Error::Config(format!(
                "Non-life correlation matrix is not positive semidefinite (smallest eigenvalue {min:.3e})"
            )));
        }
        Ok(())
    }
}

/// Premium and reserve volume of one directive line.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VolumePair {
    pub prem: f64,
    pub res: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SolvencyVolumes(pub BTreeMap<SiiLob, VolumePair>);

impl SolvencyVolumes {
    pub fn get(&self, lob: SiiLob) -> VolumePair {
        self.0.get(&lob).copied().unwrap_or_default()
    }
}

/// Splits premium volumes `V` and reserves `R0` across directive lines.
pub fn segment_volumes(
    profile: &LiabilityProfile,
    map: &SegmentationMap,
) -> Result<SolvencyVolumes> {
    map.validate()?;
    let mut out = BTreeMap::new();
    for (&lob, figures) in profile.lobs() {
        let Some(shares) = map.0.get(&lob) else {
            if figures.premium != 0.0 || figures.r0 != 0.0 {
                return Err(Error::Config(format!(
                    "{lob} has volume but no segmentation entry"
                )));
            }
            continue;
        };
        for share in shares {
            let v: &mut VolumePair = out.entry(share.target).or_default();
            v.prem += share.proportion * figures.premium;
            v.res += share.proportion * figures.r0;
        }
    }
    if let Some((lob, v)) = out.iter().find(|(_, v)| v.prem < 0.0 || v.res < 0.0) {
        return Err(Error::Validation(format!(
            "negative volume for {lob}: {v:?}"
        )));
    }
    Ok(SolvencyVolumes(out))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LobSigma {
    pub volume: f64,
    pub sigma: f64,
    /// Set when the total volume is zero and `sigma` is reported as zero.
    pub zero_volume: bool,
}

/// Volume and combined standard deviation of one directive line.
pub fn sigma_lob(vp: f64, vr: f64, sp: f64, sr: f64, alpha: f64) -> LobSigma {
    let volume = vp + vr;
    if volume <= 0.0 {
        return LobSigma {
            volume: 0.0,
            sigma: 0.0,
            zero_volume: true,
        };
    }
    let var = (sp * vp).powi(2) + 2.0 * alpha * sp * sr * vp * vr + (sr * vr).powi(2);
    LobSigma {
        volume,
        sigma: var.max(0.0).sqrt() / volume,
        zero_volume: false,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModuleScr {
    pub volume: f64,
    pub sigma: f64,
    pub scr: f64,
    pub lobs: BTreeMap<SiiLob, LobSigma>,
}

fn aggregate(
    volumes: &SolvencyVolumes,
    table: &RegulatorTable,
    lobs: &[SiiLob],
) -> Result<ModuleScr> {
    table.validate()?;
    let mut per_lob = BTreeMap::new();
    for &lob in lobs {
        let s = table.sigma_for(lob)?;
        let v = volumes.get(lob);
        per_lob.insert(lob, sigma_lob(v.prem, v.res, s.prem, s.res, table.alpha));
    }
    let mut var = 0.0;
    for (&a, sa) in &per_lob {
        for (&b, sb) in &per_lob {
            var += table.correlation(a, b) * sa.sigma * sa.volume * sb.sigma * sb.volume;
        }
    }
    let volume: f64 = per_lob.values().map(|s| s.volume).sum();
    let sd = var.max(0.0).sqrt();
    Ok(ModuleScr {
        volume,
        sigma: if volume > 0.0 { sd / volume } else { 0.0 },
        scr: QUANTILE_MULTIPLIER * sd,
        lobs: per_lob,
    })
}

/// NonSLT Health premium and reserve risk.
pub fn scr_health(volumes: &SolvencyVolumes, table: &RegulatorTable) -> Result<ModuleScr> {
    aggregate(volumes, table, &SiiLob::HEALTH)
}

/// Non-life premium and reserve risk.
pub fn scr_nonlife(volumes: &SolvencyVolumes, table: &RegulatorTable) -> Result<ModuleScr> {
    aggregate(volumes, table, &SiiLob::NON_LIFE)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StandardFormulaScr {
    pub volumes: SolvencyVolumes,
    pub health: ModuleScr,
    pub nonlife: ModuleScr,
    pub total: f64,
}

/// Health and Non-life modules combined as independent.
pub fn scr_standard_total(
    profile: &LiabilityProfile,
    map: &SegmentationMap,
    table: &RegulatorTable,
) -> Result<StandardFormulaScr> {
    let volumes = segment_volumes(profile, map)?;
    let health = scr_health(&volumes, table)?;
    let nonlife = scr_nonlife(&volumes, table)?;
    let total = health.scr.hypot(nonlife.scr);
    Ok(StandardFormulaScr {
        volumes,
        health,
        nonlife,
        total,
    })
}

/// Standard deviation the standard formula implies for each Swedish line:
/// directive-line sigmas from aggregate volumes, recombined with the
/// segmentation proportions and the regulator correlations.
pub fn benchmark_sigma_swedish(
    aggregate: &LiabilityProfile,
    map: &SegmentationMap,
    table: &RegulatorTable,
) -> Result<BTreeMap<Lob, f64>> {
    table.validate()?;
    let volumes = segment_volumes(aggregate, map)?;
    let mut sigmas = BTreeMap::new();
    for &lob in &SiiLob::ALL {
        if let Some(s) = table.sigma.get(&lob) {
            let v = volumes.get(lob);
            sigmas.insert(
                lob,
                sigma_lob(v.prem, v.res, s.prem, s.res, table.alpha).sigma,
            );
        }
    }
    let mut out = BTreeMap::new();
    for (&lob, shares) in &map.0 {
        let mut var = 0.0;
        for a in shares {
            for b in shares {
                let sa = sigmas
                    .get(&a.target)
                    .copied()
                    .ok_or_else(|| missing(a.target))?;
                let sb = sigmas
                    .get(&b.target)
                    .copied()
                    .ok_or_else(|| missing(b.target))?;
                var +=
                    table.correlation(a.target, b.target) * a.proportion * sa * b.proportion * sb;
            }
        }
        out.insert(lob, var.max(0.0).sqrt());
    }
    Ok(out)
}

fn missing(lob: SiiLob) -> Error {
    Error::Config(format!("no regulator standard deviations for {lob}"))
}
