use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::profile::LiabilityProfile;
use crate::diagnostics::Warning;
use crate::error::{Error, Result};
use crate::fitting::GpParams;
use crate::report::Lob;
use crate::stats::dist::normal_quantile;

/// Pooled parameters of the mixed model. Home and Motor other are jointly
/// normal with correlation `rho_1`, Motor liability is an independent
/// normal, and the two heavy-tailed lines follow symmetric generalized
/// Pareto laws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub sigma_h: f64,
    pub sigma_mo: f64,
    pub rho_1: f64,
    pub sigma_ml: f64,
    /// Company-specific Motor liability standard deviations.
    #[serde(default)]
    pub sigma_ml_overrides: BTreeMap<String, f64>,
    pub ia: GpParams,
    pub blp: GpParams,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let mut sigmas = vec![
            ("sigma_H".to_string(), self.sigma_h),
            ("sigma_MO".to_string(), self.sigma_mo),
            ("sigma_ML".to_string(), self.sigma_ml),
        ];
        sigmas.extend(
            self.sigma_ml_overrides
                .iter()
                .map(|(c, &s)| (format!("sigma_ML for {c}"), s)),
        );
        for (name, s) in sigmas {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {s}")));
            }
        }
        if !(self.rho_1.abs() < 1.0) {
            return Err(Error::Config(format!(
                "rho_1 must lie in (-1, 1), got {}",
                self.rho_1
            )));
        }
        for (lob, gp) in [(Lob::IA, self.ia), (Lob::BLP, self.blp)] {
            if !(gp.beta > 0.0) || !gp.beta.is_finite() || !gp.xi.is_finite() {
                return Err(Error::Config(format!(
                    "{lob} GP parameters invalid: {gp:?}"
                )));
            }
            if gp.xi >= 1.0 {
                return Err(Error::Unsupported(format!(
                    "{lob} shape {} has no finite mean",
                    gp.xi
                )));
            }
        }
        Ok(())
    }

    pub fn sigma_ml_for(&self, company: &str) -> f64 {
        self.sigma_ml_overrides
            .get(company)
            .copied()
            .unwrap_or(self.sigma_ml)
    }
}

/// `B * Z` with `B = +-1` equally likely and `Z ~ GP(xi, scale)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricGp {
    pub lob: Lob,
    pub gp: GpParams,
}

impl SymmetricGp {
    pub fn cdf(&self, x: f64) -> f64 {
        if x >= 0.0 {
            1.0 - 0.5 * self.gp.sf(x)
        } else {
            0.5 * self.gp.sf(-x)
        }
    }

    /// `P(a < X <= b)` without cancellation in the tails.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        if a >= 0.0 {
            0.5 * (self.gp.sf(a) - self.gp.sf(b))
        } else if b <= 0.0 {
            0.5 * (self.gp.sf(-b) - self.gp.sf(-a))
        } else {
            0.5 * ((1.0 - self.gp.sf(-a)) + (1.0 - self.gp.sf(b)))
        }
    }

    /// `P(|X| > x)`.
    pub fn two_sided_tail(&self, x: f64) -> f64 {
        self.gp.sf(x)
    }

    /// `E[X^2]`, infinite for shapes of at least one half.
    pub fn variance(&self) -> f64 {
        let GpParams { xi, beta } = self.gp;
        if xi < 0.5 {
            2.0 * beta * beta / ((1.0 - xi) * (1.0 - 2.0 * xi))
        } else {
            f64::INFINITY
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// Aggregate loss law of one company: a zero-mean normal plus independent
/// symmetric GP components.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixedLossModel {
    pub sigma_normal: f64,
    pub components: Vec<SymmetricGp>,
    /// Heavy-tailed lines dropped because their liability is zero.
    pub dropped: Vec<Lob>,
    pub warnings: Vec<Warning>,
}

impl MixedLossModel {
    pub fn gaussian(sigma_normal: f64) -> Self {
        Self {
            sigma_normal,
            components: Vec::new(),
            dropped: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn variance(&self) -> f64 {
        self.sigma_normal.powi(2)
            + self
                .components
                .iter()
                .map(SymmetricGp::variance)
                .sum::<f64>()
    }
}

pub fn build_mixed_model(
    profile: &LiabilityProfile,
    params: &ModelParams,
) -> Result<MixedLossModel> {
    params.validate()?;
    let (h, mo, ml) = (profile.y0(Lob::H), profile.y0(Lob::MO), profile.y0(Lob::ML));
    let sigma_ml = params.sigma_ml_for(profile.company());
    let variance = (h * params.sigma_h).powi(2)
        + (mo * params.sigma_mo).powi(2)
        + 2.0 * h * mo * params.sigma_h * params.sigma_mo * params.rho_1
        + (ml * sigma_ml).powi(2);
    assert!(
        variance >= -1e-15 * (1.0 + variance.abs()),
        "normal variance {variance} negative with |rho_1| < 1"
    );

    let mut model = MixedLossModel::gaussian(variance.max(0.0).sqrt());
    for (lob, gp) in [(Lob::IA, params.ia), (Lob::BLP, params.blp)] {
        // Symmetry makes the sign of Y0 irrelevant.
        let scale = profile.y0(lob).abs() * gp.beta;
        if scale > 0.0 {
            model.components.push(SymmetricGp {
                lob,
                gp: GpParams {
                    xi: gp.xi,
                    beta: scale,
                },
            });
        } else {
            model.dropped.push(lob);
            model.warnings.push(Warning::new(
                format!("{} {lob}", profile.company()),
                "zero liability; component is degenerate at 0 and dropped",
            ));
        }
    }
    Ok(model)
}

/// Upper `p`-quantile of a symmetric GP with scale `beta` and shape `xi`.
pub fn symmetric_gp_quantile(beta: f64, xi: f64, p: f64) -> Result<f64> {
    if !(p > 0.5 && p < 1.0) {
        return Err(Error::Domain(format!(
            "symmetric quantile needs p in (0.5, 1), got {p}"
        )));
    }
    let gp = GpParams::new(xi, beta)?;
    Ok(gp.inverse_sf(2.0 * (1.0 - p)))
}

/// Standard deviation and 99.5% quantile of one line's normalized loss
/// under the model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComponentSigma {
    pub lob: Lob,
    pub sigma: f64,
    pub quantile: f64,
    pub ratio: f64,
}

pub fn component_sigma_table(
    params: &ModelParams,
    company: Option<&str>,
) -> Result<Vec<ComponentSigma>> {
    params.validate()?;
    let z = normal_quantile(0.995)?;
    let sigma_ml = company.map_or(params.sigma_ml, |c| params.sigma_ml_for(c));
    let mut rows = Vec::with_capacity(Lob::ALL.len());
    for lob in Lob::ALL {
        let row = match lob {
            Lob::IA | Lob::BLP => {
                let gp = if lob == Lob::IA {
                    params.ia
                } else {
                    params.blp
                };
                let sigma = SymmetricGp { lob, gp }.std_dev();
                let quantile = symmetric_gp_quantile(gp.beta, gp.xi, 0.995)?;
                ComponentSigma {
                    lob,
                    sigma,
                    quantile,
                    ratio: quantile / sigma,
                }
            }
            Lob::H | Lob::ML | Lob::MO => {
                let sigma = match lob {
                    Lob::H => params.sigma_h,
                    Lob::ML => sigma_ml,
                    _ => params.sigma_mo,
                };
                ComponentSigma {
                    lob,
                    sigma,
                    quantile: z * sigma,
                    ratio: z,
                }
            }
        };
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::LobFigures;

    fn model1() -> ModelParams {
        ModelParams {
            sigma_h: 0.099,
            sigma_mo: 0.12,
            rho_1: 0.35,
            sigma_ml: 0.050,
            sigma_ml_overrides: BTreeMap::from([("TH".to_string(), 0.12)]),
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

    fn profile(company: &str, y0: &[(Lob, f64)]) -> LiabilityProfile {
        let lobs = y0
            .iter()
            .map(|&(lob, y)| {
                (
                    lob,
                    LobFigures {
                        premium: 1.0,
                        r0: y,
                        p0: 0.0,
                    },
                )
            })
            .collect();
        LiabilityProfile::new(company, lobs).unwrap()
    }

    #[test]
    fn uncorrelated_normal_part_is_pythagorean() {
        let params = ModelParams {
            rho_1: 0.0,
            ..model1()
        };
        let p = profile(
            "X",
            &[
                (Lob::H, 3.0),
                (Lob::MO, 2.0),
                (Lob::IA, 1.0),
                (Lob::BLP, 1.0),
            ],
        );
        let m = build_mixed_model(&p, &params).unwrap();
        let expected = ((3.0 * 0.099f64).powi(2) + (2.0 * 0.12f64).powi(2)).sqrt();
        assert!((m.sigma_normal - expected).abs() < 1e-15);
    }

    #[test]
    fn folksam_model_one_inputs() {
        let p = profile(
            "F",
            &[
                (Lob::IA, 5.05 + 1.11),
                (Lob::H, 1.12 + 1.76),
                (Lob::BLP, 0.14 + 0.18),
                (Lob::ML, 4.32 + 0.74),
                (Lob::MO, 0.18 + 1.13),
            ],
        );
        let m = build_mixed_model(&p, &model1()).unwrap();
        assert!((m.sigma_normal - 0.449).abs() < 0.001, "{}", m.sigma_normal);
        assert!((m.components[0].gp.beta - 0.542).abs() < 0.001);
        assert!((m.components[1].gp.beta - 0.0512).abs() < 0.0001);
    }

    #[test]
    fn zero_liability_component_is_dropped() {
        let p = profile("X", &[(Lob::H, 1.0), (Lob::BLP, 1.0)]);
        let m = build_mixed_model(&p, &model1()).unwrap();
        assert_eq!(m.dropped, vec![Lob::IA]);
        assert_eq!(m.components.len(), 1);
        assert_eq!(m.warnings.len(), 1);
    }

    #[test]
    fn company_override_for_motor_liability() {
        let p = |c: &str| profile(c, &[(Lob::ML, 1.0)]);
        let params = model1();
        assert!((build_mixed_model(&p("TH"), &params).unwrap().sigma_normal - 0.12).abs() < 1e-15);
        assert!((build_mixed_model(&p("F"), &params).unwrap().sigma_normal - 0.05).abs() < 1e-15);
    }

    #[test]
    fn symmetric_quantiles() {
        assert!((symmetric_gp_quantile(1.0, 0.0, 0.995).unwrap() - 100f64.ln()).abs() < 1e-12);
        assert!((symmetric_gp_quantile(1.0, 0.0, 0.75).unwrap() - 2f64.ln()).abs() < 1e-12);
        let q = symmetric_gp_quantile(2.0, 0.1, 0.99).unwrap();
        assert!((q - 20.0 * (50f64.powf(0.1) - 1.0)).abs() < 1e-12);
        assert!(symmetric_gp_quantile(1.0, 0.0, 0.5).is_err());
        assert!(symmetric_gp_quantile(0.0, 0.0, 0.9).is_err());
    }

    #[test]
    fn model_sigma_table() {
        let rows = component_sigma_table(&model1(), None).unwrap();
        let ia = rows.iter().find(|r| r.lob == Lob::IA).unwrap();
        assert!((ia.sigma - 2f64.sqrt() * 0.088).abs() < 1e-15);
        assert!((ia.ratio - 100f64.ln() / 2f64.sqrt()).abs() < 1e-12);
        let h = rows.iter().find(|r| r.lob == Lob::H).unwrap();
        assert!((h.ratio - 2.5758).abs() < 1e-4);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let p = profile("X", &[(Lob::H, 1.0)]);
        let bad = ModelParams {
            rho_1: 1.0,
            ..model1()
        };
        assert!(matches!(build_mixed_model(&p, &bad), Err(Error::Config(_))));
        let bad = ModelParams {
            sigma_h: -0.1,
            ..model1()
        };
        assert!(build_mixed_model(&p, &bad).is_err());
    }
}
