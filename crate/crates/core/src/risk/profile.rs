use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::Lob;

/// One line's figures at the start of the year: the coming year's premium
/// volume `V`, the reserve prediction `R0` and the premium-liability
/// prediction `P0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LobFigures {
    pub premium: f64,
    pub r0: f64,
    pub p0: f64,
}

impl LobFigures {
    pub fn y0(&self) -> f64 {
        self.r0 + self.p0
    }
}

/// A company's liabilities per line of business.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiabilityProfile {
    company: String,
    lobs: BTreeMap<Lob, LobFigures>,
}

impl LiabilityProfile {
    pub fn new(company: impl Into<String>, lobs: BTreeMap<Lob, LobFigures>) -> Result<Self> {
        let company = company.into();
        for (lob, f) in &lobs {
            if ![f.premium, f.r0, f.p0].iter().all(|v| v.is_finite()) {
                return Err(Error::Validation(format!(
                    "{company} {lob}: non-finite liability figures"
                )));
            }
            if f.premium < 0.0 {
                return Err(Error::Validation(format!(
                    "{company} {lob}: negative premium volume {}",
                    f.premium
                )));
            }
        }
        Ok(Self { company, lobs })
    }

    pub fn company(&self) -> &str {
        &self.company
    }

    pub fn lobs(&self) -> &BTreeMap<Lob, LobFigures> {
        &self.lobs
    }

    pub fn figures(&self, lob: Lob) -> LobFigures {
        self.lobs.get(&lob).copied().unwrap_or_default()
    }

    /// `Y0` for one line; zero when the line is absent.
    pub fn y0(&self, lob: Lob) -> f64 {
        self.figures(lob).y0()
    }

    pub fn total_y0(&self) -> f64 {
        self.lobs.values().map(LobFigures::y0).sum()
    }

    /// Every monetary figure multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let lobs = self
            .lobs
            .iter()
            .map(|(&lob, f)| {
                let g = LobFigures {
                    premium: f.premium * factor,
                    r0: f.r0 * factor,
                    p0: f.p0 * factor,
                };
                (lob, g)
            })
            .collect();
        Self {
            company: self.company.clone(),
            lobs,
        }
    }
}
