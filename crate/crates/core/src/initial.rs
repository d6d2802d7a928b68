//! Initial states given as an explicit vector or by keyword.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{chi, CrawlerModel, QuadraticEnergy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKeyword {
    /// Stress-free shape.
    Relaxed,
    /// Uniform shape tension as large as the end points allow.
    MaxCompression,
    /// Uniform shape tension as negative as the end points allow.
    MaxElongation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Positions(Vec<f64>),
    Keyword(InitialKeyword),
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Keyword(InitialKeyword::Relaxed)
    }
}

impl InitialState {
    /// Positions at `t0`, with zero net translation for keywords.
    pub fn resolve(&self, model: &CrawlerModel, energy: &QuadraticEnergy, t0: f64) -> Result<Vec<f64>> {
        let n = model.n();
        let kw = match self {
            InitialState::Positions(x) => {
                if x.len() != n {
                    return Err(Error::Structural(format!("initial state has {} entries for {n} points", x.len())));
                }
                return Ok(x.clone());
            }
            InitialState::Keyword(kw) => *kw,
        };
        if n == 1 {
            return Ok(vec![0.0]);
        }
        let coef = model.dissipation().coefficients(t0)?;
        // a uniform shape tension τ loads only the end points: -τ on the first, +τ on the last
        let tau = match kw {
            InitialKeyword::Relaxed => 0.0,
            InitialKeyword::MaxCompression => coef.minus[0].min(coef.plus[n - 1]),
            InitialKeyword::MaxElongation => -coef.plus[0].min(coef.minus[n - 1]),
        };
        let z = energy.shape_for_tension(t0, &vec![tau; n - 1])?;
        Ok(chi(&z, 0.0))
    }
}
