//! Closed-form per-cycle results for the two- and three-point crawlers and the
//! homogeneous continuum. Pure formulas, used as reference values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Friction-manipulation schedule of the two-point crawler with isotropic,
/// time-dependent friction (see [`crate::presets::strategy_model`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    A,
    B,
    C,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchTime {
    pub name: String,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    /// Net translation per cycle, positive forwards.
    pub per_cycle_displacement: f64,
    /// Named switch times within one cycle.
    pub switch_times: Vec<SwitchTime>,
    /// Every time in `[0, 1)` where the shape starts slipping in a steady cycle.
    pub slip_onsets: Vec<f64>,
    pub regime: String,
    /// Parameters sit on a boundary between two regimes.
    pub boundary: bool,
    /// The steady cycle is reached after a transient the formula does not describe.
    pub transient: bool,
}

impl OracleResult {
    fn new(displacement: f64, regime: &str) -> Self {
        OracleResult {
            per_cycle_displacement: displacement,
            switch_times: Vec::new(),
            slip_onsets: Vec::new(),
            regime: regime.into(),
            boundary: false,
            transient: false,
        }
    }

    fn switch(mut self, name: &str, t: f64) -> Self {
        self.switch_times.push(SwitchTime { name: name.into(), t });
        self
    }

    fn onsets(mut self, ts: &[f64]) -> Self {
        self.slip_onsets = ts.to_vec();
        self
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Structural(format!("{name} must be positive, got {v}")))
    }
}

/// Two points joined by a spring whose rest length follows a triangle wave of
/// amplitude `delta_l`, with the same constant anisotropic friction at both points.
pub fn two_point_constant(k: f64, mu_minus: f64, mu_plus: f64, delta_l: f64) -> Result<OracleResult> {
    positive("k", k)?;
    positive("mu_minus", mu_minus)?;
    positive("mu_plus", mu_plus)?;
    positive("delta_l", delta_l)?;
    if mu_minus == mu_plus {
        return Err(Error::UniquenessViolation(
            "equal friction in both directions leaves the net translation undetermined".into(),
        ));
    }
    let mu_min = mu_minus.min(mu_plus);
    let threshold = 2.0 * mu_min / k;
    if delta_l <= threshold {
        let mut r = OracleResult::new(0.0, "stasis");
        r.boundary = delta_l == threshold;
        return Ok(r);
    }
    let sign = if mu_plus < mu_minus { 1.0 } else { -1.0 };
    Ok(OracleResult::new(sign * (delta_l - threshold), "locomotion"))
}

/// Qualitative motion of the homogeneous three-point chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThreePointRegime {
    /// Net motion is possible only towards lower friction.
    OneWay,
    /// Net motion is possible in both directions.
    TwoWay,
}

pub fn three_point_regime(mu_minus: f64, mu_plus: f64) -> Result<ThreePointRegime> {
    positive("mu_minus", mu_minus)?;
    positive("mu_plus", mu_plus)?;
    if mu_plus == 2.0 * mu_minus || mu_minus == 2.0 * mu_plus {
        return Err(Error::UniquenessViolation(format!(
            "friction ratio {} is critical for three points",
            mu_plus / mu_minus
        )));
    }
    if mu_plus > 2.0 * mu_minus || mu_minus > 2.0 * mu_plus {
        Ok(ThreePointRegime::OneWay)
    } else {
        Ok(ThreePointRegime::TwoWay)
    }
}

/// Homogeneous bar of length `l` under a uniform distortion cycling between 0
/// and `delta_eps`. Positive when `mu_plus < mu_minus`.
pub fn continuum_homogeneous(k: f64, l: f64, mu_minus: f64, mu_plus: f64, delta_eps: f64) -> Result<f64> {
    positive("k", k)?;
    positive("l", l)?;
    positive("mu_minus", mu_minus)?;
    positive("mu_plus", mu_plus)?;
    positive("delta_eps", delta_eps)?;
    if mu_minus == mu_plus {
        return Ok(0.0);
    }
    let (lo, hi) = (mu_minus.min(mu_plus), mu_minus.max(mu_plus));
    if delta_eps <= lo * l / k {
        return Ok(0.0);
    }
    let sign = if mu_plus < mu_minus { 1.0 } else { -1.0 };
    Ok(sign * l * (delta_eps - lo * l / k) * (hi - lo) / (hi + lo))
}

/// Per-cycle result of a friction-manipulation strategy with shape amplitude `l_max`.
pub fn strategy_result(which: Strategy, k: f64, mu: f64, l_max: f64) -> Result<OracleResult> {
    positive("k", k)?;
    positive("mu", mu)?;
    positive("l_max", l_max)?;
    let r = k * l_max / mu;
    let kl = k * l_max;
    let mut out = match which {
        Strategy::A => {
            if r == 1.0 {
                return Err(Error::RegimeBoundary(
                    "strategy A with k L_max = μ violates the uniqueness condition".into(),
                ));
            }
            if r < 1.0 {
                let mut o = OracleResult::new(0.0, "stasis after transient");
                o.transient = true;
                o
            } else if r < 2.0 {
                OracleResult::new(0.0, "stasis")
            } else if r <= 3.0 {
                let t2 = mu / (2.0 * (kl - mu));
                OracleResult::new(l_max - 2.0 * mu / k, "late slip")
                    .switch("t2", t2)
                    .onsets(&[t2, t2 + 0.5])
            } else {
                let t1 = mu / (kl + mu);
                OracleResult::new(l_max - 2.0 * mu / k, "early slip")
                    .switch("t1", t1)
                    .onsets(&[t1, t1 + 0.5])
            }
        }
        Strategy::B => {
            if r <= 1.0 {
                OracleResult::new(0.0, "stasis")
            } else if r <= 3.0 {
                let t4 = mu / (kl + mu);
                OracleResult::new(l_max - mu / k, "late slip")
                    .switch("t4", t4)
                    .onsets(&[t4, t4 + 0.5])
            } else {
                let t3 = mu / (2.0 * (kl - mu));
                OracleResult::new(2.0 * mu / k, "early slip")
                    .switch("t3", t3)
                    .onsets(&[t3, t3 + 0.5])
            }
        }
        Strategy::C => {
            if r <= 2.0 {
                OracleResult::new(0.0, "stasis")
            } else {
                let t5 = mu / (2.0 * kl);
                let base = OracleResult::new(l_max - 2.0 * mu / k, "").switch("t5", t5);
                if r < 4.0 {
                    let t6 = 0.5 + mu / kl;
                    let mut o = base.switch("t6", t6).onsets(&[t5, t6]);
                    o.regime = "late contraction".into();
                    o
                } else {
                    let t7 = 0.5 + 3.0 * mu / (2.0 * kl + 4.0 * mu);
                    let mut o = base.switch("t7", t7).onsets(&[t5, t7]);
                    o.regime = "early contraction".into();
                    o
                }
            }
        }
    };
    let boundaries: &[f64] = match which {
        Strategy::A => &[2.0, 3.0],
        Strategy::B => &[1.0, 3.0],
        Strategy::C => &[2.0, 4.0],
    };
    out.boundary = boundaries.contains(&r);
    Ok(out)
}
