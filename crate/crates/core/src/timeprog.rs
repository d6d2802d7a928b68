//! Piecewise-linear scalar programs of time.
//!
//! Every time-dependent input of a crawler (rest-length offsets, friction
//! coefficients, active distortion amplitudes) is a [`TimeProgram`]: an ordered
//! list of breakpoints joined by straight segments, optionally repeated with a
//! fixed period. Values at breakpoints are returned exactly, so simulations can
//! align their time grid with the breakpoints and see exact inputs there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to identify coincident breakpoint times.
const TIME_EPS: f64 = 1e-12;

/// Continuous piecewise-linear function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProgram", into = "RawProgram")]
pub struct TimeProgram {
    times: Vec<f64>,
    values: Vec<f64>,
    period: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawProgram {
    breakpoints: Vec<[f64; 2]>,
    #[serde(default)]
    period: Option<f64>,
}

impl TryFrom<RawProgram> for TimeProgram {
    type Error = Error;

    fn try_from(raw: RawProgram) -> Result<Self> {
        let points = raw.breakpoints.iter().map(|p| (p[0], p[1])).collect();
        TimeProgram::build(points, raw.period)
    }
}

impl From<TimeProgram> for RawProgram {
    fn from(p: TimeProgram) -> Self {
        RawProgram {
            breakpoints: p.times.iter().zip(&p.values).map(|(&t, &v)| [t, v]).collect(),
            period: p.period,
        }
    }
}

/// Lipschitz constant and value range of a program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProgramBounds {
    pub lipschitz: f64,
    pub lo: f64,
    pub hi: f64,
}

impl TimeProgram {
    /// Non-periodic program defined on `[first time, last time]`.
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        Self::build(breakpoints, None)
    }

    /// Program repeated with period equal to its breakpoint span.
    pub fn periodic(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        let span = match (breakpoints.first(), breakpoints.last()) {
            (Some(a), Some(b)) => b.0 - a.0,
            _ => 0.0,
        };
        Self::build(breakpoints, Some(span))
    }

    /// Constant program, valid for every time.
    pub fn constant(value: f64) -> Self {
        TimeProgram {
            times: vec![0.0, 1.0],
            values: vec![value, value],
            period: Some(1.0),
        }
    }

    fn build(breakpoints: Vec<(f64, f64)>, period: Option<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::Structural(
                "a time program needs at least 2 breakpoints".into(),
            ));
        }
        if breakpoints.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::Structural("non-finite breakpoint".into()));
        }
        for w in breakpoints.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Structural(format!(
                    "breakpoint times must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        let (times, values): (Vec<f64>, Vec<f64>) = breakpoints.into_iter().unzip();
        if let Some(p) = period {
            let span = times[times.len() - 1] - times[0];
            if !(p > 0.0) || (p - span).abs() > TIME_EPS * span.max(1.0) {
                return Err(Error::Structural(format!(
                    "period {p} must equal the breakpoint span {span}"
                )));
            }
            let (first, last) = (values[0], values[values.len() - 1]);
            if (first - last).abs() > TIME_EPS * first.abs().max(last.abs()).max(1.0) {
                return Err(Error::Structural(format!(
                    "periodic program must start and end at the same value ({first} vs {last})"
                )));
            }
        }
        Ok(TimeProgram { times, values, period })
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn is_periodic(&self) -> bool {
        self.period.is_some()
    }

    /// Domain of a non-periodic program; `None` when the program is periodic.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self.period {
            Some(_) => None,
            None => Some((self.times[0], self.times[self.times.len() - 1])),
        }
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let start = self.times[0];
        let end = self.times[self.times.len() - 1];
        let t = match self.period {
            Some(p) => {
                if t >= start && t <= end {
                    t
                } else {
                    start + (t - start).rem_euclid(p)
                }
            }
            None => {
                if !(t >= start && t <= end) {
                    return Err(Error::Domain { t, start, end });
                }
                t
            }
        };
        Ok(self.interpolate(t))
    }

    fn interpolate(&self, t: f64) -> f64 {
        match self.times.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(i) => self.values[i],
            Err(i) => {
                if i == 0 {
                    return self.values[0];
                }
                if i >= self.times.len() {
                    return self.values[self.values.len() - 1];
                }
                let (t0, t1) = (self.times[i - 1], self.times[i]);
                let (v0, v1) = (self.values[i - 1], self.values[i]);
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Maximal absolute slope and the extreme breakpoint values.
    pub fn lipschitz_and_bounds(&self) -> ProgramBounds {
        let lipschitz = self
            .times
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, v)| ((v[1] - v[0]) / (t[1] - t[0])).abs())
            .fold(0.0, f64::max);
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ProgramBounds { lipschitz, lo, hi }
    }

    /// Breakpoint times falling in `[t0, t1]`, periodic copies included.
    pub fn breakpoints_in(&self, t0: f64, t1: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match self.period {
            None => out.extend(self.times.iter().copied().filter(|&t| t >= t0 && t <= t1)),
            Some(p) => {
                let start = self.times[0];
                let k0 = ((t0 - start) / p).floor() as i64 - 1;
                let k1 = ((t1 - start) / p).ceil() as i64 + 1;
                for k in k0..=k1 {
                    let shift = k as f64 * p;
                    out.extend(
                        self.times
                            .iter()
                            .map(|&t| t + shift)
                            .filter(|&t| t >= t0 && t <= t1),
                    );
                }
            }
        }
        out
    }

    /// The program `t -> self(factor * t)`.
    pub fn time_scaled(&self, factor: f64) -> Self {
        assert!(factor > 0.0, "time scaling factor must be positive");
        TimeProgram {
            times: self.times.iter().map(|t| t / factor).collect(),
            values: self.values.clone(),
            period: self.period.map(|p| p / factor),
        }
    }

    /// The program `t -> c * self(t)`.
    pub fn scaled(&self, c: f64) -> Self {
        TimeProgram {
            times: self.times.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            period: self.period,
        }
    }

    /// Exact linear combination `sum_k c_k * p_k(t)`.
    ///
    /// If every term is periodic with the same period and phase the result is
    /// periodic too. Otherwise the result lives on the intersection of the
    /// non-periodic domains, with periodic terms unrolled over it.
    pub fn linear_combination(terms: &[(f64, &TimeProgram)]) -> Result<Self> {
        if terms.is_empty() {
            return Ok(TimeProgram::constant(0.0));
        }
        let first = terms[0].1;
        let all_same_period = terms.iter().all(|(_, p)| {
            match (p.period, first.period) {
                (Some(a), Some(b)) => {
                    (a - b).abs() <= TIME_EPS * a.max(1.0)
                        && (p.times[0] - first.times[0]).abs() <= TIME_EPS * a.max(1.0)
                }
                _ => false,
            }
        });
        let (t0, t1) = if all_same_period {
            let start = first.times[0];
            (start, start + first.period.unwrap_or(1.0))
        } else {
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for (_, p) in terms {
                if let Some((a, b)) = p.domain() {
                    lo = lo.max(a);
                    hi = hi.min(b);
                }
            }
            if !lo.is_finite() || !hi.is_finite() || hi <= lo {
                return Err(Error::Structural(
                    "cannot combine programs without a common bounded domain".into(),
                ));
            }
            (lo, hi)
        };
        let programs: Vec<&TimeProgram> = terms.iter().map(|(_, p)| *p).collect();
        let grid = merge_breakpoints(&programs, t0, t1);
        let mut points = Vec::with_capacity(grid.len());
        for &t in &grid {
            let mut v = 0.0;
            for (c, p) in terms {
                v += c * p.eval(t)?;
            }
            points.push((t, v));
        }
        if all_same_period {
            // exact periodic closure
            let n = points.len();
            points[n - 1].1 = points[0].1;
            TimeProgram::periodic(points)
        } else {
            TimeProgram::new(points)
        }
    }
}

/// Sorted union of the breakpoints of `programs` inside `[t0, t1]`, with both
/// endpoints included and coincident times merged.
pub fn merge_breakpoints(programs: &[&TimeProgram], t0: f64, t1: f64) -> Vec<f64> {
    let mut all = vec![t0, t1];
    for p in programs {
        all.extend(p.breakpoints_in(t0, t1));
    }
    all.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for t in all {
        match out.last() {
            Some(&last) if (t - last).abs() <= TIME_EPS * t.abs().max(1.0) => {}
            _ => out.push(t),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strategy_a_mu1() -> TimeProgram {
        TimeProgram::periodic(vec![(0.0, 1.0), (0.25, 1.5), (0.75, 0.5), (1.0, 1.0)]).unwrap()
    }

    #[test]
    fn triangle_midpoint() {
        let l = 2.5;
        let p = TimeProgram::new(vec![(0.0, 0.0), (0.5, l), (1.0, 0.0)]).unwrap();
        assert_eq!(p.eval(0.25).unwrap(), l / 2.0);
    }

    #[test]
    fn strategy_a_schedule_peak() {
        let p = strategy_a_mu1();
        assert_eq!(p.eval(0.25).unwrap(), 1.5);
        assert_eq!(p.eval(1.25).unwrap(), 1.5);
        assert!((p.eval(0.1).unwrap() - 1.2).abs() < 1e-15);
    }

    #[test]
    fn constant_everywhere() {
        let p = TimeProgram::constant(3.25);
        for t in [-7.3, 0.0, 0.5, 12.0] {
            assert_eq!(p.eval(t).unwrap(), 3.25);
        }
    }

    #[test]
    fn outside_domain_is_an_error() {
        let p = TimeProgram::new(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert!(matches!(p.eval(1.5), Err(Error::Domain { .. })));
        assert!(matches!(p.eval(-0.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn bounds() {
        let b = strategy_a_mu1().lipschitz_and_bounds();
        assert_eq!((b.lipschitz, b.lo, b.hi), (2.0, 0.5, 1.5));
        let b = TimeProgram::constant(4.0).lipschitz_and_bounds();
        assert_eq!((b.lipschitz, b.lo, b.hi), (0.0, 4.0, 4.0));
        let b = TimeProgram::new(vec![(0.0, 0.0), (1.0, 3.0)]).unwrap().lipschitz_and_bounds();
        assert_eq!((b.lipschitz, b.lo, b.hi), (3.0, 0.0, 3.0));
    }

    #[test]
    fn merge() {
        let a = TimeProgram::new(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]).unwrap();
        let b = TimeProgram::new(vec![(0.0, 1.0), (0.25, 1.5), (0.75, 0.5), (1.0, 1.0)]).unwrap();
        assert_eq!(merge_breakpoints(&[&a, &b], 0.0, 1.0), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(merge_breakpoints(&[&a], 0.0, 1.0), vec![0.0, 0.5, 1.0]);
        assert_eq!(merge_breakpoints(&[&a, &a.clone()], 0.0, 1.0), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn periodic_merge_unrolls() {
        let p = strategy_a_mu1();
        assert_eq!(
            merge_breakpoints(&[&p], 0.0, 2.0),
            vec![0.0, 0.25, 0.75, 1.0, 1.25, 1.75, 2.0]
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TimeProgram::new(vec![(0.0, 1.0)]).is_err());
        assert!(TimeProgram::new(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(TimeProgram::periodic(vec![(0.0, 1.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn linear_combination_is_pointwise() {
        let a = strategy_a_mu1();
        let b = TimeProgram::periodic(vec![(0.0, 0.0), (0.5, 2.0), (1.0, 0.0)]).unwrap();
        let c = TimeProgram::linear_combination(&[(2.0, &a), (-0.5, &b)]).unwrap();
        assert!(c.is_periodic());
        for i in 0..=40 {
            let t = i as f64 * 0.05 - 0.3;
            let expect = 2.0 * a.eval(t).unwrap() - 0.5 * b.eval(t).unwrap();
            assert!((c.eval(t).unwrap() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn json_round_trip() {
        let p = strategy_a_mu1();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"breakpoints":[[0.0,1.0],[0.25,1.5],[0.75,0.5],[1.0,1.0]],"period":1.0}"#);
        let q: TimeProgram = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let bad: std::result::Result<TimeProgram, _> =
            serde_json::from_str(r#"{"breakpoints":[[0,1],[0,2]],"period":null}"#);
        assert!(bad.is_err());
    }
}
