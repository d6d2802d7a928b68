//! Ready-made crawlers: the two-point crawler, friction-manipulation
//! strategies, uniform chains and the three-point triangle.

use crate::dissipation::Friction;
use crate::error::Result;
use crate::model::{CrawlerModel, Spring};
use crate::oracle::Strategy;
use crate::timeprog::TimeProgram;

/// Periodic triangle wave with period 1: 0 at t = 0, `amp` at t = 1/2.
pub fn triangle_wave(amp: f64) -> TimeProgram {
    TimeProgram::periodic(vec![(0.0, 0.0), (0.5, amp), (1.0, 0.0)]).expect("valid breakpoints")
}

/// Two points with a single spring of stiffness `k` driven by a triangle
/// wave of amplitude `delta_l`, same constant friction at both points.
pub fn two_point(k: f64, mu_minus: f64, mu_plus: f64, delta_l: f64) -> Result<CrawlerModel> {
    CrawlerModel::new(
        vec![0.0, 1.0],
        vec![Spring::new(0, 1, k, triangle_wave(delta_l))],
        vec![Friction::constant(mu_minus, mu_plus); 2],
    )
}

/// Isotropic friction schedules of both points for a strategy, with base level `mu`.
pub fn strategy_schedules(which: Strategy, mu: f64) -> (TimeProgram, TimeProgram) {
    let p = |pts: &[(f64, f64)]| {
        TimeProgram::periodic(pts.iter().map(|&(t, v)| (t, v * mu)).collect()).expect("valid breakpoints")
    };
    match which {
        Strategy::A => (
            p(&[(0.0, 1.0), (0.25, 1.5), (0.75, 0.5), (1.0, 1.0)]),
            p(&[(0.0, 1.0), (0.25, 0.5), (0.75, 1.5), (1.0, 1.0)]),
        ),
        Strategy::B => (
            p(&[(0.0, 0.5), (0.5, 1.5), (1.0, 0.5)]),
            p(&[(0.0, 1.5), (0.5, 0.5), (1.0, 1.5)]),
        ),
        Strategy::C => (
            p(&[(0.0, 0.5), (0.25, 1.5), (0.5, 1.5), (0.75, 0.5), (1.0, 0.5)]),
            p(&[(0.0, 0.5), (0.25, 0.5), (0.5, 1.5), (0.75, 1.5), (1.0, 0.5)]),
        ),
    }
}

/// Two-point crawler with isotropic time-dependent friction following a strategy.
pub fn strategy_model(which: Strategy, k: f64, mu: f64, l_max: f64) -> Result<CrawlerModel> {
    let (m1, m2) = strategy_schedules(which, mu);
    CrawlerModel::new(
        vec![0.0, 1.0],
        vec![Spring::new(0, 1, k, triangle_wave(l_max))],
        vec![Friction::isotropic(m1), Friction::isotropic(m2)],
    )
}

/// `n` points in a line, neighbours joined by identical springs.
pub fn chain(n: usize, k: f64, rest: TimeProgram, friction: Friction) -> Result<CrawlerModel> {
    let springs = (0..n.saturating_sub(1)).map(|i| Spring::new(i, i + 1, k, rest.clone())).collect();
    CrawlerModel::new((0..n).map(|i| i as f64).collect(), springs, vec![friction; n])
}

/// Three points where the outer pair is also linked directly, with constant
/// per-point friction. Rest offsets are the 0→1 and 1→2 waves; the 0→2 link
/// follows their sum so the triangle is compatible.
pub fn triangle(
    k: [f64; 3],
    rest01: TimeProgram,
    rest12: TimeProgram,
    mu_minus: [f64; 3],
    mu_plus: [f64; 3],
) -> Result<CrawlerModel> {
    let rest02 = TimeProgram::linear_combination(&[(1.0, &rest01), (1.0, &rest12)])?;
    CrawlerModel::new(
        vec![0.0, 1.0, 2.0],
        vec![Spring::new(0, 1, k[0], rest01), Spring::new(1, 2, k[1], rest12), Spring::new(0, 2, k[2], rest02)],
        (0..3).map(|i| Friction::constant(mu_minus[i], mu_plus[i])).collect(),
    )
}
