//! Separable dry-friction dissipation and the uniqueness tests built on it.
//!
//! Point `i` dissipates `w_i (μ₊ⁱ(t) u⁺ + μ₋ⁱ(t) u⁻)` where `u⁺, u⁻ ≥ 0` are the
//! positive and negative parts of its velocity. The weights `w_i` default to
//! one and carry lumped lengths for discretized continua.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::chi;
use crate::timeprog::{merge_breakpoints, TimeProgram};

/// Absolute tolerance (force units) below which two friction sums count as equal.
pub const TIE_TOL: f64 = 1e-12;
/// Gap below which a uniqueness test passes but is reported as ill-conditioned.
pub const NEAR_TIE_TOL: f64 = 1e-9;
/// Largest number of subset classes enumerated exhaustively.
pub const SUBSET_LIMIT: usize = 1 << 24;

fn one() -> f64 {
    1.0
}

/// Friction programs of one contact point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Friction {
    /// Resistance to motion in the negative direction.
    pub mu_minus: TimeProgram,
    /// Resistance to motion in the positive direction.
    pub mu_plus: TimeProgram,
    #[serde(default = "one")]
    pub weight: f64,
}

impl Friction {
    pub fn new(mu_minus: TimeProgram, mu_plus: TimeProgram) -> Self {
        Friction { mu_minus, mu_plus, weight: 1.0 }
    }

    pub fn constant(mu_minus: f64, mu_plus: f64) -> Self {
        Friction::new(TimeProgram::constant(mu_minus), TimeProgram::constant(mu_plus))
    }

    /// Same resistance in both directions.
    pub fn isotropic(mu: TimeProgram) -> Self {
        Friction::new(mu.clone(), mu)
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }
}

/// Per-point friction of a whole crawler.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationSpec {
    points: Vec<Friction>,
}

/// Weighted friction coefficients frozen at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    /// `w_i μ₊ⁱ(t)`.
    pub plus: Vec<f64>,
    /// `w_i μ₋ⁱ(t)`.
    pub minus: Vec<f64>,
}

/// Minimizing set of a one-dimensional translation problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VmSet {
    pub lo: f64,
    pub hi: f64,
    pub unique: bool,
}

impl VmSet {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Result of minimizing the dissipation over rigid translations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeReduced {
    /// `R_sh(t, w)`.
    pub value: f64,
    /// Minimal-velocity translation(s).
    pub vm: VmSet,
}

/// Which uniqueness test a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Identical coefficients at every point: `m μ₋ ≠ (N - m) μ₊` for all m.
    PointCount,
    /// General coefficients: `Σ_J μ₋ ≠ Σ_{Jᶜ} μ₊` for all subsets J.
    SubsetBalance,
    /// The pointwise condition holds for almost every time.
    AlmostEverywhere,
    /// Coefficients stay bounded away from zero.
    PositiveLowerBound,
}

/// Failing configuration of a uniqueness test.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// Number of points moving backwards.
    Count(usize),
    /// Indices of the points moving backwards.
    Subset(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub holds: bool,
    pub condition: Condition,
    pub witness: Option<Witness>,
    pub time: Option<f64>,
    /// Smallest `|Σ_J μ₋ - Σ_{Jᶜ} μ₊|` seen.
    pub min_gap: f64,
    /// Passed, but with a gap below [`NEAR_TIE_TOL`].
    pub near_tie: bool,
    /// Only a random sample of subsets was examined.
    pub partial: bool,
}

/// Time-dependent uniqueness and regularity of a friction schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeDependentReport {
    /// The pointwise test fails at most on a null set of times.
    pub almost_everywhere: UniquenessReport,
    /// Coefficients are bounded below by a positive constant.
    pub lower_bound: UniquenessReport,
    /// Times where the pointwise test fails without failing on a whole segment.
    pub isolated_failures: Vec<f64>,
    /// Segments on which the pointwise test fails identically.
    pub interval_failures: Vec<(f64, f64)>,
    /// Smallest coefficient over the schedule.
    pub alpha_lower: f64,
    /// Largest coefficient over the schedule.
    pub alpha_upper: f64,
    /// Largest time slope of any coefficient.
    pub lipschitz: f64,
}

impl TimeDependentReport {
    /// Both time-dependent conditions hold.
    pub fn regular(&self) -> bool {
        self.almost_everywhere.holds && self.lower_bound.holds
    }
}

impl DissipationSpec {
    pub fn new(points: Vec<Friction>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Structural("no friction points".into()));
        }
        for (i, f) in points.iter().enumerate() {
            if !(f.weight > 0.0) || !f.weight.is_finite() {
                return Err(Error::Structural(format!("point {i} has weight {}", f.weight)));
            }
            for p in [&f.mu_minus, &f.mu_plus] {
                if p.breakpoints().any(|(_, v)| v < 0.0) {
                    return Err(Error::Structural(format!(
                        "point {i} has a negative friction coefficient"
                    )));
                }
            }
        }
        Ok(DissipationSpec { points })
    }

    /// Identical constant friction at `n` points.
    pub fn homogeneous(n: usize, mu_minus: f64, mu_plus: f64) -> Self {
        DissipationSpec { points: vec![Friction::constant(mu_minus, mu_plus); n] }
    }

    /// Constant friction from per-point coefficient lists.
    pub fn constant(mu_minus: &[f64], mu_plus: &[f64]) -> Result<Self> {
        Self::new(
            mu_minus
                .iter()
                .zip(mu_plus)
                .map(|(&m, &p)| Friction::constant(m, p))
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Friction] {
        &self.points
    }

    pub fn programs(&self) -> impl Iterator<Item = &TimeProgram> {
        self.points.iter().flat_map(|f| [&f.mu_minus, &f.mu_plus])
    }

    pub fn time_scaled(&self, factor: f64) -> Self {
        DissipationSpec {
            points: self
                .points
                .iter()
                .map(|f| Friction {
                    mu_minus: f.mu_minus.time_scaled(factor),
                    mu_plus: f.mu_plus.time_scaled(factor),
                    weight: f.weight,
                })
                .collect(),
        }
    }

    pub fn coefficients(&self, t: f64) -> Result<Coefficients> {
        let mut plus = Vec::with_capacity(self.n());
        let mut minus = Vec::with_capacity(self.n());
        for f in &self.points {
            plus.push(f.weight * f.mu_plus.eval(t)?);
            minus.push(f.weight * f.mu_minus.eval(t)?);
        }
        Ok(Coefficients { plus, minus })
    }

    pub fn eval_r(&self, t: f64, u: &[f64]) -> Result<f64> {
        Ok(self.coefficients(t)?.eval(u))
    }

    pub fn prox(&self, t: f64, step: f64, v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.coefficients(t)?.prox(step, v))
    }

    /// Dissipation minimized over rigid translations of the shape velocity `w`.
    pub fn shape_reduced(&self, t: f64, w: &[f64]) -> Result<ShapeReduced> {
        let c = chi(w, 0.0);
        let coef = self.coefficients(t)?;
        let vm = coef.translation_minimizers(&c).ok_or(Error::NonCoercive { t })?;
        let v = vm.midpoint();
        let shifted: Vec<f64> = c.iter().map(|ci| ci + v).collect();
        Ok(ShapeReduced { value: coef.eval(&shifted), vm })
    }

    /// Pointwise uniqueness test at time `t`.
    ///
    /// Fails with [`Error::Combinatorial`] when the number of distinct subset
    /// classes exceeds [`SUBSET_LIMIT`]; see [`Self::check_star_sampled`].
    pub fn check_star(&self, t: f64) -> Result<UniquenessReport> {
        let coef = self.coefficients(t)?;
        let mut report = coef.star_exhaustive().ok_or(Error::Combinatorial {
            n: self.n(),
            limit: SUBSET_LIMIT,
        })?;
        report.time = Some(t);
        Ok(report)
    }

    /// Pointwise uniqueness test on `samples` random subsets.
    pub fn check_star_sampled(&self, t: f64, samples: usize, seed: u64) -> Result<UniquenessReport> {
        let mut report = self.coefficients(t)?.star_sampled(samples, seed);
        report.time = Some(t);
        Ok(report)
    }

    fn check_star_any(&self, t: f64) -> Result<UniquenessReport> {
        match self.check_star(t) {
            Err(Error::Combinatorial { .. }) => self.check_star_sampled(t, 1 << 16, 0),
            other => other,
        }
    }

    /// Uniqueness and regularity of the schedule over `[t0, t1]`.
    ///
    /// The pointwise test runs at every merged breakpoint and every segment
    /// midpoint. Coefficients are linear on each segment, so a subset that
    /// ties at the midpoint and at the segment start ties on the whole segment.
    pub fn check_time_dependent(&self, t0: f64, t1: f64) -> Result<TimeDependentReport> {
        let programs: Vec<&TimeProgram> = self.programs().collect();
        let grid = merge_breakpoints(&programs, t0, t1);

        let mut alpha_lower = f64::INFINITY;
        let mut alpha_upper = f64::NEG_INFINITY;
        let mut lipschitz: f64 = 0.0;
        for p in &programs {
            let b = p.lipschitz_and_bounds();
            lipschitz = lipschitz.max(b.lipschitz);
        }
        for &t in &grid {
            for f in &self.points {
                for v in [f.mu_minus.eval(t)?, f.mu_plus.eval(t)?] {
                    alpha_lower = alpha_lower.min(v);
                    alpha_upper = alpha_upper.max(v);
                }
            }
        }

        let mut isolated = Vec::new();
        let mut intervals = Vec::new();
        let mut min_gap = f64::INFINITY;
        let mut near_tie = false;
        let mut partial = false;
        let mut first_witness = None;
        let mut record = |r: &UniquenessReport| {
            min_gap = min_gap.min(r.min_gap);
            near_tie |= r.near_tie;
            partial |= r.partial;
        };
        for (s, &t) in grid.iter().enumerate() {
            let r = self.check_star_any(t)?;
            record(&r);
            if !r.holds {
                isolated.push(t);
            }
            if s + 1 == grid.len() {
                break;
            }
            let mid = 0.5 * (t + grid[s + 1]);
            let rm = self.check_star_any(mid)?;
            record(&rm);
            if rm.holds {
                continue;
            }
            let start = self.coefficients(t)?;
            let ties = self.coefficients(mid)?.tied_subsets(64);
            match ties.into_iter().find(|j| start.subset_gap(j).abs() <= TIE_TOL) {
                Some(j) => {
                    intervals.push((t, grid[s + 1]));
                    if first_witness.is_none() {
                        first_witness = Some((Witness::Subset(j), t));
                    }
                }
                None => isolated.push(mid),
            }
        }
        // segment endpoints that belong to a failing interval are not isolated
        isolated.retain(|&t| !intervals.iter().any(|&(a, b)| t >= a && t <= b));

        let almost_everywhere = UniquenessReport {
            holds: intervals.is_empty(),
            condition: Condition::AlmostEverywhere,
            time: first_witness.as_ref().map(|w| w.1),
            witness: first_witness.map(|w| w.0),
            min_gap,
            near_tie,
            partial,
        };
        let lower_bound = UniquenessReport {
            holds: alpha_lower > 0.0,
            condition: Condition::PositiveLowerBound,
            witness: None,
            time: None,
            min_gap: alpha_lower,
            near_tie: false,
            partial: false,
        };
        Ok(TimeDependentReport {
            almost_everywhere,
            lower_bound,
            isolated_failures: isolated,
            interval_failures: intervals,
            alpha_lower,
            alpha_upper,
            lipschitz,
        })
    }
}

impl Coefficients {
    pub fn n(&self) -> usize {
        self.plus.len()
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        u.iter()
            .enumerate()
            .map(|(i, &ui)| self.eval_point(i, ui))
            .sum()
    }

    pub fn eval_point(&self, i: usize, u: f64) -> f64 {
        if u > 0.0 {
            self.plus[i] * u
        } else {
            -self.minus[i] * u
        }
    }

    /// Asymmetric soft threshold: the minimizer of `|u - v|² / (2 step) + R(u)`.
    pub fn prox(&self, step: f64, v: &[f64]) -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(i, &vi)| self.prox_point(i, step, vi))
            .collect()
    }

    pub fn prox_point(&self, i: usize, step: f64, v: f64) -> f64 {
        let up = step * self.plus[i];
        let down = step * self.minus[i];
        if v > up {
            v - up
        } else if v < -down {
            v + down
        } else {
            0.0
        }
    }

    /// Subdifferential of the point dissipation at velocity `u`.
    pub fn subdifferential(&self, i: usize, u: f64) -> (f64, f64) {
        if u > 0.0 {
            (self.plus[i], self.plus[i])
        } else if u < 0.0 {
            (-self.minus[i], -self.minus[i])
        } else {
            (-self.minus[i], self.plus[i])
        }
    }

    /// Box `C = ∂R(0)` as per-point bounds.
    pub fn stasis_box(&self) -> (Vec<f64>, Vec<f64>) {
        (self.minus.iter().map(|m| -m).collect(), self.plus.clone())
    }

    /// Minimizers of `v ↦ Σ_i R_i(c_i + v)`; `None` if the function is not coercive.
    ///
    /// The slope is `-Σ μ₋` to the left of every breakpoint `-c_i` and grows by
    /// `μ₋ⁱ + μ₊ⁱ` when crossing one, so the minimizer is a weighted median.
    pub fn translation_minimizers(&self, c: &[f64]) -> Option<VmSet> {
        let total_minus: f64 = self.minus.iter().sum();
        let total_plus: f64 = self.plus.iter().sum();
        if !(total_minus > 0.0) || !(total_plus > 0.0) {
            return None;
        }
        let tol = TIE_TOL * (total_minus + total_plus).max(1.0);
        let mut order: Vec<usize> = (0..c.len()).collect();
        order.sort_by(|&a, &b| (-c[a]).total_cmp(&-c[b]));

        let mut slope = -total_minus;
        let mut k = 0;
        while k < order.len() {
            let b = -c[order[k]];
            while k < order.len() && -c[order[k]] == b {
                slope += self.minus[order[k]] + self.plus[order[k]];
                k += 1;
            }
            if slope > tol {
                return Some(VmSet { lo: b, hi: b, unique: true });
            }
            if slope >= -tol {
                let hi = if k < order.len() { -c[order[k]] } else { b };
                return Some(VmSet { lo: b, hi, unique: hi == b });
            }
        }
        None
    }

    /// `Σ_{i∈J} μ₋ⁱ - Σ_{i∉J} μ₊ⁱ`.
    pub fn subset_gap(&self, j: &[usize]) -> f64 {
        let total_plus: f64 = self.plus.iter().sum();
        j.iter().map(|&i| self.minus[i] + self.plus[i]).sum::<f64>() - total_plus
    }

    fn is_homogeneous(&self) -> bool {
        self.plus.iter().all(|&p| p == self.plus[0]) && self.minus.iter().all(|&m| m == self.minus[0])
    }

    /// Points grouped by their value `μ₋ⁱ + μ₊ⁱ`; subsets only matter through
    /// how many points of each group they contain.
    fn groups(&self) -> Vec<(f64, Vec<usize>)> {
        let mut order: Vec<usize> = (0..self.n()).collect();
        let s = |i: usize| self.minus[i] + self.plus[i];
        order.sort_by(|&a, &b| s(a).total_cmp(&s(b)));
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for i in order {
            match groups.last_mut() {
                Some((v, members)) if *v == s(i) => members.push(i),
                _ => groups.push((s(i), vec![i])),
            }
        }
        groups
    }

    /// Visits every subset class, returning early when `visit` returns true.
    /// `None` if there are too many classes.
    fn for_each_class(&self, mut visit: impl FnMut(&[usize], f64) -> bool) -> Option<()> {
        let groups = self.groups();
        let mut classes: usize = 1;
        for (_, m) in &groups {
            classes = classes.checked_mul(m.len() + 1)?;
            if classes > SUBSET_LIMIT {
                return None;
            }
        }
        let total_plus: f64 = self.plus.iter().sum();
        let mut counts = vec![0usize; groups.len()];
        loop {
            let gap: f64 =
                counts.iter().zip(&groups).map(|(&c, (v, _))| c as f64 * v).sum::<f64>() - total_plus;
            if visit(&counts, gap) {
                return Some(());
            }
            let mut g = 0;
            loop {
                if g == counts.len() {
                    return Some(());
                }
                counts[g] += 1;
                if counts[g] <= groups[g].1.len() {
                    break;
                }
                counts[g] = 0;
                g += 1;
            }
        }
    }

    fn subset_from_counts(&self, counts: &[usize]) -> Vec<usize> {
        let mut j: Vec<usize> = self
            .groups()
            .iter()
            .zip(counts)
            .flat_map(|((_, members), &c)| members[..c].to_vec())
            .collect();
        j.sort_unstable();
        j
    }

    fn star_exhaustive(&self) -> Option<UniquenessReport> {
        let homogeneous = self.is_homogeneous();
        let mut min_gap = f64::INFINITY;
        let mut failing: Option<Vec<usize>> = None;
        self.for_each_class(|counts, gap| {
            min_gap = min_gap.min(gap.abs());
            if gap.abs() <= TIE_TOL {
                failing = Some(counts.to_vec());
                true
            } else {
                false
            }
        })?;
        let witness = failing.map(|counts| {
            if homogeneous {
                Witness::Count(counts.iter().sum())
            } else {
                Witness::Subset(self.subset_from_counts(&counts))
            }
        });
        Some(UniquenessReport {
            holds: witness.is_none(),
            condition: if homogeneous { Condition::PointCount } else { Condition::SubsetBalance },
            near_tie: witness.is_none() && min_gap <= NEAR_TIE_TOL,
            witness,
            time: None,
            min_gap,
            partial: false,
        })
    }

    fn star_sampled(&self, samples: usize, seed: u64) -> UniquenessReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut min_gap = f64::INFINITY;
        let mut witness = None;
        for _ in 0..samples {
            let j: Vec<usize> = (0..self.n()).filter(|_| rng.gen_bool(0.5)).collect();
            let gap = self.subset_gap(&j);
            min_gap = min_gap.min(gap.abs());
            if gap.abs() <= TIE_TOL {
                witness = Some(Witness::Subset(j));
                break;
            }
        }
        UniquenessReport {
            holds: witness.is_none(),
            condition: Condition::SubsetBalance,
            near_tie: witness.is_none() && min_gap <= NEAR_TIE_TOL,
            witness,
            time: None,
            min_gap,
            partial: true,
        }
    }

    /// Up to `cap` tied subsets.
    fn tied_subsets(&self, cap: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let done = self.for_each_class(|counts, gap| {
            if gap.abs() <= TIE_TOL {
                out.push(self.subset_from_counts(counts));
            }
            out.len() >= cap
        });
        if done.is_none() {
            // too many classes: fall back to the single-point count view
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for _ in 0..(1 << 16) {
                let j: Vec<usize> = (0..self.n()).filter(|_| rng.gen_bool(0.5)).collect();
                if self.subset_gap(&j).abs() <= TIE_TOL {
                    out.push(j);
                    if out.len() >= cap {
                        break;
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn strategy_a() -> DissipationSpec {
        let mu1 = TimeProgram::periodic(vec![(0.0, 1.0), (0.25, 1.5), (0.75, 0.5), (1.0, 1.0)]).unwrap();
        let mu2 = TimeProgram::linear_combination(&[(-1.0, &mu1), (2.0, &TimeProgram::constant(1.0))]).unwrap();
        DissipationSpec::new(vec![Friction::isotropic(mu1), Friction::isotropic(mu2)]).unwrap()
    }

    fn strategy_c() -> DissipationSpec {
        let mu1 = TimeProgram::periodic(vec![(0.0, 0.5), (0.25, 1.5), (0.5, 1.5), (0.75, 0.5), (1.0, 0.5)]).unwrap();
        let mu2 = TimeProgram::periodic(vec![(0.0, 0.5), (0.25, 0.5), (0.5, 1.5), (0.75, 1.5), (1.0, 0.5)]).unwrap();
        DissipationSpec::new(vec![Friction::isotropic(mu1), Friction::isotropic(mu2)]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let d = DissipationSpec::homogeneous(2, 1.0, 1.0);
        assert_eq!(d.eval_r(0.0, &[1.0, -1.0]).unwrap(), 2.0);
        let d = DissipationSpec::homogeneous(2, 1.0, 2.0);
        assert_eq!(d.eval_r(0.0, &[1.0, -1.0]).unwrap(), 3.0);
        assert_eq!(d.eval_r(0.3, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn prox_examples() {
        let d = DissipationSpec::homogeneous(2, 1.0, 1.0);
        assert_eq!(d.prox(0.0, 1.0, &[2.0, -0.5]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(d.prox(0.0, 1.0, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn prox_matches_grid_search() {
        let coef = Coefficients { plus: vec![0.7, 2.0, 0.1], minus: vec![1.3, 0.4, 3.0] };
        let step = 0.8;
        let v = [1.9, -0.9, -0.05];
        let got = coef.prox(step, &v);
        for i in 0..3 {
            let objective = |u: f64| (u - v[i]).powi(2) / (2.0 * step) + coef.eval_point(i, u);
            let mut best = (f64::INFINITY, 0.0);
            // coarse pass, then a fine pass around the coarse winner
            for k in -40_000..=40_000 {
                let u = k as f64 * 1e-4;
                let f = objective(u);
                if f < best.0 {
                    best = (f, u);
                }
            }
            let centre = best.1;
            for k in -20_000..=20_000 {
                let u = centre + k as f64 * 1e-8;
                let f = objective(u);
                if f < best.0 {
                    best = (f, u);
                }
            }
            assert!((got[i] - best.1).abs() <= 1e-8, "coordinate {i}: {} vs {}", got[i], best.1);
        }
    }

    #[test]
    fn two_point_reduction() {
        let d = DissipationSpec::homogeneous(2, 1.0, 1.0);
        for mus in [(1.0, 2.5), (3.0, 0.5)] {
            let d2 = DissipationSpec::constant(&[mus.0, mus.1], &[mus.0, mus.1]).unwrap();
            let w = 0.8;
            let r = d2.shape_reduced(0.0, &[w]).unwrap();
            assert_relative_eq!(r.value, mus.0.min(mus.1) * w, epsilon = 1e-14);
            let expect = if mus.0 > mus.1 { w / 2.0 } else { -w / 2.0 };
            assert_relative_eq!(r.vm.lo, expect, epsilon = 1e-14);
            assert!(r.vm.unique);
        }
        let r = d.shape_reduced(0.0, &[0.0]).unwrap();
        assert_eq!((r.value, r.vm.lo, r.vm.unique), (0.0, 0.0, true));
        let r = d.shape_reduced(0.0, &[1.0]).unwrap();
        assert!(!r.vm.unique);
        assert_eq!((r.vm.lo, r.vm.hi), (-0.5, 0.5));
    }

    #[test]
    fn shape_reduced_matches_grid_search() {
        let d = DissipationSpec::constant(&[0.4, 1.7, 0.9, 2.2], &[1.1, 0.3, 1.6, 0.8]).unwrap();
        let w = [0.6, -1.3, 0.45];
        let r = d.shape_reduced(0.0, &w).unwrap();
        let c = chi(&w, 0.0);
        let mut best = (f64::INFINITY, 0.0);
        for k in -100_000..=100_000 {
            let v = k as f64 * 1e-4;
            let u: Vec<f64> = c.iter().map(|ci| ci + v).collect();
            let f = d.eval_r(0.0, &u).unwrap();
            if f < best.0 {
                best = (f, v);
            }
        }
        assert!((r.value - best.0).abs() < 1e-3);
        assert!((r.vm.midpoint() - best.1).abs() < 1e-3);
    }

    #[test]
    fn non_coercive() {
        let d = DissipationSpec::homogeneous(3, 0.0, 1.0);
        assert!(matches!(d.shape_reduced(0.0, &[1.0, 0.0]), Err(Error::NonCoercive { .. })));
    }

    #[test]
    fn star_examples() {
        let r = DissipationSpec::homogeneous(2, 1.0, 1.0).check_star(0.0).unwrap();
        assert!(!r.holds);
        assert_eq!(r.witness, Some(Witness::Count(1)));
        assert_eq!(r.condition, Condition::PointCount);
        let r = DissipationSpec::homogeneous(3, 1.0, 2.0).check_star(0.0).unwrap();
        assert!(!r.holds);
        let r = DissipationSpec::homogeneous(3, 1.0, 1.5).check_star(0.0).unwrap();
        assert!(r.holds);
        assert_relative_eq!(r.min_gap, 0.5);
    }

    #[test]
    fn star_heterogeneous_witness() {
        // J = {0}: 1.0 - (0.5 + 0.5) = 0
        let d = DissipationSpec::constant(&[1.0, 2.0, 3.0], &[0.7, 0.5, 0.5]).unwrap();
        let r = d.check_star(0.0).unwrap();
        assert!(!r.holds);
        match r.witness {
            Some(Witness::Subset(j)) => {
                let coef = d.coefficients(0.0).unwrap();
                assert!(coef.subset_gap(&j).abs() <= TIE_TOL);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn star_large_homogeneous_is_exhaustive() {
        let d = DissipationSpec::homogeneous(300, 1.0, 1.7);
        let r = d.check_star(0.0).unwrap();
        assert!(r.holds && !r.partial);
        let d = DissipationSpec::homogeneous(300, 1.0, 2.0);
        assert_eq!(d.check_star(0.0).unwrap().witness, Some(Witness::Count(200)));
    }

    #[test]
    fn star_too_many_classes() {
        let mu: Vec<f64> = (0..30).map(|i| 1.0 + i as f64 * 0.013).collect();
        let d = DissipationSpec::constant(&mu, &mu).unwrap();
        assert!(matches!(d.check_star(0.0), Err(Error::Combinatorial { .. })));
        let r = d.check_star_sampled(0.0, 1000, 3).unwrap();
        assert!(r.partial);
    }

    #[test]
    fn time_dependent_strategy_a() {
        let r = strategy_a().check_time_dependent(0.0, 1.0).unwrap();
        assert_eq!((r.alpha_lower, r.alpha_upper, r.lipschitz), (0.5, 1.5, 2.0));
        assert!(r.almost_everywhere.holds);
        assert!(r.lower_bound.holds);
        assert_eq!(r.isolated_failures, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn time_dependent_strategy_c() {
        let r = strategy_c().check_time_dependent(0.0, 1.0).unwrap();
        assert_eq!((r.alpha_lower, r.alpha_upper, r.lipschitz), (0.5, 1.5, 4.0));
    }

    #[test]
    fn time_dependent_permanent_tie() {
        let r = DissipationSpec::homogeneous(2, 1.0, 1.0).check_time_dependent(0.0, 2.0).unwrap();
        assert!(!r.almost_everywhere.holds);
        assert!(!r.interval_failures.is_empty());
        let zero = DissipationSpec::homogeneous(2, 0.0, 1.0).check_time_dependent(0.0, 1.0).unwrap();
        assert_eq!(zero.alpha_lower, 0.0);
        assert!(!zero.lower_bound.holds);
    }
}
