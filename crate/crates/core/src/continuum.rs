//! One-dimensional continuous crawlers discretized by linear finite elements.
//!
//! The body occupies `[ξ_a, ξ_b]` with stiffness `k(ξ)`, active distortion
//! `ε(t, ξ)` and friction densities `μ±(t, ξ)`. Spatial profiles are piecewise
//! constant, so every element and hat-function integral below is exact.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dissipation::Friction;
use crate::error::{Error, Result};
use crate::model::{chi, CrawlerModel, Spring};
use crate::solver::{simulate_assembled, SolverConfig};
use crate::timeprog::TimeProgram;

/// Piecewise-constant function of the material coordinate.
///
/// `values[m]` holds between `breaks[m-1]` and `breaks[m]`, with the domain
/// ends closing the first and last pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    #[serde(default)]
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn constant(v: f64) -> Self {
        Profile { breaks: Vec::new(), values: vec![v] }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.values.len() != self.breaks.len() + 1 {
            return Err(Error::Structural(format!(
                "{name}: {} values for {} breaks",
                self.values.len(),
                self.breaks.len()
            )));
        }
        if self.breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Structural(format!("{name}: breaks must increase")));
        }
        Ok(())
    }

    /// `(start, end, value)` pieces clipped to `[a, b]`.
    fn pieces(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.values.len()).filter_map(move |m| {
            let lo = if m == 0 { f64::NEG_INFINITY } else { self.breaks[m - 1] };
            let hi = if m == self.breaks.len() { f64::INFINITY } else { self.breaks[m] };
            let (u, v) = (lo.max(a), hi.min(b));
            (v > u).then_some((u, v, self.values[m]))
        })
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.pieces(a, b).map(|(u, v, c)| c * (v - u)).sum()
    }

    /// `∫_a^b f(ξ) φ(ξ) dξ` for an affine `φ`.
    fn integral_affine(&self, a: f64, b: f64, phi: impl Fn(f64) -> f64) -> f64 {
        self.pieces(a, b).map(|(u, v, c)| c * (v - u) * phi(0.5 * (u + v))).sum()
    }

    /// `∫_a^b f g dξ` for another piecewise-constant `g`.
    fn integral_product(&self, other: &Profile, a: f64, b: f64) -> f64 {
        self.pieces(a, b).map(|(u, v, c)| c * other.integral(u, v)).sum()
    }

    fn min_on(&self, a: f64, b: f64) -> f64 {
        self.pieces(a, b).map(|p| p.2).fold(f64::INFINITY, f64::min)
    }
}

/// Separable space-time field `program(t) · profile(ξ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub program: TimeProgram,
    pub profile: Profile,
}

impl Term {
    pub fn uniform(program: TimeProgram) -> Self {
        Term { program, profile: Profile::constant(1.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumModel {
    pub domain: (f64, f64),
    pub stiffness: Profile,
    /// Active distortion as a sum of separable terms.
    pub distortion: Vec<Term>,
    pub mu_minus: Vec<Term>,
    pub mu_plus: Vec<Term>,
    pub elements: usize,
}

impl ContinuumModel {
    /// Uniform body of length `l` with uniform distortion `eps(t)` and friction.
    pub fn homogeneous(k: f64, l: f64, mu_minus: f64, mu_plus: f64, eps: TimeProgram, elements: usize) -> Self {
        ContinuumModel {
            domain: (0.0, l),
            stiffness: Profile::constant(k),
            distortion: vec![Term::uniform(eps)],
            mu_minus: vec![Term::uniform(TimeProgram::constant(mu_minus))],
            mu_plus: vec![Term::uniform(TimeProgram::constant(mu_plus))],
            elements,
        }
    }

    pub fn length(&self) -> f64 {
        self.domain.1 - self.domain.0
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.domain;
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Structural("continuum domain must have positive length".into()));
        }
        if self.elements == 0 {
            return Err(Error::Structural("at least one element is required".into()));
        }
        self.stiffness.validate("stiffness")?;
        if !(self.stiffness.min_on(a, b) > 0.0) {
            return Err(Error::Structural("stiffness must be positive everywhere".into()));
        }
        for (name, terms) in [("distortion", &self.distortion), ("mu_minus", &self.mu_minus), ("mu_plus", &self.mu_plus)] {
            for term in terms {
                term.profile.validate(name)?;
            }
        }
        for (name, terms) in [("mu_minus", &self.mu_minus), ("mu_plus", &self.mu_plus)] {
            for term in terms {
                let negative_profile = term.profile.min_on(a, b) < 0.0;
                let negative_program = term.program.breakpoints().any(|(_, v)| v < 0.0);
                if negative_profile || negative_program {
                    return Err(Error::Structural(format!("{name} density must be non-negative")));
                }
            }
        }
        Ok(())
    }

    pub fn discretize(&self) -> Result<CrawlerModel> {
        self.discretize_with(self.elements)
    }

    /// Linear elements with nodes at element boundaries and hat-function lumped friction.
    ///
    /// Element `e` becomes a spring of stiffness `∫_e k / h²` and rest offset
    /// `h ∫_e k ε / ∫_e k`, which reproduces the element energy exactly.
    pub fn discretize_with(&self, elements: usize) -> Result<CrawlerModel> {
        self.validate()?;
        if elements == 0 {
            return Err(Error::Structural("at least one element is required".into()));
        }
        let (a, b) = self.domain;
        let h = (b - a) / elements as f64;
        if !(h > 0.0) {
            return Err(Error::Structural("zero-length element".into()));
        }
        let nodes: Vec<f64> = (0..=elements).map(|i| a + (b - a) * i as f64 / elements as f64).collect();

        let mut springs = Vec::with_capacity(elements);
        for e in 0..elements {
            let (u, v) = (nodes[e], nodes[e + 1]);
            let stiff = self.stiffness.integral(u, v);
            let terms: Vec<(f64, &TimeProgram)> = self
                .distortion
                .iter()
                .map(|term| (h * term.profile.integral_product(&self.stiffness, u, v) / stiff, &term.program))
                .collect();
            let rest = combine(&terms)?;
            springs.push(Spring::new(e, e + 1, stiff / (h * h), rest));
        }

        let mut friction = Vec::with_capacity(elements + 1);
        for i in 0..=elements {
            let lump = |terms: &[Term]| -> Result<TimeProgram> {
                let coef: Vec<(f64, &TimeProgram)> = terms
                    .iter()
                    .map(|term| {
                        let mut w = 0.0;
                        if i > 0 {
                            let (u, v) = (nodes[i - 1], nodes[i]);
                            w += term.profile.integral_affine(u, v, |x| (x - u) / (v - u));
                        }
                        if i < elements {
                            let (u, v) = (nodes[i], nodes[i + 1]);
                            w += term.profile.integral_affine(u, v, |x| (v - x) / (v - u));
                        }
                        (w, &term.program)
                    })
                    .collect();
                combine(&coef)
            };
            friction.push(Friction::new(lump(&self.mu_minus)?, lump(&self.mu_plus)?));
        }
        CrawlerModel::new(nodes, springs, friction)
    }

    /// Common period of the inputs, if every input program is periodic with it.
    pub fn period(&self) -> Option<f64> {
        let mut period: Option<f64> = None;
        for term in self.distortion.iter().chain(&self.mu_minus).chain(&self.mu_plus) {
            let p = term.program.period()?;
            match period {
                Some(q) if (q - p).abs() > 1e-12 * q => return None,
                _ => period = Some(p),
            }
        }
        period
    }
}

fn combine(terms: &[(f64, &TimeProgram)]) -> Result<TimeProgram> {
    match terms {
        [] => Ok(TimeProgram::constant(0.0)),
        [(c, p)] => Ok(p.scaled(*c)),
        _ => TimeProgram::linear_combination(terms),
    }
}

/// Per-cycle displacement for each mesh size in `n_sequence`.
///
/// Each run starts relaxed, spends one warm-up cycle and measures
/// `y(2P) - y(P)`. Runs are independent and execute in parallel.
pub fn converged_cycle_displacement(c: &ContinuumModel, cfg: &SolverConfig, n_sequence: &[usize]) -> Result<Vec<f64>> {
    let period = c
        .period()
        .ok_or_else(|| Error::Structural("cycle displacement needs periodic inputs with one period".into()))?;
    n_sequence
        .par_iter()
        .map(|&n| {
            let model = c.discretize_with(n)?;
            let energy = model.assemble()?;
            let x0 = chi(&energy.relaxed_shape(0.0)?, 0.0);
            let traj = simulate_assembled(&model, &energy, cfg, &x0, 0.0, 2.0 * period)?;
            Ok(traj.displacement(period, 2.0 * period))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn wave(amp: f64) -> TimeProgram {
        TimeProgram::periodic(vec![(0.0, 0.0), (0.5, amp), (1.0, 0.0)]).unwrap()
    }

    #[test]
    fn homogeneous_springs_and_weights() {
        let (k, l, n) = (2.0, 3.0, 6);
        let c = ContinuumModel::homogeneous(k, l, 2.0, 1.0, wave(0.4), n);
        let m = c.discretize().unwrap();
        let h = l / n as f64;
        for s in m.springs() {
            assert_relative_eq!(s.k, k * n as f64 / l, epsilon = 1e-12);
            assert_relative_eq!(s.rest.eval(0.5).unwrap(), 0.4 * l / n as f64, epsilon = 1e-14);
        }
        let f = m.dissipation().points();
        assert_relative_eq!(f[0].mu_minus.eval(0.0).unwrap(), 2.0 * h / 2.0, epsilon = 1e-14);
        assert_relative_eq!(f[3].mu_plus.eval(0.0).unwrap(), h, epsilon = 1e-14);
        assert_relative_eq!(f[n].mu_plus.eval(0.0).unwrap(), h / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn lumped_friction_preserves_total() {
        let c = ContinuumModel {
            domain: (0.0, 2.0),
            stiffness: Profile { breaks: vec![0.7], values: vec![1.0, 3.0] },
            distortion: vec![Term::uniform(wave(0.2))],
            mu_minus: vec![Term { program: TimeProgram::constant(1.0), profile: Profile { breaks: vec![0.33, 1.41], values: vec![0.5, 2.0, 1.2] } }],
            mu_plus: vec![Term::uniform(TimeProgram::constant(0.4))],
            elements: 7,
        };
        let m = c.discretize().unwrap();
        let total: f64 = m.dissipation().points().iter().map(|f| f.mu_minus.eval(0.0).unwrap()).sum();
        assert_relative_eq!(total, 0.5 * 0.33 + 2.0 * (1.41 - 0.33) + 1.2 * (2.0 - 1.41), epsilon = 1e-13);
    }

    #[test]
    fn stiffness_matches_element_energy() {
        // (k/2)∫(x')² for linear x on each element equals Σ (k_s/2) Δx²
        let c = ContinuumModel {
            domain: (0.0, 1.0),
            stiffness: Profile { breaks: vec![0.35], values: vec![2.0, 5.0] },
            distortion: vec![],
            mu_minus: vec![Term::uniform(TimeProgram::constant(1.0))],
            mu_plus: vec![Term::uniform(TimeProgram::constant(1.0))],
            elements: 4,
        };
        let m = c.discretize().unwrap();
        let e = m.assemble().unwrap();
        let x = [0.0, 0.3, -0.1, 0.4, 0.2];
        let h = 0.25;
        let mut expect = 0.0;
        for el in 0..4 {
            let slope = (x[el + 1] - x[el]) / h;
            expect += 0.5 * c.stiffness.integral(el as f64 * h, (el + 1) as f64 * h) * slope * slope;
        }
        assert_relative_eq!(e.energy(0.0, &x).unwrap(), expect, epsilon = 1e-13);
    }

    #[test]
    fn rejects_invalid() {
        let mut c = ContinuumModel::homogeneous(1.0, 1.0, 1.0, 1.0, wave(1.0), 4);
        c.stiffness = Profile::constant(0.0);
        assert!(c.discretize().is_err());
        let mut c = ContinuumModel::homogeneous(1.0, 1.0, 1.0, 1.0, wave(1.0), 4);
        c.mu_plus[0].profile = Profile::constant(-1.0);
        assert!(c.discretize().is_err());
        let c = ContinuumModel::homogeneous(1.0, 1.0, 1.0, 1.0, wave(1.0), 0);
        assert!(c.discretize().is_err());
    }

    #[test]
    fn first_order_mesh_convergence() {
        // the fraction of nodes sliding backwards is quantized, so the error
        // oscillates in sign but stays within a constant over n
        let exact = crate::oracle::continuum_homogeneous(1.0, 1.0, 1.7, 1.0, 3.0).unwrap();
        let bar = ContinuumModel::homogeneous(1.0, 1.0, 1.7, 1.0, wave(3.0), 10);
        let meshes = [10, 20, 40, 80];
        let d = converged_cycle_displacement(&bar, &SolverConfig::with_steps(100), &meshes).unwrap();
        for (n, v) in meshes.iter().zip(&d) {
            assert!((v - exact).abs() <= 2.5 / *n as f64, "n = {n}: {v} vs {exact}");
        }
    }
}
