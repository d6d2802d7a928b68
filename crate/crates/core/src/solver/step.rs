//! One incremental minimization step.
//!
//! With `H = 2A` and `g = 2 A x_k - ℓ(t_{k+1})` the increment `Δ = x_{k+1} - x_k`
//! minimizes `½ ΔᵀHΔ + gᵀΔ + R(t_{k+1}, Δ)`. The shape part of the minimizer is
//! unique because `H` is positive definite on shapes; the translation part is
//! re-minimized exactly afterwards, which also exposes non-unique steps.

use serde::{Deserialize, Serialize};

use super::banded::BandMatrix;
use crate::dissipation::{Coefficients, VmSet};
use crate::error::{Error, Result};
use crate::model::QuadraticEnergy;

/// Selection inside a non-unique translation interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    Midpoint,
    /// Smallest Euclidean norm of the increment.
    MinNorm,
}

/// Inner algorithm for the step problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InnerSolver {
    /// Primal-dual active set iteration with a FISTA fallback.
    #[default]
    ActiveSet,
    /// Accelerated proximal gradient only.
    Fista,
}

/// Per-point motion state used to warm start the active set iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Motion {
    Stick,
    Forward,
    Backward,
}

/// Quadratic-plus-friction problem of a single step.
#[derive(Debug, Clone)]
pub struct StepProblem<'a> {
    pub energy: &'a QuadraticEnergy,
    pub coef: Coefficients,
    /// `2 A x_k - ℓ(t_{k+1})`.
    pub g: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    pub delta: Vec<f64>,
    /// Translations `s` such that `delta + (s - chosen) 1` is also optimal.
    pub translation: VmSet,
    pub nonunique: bool,
    pub inner_iters: usize,
    pub iter_limit: bool,
    /// Distance of `-(HΔ + g)` to `∂R(Δ)`, worst coordinate.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct StepSettings {
    pub prox_tol: f64,
    pub max_inner_iters: usize,
    pub tie_break: TieBreak,
    pub inner: InnerSolver,
}

impl<'a> StepProblem<'a> {
    pub fn new(energy: &'a QuadraticEnergy, coef: Coefficients, t_next: f64, x: &[f64]) -> Result<Self> {
        let g = energy.gradient(t_next, x)?;
        Ok(StepProblem { energy, coef, g })
    }

    pub fn n(&self) -> usize {
        self.g.len()
    }

    /// `½ ΔᵀHΔ + gᵀΔ + R(Δ)`.
    pub fn objective(&self, delta: &[f64]) -> f64 {
        let hd = self.energy.apply_2a(delta);
        let quad: f64 = delta.iter().zip(&hd).map(|(d, h)| 0.5 * d * h).sum();
        let lin: f64 = delta.iter().zip(&self.g).map(|(d, g)| d * g).sum();
        quad + lin + self.coef.eval(delta)
    }

    fn scale(&self) -> f64 {
        let m = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        1.0 + m(&self.g).max(m(&self.coef.plus)).max(m(&self.coef.minus))
    }

    /// `-(HΔ + g)`.
    pub fn dual(&self, delta: &[f64]) -> Vec<f64> {
        self.energy
            .apply_2a(delta)
            .iter()
            .zip(&self.g)
            .map(|(h, g)| -(h + g))
            .collect()
    }

    /// Worst coordinate distance of `-(HΔ + g)` to `∂R(Δ)`.
    ///
    /// Coordinates with `|Δ_i| ≤ 1e-13 (1 + |Δ|∞)` are treated as sticking.
    pub fn certificate(&self, delta: &[f64]) -> f64 {
        let lam = self.dual(delta);
        let snap = 1e-13 * (1.0 + delta.iter().fold(0.0f64, |a, b| a.max(b.abs())));
        lam.iter()
            .enumerate()
            .map(|(i, &l)| {
                let u = if delta[i].abs() <= snap { 0.0 } else { delta[i] };
                let (lo, hi) = self.coef.subdifferential(i, u);
                (lo - l).max(l - hi).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    fn tolerance(&self, prox_tol: f64) -> f64 {
        prox_tol * self.scale()
    }

    /// Solves the step, updating `motion` for the next warm start.
    pub fn solve(&self, settings: &StepSettings, motion: &mut Vec<Motion>) -> Result<StepOutput> {
        let n = self.n();
        if motion.len() != n {
            *motion = vec![Motion::Stick; n];
        }
        let tol = self.tolerance(settings.prox_tol);

        // already in the stasis domain
        let stays = (0..n).all(|i| -self.g[i] <= self.coef.plus[i] && -self.g[i] >= -self.coef.minus[i]);
        let (delta, iters, limit) = if stays {
            (vec![0.0; n], 0, false)
        } else {
            match settings.inner {
                InnerSolver::ActiveSet => match self.active_set(motion, tol, 8 + 2 * n) {
                    Some((d, it)) => (d, it, false),
                    None => {
                        let (d, it, ok) = self.fista(settings.max_inner_iters, tol, true);
                        (d, it, !ok)
                    }
                },
                InnerSolver::Fista => {
                    let (d, it, ok) = self.fista(settings.max_inner_iters, tol, false);
                    (d, it, !ok)
                }
            }
        };

        let translation = self
            .coef
            .translation_minimizers(&delta)
            .ok_or_else(|| Error::Solver("dissipation is not coercive along translations".into()))?;
        let s = if translation.unique {
            translation.lo
        } else {
            match settings.tie_break {
                TieBreak::Midpoint => translation.midpoint(),
                TieBreak::MinNorm => {
                    let mean = delta.iter().sum::<f64>() / n as f64;
                    (-mean).clamp(translation.lo, translation.hi)
                }
            }
        };
        let delta: Vec<f64> = delta.iter().map(|d| d + s).collect();
        for (i, d) in delta.iter().enumerate() {
            motion[i] = if *d > 0.0 {
                Motion::Forward
            } else if *d < 0.0 {
                Motion::Backward
            } else {
                Motion::Stick
            };
        }
        let residual = self.certificate(&delta);
        Ok(StepOutput {
            translation: VmSet { lo: translation.lo - s, hi: translation.hi - s, unique: translation.unique },
            nonunique: !translation.unique,
            delta,
            inner_iters: iters,
            iter_limit: limit,
            residual,
        })
    }

    /// Solves `H_FF Δ_F = -g_F - λ_F` for the moving points `F`, `Δ = 0` elsewhere.
    fn solve_free(&self, motion: &[Motion]) -> Option<Vec<f64>> {
        let n = self.n();
        let rhs: Vec<f64> = (0..n)
            .map(|i| match motion[i] {
                Motion::Forward => -self.g[i] - self.coef.plus[i],
                Motion::Backward => -self.g[i] + self.coef.minus[i],
                Motion::Stick => 0.0,
            })
            .collect();
        let mut free: Vec<usize> = (0..n).filter(|&i| motion[i] != Motion::Stick).collect();
        if free.is_empty() {
            return Some(vec![0.0; n]);
        }
        if free.len() == n {
            // H is singular along translations; solvable only when the loads balance
            let sum: f64 = rhs.iter().sum();
            let size: f64 = rhs.iter().map(|r| r.abs()).sum();
            if sum.abs() > 1e-9 * (1.0 + size) {
                return None;
            }
            free.pop();
        }
        let mut local = vec![usize::MAX; n];
        for (k, &i) in free.iter().enumerate() {
            local[i] = k;
        }
        let mut h = BandMatrix::zeros(free.len(), self.energy.bandwidth());
        for s in self.energy.springs() {
            let (a, b) = (local[s.i], local[s.j]);
            if a != usize::MAX {
                h.add(a, a, s.k);
            }
            if b != usize::MAX {
                h.add(b, b, s.k);
            }
            if a != usize::MAX && b != usize::MAX {
                h.add(a, b, -s.k);
            }
        }
        let sol = h.cholesky()?.solve(&free.iter().map(|&i| rhs[i]).collect::<Vec<_>>());
        let mut delta = vec![0.0; n];
        for (k, &i) in free.iter().enumerate() {
            delta[i] = sol[k];
        }
        Some(delta)
    }

    /// Primal-dual active set iteration; `None` when it cycles or stalls.
    fn active_set(&self, motion: &mut [Motion], tol: f64, max_iter: usize) -> Option<(Vec<f64>, usize)> {
        let n = self.n();
        let diag: Vec<f64> = {
            let mut d = vec![0.0; n];
            for s in self.energy.springs() {
                d[s.i] += s.k;
                d[s.j] += s.k;
            }
            d
        };
        let mut current = motion.to_vec();
        let mut seen: Vec<Vec<Motion>> = Vec::new();
        let mut previous: Vec<f64> = vec![0.0; n];
        for iter in 1..=max_iter {
            let delta = loop {
                match self.solve_free(&current) {
                    Some(d) => break d,
                    None => {
                        // unbalanced all-moving guess: pin the slowest point
                        let k = (0..n)
                            .filter(|&i| current[i] != Motion::Stick)
                            .min_by(|&a, &b| previous[a].abs().total_cmp(&previous[b].abs()))?;
                        current[k] = Motion::Stick;
                    }
                }
            };
            if self.certificate(&delta) <= tol {
                motion.copy_from_slice(&current);
                return Some((delta, iter));
            }
            let lam = self.dual(&delta);
            let next: Vec<Motion> = (0..n)
                .map(|i| {
                    let c = 1.0 / diag[i];
                    if delta[i] + c * (lam[i] - self.coef.plus[i]) > 0.0 {
                        Motion::Forward
                    } else if delta[i] + c * (lam[i] + self.coef.minus[i]) < 0.0 {
                        Motion::Backward
                    } else {
                        Motion::Stick
                    }
                })
                .collect();
            if next == current || seen.contains(&next) {
                return None;
            }
            seen.push(std::mem::replace(&mut current, next));
            previous = delta;
        }
        None
    }

    /// Accelerated proximal gradient with adaptive restart.
    ///
    /// With `polish`, the sign pattern of the iterate periodically seeds a
    /// short active set run, which finishes exactly once the pattern is right.
    fn fista(&self, max_iter: usize, tol: f64, polish: bool) -> (Vec<f64>, usize, bool) {
        let n = self.n();
        let lip = 2.0 * self.energy.lambda_max() + 1e-9;
        let step = 1.0 / lip;
        let mut x = vec![0.0; n];
        let mut y = x.clone();
        let mut theta = 1.0f64;
        for iter in 1..=max_iter {
            let hy = self.energy.apply_2a(&y);
            let v: Vec<f64> = (0..n).map(|i| y[i] - step * (hy[i] + self.g[i])).collect();
            let x_new = self.coef.prox(step, &v);
            // gradient restart: drop momentum when it points uphill
            let uphill: f64 = (0..n).map(|i| (y[i] - x_new[i]) * (x_new[i] - x[i])).sum();
            let theta_new = if uphill > 0.0 { 1.0 } else { 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt()) };
            let beta = if uphill > 0.0 { 0.0 } else { (theta - 1.0) / theta_new };
            y = (0..n).map(|i| x_new[i] + beta * (x_new[i] - x[i])).collect();
            x = x_new;
            theta = theta_new;
            if iter % 10 == 0 {
                // the translation component converges slowly; fix it exactly
                let shifted = self.retranslated(&x);
                if self.certificate(&shifted) <= tol {
                    return (shifted, iter, true);
                }
                if polish && iter % 50 == 0 {
                    let mut m: Vec<Motion> = x
                        .iter()
                        .map(|&d| {
                            if d > 0.0 {
                                Motion::Forward
                            } else if d < 0.0 {
                                Motion::Backward
                            } else {
                                Motion::Stick
                            }
                        })
                        .collect();
                    if let Some((d, it)) = self.active_set(&mut m, tol, 3) {
                        return (d, iter + it, true);
                    }
                }
            }
        }
        let x = self.retranslated(&x);
        let ok = self.certificate(&x) <= tol;
        (x, max_iter, ok)
    }

    fn retranslated(&self, x: &[f64]) -> Vec<f64> {
        match self.coef.translation_minimizers(x) {
            Some(vm) => x.iter().map(|v| v + vm.midpoint()).collect(),
            None => x.to_vec(),
        }
    }
}
