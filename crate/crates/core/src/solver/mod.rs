//! Quasi-static evolution by incremental minimization on an event-aligned grid.

mod banded;
mod step;

use serde::{Deserialize, Serialize};

pub use banded::{BandCholesky, BandMatrix};
pub use step::{InnerSolver, Motion, StepOutput, StepProblem, StepSettings, TieBreak};

use crate::dissipation::TimeDependentReport;
use crate::error::{Error, Result};
use crate::model::{pi, sigma, CrawlerModel, QuadraticEnergy};
use crate::stasis::{is_admissible, FACE_TOL};
use crate::timeprog::merge_breakpoints;

fn default_steps() -> usize {
    1000
}
fn default_true() -> bool {
    true
}
fn default_prox_tol() -> f64 {
    1e-10
}
fn default_max_inner() -> usize {
    100_000
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_steps")]
    pub steps_per_unit_time: usize,
    /// Put every input breakpoint on the grid.
    #[serde(default = "default_true")]
    pub event_align: bool,
    /// Tolerance on the subgradient residual, relative to the problem scale.
    #[serde(default = "default_prox_tol")]
    pub prox_tol: f64,
    #[serde(default = "default_max_inner")]
    pub max_inner_iters: usize,
    #[serde(default)]
    pub tie_break: TieBreak,
    #[serde(default)]
    pub inner: InnerSolver,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            steps_per_unit_time: default_steps(),
            event_align: true,
            prox_tol: default_prox_tol(),
            max_inner_iters: default_max_inner(),
            tie_break: TieBreak::Midpoint,
            inner: InnerSolver::ActiveSet,
        }
    }
}

impl SolverConfig {
    pub fn with_steps(steps_per_unit_time: usize) -> Self {
        SolverConfig { steps_per_unit_time, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps_per_unit_time == 0 || self.max_inner_iters == 0 || !(self.prox_tol > 0.0) {
            return Err(Error::Structural(
                "solver needs positive step counts and tolerances".into(),
            ));
        }
        Ok(())
    }

    fn step_settings(&self) -> StepSettings {
        StepSettings {
            prox_tol: self.prox_tol,
            max_inner_iters: self.max_inner_iters,
            tie_break: self.tie_break,
            inner: self.inner,
        }
    }
}

/// Diagnostics attached to each grid time (the initial time carries the
/// state of the start configuration only).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StepFlags {
    /// The step's translation was not unique and a tie-break was applied.
    pub nonunique_vm: bool,
    /// The tension lies on the boundary of the stasis domain.
    pub boundary_contact: bool,
    /// The inner solver hit its iteration limit.
    pub inner_iter_limit: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    /// Net translation rebuilt as `y_0 + Σ v_m(Δz)` from the shape increments.
    pub y_from_vm: Vec<f64>,
    pub tension: Vec<Vec<f64>>,
    pub tension_sh: Vec<Vec<f64>>,
    /// Cumulative dissipated energy.
    pub dissipated: Vec<f64>,
    pub flags: Vec<StepFlags>,
    /// Certificate residual of each step (0 at the initial time).
    pub residual: Vec<f64>,
    pub inner_iters: Vec<usize>,
    /// Uniqueness and regularity of the friction schedule over the time span.
    pub uniqueness: TimeDependentReport,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the grid time closest to `t`.
    pub fn index_of(&self, t: f64) -> usize {
        match self.times.binary_search_by(|p| p.total_cmp(&t)) {
            Ok(k) => k,
            Err(0) => 0,
            Err(k) if k >= self.times.len() => self.times.len() - 1,
            Err(k) => {
                if t - self.times[k - 1] <= self.times[k] - t {
                    k - 1
                } else {
                    k
                }
            }
        }
    }

    /// `y(t1) - y(t0)` at the nearest grid times.
    pub fn displacement(&self, t0: f64, t1: f64) -> f64 {
        self.y[self.index_of(t1)] - self.y[self.index_of(t0)]
    }

    pub fn nonunique_steps(&self) -> usize {
        self.flags.iter().filter(|f| f.nonunique_vm).count()
    }

    /// Times at which the shape starts moving after a stasis phase, in `[t0, t1]`.
    ///
    /// The first slip step moves only for part of its interval; assuming the
    /// slip rate of the following step, the onset is placed at
    /// `t_{k+1} - |Δz_k| / rate`, exact for piecewise-linear regimes.
    pub fn slip_onsets(&self, t0: f64, t1: f64) -> Vec<f64> {
        let moving: Vec<f64> = (0..self.len() - 1)
            .map(|k| {
                self.z[k + 1]
                    .iter()
                    .zip(&self.z[k])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let scale = self
            .z
            .iter()
            .flat_map(|z| z.iter())
            .fold(1.0f64, |a, b| a.max(b.abs()));
        let thresh = 1e-11 * scale;
        let mut out = Vec::new();
        for k in 1..moving.len() {
            if moving[k] > thresh && moving[k - 1] <= thresh {
                let rate = if k + 1 < moving.len() && moving[k + 1] > thresh {
                    moving[k + 1] / (self.times[k + 2] - self.times[k + 1])
                } else {
                    moving[k] / (self.times[k + 1] - self.times[k])
                };
                let onset = (self.times[k + 1] - moving[k] / rate).max(self.times[k]);
                if onset >= t0 && onset <= t1 {
                    out.push(onset);
                }
            }
        }
        out
    }
}

/// Simulation grid: merged input breakpoints, each segment split uniformly.
pub fn time_grid(model: &CrawlerModel, cfg: &SolverConfig, t0: f64, t1: f64) -> Vec<f64> {
    let anchors = if cfg.event_align {
        merge_breakpoints(&model.programs(), t0, t1)
    } else {
        vec![t0, t1]
    };
    let spu = cfg.steps_per_unit_time as f64;
    let mut grid = vec![t0];
    for w in anchors.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = ((b - a) * spu - 1e-9).ceil().max(1.0) as usize;
        for j in 1..m {
            grid.push(a + (b - a) * j as f64 / m as f64);
        }
        grid.push(b);
    }
    grid
}

/// Evolves the crawler from `x0` at `t0` to `t1`.
pub fn simulate(model: &CrawlerModel, cfg: &SolverConfig, x0: &[f64], t0: f64, t1: f64) -> Result<Trajectory> {
    cfg.validate()?;
    let energy = model.assemble()?;
    simulate_assembled(model, &energy, cfg, x0, t0, t1)
}

/// [`simulate`] with a pre-assembled energy.
pub fn simulate_assembled(
    model: &CrawlerModel,
    energy: &QuadraticEnergy,
    cfg: &SolverConfig,
    x0: &[f64],
    t0: f64,
    t1: f64,
) -> Result<Trajectory> {
    let n = model.n();
    if x0.len() != n {
        return Err(Error::Structural(format!("initial state has {} entries for {n} points", x0.len())));
    }
    if !(t1 > t0) {
        return Err(Error::Structural(format!("empty time span [{t0}, {t1}]")));
    }
    let d = model.dissipation();
    let adm = is_admissible(energy, d, t0, x0)?;
    if !adm.admissible {
        return Err(Error::Inadmissible { margin: adm.margin });
    }
    let uniqueness = d.check_time_dependent(t0, t1)?;
    let mut warnings = Vec::new();
    if !uniqueness.almost_everywhere.holds {
        warnings.push(format!(
            "uniqueness fails on whole intervals: {:?}",
            uniqueness.interval_failures
        ));
    }
    if !uniqueness.lower_bound.holds {
        warnings.push(format!("friction lower bound is {}", uniqueness.alpha_lower));
    }
    if uniqueness.almost_everywhere.near_tie {
        warnings.push("uniqueness test is ill-conditioned (near tie)".into());
    }

    let grid = time_grid(model, cfg, t0, t1);
    let settings = cfg.step_settings();
    let cap = grid.len();
    let mut traj = Trajectory {
        times: Vec::with_capacity(cap),
        x: Vec::with_capacity(cap),
        z: Vec::with_capacity(cap),
        y: Vec::with_capacity(cap),
        y_from_vm: Vec::with_capacity(cap),
        tension: Vec::with_capacity(cap),
        tension_sh: Vec::with_capacity(cap),
        dissipated: Vec::with_capacity(cap),
        flags: Vec::with_capacity(cap),
        residual: Vec::with_capacity(cap),
        inner_iters: Vec::with_capacity(cap),
        uniqueness,
        warnings,
    };

    let mut x = x0.to_vec();
    let record = |traj: &mut Trajectory, t: f64, x: &[f64], flags: StepFlags, extra: (f64, f64, f64, usize)| -> Result<()> {
        let tension = energy.tension(t, x)?;
        let coef = d.coefficients(t)?;
        let scale = 1.0 + coef.plus.iter().chain(&coef.minus).fold(0.0f64, |a, b| a.max(*b));
        let slack = tension
            .full
            .iter()
            .enumerate()
            .map(|(i, s)| (coef.plus[i] - s).min(s + coef.minus[i]))
            .fold(f64::INFINITY, f64::min);
        let flags = StepFlags { boundary_contact: slack <= 1e3 * FACE_TOL * scale, ..flags };
        traj.times.push(t);
        traj.z.push(sigma(x));
        traj.y.push(pi(x));
        traj.x.push(x.to_vec());
        traj.tension.push(tension.full);
        traj.tension_sh.push(tension.sh);
        traj.flags.push(flags);
        traj.dissipated.push(extra.0);
        traj.y_from_vm.push(extra.1);
        traj.residual.push(extra.2);
        traj.inner_iters.push(extra.3);
        Ok(())
    };
    record(&mut traj, t0, &x, StepFlags::default(), (0.0, pi(x0), 0.0, 0))?;

    let mut motion = Vec::new();
    let mut dissipated = 0.0;
    let mut y_vm = pi(x0);
    for w in grid.windows(2) {
        let t_next = w[1];
        let coef = d.coefficients(t_next)?;
        let problem = StepProblem::new(energy, coef, t_next, &x)?;
        let out = problem.solve(&settings, &mut motion)?;
        dissipated += problem.coef.eval(&out.delta);
        let dz = sigma(&out.delta);
        y_vm += d.shape_reduced(t_next, &dz).map(|r| r.vm.midpoint()).unwrap_or(pi(&out.delta));
        for (xi, di) in x.iter_mut().zip(&out.delta) {
            *xi += di;
        }
        let flags = StepFlags {
            nonunique_vm: out.nonunique,
            boundary_contact: false,
            inner_iter_limit: out.iter_limit,
        };
        record(&mut traj, t_next, &x, flags, (dissipated, y_vm, out.residual, out.inner_iters))?;
    }
    if traj.flags.iter().any(|f| f.inner_iter_limit) {
        traj.warnings.push("inner iteration limit reached on some steps".into());
    }
    Ok(traj)
}

/// Largest distance of the tension outside the stasis box over the trajectory.
pub fn sweeping_invariant_check(traj: &Trajectory, model: &CrawlerModel) -> Result<f64> {
    let d = model.dissipation();
    let mut worst: f64 = 0.0;
    for (k, &t) in traj.times.iter().enumerate() {
        let coef = d.coefficients(t)?;
        for (i, s) in traj.tension[k].iter().enumerate() {
            worst = worst.max(s - coef.plus[i]).max(-coef.minus[i] - s);
        }
        worst = worst.max(traj.tension[k].iter().sum::<f64>().abs());
    }
    Ok(worst)
}

/// Per-step energy bookkeeping.
#[derive(Debug, Clone)]
pub struct EnergyBalance {
    /// `E(t_{k+1}, x_{k+1}) - E(t_k, x_k) + R(t_{k+1}, Δx) - W_k`.
    pub residual: Vec<f64>,
    /// Work of the loads `W_k = -<ℓ(t_{k+1}) - ℓ(t_k), x_k>`.
    pub work: Vec<f64>,
    pub dissipated: Vec<f64>,
    pub energy_change: Vec<f64>,
}

impl EnergyBalance {
    pub fn total_residual(&self) -> f64 {
        self.residual.iter().sum()
    }

    pub fn total_work(&self) -> f64 {
        self.work.iter().sum()
    }

    pub fn total_dissipated(&self) -> f64 {
        self.dissipated.iter().sum()
    }

    pub fn total_energy_change(&self) -> f64 {
        self.energy_change.iter().sum()
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |a, b| a.max(b.abs()))
    }
}

pub fn energy_balance(traj: &Trajectory, model: &CrawlerModel) -> Result<EnergyBalance> {
    let energy = model.assemble()?;
    let d = model.dissipation();
    let steps = traj.len().saturating_sub(1);
    let mut out = EnergyBalance {
        residual: Vec::with_capacity(steps),
        work: Vec::with_capacity(steps),
        dissipated: Vec::with_capacity(steps),
        energy_change: Vec::with_capacity(steps),
    };
    for k in 0..steps {
        let (t0, t1) = (traj.times[k], traj.times[k + 1]);
        let (x0, x1) = (&traj.x[k], &traj.x[k + 1]);
        let de = energy.energy(t1, x1)? - energy.energy(t0, x0)?;
        let dx: Vec<f64> = x1.iter().zip(x0).map(|(a, b)| a - b).collect();
        let diss = d.eval_r(t1, &dx)?;
        let l0 = energy.load(t0)?;
        let l1 = energy.load(t1)?;
        let work: f64 = -(0..x0.len()).map(|i| (l1[i] - l0[i]) * x0[i]).sum::<f64>();
        out.residual.push(de + diss - work);
        out.work.push(work);
        out.dissipated.push(diss);
        out.energy_change.push(de);
    }
    Ok(out)
}
