//! JSON scenarios and the batch runs behind the command-line tool.
//!
//! A scenario names a model, solver settings, an initial state and a time
//! span. Runs write their files into an output directory and return a
//! JSON-serializable report.
//!
//! Output files:
//!
//! * `trajectory.csv`: columns `t, x0..x{N-1}, z0..z{N-2}, y, sigma0..sigma{N-2},
//!   nonunique, boundary, iter_limit` where `sigma` is the shape tension and the
//!   flags are 0 or 1.
//! * `summary.json`: see [`Summary`].
//! * `stasis.json`: one [`StasisGeometry`] per requested time.
//! * `stasis_<k>.dat`: for three points, the closed polygon `C_sh` as two
//!   whitespace-separated columns `zeta0 zeta1`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::continuum::ContinuumModel;
use crate::dissipation::{TimeDependentReport, UniquenessReport, SUBSET_LIMIT};
use crate::error::Error;
use crate::initial::InitialState;
use crate::model::CrawlerModel;
use crate::oracle::{self, OracleResult, Strategy};
use crate::presets;
use crate::solver::{simulate_assembled, sweeping_invariant_check, SolverConfig, Trajectory};
use crate::stasis::{build_geometry, StasisGeometry};

/// Failure of a run, with the process exit status it maps to.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    /// Malformed or invalid input file.
    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error(transparent)]
    Model(Error),
    /// Parameters on a regime boundary of a closed form.
    #[error("{0}")]
    Boundary(String),
}

impl RunError {
    /// 1 i/o and other failures, 2 invalid input, 3 solver failure, 4 oracle
    /// parameters on a regime boundary or at a critical friction ratio.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io { .. } => 1,
            RunError::Schema { .. } => 2,
            RunError::Model(e) => match e {
                Error::Structural(_) | Error::Domain { .. } => 2,
                Error::RegimeBoundary(_) | Error::UniquenessViolation(_) => 4,
                Error::Solver(_) | Error::NonCoercive { .. } | Error::Inadmissible { .. } | Error::OutsideDomain { .. } => 3,
                _ => 1,
            },
            RunError::Boundary(_) => 4,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Model(e)
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

/// Model of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    Discrete(CrawlerModel),
    Continuum(ContinuumModel),
    /// Two points under a triangle-wave rest length and constant friction.
    TwoPoint { k: f64, mu_minus: f64, mu_plus: f64, delta_l: f64 },
    /// Two points with a time-dependent friction strategy.
    Strategy { strategy: Strategy, k: f64, mu: f64, l_max: f64 },
}

impl ModelSpec {
    pub fn build(&self) -> crate::Result<CrawlerModel> {
        match self {
            ModelSpec::Discrete(m) => Ok(m.clone()),
            ModelSpec::Continuum(c) => c.discretize(),
            ModelSpec::TwoPoint { k, mu_minus, mu_plus, delta_l } => presets::two_point(*k, *mu_minus, *mu_plus, *delta_l),
            ModelSpec::Strategy { strategy, k, mu, l_max } => presets::strategy_model(*strategy, *k, *mu, *l_max),
        }
    }

    /// Closed form matching the model, when one exists.
    pub fn default_oracle(&self) -> Option<OracleSpec> {
        match *self {
            ModelSpec::TwoPoint { k, mu_minus, mu_plus, delta_l } => Some(OracleSpec::TwoPoint { k, mu_minus, mu_plus, delta_l }),
            ModelSpec::Strategy { strategy, k, mu, l_max } => Some(OracleSpec::Strategy { strategy, k, mu, l_max }),
            _ => None,
        }
    }
}

/// Parameters of a closed-form result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleSpec {
    TwoPoint { k: f64, mu_minus: f64, mu_plus: f64, delta_l: f64 },
    ThreePoint { mu_minus: f64, mu_plus: f64 },
    Continuum { k: f64, l: f64, mu_minus: f64, mu_plus: f64, delta_eps: f64 },
    Strategy { strategy: Strategy, k: f64, mu: f64, l_max: f64 },
}

impl OracleSpec {
    pub fn evaluate(&self) -> crate::Result<serde_json::Value> {
        let v = match *self {
            OracleSpec::TwoPoint { k, mu_minus, mu_plus, delta_l } => {
                serde_json::to_value(oracle::two_point_constant(k, mu_minus, mu_plus, delta_l)?)
            }
            OracleSpec::ThreePoint { mu_minus, mu_plus } => {
                serde_json::to_value(serde_json::json!({ "regime": oracle::three_point_regime(mu_minus, mu_plus)? }))
            }
            OracleSpec::Continuum { k, l, mu_minus, mu_plus, delta_eps } => serde_json::to_value(serde_json::json!({
                "per_cycle_displacement": oracle::continuum_homogeneous(k, l, mu_minus, mu_plus, delta_eps)?
            })),
            OracleSpec::Strategy { strategy, k, mu, l_max } => serde_json::to_value(oracle::strategy_result(strategy, k, mu, l_max)?),
        };
        Ok(v.expect("oracle results serialize"))
    }

    /// Per-cycle displacement and boundary flag.
    pub fn displacement(&self) -> crate::Result<(f64, bool)> {
        let from = |r: OracleResult| (r.per_cycle_displacement, r.boundary);
        match *self {
            OracleSpec::TwoPoint { k, mu_minus, mu_plus, delta_l } => Ok(from(oracle::two_point_constant(k, mu_minus, mu_plus, delta_l)?)),
            OracleSpec::Strategy { strategy, k, mu, l_max } => Ok(from(oracle::strategy_result(strategy, k, mu, l_max)?)),
            OracleSpec::Continuum { k, l, mu_minus, mu_plus, delta_eps } => {
                Ok((oracle::continuum_homogeneous(k, l, mu_minus, mu_plus, delta_eps)?, false))
            }
            OracleSpec::ThreePoint { .. } => Err(Error::Structural("the three-point oracle gives no displacement".into())),
        }
    }
}

fn default_trajectory() -> Option<String> {
    Some("trajectory.csv".into())
}
fn default_summary() -> Option<String> {
    Some("summary.json".into())
}
fn default_stasis() -> Option<String> {
    Some("stasis.json".into())
}
fn default_plot() -> Option<String> {
    Some("stasis".into())
}

/// Output file names relative to the output directory; `null` disables one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_trajectory")]
    pub trajectory_csv: Option<String>,
    #[serde(default = "default_summary")]
    pub summary_json: Option<String>,
    #[serde(default = "default_stasis")]
    pub stasis_json: Option<String>,
    /// Prefix of the polygon files, completed with `_<k>.dat`.
    #[serde(default = "default_plot")]
    pub plotdata: Option<String>,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            trajectory_csv: default_trajectory(),
            summary_json: default_summary(),
            stasis_json: default_stasis(),
            plotdata: default_plot(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub initial_state: InitialState,
    /// Simulated interval; defaults to two periods from 0 for periodic inputs.
    #[serde(default)]
    pub span: Option<(f64, f64)>,
    /// Interval over which the displacement is reported; defaults to the last period.
    #[serde(default)]
    pub cycle: Option<(f64, f64)>,
    /// Times at which `stasis` evaluates the geometry; defaults to the start time.
    #[serde(default)]
    pub stasis_times: Vec<f64>,
    /// Closed form used by `compare`; presets supply their own.
    #[serde(default)]
    pub oracle: Option<OracleSpec>,
    #[serde(default)]
    pub outputs: Outputs,
}

/// Command-line adjustments applied after loading.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub steps: Option<usize>,
    pub elements: Option<usize>,
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn from_json(text: &str, path: &Path) -> RunResult<Scenario> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| RunError::Schema {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let check = |r: crate::Result<()>| r.map_err(|e| RunError::Schema { path: path.to_path_buf(), message: e.to_string() });
        check(s.solver.validate())?;
        if let ModelSpec::Continuum(c) = &s.model {
            check(c.validate())?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> RunResult<Scenario> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Scenario::from_json(&text, path)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.steps {
            self.solver.steps_per_unit_time = n;
        }
        if let (Some(n), ModelSpec::Continuum(c)) = (o.elements, &mut self.model) {
            c.elements = n;
        }
    }

    fn span_of(&self, model: &CrawlerModel) -> RunResult<(f64, f64)> {
        if let Some(s) = self.span {
            return Ok(s);
        }
        match period_of(model) {
            Some(p) => Ok((0.0, 2.0 * p)),
            None => Err(RunError::Model(Error::Structural(
                "scenario needs a \"span\" when the inputs are not periodic".into(),
            ))),
        }
    }
}

fn period_of(model: &CrawlerModel) -> Option<f64> {
    model
        .programs()
        .iter()
        .filter_map(|p| p.period())
        .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |q| q.max(p))))
}

/// Key results of a simulation.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub points: usize,
    pub span: (f64, f64),
    pub steps: usize,
    pub cycle: Option<(f64, f64)>,
    pub per_cycle_displacement: Option<f64>,
    /// Slip onsets within the reported cycle (the whole span otherwise).
    pub slip_onsets: Vec<f64>,
    pub final_translation: f64,
    pub total_dissipated: f64,
    pub nonunique_steps: usize,
    pub boundary_contact_steps: usize,
    pub inner_iter_limit_steps: usize,
    pub max_certificate_residual: f64,
    /// Largest excursion of the tension outside the stasis domain.
    pub max_stress_violation: f64,
    /// Largest gap between the translation and its reconstruction from shape increments.
    pub max_translation_mismatch: f64,
    pub uniqueness: TimeDependentReport,
    pub warnings: Vec<String>,
}

pub struct SimulationRun {
    pub model: CrawlerModel,
    pub trajectory: Trajectory,
    pub summary: Summary,
}

pub fn simulate_scenario(s: &Scenario) -> RunResult<SimulationRun> {
    let model = s.model.build()?;
    let energy = model.assemble()?;
    let (t0, t1) = s.span_of(&model)?;
    let x0 = s.initial_state.resolve(&model, &energy, t0)?;
    let traj = simulate_assembled(&model, &energy, &s.solver, &x0, t0, t1)?;
    let cycle = s.cycle.or_else(|| period_of(&model).filter(|p| t1 - p >= t0 - 1e-12).map(|p| (t1 - p, t1)));
    let onsets = match cycle {
        Some((a, b)) => traj.slip_onsets(a, b),
        None => traj.slip_onsets(t0, t1),
    };
    let summary = Summary {
        points: model.n(),
        span: (t0, t1),
        steps: traj.len() - 1,
        cycle,
        per_cycle_displacement: cycle.map(|(a, b)| traj.displacement(a, b)),
        slip_onsets: onsets,
        final_translation: *traj.y.last().expect("trajectory has a start"),
        total_dissipated: *traj.dissipated.last().expect("trajectory has a start"),
        nonunique_steps: traj.nonunique_steps(),
        boundary_contact_steps: traj.flags.iter().filter(|f| f.boundary_contact).count(),
        inner_iter_limit_steps: traj.flags.iter().filter(|f| f.inner_iter_limit).count(),
        max_certificate_residual: traj.residual.iter().fold(0.0, |a, b| a.max(*b)),
        max_stress_violation: sweeping_invariant_check(&traj, &model)?,
        max_translation_mismatch: traj.y.iter().zip(&traj.y_from_vm).fold(0.0, |a, (p, q)| a.max((p - q).abs())),
        uniqueness: traj.uniqueness.clone(),
        warnings: traj.warnings.clone(),
    };
    Ok(SimulationRun { model, trajectory: traj, summary })
}

/// Writes the trajectory as CSV.
pub fn write_trajectory<W: io::Write>(traj: &Trajectory, out: W) -> csv::Result<()> {
    let n = traj.x.first().map_or(0, |x| x.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|i| format!("x{i}")));
    header.extend((0..n.saturating_sub(1)).map(|i| format!("z{i}")));
    header.push("y".into());
    header.extend((0..n.saturating_sub(1)).map(|i| format!("sigma{i}")));
    header.extend(["nonunique", "boundary", "iter_limit"].map(String::from));
    w.write_record(&header)?;
    let bit = |b: bool| if b { "1".to_string() } else { "0".to_string() };
    for k in 0..traj.len() {
        let mut row = vec![traj.times[k].to_string()];
        row.extend(traj.x[k].iter().map(f64::to_string));
        row.extend(traj.z[k].iter().map(f64::to_string));
        row.push(traj.y[k].to_string());
        row.extend(traj.tension_sh[k].iter().map(f64::to_string));
        let f = traj.flags[k];
        row.extend([bit(f.nonunique_vm), bit(f.boundary_contact), bit(f.inner_iter_limit)]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> RunResult<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    fs::write(path, text + "\n").map_err(io_err(path))
}

fn create_dir(out: &Path) -> RunResult<()> {
    fs::create_dir_all(out).map_err(io_err(out))
}

/// `simulate`: trajectory and summary files.
pub fn run_simulate(s: &Scenario, out: &Path) -> RunResult<Summary> {
    let run = simulate_scenario(s)?;
    create_dir(out)?;
    if let Some(name) = &s.outputs.trajectory_csv {
        let path = out.join(name);
        let file = fs::File::create(&path).map_err(io_err(&path))?;
        write_trajectory(&run.trajectory, io::BufWriter::new(file)).map_err(|e| RunError::Io {
            path: path.clone(),
            source: io::Error::other(e),
        })?;
    }
    if let Some(name) = &s.outputs.summary_json {
        write_json(&out.join(name), &run.summary)?;
    }
    Ok(run.summary)
}

/// Closed polygon `C_sh` of a three-point model as plot columns.
pub fn polygon_plotdata(g: &StasisGeometry) -> Option<String> {
    if g.dim() != 2 || g.vertices.is_empty() {
        return None;
    }
    let mut s = String::from("# zeta0 zeta1\n");
    for v in g.vertices.iter().chain(g.vertices.first()) {
        s.push_str(&format!("{} {}\n", v[0], v[1]));
    }
    Some(s)
}

/// `stasis`: geometry of the stasis domain at the requested times.
pub fn run_stasis(s: &Scenario, out: &Path) -> RunResult<Vec<StasisGeometry>> {
    let model = s.model.build()?;
    let times = if s.stasis_times.is_empty() {
        vec![s.span.map_or(0.0, |sp| sp.0)]
    } else {
        s.stasis_times.clone()
    };
    let geos = times
        .iter()
        .map(|&t| build_geometry(model.dissipation(), t))
        .collect::<crate::Result<Vec<_>>>()?;
    create_dir(out)?;
    if let Some(name) = &s.outputs.stasis_json {
        write_json(&out.join(name), &geos)?;
    }
    if let Some(prefix) = &s.outputs.plotdata {
        for (k, g) in geos.iter().enumerate() {
            if let Some(text) = polygon_plotdata(g) {
                let path = out.join(format!("{prefix}_{k}.dat"));
                fs::write(&path, text).map_err(io_err(&path))?;
            }
        }
    }
    Ok(geos)
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    /// Pointwise uniqueness at the start time.
    pub pointwise: UniquenessReport,
    /// Over the whole span, with the regularity bounds of the schedule.
    pub time_dependent: TimeDependentReport,
}

/// `check`: uniqueness and regularity of the friction schedule.
pub fn run_check(s: &Scenario, seed: Option<u64>) -> RunResult<CheckReport> {
    let model = s.model.build()?;
    let (t0, t1) = s.span_of(&model)?;
    let d = model.dissipation();
    let pointwise = match d.check_star(t0) {
        Err(Error::Combinatorial { .. }) => d.check_star_sampled(t0, SUBSET_LIMIT, seed.unwrap_or(0))?,
        other => other?,
    };
    let time_dependent = d.check_time_dependent(t0, t1)?;
    Ok(CheckReport { pointwise, time_dependent })
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub simulated: f64,
    pub oracle: f64,
    pub abs_error: f64,
    /// `None` when the oracle value is zero.
    pub rel_error: Option<f64>,
    pub summary: Summary,
}

/// `compare`: simulation against the closed form.
pub fn run_compare(s: &Scenario, out: &Path) -> RunResult<Comparison> {
    let spec = s
        .oracle
        .or_else(|| s.model.default_oracle())
        .ok_or_else(|| RunError::Model(Error::Structural("scenario has no \"oracle\" to compare against".into())))?;
    let (exact, boundary) = spec.displacement()?;
    if boundary {
        return Err(RunError::Boundary("oracle parameters sit on a regime boundary".into()));
    }
    let summary = run_simulate(s, out)?;
    let simulated = summary
        .per_cycle_displacement
        .ok_or_else(|| RunError::Model(Error::Structural("no full cycle to measure".into())))?;
    let abs_error = (simulated - exact).abs();
    let cmp = Comparison {
        simulated,
        oracle: exact,
        abs_error,
        rel_error: (exact != 0.0).then(|| abs_error / exact.abs()),
        summary,
    };
    write_json(&out.join("compare.json"), &cmp)?;
    Ok(cmp)
}

/// `oracle`: closed form as JSON; boundary parameters are an error.
pub fn run_oracle(spec: &OracleSpec) -> RunResult<serde_json::Value> {
    let v = spec.evaluate()?;
    if v.get("boundary").and_then(|b| b.as_bool()) == Some(true) {
        return Err(RunError::Boundary(format!("parameters on a regime boundary: {v}")));
    }
    Ok(v)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    scenarios: Vec<SweepEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepEntry {
    name: String,
    #[serde(default)]
    scenario: Option<Scenario>,
    /// Scenario file, relative to the sweep file.
    #[serde(default)]
    path: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepItem {
    pub name: String,
    pub exit_code: i32,
    pub per_cycle_displacement: Option<f64>,
    pub error: Option<String>,
}

/// `sweep`: independent simulations in parallel, each in `out/<name>`.
pub fn run_sweep(path: &Path, out: &Path, overrides: &Overrides, threads: Option<usize>) -> RunResult<Vec<SweepItem>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let file: SweepFile = serde_json::from_str(&text).map_err(|e| RunError::Schema {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut jobs = Vec::with_capacity(file.scenarios.len());
    for e in file.scenarios {
        if e.name.is_empty() || e.name.contains(['/', '\\']) || e.name == ".." {
            return Err(RunError::Schema { path: path.to_path_buf(), message: format!("invalid scenario name {:?}", e.name) });
        }
        let mut s = match (e.scenario, e.path) {
            (Some(s), None) => s,
            (None, Some(p)) => Scenario::load(&base.join(p))?,
            _ => {
                return Err(RunError::Schema {
                    path: path.to_path_buf(),
                    message: format!("entry {:?} needs exactly one of \"scenario\" and \"path\"", e.name),
                })
            }
        };
        s.apply(overrides);
        jobs.push((e.name, s));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| RunError::Io { path: out.to_path_buf(), source: io::Error::other(e) })?;
    use rayon::prelude::*;
    let items: Vec<SweepItem> = pool.install(|| {
        jobs.par_iter()
            .map(|(name, s)| match run_simulate(s, &out.join(name)) {
                Ok(sum) => SweepItem { name: name.clone(), exit_code: 0, per_cycle_displacement: sum.per_cycle_displacement, error: None },
                Err(e) => SweepItem { name: name.clone(), exit_code: e.exit_code(), per_cycle_displacement: None, error: Some(e.to_string()) },
            })
            .collect()
    });
    create_dir(out)?;
    write_json(&out.join("sweep.json"), &items)?;
    Ok(items)
}
