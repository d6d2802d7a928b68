use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crawler_ris::scenario::{self, OracleSpec, Overrides, RunError, RunResult, Scenario};

#[derive(Parser)]
#[command(name = "crawler-ris", version, about = "Quasi-static crawler simulation and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override the solver's steps per unit time.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Override the element count of a continuum model.
    #[arg(long, global = true)]
    elements: Option<usize>,
    /// Seed for sampled checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write the trajectory and summary.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Geometry of the stasis domain.
    Stasis {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Uniqueness and regularity of the friction schedule.
    Check {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Closed-form result for the given parameters.
    Oracle {
        /// Oracle parameters as JSON, e.g. '{"kind":"two_point","k":1,"mu_minus":2,"mu_plus":1,"delta_l":3}'.
        #[arg(long, conflicts_with = "scenario")]
        params: Option<String>,
        /// Use the scenario's oracle instead.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Simulate and compare the per-cycle displacement with the closed form.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Run every scenario of a sweep file in parallel.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Worker threads.
        #[arg(long, env = "CRAWLER_RIS_THREADS")]
        threads: Option<usize>,
    },
}

fn print<T: serde::Serialize>(v: &T) {
    // a closed pipe on stdout is not an error of the run
    let _ = writeln!(io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("report serializes"));
}

fn load(path: &Path, o: &Overrides) -> RunResult<Scenario> {
    let mut s = Scenario::load(path)?;
    s.apply(o);
    Ok(s)
}

fn run(cli: Cli) -> RunResult<()> {
    let o = Overrides { steps: cli.steps, elements: cli.elements, seed: cli.seed };
    match cli.command {
        Command::Simulate { scenario } => print(&scenario::run_simulate(&load(&scenario, &o)?, &cli.out)?),
        Command::Stasis { scenario } => print(&scenario::run_stasis(&load(&scenario, &o)?, &cli.out)?),
        Command::Check { scenario } => print(&scenario::run_check(&load(&scenario, &o)?, o.seed)?),
        Command::Compare { scenario } => print(&scenario::run_compare(&load(&scenario, &o)?, &cli.out)?),
        Command::Oracle { params, scenario } => {
            let spec: OracleSpec = match (params, scenario) {
                (Some(p), _) => serde_json::from_str(&p).map_err(|e| RunError::Schema { path: "--params".into(), message: e.to_string() })?,
                (None, Some(path)) => {
                    let s = load(&path, &o)?;
                    s.oracle.or_else(|| s.model.default_oracle()).ok_or_else(|| RunError::Schema {
                        path,
                        message: "no oracle for this scenario".into(),
                    })?
                }
                (None, None) => {
                    return Err(RunError::Schema { path: "--params".into(), message: "give --params or --scenario".into() })
                }
            };
            print(&scenario::run_oracle(&spec)?)
        }
        Command::Sweep { scenario, threads } => {
            let items = scenario::run_sweep(&scenario, &cli.out, &o, threads)?;
            print(&items);
            if let Some(worst) = items.iter().map(|i| i.exit_code).max().filter(|c| *c != 0) {
                std::process::exit(worst);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
