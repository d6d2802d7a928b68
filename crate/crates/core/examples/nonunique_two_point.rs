//! Isotropic friction on two points: the translation of each slip step is not
//! determined. The solver flags these steps and applies a tie-break; every
//! point of the interval is an equally valid incremental minimizer.

use crawler_ris::presets::two_point;
use crawler_ris::solver::{simulate, SolverConfig, TieBreak};

fn main() -> crawler_ris::Result<()> {
    let model = two_point(1.0, 1.0, 1.0, 3.0)?;
    for tie_break in [TieBreak::Midpoint, TieBreak::MinNorm] {
        let cfg = SolverConfig { tie_break, ..SolverConfig::with_steps(1000) };
        let traj = simulate(&model, &cfg, &[0.0, 0.0], 0.0, 2.0)?;
        println!(
            "{tie_break:?}: {} of {} steps non-unique, displacement over cycle 2 = {:+.6}",
            traj.nonunique_steps(),
            traj.len() - 1,
            traj.displacement(1.0, 2.0)
        );
        for w in &traj.warnings {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
