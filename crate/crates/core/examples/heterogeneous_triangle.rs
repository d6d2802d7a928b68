//! Three points with all pairs linked and different friction at each point.
//! Reports the motion, the stasis invariant and the discrete energy balance.

use crawler_ris::presets::{triangle, triangle_wave};
use crawler_ris::solver::{energy_balance, simulate, sweeping_invariant_check, SolverConfig};

fn main() -> crawler_ris::Result<()> {
    let model = triangle(
        [2.0, 1.0, 0.5],
        triangle_wave(4.0),
        triangle_wave(2.0),
        [2.0, 2.0, 2.0],
        [0.5, 0.7, 0.6],
    )?;
    let rep = model.dissipation().check_star(0.0)?;
    println!("uniqueness holds: {} (min gap {:.3})", rep.holds, rep.min_gap);

    let energy = model.assemble()?;
    let z0 = energy.relaxed_shape(0.0)?;
    let x0 = crawler_ris::model::chi(&z0, 0.0);
    for spu in [500, 1000, 2000] {
        let traj = simulate(&model, &SolverConfig::with_steps(spu), &x0, 0.0, 3.0)?;
        let bal = energy_balance(&traj, &model)?;
        println!(
            "{spu:>5} steps: cycle 3 displacement {:+.5}, stress excess {:.1e}, energy residual {:+.3e}",
            traj.displacement(2.0, 3.0),
            sweeping_invariant_check(&traj, &model)?,
            bal.total_residual()
        );
    }
    Ok(())
}
