//! Two contact points joined by a spring whose rest length follows a triangle
//! wave. With more friction backwards than forwards the crawler advances by
//! `ΔL - 2 μ_min / k` per cycle once the amplitude clears the threshold.

use crawler_ris::oracle::two_point_constant;
use crawler_ris::presets::two_point;
use crawler_ris::solver::{simulate, SolverConfig};

fn main() -> crawler_ris::Result<()> {
    let (k, mu_minus, mu_plus) = (1.0, 2.0, 1.0);
    println!("{:>6} {:>12} {:>12}", "ΔL", "simulated", "closed form");
    for delta_l in [1.0, 2.0, 2.5, 3.0, 4.0, 6.0] {
        let model = two_point(k, mu_minus, mu_plus, delta_l)?;
        // relaxed start, one warm-up cycle, measure the second
        let traj = simulate(&model, &SolverConfig::with_steps(2000), &[0.0, 0.0], 0.0, 2.0)?;
        let exact = two_point_constant(k, mu_minus, mu_plus, delta_l)?.per_cycle_displacement;
        println!("{delta_l:>6.2} {:>12.6} {exact:>12.6}", traj.displacement(1.0, 2.0));
    }

    let model = two_point(k, mu_minus, mu_plus, 3.0)?;
    let traj = simulate(&model, &SolverConfig::with_steps(2000), &[0.0, 0.0], 0.0, 2.0)?;
    println!("\nslip onsets in the second cycle: {:?}", traj.slip_onsets(1.0, 2.0));
    println!("dissipated over two cycles: {:.6}", traj.dissipated.last().unwrap());
    Ok(())
}
