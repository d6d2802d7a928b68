//! Elastic bar with uniform active distortion on a frictional substrate,
//! discretized by linear finite elements. The per-cycle displacement is
//! compared with the closed form of the continuum model as the mesh is refined.

use crawler_ris::continuum::{converged_cycle_displacement, ContinuumModel};
use crawler_ris::oracle::continuum_homogeneous;
use crawler_ris::presets::triangle_wave;
use crawler_ris::solver::SolverConfig;

fn main() -> crawler_ris::Result<()> {
    let (k, l, mu_minus, mu_plus, delta_eps) = (1.0, 1.0, 1.7, 1.0, 3.0);
    let bar = ContinuumModel::homogeneous(k, l, mu_minus, mu_plus, triangle_wave(delta_eps), 10);
    let exact = continuum_homogeneous(k, l, mu_minus, mu_plus, delta_eps)?;
    let meshes = [10, 20, 50, 100, 200];
    let disp = converged_cycle_displacement(&bar, &SolverConfig::with_steps(250), &meshes)?;
    println!("closed form: {exact:.6}");
    for (n, d) in meshes.iter().zip(&disp) {
        println!("n = {n:>4}: {d:.6}  (rel. error {:+.2e})", (d - exact) / exact);
    }

    // below the threshold Δε ≤ μ₊ l / k nothing moves
    let still = ContinuumModel::homogeneous(k, l, mu_minus, mu_plus, triangle_wave(0.8), 50);
    let d = converged_cycle_displacement(&still, &SolverConfig::with_steps(250), &[50])?;
    println!("Δε = 0.8: {:.3e}", d[0]);
    Ok(())
}
