//! Independent runs in parallel: displacement per cycle of the two-point
//! crawler as a function of amplitude and friction ratio.

use crawler_ris::presets::two_point;
use crawler_ris::solver::{simulate, SolverConfig};
use rayon::prelude::*;

fn main() {
    let ratios = [1.25, 1.5, 2.0, 3.0];
    let amps: Vec<f64> = (1..=12).map(|i| 0.5 * i as f64).collect();
    let rows: Vec<Vec<f64>> = amps
        .par_iter()
        .map(|&amp| {
            ratios
                .iter()
                .map(|&q| {
                    let model = two_point(1.0, q, 1.0, amp).expect("valid model");
                    let traj = simulate(&model, &SolverConfig::with_steps(500), &[0.0, 0.0], 0.0, 2.0).expect("simulation runs");
                    traj.displacement(1.0, 2.0)
                })
                .collect()
        })
        .collect();
    print!("{:>5}", "ΔL");
    for q in ratios {
        print!(" {:>9}", format!("μ₋={q}"));
    }
    println!();
    for (amp, row) in amps.iter().zip(rows) {
        print!("{amp:>5.1}");
        for d in row {
            print!(" {d:>9.4}");
        }
        println!();
    }
}
