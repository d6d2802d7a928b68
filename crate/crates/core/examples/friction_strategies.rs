//! Two identical points whose friction is switched in time. Each strategy is
//! compared against its closed form over a range of `r = k L_max / μ`.

use crawler_ris::initial::{InitialKeyword, InitialState};
use crawler_ris::oracle::{strategy_result, Strategy};
use crawler_ris::presets::strategy_model;
use crawler_ris::solver::{simulate_assembled, SolverConfig};

fn main() -> crawler_ris::Result<()> {
    let cfg = SolverConfig::with_steps(5000);
    for which in [Strategy::A, Strategy::B, Strategy::C] {
        println!("strategy {which:?}");
        println!("{:>5} {:>11} {:>11}  {:<20} onsets (sim | exact)", "r", "simulated", "exact", "regime");
        for r in [0.5, 1.5, 2.5, 3.5, 5.0] {
            let model = strategy_model(which, 1.0, 1.0, r)?;
            let energy = model.assemble()?;
            let x0 = InitialState::Keyword(InitialKeyword::MaxElongation).resolve(&model, &energy, 0.0)?;
            let traj = simulate_assembled(&model, &energy, &cfg, &x0, 0.0, 2.0)?;
            let o = strategy_result(which, 1.0, 1.0, r)?;
            let onsets: Vec<String> = traj.slip_onsets(1.0, 2.0 - 1e-12).iter().map(|t| format!("{:.4}", t - 1.0)).collect();
            let exact: Vec<String> = o.slip_onsets.iter().map(|t| format!("{t:.4}")).collect();
            println!(
                "{r:>5.1} {:>11.6} {:>11.6}  {:<20} {} | {}",
                traj.displacement(1.0, 2.0),
                o.per_cycle_displacement,
                o.regime,
                onsets.join(" "),
                exact.join(" ")
            );
        }
        println!();
    }
    Ok(())
}
