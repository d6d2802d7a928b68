//! Checks of the condition that makes the net translation of every shape
//! change unique, for constant and time-dependent friction.

use crawler_ris::dissipation::DissipationSpec;
use crawler_ris::oracle::Strategy;
use crawler_ris::presets::strategy_model;

fn main() -> crawler_ris::Result<()> {
    // homogeneous: fails exactly when m μ₋ = (N - m) μ₊ for some m
    for (n, m, p) in [(3, 3.0, 1.0), (3, 2.0, 1.0), (4, 1.0, 1.0), (200, 2.5, 1.0), (200, 3.0, 1.0)] {
        let rep = DissipationSpec::homogeneous(n, m, p).check_star(0.0)?;
        println!("N = {n:>3}, μ₋ = {m}, μ₊ = {p}: holds {} witness {:?}", rep.holds, rep.witness);
    }

    // heterogeneous: a subset of points whose backward friction balances the rest
    let d = DissipationSpec::constant(&[1.0, 0.4, 0.7], &[0.3, 0.6, 0.4])?;
    let rep = d.check_star(0.0)?;
    println!("\nheterogeneous: holds {} witness {:?} min gap {:.3}", rep.holds, rep.witness, rep.min_gap);

    // time-dependent: isolated failures are harmless, whole intervals are not
    for which in [Strategy::A, Strategy::B, Strategy::C] {
        let model = strategy_model(which, 1.0, 1.0, 2.5)?;
        let rep = model.dissipation().check_time_dependent(0.0, 1.0)?;
        println!(
            "strategy {which:?}: a.e. {} isolated {:?} α ∈ [{}, {}] Lipschitz {}",
            rep.almost_everywhere.holds, rep.isolated_failures, rep.alpha_lower, rep.alpha_upper, rep.lipschitz
        );
    }
    Ok(())
}
