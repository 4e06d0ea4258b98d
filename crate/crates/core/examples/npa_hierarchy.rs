//! Moment-matrix relaxations: bounds per level and membership of behaviours.

use tsirelson::correlation::{BellFunctional, Convention, Scenario};
use tsirelson::npa::{
    build_moment_problem, membership_check, npa_bound_bell, GeneralScenario, Level, ProbabilityTable,
};
use tsirelson::sdp::SdpOptions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = SdpOptions::default();
    let joint = vec![-0.5, -0.5, -0.5, -0.5, -0.5, 0.5, -0.5, 0.5, 0.0];
    let i3322 = BellFunctional::new(Scenario::new(3, 3)?, Convention::ZeroOne, vec![0.5, 0.5, 0.0], vec![-0.5, -0.5, 0.0], joint, 0.0)?;
    for level in [Level::One, Level::OneAb, Level::Two] {
        let mp = build_moment_problem(&GeneralScenario::binary(3, 3), level)?;
        let b = npa_bound_bell(&i3322, level, &opts)?;
        println!("I3322 level {level:>3}: {} sequences, {} free classes, bound {:.5}", mp.size(), mp.free_classes(), b.bound);
    }

    // Popescu-Rohrlich box: perfectly correlated except on (A2, B2).
    let half = vec![vec![0.5, 0.5]; 2];
    let same = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
    let differ = vec![vec![0.0, 0.5], vec![0.5, 0.0]];
    let pr = ProbabilityTable::from_parts(
        GeneralScenario::binary(2, 2),
        half.clone(),
        half,
        vec![vec![same.clone(), same.clone()], vec![same, differ]],
    )?;
    let verdict = membership_check(&pr, Level::One, &opts)?;
    println!("PR box: inside = {}, λ = {:.4}", verdict.is_inside(), verdict.lambda());
    Ok(())
}
