//! The SDP layer on its own: a max-cut relaxation of the 5-cycle.

use tsirelson::sdp::{solve, LinearForm, SdpOptions, SdpProblem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 5;
    let mut objective = LinearForm::new();
    for i in 0..n {
        // (1 − X_ij) / 2 per edge; the constant is added back below.
        objective.add(i, (i + 1) % n, -0.5);
    }
    let mut p = SdpProblem::new(n);
    p.maximize(objective)?.unit_diagonal();
    let sol = solve(&p, &SdpOptions::default())?;
    println!("status {:?} after {} iterations", sol.status, sol.iterations);
    println!("relaxed cut value {:.5} (integer optimum 4)", sol.objective_value + n as f64 / 2.0);
    println!("duality gap estimate {:.1e}", sol.dual_gap_estimate);
    Ok(())
}
