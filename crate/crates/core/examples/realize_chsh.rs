//! Explicit state and observables for the CHSH-optimal unit vectors.

use tsirelson::correlation::GramSystem;
use tsirelson::realization::{expectation_grid, realize, verify};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let g = GramSystem::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![h, h], vec![h, -h]])?;
    let r = realize(&g)?;
    println!("ξ = {}, {} qubit(s) per side, entropy {:.3}", r.xi(), r.nu(), r.entropy()?);
    let grid = expectation_grid(&r)?;
    for row in &grid.values {
        println!("{:+.6?}", row);
    }
    println!("max deviation from ⟨u|v⟩: {:e}", verify(&r, &g)?);
    println!("{}", serde_json::to_string(&r)?);
    Ok(())
}
