//! Semidefinite upper bounds on quantum violations over the elliptope.

use tsirelson::correlation::{BellFunctional, Convention, Scenario};
use tsirelson::sdp::{split_witness, suspension_bound, tsirelson_bound, upper_bound_nc, SdpOptions};

/// I3322 in 0/1 form: `a`, `b` marginal weights and disagreement weights `joint`.
fn i3322() -> BellFunctional {
    let joint = vec![-0.5, -0.5, -0.5, -0.5, -0.5, 0.5, -0.5, 0.5, 0.0];
    BellFunctional::new(Scenario::new(3, 3).unwrap(), Convention::ZeroOne, vec![0.5, 0.5, 0.0], vec![-0.5, -0.5, 0.0], joint, 0.0)
        .unwrap()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = SdpOptions::default();

    let chsh = tsirelson_bound(&BellFunctional::chsh_pm(), &opts)?;
    println!("CHSH (±1) Tsirelson bound: {:.6} after {} iterations", chsh.bound, chsh.iterations);
    let vectors = split_witness(&chsh.witness, 0, 2, 1e-6)?;
    println!("optimal vectors u = {:.3?}", vectors.u());

    let f = i3322();
    let plain = suspension_bound(&f, &opts)?;
    let rmet = upper_bound_nc(&f, &opts)?;
    println!("I3322: elliptope {:.4}, with no-signalling cuts {:.4}", plain.bound, rmet.bound);
    Ok(())
}
