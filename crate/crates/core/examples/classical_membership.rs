//! Classical side of the CHSH scenario: enumeration, polytope membership and the
//! no-signalling inequalities.

use tsirelson::correlation::{
    bell_polytope_membership, classical_max, no_signalling_check, BellFunctional, Convention, CorrelationOutcome,
    Membership, Scenario,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for f in [BellFunctional::chsh(), BellFunctional::chsh_pm()] {
        let best = classical_max(&f)?;
        println!("{:?} CHSH: classical max {} at {:?}", f.convention(), best.value, best.assignment);
    }

    let s = Scenario::new(2, 2)?;
    // Tsirelson correlations: outside the Bell polytope.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let quantum = CorrelationOutcome::new(s, Convention::PmOne, vec![0.0; 2], vec![0.0; 2], vec![h, h, h, -h])?;
    match bell_polytope_membership(&quantum)? {
        Membership::Inside { .. } => println!("quantum point is classical?"),
        Membership::Outside { certificate, value_at_outcome } => {
            println!("separated by a functional with value {value_at_outcome:.4} > 0");
            println!("certificate joint coefficients: {:?}", certificate.coeff_joint_flat());
        }
    }

    let uniform = CorrelationOutcome::new(s, Convention::ZeroOne, vec![0.5; 2], vec![0.5; 2], vec![0.5; 4])?;
    println!("uniform noise inside: {}", bell_polytope_membership(&uniform)?.is_inside());

    let biased = CorrelationOutcome::new(Scenario::new(1, 1)?, Convention::ZeroOne, vec![0.75], vec![0.75], vec![0.75])?;
    for v in no_signalling_check(&biased).violations {
        println!("violates {} (value {}, slack {})", v.description, v.value, v.slack);
    }
    Ok(())
}
