//! Anticommuting Pauli generators and the maximally entangled state they act on.

use tsirelson::clifford::{anticommutation_check, weyl_brauer, GeneratorForm};
use tsirelson::realization::{bipartite_expectation, build_state};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nu = 2;
    for form in [GeneratorForm::XForm, GeneratorForm::ZForm] {
        let g = weyl_brauer(nu, form)?;
        let names: Vec<String> = g.generators().iter().map(ToString::to_string).collect();
        println!("{form:?}: {}", names.join(" "));
        println!("  anticommutation defect {:e}", anticommutation_check(&g));
        let psi = build_state(nu);
        let diag: Vec<f64> = g
            .generators()
            .iter()
            .map(|x| bipartite_expectation(&psi, &x.to_matrix(), &x.to_matrix()).map(|e| e.re))
            .collect::<Result<_, _>>()?;
        println!("  ⟨Ψ|X_k ⊗ X_k|Ψ⟩ = {diag:?}");
    }
    Ok(())
}
