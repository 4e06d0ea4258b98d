//! Weyl-Brauer generators of the Clifford algebra on `ν` qubits.
//!
//! `z_form`: `X_k = Z^{k−1} X I^{ν−k}`, `X_{k+ν} = −Z^{k−1} Y I^{ν−k}`, `X_{2ν+1} = Z^{⊗ν}`.
//! `x_form`: `X_k = X^{k−1} Z I^{ν−k}`, `X_{k+ν} = X^{k−1} Y I^{ν−k}`, `X_{2ν+1} = X^{⊗ν}`.
//! The two are conjugate under `H^{⊗ν}`.

use serde::{Deserialize, Serialize};

use crate::pauli::{Pauli, PauliString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorForm {
    ZForm,
    XForm,
}

/// Which of the two inequivalent representations for an odd number of generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    #[default]
    Standard,
    /// Every generator negated.
    Negated,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliffordError {
    #[error("number of qubits must be at least 1")]
    ZeroQubits,
}

/// `2ν + 1` pairwise anticommuting, self-inverse Pauli strings on `ν` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    nu: usize,
    form: GeneratorForm,
    generators: Vec<PauliString>,
}

impl GeneratorSet {
    /// Wraps arbitrary strings, for experiments and negative tests.
    pub fn from_strings(form: GeneratorForm, generators: Vec<PauliString>) -> Self {
        let nu = generators.first().map_or(0, PauliString::qubits);
        Self { nu, form, generators }
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn form(&self) -> GeneratorForm {
        self.form
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// Generator `X_k` with 1-based index `k`.
    pub fn get(&self, k: usize) -> &PauliString {
        &self.generators[k - 1]
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

pub fn weyl_brauer(nu: usize, form: GeneratorForm) -> Result<GeneratorSet, CliffordError> {
    weyl_brauer_with(nu, form, Representation::Standard)
}

pub fn weyl_brauer_with(
    nu: usize,
    form: GeneratorForm,
    representation: Representation,
) -> Result<GeneratorSet, CliffordError> {
    if nu == 0 {
        return Err(CliffordError::ZeroQubits);
    }
    let (prefix, first, last) = match form {
        GeneratorForm::ZForm => (Pauli::Z, Pauli::X, Pauli::Z),
        GeneratorForm::XForm => (Pauli::X, Pauli::Z, Pauli::X),
    };
    let string = |k: usize, at: Pauli| {
        let ops = (0..nu)
            .map(|q| match q.cmp(&(k - 1)) {
                std::cmp::Ordering::Less => prefix,
                std::cmp::Ordering::Equal => at,
                std::cmp::Ordering::Greater => Pauli::I,
            })
            .collect();
        PauliString::new(0, ops)
    };
    let mut generators: Vec<PauliString> = (1..=nu).map(|k| string(k, first)).collect();
    for k in 1..=nu {
        let y = string(k, Pauli::Y);
        generators.push(match form {
            GeneratorForm::ZForm => y.neg(),
            GeneratorForm::XForm => y,
        });
    }
    generators.push(PauliString::new(0, vec![last; nu]));
    if representation == Representation::Negated {
        generators = generators.into_iter().map(PauliString::neg).collect();
    }
    Ok(GeneratorSet { nu, form, generators })
}

/// Max entry of `|X_iX_j + X_jX_i − 2δ_ij I|` over all pairs, computed exactly.
pub fn anticommutation_check(g: &GeneratorSet) -> f64 {
    let gens = g.generators();
    let mut worst = 0.0f64;
    for (i, a) in gens.iter().enumerate() {
        for (j, b) in gens.iter().enumerate().skip(i) {
            let dev = if i == j {
                // P² = i^{2k} I, so P² + P² − 2I is either 0 or −4I.
                let sq = a * a;
                (2.0 * sq.phase_factor() - 2.0).norm()
            } else if a.commutes_with(b) {
                // XY + YX = 2XY, a Pauli string with unit-modulus entries.
                2.0
            } else {
                0.0
            };
            worst = worst.max(dev);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{kron, DenseMatrix, ONE};
    use num_complex::Complex64;

    fn strings(g: &GeneratorSet) -> Vec<String> {
        g.generators().iter().map(ToString::to_string).collect()
    }

    #[test]
    fn single_qubit_forms() {
        assert_eq!(strings(&weyl_brauer(1, GeneratorForm::ZForm).unwrap()), ["+X", "-Y", "+Z"]);
        assert_eq!(strings(&weyl_brauer(1, GeneratorForm::XForm).unwrap()), ["+Z", "+Y", "+X"]);
        assert!(weyl_brauer(0, GeneratorForm::XForm).is_err());
    }

    #[test]
    fn two_qubit_shifted_index() {
        let g = weyl_brauer(2, GeneratorForm::ZForm).unwrap();
        assert_eq!(g.get(3).to_string(), "-YI");
        assert_eq!(g.get(2).to_string(), "+ZX");
        assert_eq!(g.get(5).to_string(), "+ZZ");
    }

    fn dense_anticommutation(g: &GeneratorSet) -> f64 {
        let mats: Vec<DenseMatrix> = g.generators().iter().map(PauliString::to_matrix).collect();
        let id = DenseMatrix::identity(1 << g.nu());
        let mut worst = 0.0f64;
        for (i, a) in mats.iter().enumerate() {
            for (j, b) in mats.iter().enumerate() {
                let s = &a.matmul(b).unwrap() + &b.matmul(a).unwrap();
                let target = if i == j { id.scale_real(2.0) } else { DenseMatrix::zeros(id.rows(), id.cols()) };
                worst = worst.max(s.max_abs_diff(&target));
            }
        }
        worst
    }

    #[test]
    fn generators_anticommute() {
        for nu in 1..=6 {
            for form in [GeneratorForm::ZForm, GeneratorForm::XForm] {
                for rep in [Representation::Standard, Representation::Negated] {
                    let g = weyl_brauer_with(nu, form, rep).unwrap();
                    assert_eq!(g.len(), 2 * nu + 1);
                    assert_eq!(anticommutation_check(&g), 0.0);
                }
            }
        }
        let g = weyl_brauer(3, GeneratorForm::ZForm).unwrap();
        assert_eq!(dense_anticommutation(&g), 0.0);
    }

    #[test]
    fn duplicated_generator_detected() {
        let mut gens = weyl_brauer(2, GeneratorForm::ZForm).unwrap().generators().to_vec();
        gens[1] = gens[0].clone();
        let bad = GeneratorSet::from_strings(GeneratorForm::ZForm, gens);
        assert_eq!(anticommutation_check(&bad), 2.0);
        assert_eq!(dense_anticommutation(&bad), 2.0);
    }

    #[test]
    fn last_generator_is_phase_times_paired_product() {
        for nu in 1..=6 {
            let g = weyl_brauer(nu, GeneratorForm::ZForm).unwrap();
            let mut prod = PauliString::identity(nu);
            for k in 1..=nu {
                prod = &prod * &(g.get(k + nu) * g.get(k));
            }
            // (−i)^ν ∏_k X_{k+ν} X_k
            let lhs = prod.times_i_pow((3 * nu % 4) as u8);
            assert_eq!(&lhs, g.get(2 * nu + 1), "nu = {nu}");
            let dense = lhs.to_matrix();
            assert!(dense.max_abs_diff(&g.get(2 * nu + 1).to_matrix()) == 0.0);

            // In the plain order X_1 ⋯ X_{2ν} the identity holds up to a sign.
            let mut plain = PauliString::identity(nu);
            for k in 1..=2 * nu {
                plain = &plain * g.get(k);
            }
            let plain = plain.times_i_pow((3 * nu % 4) as u8);
            assert!(plain == *g.get(2 * nu + 1) || plain.neg() == *g.get(2 * nu + 1));
        }
    }

    fn hadamard_all(nu: usize) -> DenseMatrix {
        let s = 1.0 / 2f64.sqrt();
        let h = DenseMatrix::from_real_rows(&[&[s, s], &[s, -s]]);
        let mut m = DenseMatrix::identity(1);
        for _ in 0..nu {
            m = kron(&m, &h);
        }
        m
    }

    #[test]
    fn forms_are_hadamard_conjugate() {
        for nu in 1..=4 {
            let z = weyl_brauer(nu, GeneratorForm::ZForm).unwrap();
            let x = weyl_brauer(nu, GeneratorForm::XForm).unwrap();
            let h = hadamard_all(nu);
            for (a, b) in z.generators().iter().zip(x.generators()) {
                let conj = h.matmul(&a.to_matrix()).unwrap().matmul(&h).unwrap();
                assert!(conj.max_abs_diff(&b.to_matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn products_span_full_pauli_basis() {
        for nu in 1..=3 {
            let g = weyl_brauer(nu, GeneratorForm::ZForm).unwrap();
            let mut seen = std::collections::HashSet::new();
            for mask in 0u32..(1 << g.len()) {
                let mut p = PauliString::identity(nu);
                for k in 0..g.len() {
                    if mask >> k & 1 == 1 {
                        p = &p * &g.generators()[k];
                    }
                }
                seen.insert(p.with_phase(0));
            }
            assert_eq!(seen.len(), 1 << (2 * nu));
            // Same statement as a rank over the dense Pauli basis: distinct strings are
            // orthogonal under the trace inner product.
            let mats: Vec<DenseMatrix> = seen.iter().map(PauliString::to_matrix).collect();
            let dim = 1usize << nu;
            for (i, a) in mats.iter().enumerate() {
                for (j, b) in mats.iter().enumerate() {
                    let t = a.adjoint().matmul(b).unwrap().trace();
                    let expect = if i == j { Complex64::new(dim as f64, 0.0) } else { 0.0 * ONE };
                    assert!((t - expect).norm() < 1e-9);
                }
            }
        }
    }
}
