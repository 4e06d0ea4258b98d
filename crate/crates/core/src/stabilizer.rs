//! Binary-symplectic stabilizer formalism and the graph-state route to the ν-singlet state.
//!
//! A Pauli string on `N` qubits is encoded as the column `(u | v)` with `u` the Z-part and
//! `v` the X-part; phases are dropped by the encoding and tracked by [`PauliString`].
//! For the two-party register the block order is `(Z_A | Z_B | X_A | X_B)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clifford::{weyl_brauer, GeneratorForm, GeneratorSet};
use crate::numerics::{gf2_solve_basis_change, Gf2Matrix, NumericsError, ZERO};
use crate::pauli::{Pauli, PauliString};

/// Largest register handled by [`graph_state`].
pub const GRAPH_STATE_QUBIT_LIMIT: usize = 12;
/// Largest eigen-residual accepted by [`eigen_sign_check`].
pub const EIGEN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StabilizerError {
    #[error("bit vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("symplectic vectors need even length, got {0}")]
    OddLength(usize),
    #[error("{0} qubits exceeds the limit of {GRAPH_STATE_QUBIT_LIMIT}")]
    TooManyQubits(usize),
    #[error("adjacency matrix must be symmetric with zero diagonal")]
    InvalidAdjacency,
    #[error("state is not an eigenvector of generator {index} (residual {residual:e})")]
    NotEigenvector { index: usize, residual: f64 },
    #[error("state length {found} does not match {expected}")]
    StateLength { expected: usize, found: usize },
    #[error("projector annihilated every seed vector")]
    Annihilated,
    #[error("no right factor R with L·E·R = F: {0}")]
    Mismatch(String),
    #[error("number of qubits per side must be at least 1")]
    ZeroQubits,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// `(u | v)` bits of a Pauli string; the phase is discarded.
pub fn encode(p: &PauliString) -> Vec<u8> {
    p.z_bits()
        .into_iter()
        .chain(p.x_bits())
        .map(u8::from)
        .collect()
}

/// Inverse of [`encode`] with phase `+1`.
pub fn decode(bits: &[u8]) -> Result<PauliString, StabilizerError> {
    if !bits.len().is_multiple_of(2) {
        return Err(StabilizerError::OddLength(bits.len()));
    }
    let n = bits.len() / 2;
    let z: Vec<bool> = bits[..n].iter().map(|&b| b != 0).collect();
    let x: Vec<bool> = bits[n..].iter().map(|&b| b != 0).collect();
    Ok(PauliString::from_bits(&z, &x))
}

/// `eᵀ P f` over GF(2); zero exactly when the encoded Pauli strings commute.
pub fn symplectic_product(e: &[u8], f: &[u8]) -> Result<u8, StabilizerError> {
    if e.len() != f.len() {
        return Err(StabilizerError::LengthMismatch(e.len(), f.len()));
    }
    if !e.len().is_multiple_of(2) {
        return Err(StabilizerError::OddLength(e.len()));
    }
    let n = e.len() / 2;
    let mut acc = 0u8;
    for k in 0..n {
        acc ^= (e[k] & f[n + k]) ^ (e[n + k] & f[k]);
    }
    Ok(acc & 1)
}

/// Generator matrix whose columns encode `strings`.
pub fn generator_matrix(strings: &[PauliString]) -> Gf2Matrix {
    let cols: Vec<Vec<u8>> = strings.iter().map(encode).collect();
    Gf2Matrix::from_columns(&cols)
}

/// `T_{ν−1}` (ones strictly above the diagonal) or `T_ν` (ones on and above it).
pub fn upper_ones(nu: usize, include_diagonal: bool) -> Gf2Matrix {
    let mut t = Gf2Matrix::zeros(nu, nu);
    for i in 0..nu {
        for k in i..nu {
            if k > i || include_diagonal {
                t.set(i, k, true);
            }
        }
    }
    t
}

/// The `4ν × 2ν` matrix `E = [[T_{ν−1}, T_ν]; [T_{ν−1}, T_ν]; [I, I]; [I, I]]` whose
/// column `k` encodes `X_k ⊗ X_k` for the z-form generators.
pub fn generator_matrix_e(nu: usize) -> Result<Gf2Matrix, StabilizerError> {
    if nu == 0 {
        return Err(StabilizerError::ZeroQubits);
    }
    let t0 = upper_ones(nu, false);
    let t1 = upper_ones(nu, true);
    let id = Gf2Matrix::identity(nu);
    Ok(Gf2Matrix::block(&[&[&t0, &t1], &[&t0, &t1], &[&id, &id], &[&id, &id]])?)
}

/// `P ⊗ P` on the doubled register.
pub fn doubled(p: &PauliString) -> PauliString {
    p.tensor(p)
}

/// The doubled generators `X_k ⊗ X_k`, `k = 1..2ν` (`2ν + 1` when `include_last`).
pub fn doubled_generators(g: &GeneratorSet, include_last: bool) -> Vec<PauliString> {
    let count = if include_last { g.len() } else { g.len() - 1 };
    g.generators()[..count].iter().map(doubled).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetForms {
    /// Graph-state generator matrix `[[0, I]; [I, 0]; [I, 0]; [0, I]]`.
    pub f: Gf2Matrix,
    /// Hadamard on every B qubit: swaps the `Z_B` and `X_B` row blocks.
    pub l: Gf2Matrix,
    /// `[[I, T_ν]; [T_ν, I]]`.
    pub r2: Gf2Matrix,
    pub r2_rank: usize,
}

pub fn target_f_l_r2(nu: usize) -> Result<TargetForms, StabilizerError> {
    if nu == 0 {
        return Err(StabilizerError::ZeroQubits);
    }
    let id = Gf2Matrix::identity(nu);
    let zero = Gf2Matrix::zeros(nu, nu);
    let f = Gf2Matrix::block(&[&[&zero, &id], &[&id, &zero], &[&id, &zero], &[&zero, &id]])?;
    let l = Gf2Matrix::block(&[
        &[&id, &zero, &zero, &zero],
        &[&zero, &zero, &zero, &id],
        &[&zero, &zero, &id, &zero],
        &[&zero, &id, &zero, &zero],
    ])?;
    let t = upper_ones(nu, true);
    let r2 = Gf2Matrix::block(&[&[&id, &t], &[&t, &id]])?;
    let r2_rank = r2.rank();
    Ok(TargetForms { f, l, r2, r2_rank })
}

/// Adjacency `θ = [[0, I]; [I, 0]]` pairing qubit `A_k` with `B_k`.
pub fn pairing_adjacency(nu: usize) -> GraphAdjacency {
    let id = Gf2Matrix::identity(nu);
    let zero = Gf2Matrix::zeros(nu, nu);
    GraphAdjacency {
        theta: Gf2Matrix::block(&[&[&zero, &id], &[&id, &zero]]).expect("square blocks"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformReport {
    pub nu: usize,
    pub e: Gf2Matrix,
    pub f: Gf2Matrix,
    /// Local Clifford part (Hadamard on the B side).
    pub l: Gf2Matrix,
    /// Right factor with `L · E · R = F`.
    pub r: Gf2Matrix,
    /// An independent `(L', R')` pair found by symplectic basis matching.
    pub matched_l: Gf2Matrix,
    pub matched_r: Gf2Matrix,
}

/// Certifies `L · E · R = F` by solving for the right factor `R`.
pub fn verify_transform(nu: usize) -> Result<TransformReport, StabilizerError> {
    let e = generator_matrix_e(nu)?;
    let targets = target_f_l_r2(nu)?;
    verify_transform_for(&e, &targets.f, &targets.l, nu)
}

/// Same as [`verify_transform`] for a caller-supplied `E`.
pub fn verify_transform_for(
    e: &Gf2Matrix,
    f: &Gf2Matrix,
    l: &Gf2Matrix,
    nu: usize,
) -> Result<TransformReport, StabilizerError> {
    if !l.is_symplectic() {
        return Err(StabilizerError::Mismatch("L is not symplectic".into()));
    }
    let le = l.mul(e)?;
    let r = le
        .solve_right(f)
        .ok_or_else(|| StabilizerError::Mismatch("L·E·R = F has no solution".into()))?;
    if r.inverse().is_none() {
        return Err(StabilizerError::Mismatch("the only solutions R are singular".into()));
    }
    if le.mul(&r)? != *f {
        return Err(StabilizerError::Mismatch("L·E·R differs from F".into()));
    }
    let (matched_l, matched_r) =
        gf2_solve_basis_change(e, f).map_err(|err| StabilizerError::Mismatch(err.to_string()))?;
    Ok(TransformReport {
        nu,
        e: e.clone(),
        f: f.clone(),
        l: l.clone(),
        r,
        matched_l,
        matched_r,
    })
}

/// Symmetric GF(2) adjacency matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphAdjacency {
    theta: Gf2Matrix,
}

impl GraphAdjacency {
    pub fn new(theta: Gf2Matrix) -> Result<Self, StabilizerError> {
        let n = theta.rows();
        if theta.cols() != n || theta != theta.transpose() || (0..n).any(|i| theta.get(i, i)) {
            return Err(StabilizerError::InvalidAdjacency);
        }
        Ok(Self { theta })
    }

    /// Reads `θ` off a generator matrix of the form `[θ; I]`.
    pub fn from_generator_matrix(k: &Gf2Matrix) -> Result<Self, StabilizerError> {
        let n = k.cols();
        if k.rows() != 2 * n {
            return Err(StabilizerError::InvalidAdjacency);
        }
        let mut theta = Gf2Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                theta.set(i, j, k.get(i, j));
                if k.get(n + i, j) != (i == j) {
                    return Err(StabilizerError::InvalidAdjacency);
                }
            }
        }
        Self::new(theta)
    }

    pub fn theta(&self) -> &Gf2Matrix {
        &self.theta
    }

    pub fn qubits(&self) -> usize {
        self.theta.rows()
    }

    /// `K_j = X^{(j)} ∏_k (Z^{(k)})^{θ_kj}`.
    pub fn stabilizers(&self) -> Vec<PauliString> {
        let n = self.qubits();
        (0..n)
            .map(|j| {
                let ops = (0..n)
                    .map(|k| {
                        if k == j {
                            Pauli::X
                        } else if self.theta.get(k, j) {
                            Pauli::Z
                        } else {
                            Pauli::I
                        }
                    })
                    .collect();
                PauliString::new(0, ops)
            })
            .collect()
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

/// Unit vector fixed by every `K_j`, built by applying `∏ (I + K_j)/2` to a seed.
pub fn graph_state(theta: &GraphAdjacency) -> Result<Vec<Complex64>, StabilizerError> {
    let n = theta.qubits();
    if n > GRAPH_STATE_QUBIT_LIMIT {
        return Err(StabilizerError::TooManyQubits(n));
    }
    let dim = 1usize << n;
    let stabilizers = theta.stabilizers();
    let project = |mut psi: Vec<Complex64>| {
        for k in &stabilizers {
            let kpsi = k.apply(&psi);
            for (a, b) in psi.iter_mut().zip(kpsi) {
                *a = (*a + b) * 0.5;
            }
        }
        psi
    };
    let mut seed = vec![ZERO; dim];
    seed[0] = Complex64::new(1.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..8 {
        let psi = project(seed.clone());
        let nrm = norm(&psi);
        if nrm > 1e-8 {
            return Ok(psi.into_iter().map(|a| a / nrm).collect());
        }
        seed = (0..dim)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
    }
    Err(StabilizerError::Annihilated)
}

/// Applies `H` to each listed qubit of an `n`-qubit state.
pub fn apply_hadamards(state: &mut [Complex64], n: usize, qubits: impl IntoIterator<Item = usize>) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for q in qubits {
        let bit = 1usize << (n - 1 - q);
        for b in 0..state.len() {
            if b & bit == 0 {
                let (x, y) = (state[b], state[b | bit]);
                state[b] = (x + y) * s;
                state[b | bit] = (x - y) * s;
            }
        }
    }
}

/// `ℒ|Ψ'⟩` where `|Ψ'⟩` is the graph state of the pairing adjacency and
/// `ℒ = I^{⊗ν} ⊗ H^{⊗ν}`. Qubits are ordered `A_1..A_ν, B_1..B_ν`.
pub fn singlet_graph_state(nu: usize) -> Result<Vec<Complex64>, StabilizerError> {
    if nu == 0 {
        return Err(StabilizerError::ZeroQubits);
    }
    let mut psi = graph_state(&pairing_adjacency(nu))?;
    apply_hadamards(&mut psi, 2 * nu, nu..2 * nu);
    Ok(psi)
}

/// Sign bits `a_k` with `(X_k ⊗ X_k)|Ψ⟩ = (−1)^{a_k}|Ψ⟩` for every generator.
pub fn eigen_sign_check(state: &[Complex64], generators: &GeneratorSet) -> Result<Vec<u8>, StabilizerError> {
    let qubits = 2 * generators.nu();
    if state.len() != 1 << qubits {
        return Err(StabilizerError::StateLength {
            expected: 1 << qubits,
            found: state.len(),
        });
    }
    let mut signs = Vec::with_capacity(generators.len());
    for (index, g) in generators.generators().iter().enumerate() {
        let image = doubled(g).apply(state);
        let overlap: Complex64 = state.iter().zip(&image).map(|(a, b)| a.conj() * b).sum();
        let sign = if overlap.re >= 0.0 { 1.0 } else { -1.0 };
        let residual = image
            .iter()
            .zip(state)
            .map(|(b, a)| (b - a * sign).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual > EIGEN_TOL {
            return Err(StabilizerError::NotEigenvector {
                index: index + 1,
                residual,
            });
        }
        signs.push(u8::from(sign < 0.0));
    }
    Ok(signs)
}

/// Largest eigen-residual over all doubled generators, ignoring which sign is taken.
pub fn eigen_residual(state: &[Complex64], generators: &GeneratorSet) -> f64 {
    generators
        .generators()
        .iter()
        .map(|g| {
            let image = doubled(g).apply(state);
            let plus: f64 = image.iter().zip(state).map(|(b, a)| (b - a).norm_sqr()).sum();
            let minus: f64 = image.iter().zip(state).map(|(b, a)| (b + a).norm_sqr()).sum();
            plus.min(minus).sqrt()
        })
        .fold(0.0, f64::max)
}

/// Expected sign pattern: 0 for `k ≤ ν` and `k = 2ν+1`, 1 for `ν < k ≤ 2ν`.
pub fn expected_signs(nu: usize) -> Vec<u8> {
    (1..=2 * nu + 1).map(|k| u8::from(k > nu && k <= 2 * nu)).collect()
}

/// JSON-friendly summary of the stabilizer pipeline for one `ν`.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineSummary {
    pub nu: usize,
    pub e: String,
    pub f: String,
    pub l: String,
    pub r: String,
    pub l_symplectic: bool,
    pub r_invertible: bool,
    pub r2_rank: usize,
    pub signs_z_form: Vec<u8>,
    pub max_eigen_residual: f64,
}

pub fn pipeline_summary(nu: usize) -> Result<PipelineSummary, StabilizerError> {
    let report = verify_transform(nu)?;
    let targets = target_f_l_r2(nu)?;
    let psi = singlet_graph_state(nu)?;
    let g = weyl_brauer(nu, GeneratorForm::ZForm).map_err(|_| StabilizerError::ZeroQubits)?;
    let signs = eigen_sign_check(&psi, &g)?;
    Ok(PipelineSummary {
        nu,
        e: report.e.to_text(),
        f: report.f.to_text(),
        l: report.l.to_text(),
        r: report.r.to_text(),
        l_symplectic: report.l.is_symplectic(),
        r_invertible: report.r.inverse().is_some(),
        r2_rank: targets.r2_rank,
        signs_z_form: signs,
        max_eigen_residual: eigen_residual(&psi, &g),
    })
}
