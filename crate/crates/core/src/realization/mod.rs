//! Explicit quantum realizations of Gram-vector correlations.
//!
//! Given vectors `u^i`, `v^j` with `‖·‖ ≤ 1`, [`realize`] builds `ν = ⌊ξ/2⌋` maximally
//! entangled qubit pairs and observables `A_i = Σ_k u'_k X_k`, `B_j = Σ_k (−1)^{a_k} v'_k X_k`
//! such that `⟨Ψ|A_i ⊗ B_j|Ψ⟩ = ⟨u^i|v^j⟩`. The register holds the A qubits first, then
//! the B qubits, so a state of `2ν` qubits is the row-major `2^ν × 2^ν` amplitude matrix.

mod jl;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::{weyl_brauer, GeneratorForm};
use crate::correlation::{Convention, CorrelationError, CorrelationOutcome, GramSystem, Scenario};
use crate::numerics::{hermitian_eig, DenseMatrix, NumericsError, ZERO};
use crate::pauli::PauliString;
use crate::stabilizer::{expected_signs, singlet_graph_state, StabilizerError};

pub use jl::{jl_dimension, jl_reduce, JlReport, JL_MAX_ATTEMPTS};

/// Default cap on qubits per side.
pub const DEFAULT_QUBIT_CAP: usize = 10;
/// Residual norm below which a Gram-Schmidt candidate counts as dependent.
pub const RANK_TOL: f64 = 1e-10;
/// Slack allowed on the unit-ball precondition.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RealizationError {
    #[error("vector {side}[{index}] has norm {norm} > 1")]
    NormTooLarge { side: &'static str, index: usize, norm: f64 },
    #[error("projected span is zero-dimensional")]
    ZeroSpan,
    #[error("realization needs {nu} qubits per side, cap is {cap}")]
    QubitCap { nu: usize, cap: usize },
    #[error("length mismatch: {0}")]
    Shape(String),
    #[error("index ({i}, {j}) out of range for {m}x{n} observables")]
    IndexOutOfRange { i: usize, j: usize, m: usize, n: usize },
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("observable {0} is not Hermitian")]
    NotHermitian(String),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
}

/// Which side's span the vectors were projected onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanSide {
    A,
    B,
}

/// Vectors expressed in an orthonormal basis of the smaller of the two spans.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedSpan {
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub xi: usize,
    pub side: SpanSide,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal basis of `span(vectors)` by modified Gram-Schmidt with column pivoting.
pub fn orthonormal_basis(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut residuals: Vec<Vec<f64>> = vectors.to_vec();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    loop {
        let Some((pivot, norm)) = residuals
            .iter()
            .map(|r| dot(r, r).sqrt())
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (k, nrm)| match best {
                Some((_, b)) if b >= nrm => best,
                _ => Some((k, nrm)),
            })
        else {
            break;
        };
        if norm <= tol {
            break;
        }
        let q: Vec<f64> = residuals[pivot].iter().map(|x| x / norm).collect();
        // Two passes keep the basis orthogonal to machine precision.
        for _ in 0..2 {
            for r in residuals.iter_mut() {
                let c = dot(&q, r);
                r.iter_mut().zip(&q).for_each(|(x, qk)| *x -= c * qk);
            }
        }
        residuals[pivot].iter_mut().for_each(|x| *x = 0.0);
        basis.push(q);
    }
    basis
}

fn check_norms(g: &GramSystem) -> Result<(), RealizationError> {
    for (side, list) in [("u", g.u()), ("v", g.v())] {
        for (index, w) in list.iter().enumerate() {
            let norm = dot(w, w).sqrt();
            if norm > 1.0 + NORM_TOL {
                return Err(RealizationError::NormTooLarge { side, index, norm });
            }
        }
    }
    Ok(())
}

/// Projects both vector families onto the span of the side with smaller dimension
/// (ties go to the A side), preserving every `⟨u^i|v^j⟩`.
pub fn project_span(g: &GramSystem) -> Result<ProjectedSpan, RealizationError> {
    check_norms(g)?;
    let basis_u = orthonormal_basis(g.u(), RANK_TOL);
    let basis_v = orthonormal_basis(g.v(), RANK_TOL);
    let (basis, side) = if basis_u.len() <= basis_v.len() {
        (basis_u, SpanSide::A)
    } else {
        (basis_v, SpanSide::B)
    };
    if basis.is_empty() {
        return Err(RealizationError::ZeroSpan);
    }
    let coords = |w: &Vec<f64>| basis.iter().map(|q| dot(q, w)).collect::<Vec<f64>>();
    Ok(ProjectedSpan {
        u: g.u().iter().map(coords).collect(),
        v: g.v().iter().map(coords).collect(),
        xi: basis.len(),
        side,
    })
}

/// `((|00⟩ + |11⟩)/√2)^{⊗ν}` with the A qubits first. `ν = 0` gives the scalar state `[1]`.
pub fn build_state(nu: usize) -> Vec<Complex64> {
    let d = 1usize << nu;
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut psi = vec![ZERO; d * d];
    for a in 0..d {
        psi[a * d + a] = amp;
    }
    psi
}

/// The first `ξ` generators for `ν = ⌊ξ/2⌋` qubits; for `ξ = 1` the single generator is `1`.
pub fn generators_for(xi: usize, form: GeneratorForm) -> Result<Vec<PauliString>, RealizationError> {
    if xi == 0 {
        return Err(RealizationError::ZeroSpan);
    }
    let nu = xi / 2;
    if nu == 0 {
        return Ok(vec![PauliString::identity(0)]);
    }
    let g = weyl_brauer(nu, form).map_err(|_| RealizationError::ZeroSpan)?;
    Ok(g.generators()[..xi].to_vec())
}

/// Sign bits `a_k` for the first `ξ` generators.
pub fn signs_for(xi: usize) -> Vec<u8> {
    let nu = xi / 2;
    let mut signs = expected_signs(nu);
    if xi.is_multiple_of(2) {
        signs.truncate(xi);
    }
    signs
}

/// `Σ_k c_k P_k` as a dense matrix.
pub fn combine(coeffs: &[f64], generators: &[PauliString]) -> DenseMatrix {
    let d = 1usize << generators[0].qubits();
    let mut out = DenseMatrix::zeros(d, d);
    for (c, p) in coeffs.iter().zip(generators) {
        if *c != 0.0 {
            out = &out + &p.to_matrix().scale_real(*c);
        }
    }
    out
}

/// `A_i = Σ_k (u'^i)_k X_k` and `B_j = Σ_k (−1)^{a_k} (v'^j)_k X_k`.
pub fn build_observables(
    u: &[Vec<f64>],
    v: &[Vec<f64>],
    signs: &[u8],
    form: GeneratorForm,
) -> Result<(Vec<DenseMatrix>, Vec<DenseMatrix>), RealizationError> {
    let xi = u.first().or(v.first()).map_or(0, Vec::len);
    if let Some(w) = u.iter().chain(v).find(|w| w.len() != xi) {
        return Err(RealizationError::Shape(format!("vector of length {} among length {xi}", w.len())));
    }
    if signs.len() < xi {
        return Err(RealizationError::Shape(format!("{} signs for {xi} generators", signs.len())));
    }
    let generators = generators_for(xi, form)?;
    let a = u.iter().map(|w| combine(w, &generators)).collect();
    let b = v
        .iter()
        .map(|w| {
            let signed: Vec<f64> = w
                .iter()
                .zip(signs)
                .map(|(x, s)| if *s == 1 { -x } else { *x })
                .collect();
            combine(&signed, &generators)
        })
        .collect();
    Ok((a, b))
}

/// `C(z) = z₁ Z + z₂ X`, the single-qubit observable of the planar construction.
pub fn planar_observable(z: [f64; 2]) -> DenseMatrix {
    DenseMatrix::from_real_rows(&[&[z[0], z[1]], &[z[1], -z[0]]])
}

/// `⟨ψ|A ⊗ B|ψ⟩` for a state on the `dim(A) · dim(B)` register.
pub fn bipartite_expectation(
    state: &[Complex64],
    a: &DenseMatrix,
    b: &DenseMatrix,
) -> Result<Complex64, RealizationError> {
    let (da, db) = (a.rows(), b.rows());
    if state.len() != da * db {
        return Err(RealizationError::Shape(format!(
            "state length {} vs operator dims {da}x{db}",
            state.len()
        )));
    }
    let psi = DenseMatrix::from_vec(da, db, state.to_vec())?;
    let left = psi.adjoint().matmul(a)?.matmul(&psi)?;
    Ok(trace_product_transposed(&left, b))
}

/// `Tr(M Bᵀ) = Σ_kl M_kl B_kl`.
fn trace_product_transposed(m: &DenseMatrix, b: &DenseMatrix) -> Complex64 {
    m.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}

/// Von Neumann entropy (base 2) of the reduced state on the qubits in `side_a`.
pub fn entanglement_entropy(state: &[Complex64], side_a: &[usize]) -> Result<f64, RealizationError> {
    let total = state.len().trailing_zeros() as usize;
    if state.len() != 1 << total || side_a.iter().any(|&q| q >= total) {
        return Err(RealizationError::Shape(format!(
            "cut {side_a:?} on a state of length {}",
            state.len()
        )));
    }
    let side_b: Vec<usize> = (0..total).filter(|q| !side_a.contains(q)).collect();
    let (small, large) = if side_a.len() <= side_b.len() {
        (side_a, side_b.as_slice())
    } else {
        (side_b.as_slice(), side_a)
    };
    let index = |basis: usize, qubits: &[usize]| {
        qubits
            .iter()
            .fold(0usize, |acc, &q| (acc << 1) | ((basis >> (total - 1 - q)) & 1))
    };
    let (ds, dl) = (1usize << small.len(), 1usize << large.len());
    let mut m = DenseMatrix::zeros(ds, dl);
    for (basis, amp) in state.iter().enumerate() {
        m[(index(basis, small), index(basis, large))] = *amp;
    }
    let mut rho = m.matmul(&m.adjoint())?;
    // Symmetrize away rounding so the eigensolver's Hermitian check passes.
    rho = (&rho + &rho.adjoint()).scale_real(0.5);
    let eig = hermitian_eig(&rho)?;
    Ok(eig
        .values
        .iter()
        .filter(|p| **p > 1e-15)
        .map(|p| -p * p.log2())
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizeOptions {
    pub form: GeneratorForm,
    pub qubit_cap: usize,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        Self {
            form: GeneratorForm::XForm,
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }
}

/// State, observables and their generator decompositions.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRealization {
    nu: usize,
    xi: usize,
    form: GeneratorForm,
    state: Vec<Complex64>,
    observables_a: Vec<DenseMatrix>,
    observables_b: Vec<DenseMatrix>,
    generators: Vec<PauliString>,
    decomp_a: Vec<Vec<f64>>,
    decomp_b: Vec<Vec<f64>>,
    signs: Vec<u8>,
}

pub fn realize(g: &GramSystem) -> Result<QuantumRealization, RealizationError> {
    realize_with(g, RealizeOptions::default())
}

/// With `GeneratorForm::ZForm` the state comes from the graph-state pipeline
/// (`ℒ` applied to the stabilizer state of the pairing graph).
pub fn realize_with(g: &GramSystem, opts: RealizeOptions) -> Result<QuantumRealization, RealizationError> {
    let span = project_span(g)?;
    let nu = span.xi / 2;
    if nu > opts.qubit_cap {
        return Err(RealizationError::QubitCap { nu, cap: opts.qubit_cap });
    }
    let signs = signs_for(span.xi);
    let (observables_a, observables_b) = build_observables(&span.u, &span.v, &signs, opts.form)?;
    let state = match opts.form {
        GeneratorForm::ZForm if nu > 0 => {
            let mut psi = singlet_graph_state(nu)?;
            let phase = psi[0] / psi[0].norm();
            psi.iter_mut().for_each(|a| *a /= phase);
            psi
        }
        _ => build_state(nu),
    };
    let decomp_b = span
        .v
        .iter()
        .map(|w| w.iter().zip(&signs).map(|(x, s)| if *s == 1 { -x } else { *x }).collect())
        .collect();
    Ok(QuantumRealization {
        nu,
        xi: span.xi,
        form: opts.form,
        state,
        observables_a,
        observables_b,
        generators: generators_for(span.xi, opts.form)?,
        decomp_a: span.u,
        decomp_b,
        signs,
    })
}

impl QuantumRealization {
    /// Assembles a realization from parts, checking dimensions and hermiticity.
    pub fn from_parts(
        nu: usize,
        state: Vec<Complex64>,
        observables_a: Vec<DenseMatrix>,
        observables_b: Vec<DenseMatrix>,
    ) -> Result<Self, RealizationError> {
        let d = 1usize << nu;
        if state.len() != d * d {
            return Err(RealizationError::Shape(format!("state length {} for nu = {nu}", state.len())));
        }
        for (side, list) in [("A", &observables_a), ("B", &observables_b)] {
            for (k, m) in list.iter().enumerate() {
                if m.rows() != d || m.cols() != d {
                    return Err(RealizationError::Shape(format!("{side}{} is {}x{}", k + 1, m.rows(), m.cols())));
                }
                if !m.is_hermitian(1e-10) {
                    return Err(RealizationError::NotHermitian(format!("{side}{}", k + 1)));
                }
            }
        }
        Ok(Self {
            nu,
            xi: 0,
            form: GeneratorForm::XForm,
            state,
            observables_a,
            observables_b,
            generators: vec![],
            decomp_a: vec![],
            decomp_b: vec![],
            signs: vec![],
        })
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    /// Dimension of the projected span; 0 when built by [`Self::from_parts`].
    pub fn xi(&self) -> usize {
        self.xi
    }

    pub fn form(&self) -> GeneratorForm {
        self.form
    }

    pub fn state(&self) -> &[Complex64] {
        &self.state
    }

    pub fn observables_a(&self) -> &[DenseMatrix] {
        &self.observables_a
    }

    pub fn observables_b(&self) -> &[DenseMatrix] {
        &self.observables_b
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// Coefficients of each `A_i` over [`Self::generators`].
    pub fn decomp_a(&self) -> &[Vec<f64>] {
        &self.decomp_a
    }

    /// Coefficients of each `B_j` over [`Self::generators`], signs included.
    pub fn decomp_b(&self) -> &[Vec<f64>] {
        &self.decomp_b
    }

    pub fn signs(&self) -> &[u8] {
        &self.signs
    }

    pub fn m(&self) -> usize {
        self.observables_a.len()
    }

    pub fn n(&self) -> usize {
        self.observables_b.len()
    }

    /// Entropy of entanglement between the A and B registers.
    pub fn entropy(&self) -> Result<f64, RealizationError> {
        entanglement_entropy(&self.state, &(0..self.nu).collect::<Vec<_>>())
    }
}

/// Grid of `⟨Ψ|A_i ⊗ B_j|Ψ⟩` with the largest imaginary residual seen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationGrid {
    pub values: Vec<Vec<f64>>,
    pub max_imaginary: f64,
}

/// Real part of `⟨Ψ|A_i ⊗ B_j|Ψ⟩`.
pub fn expectation(r: &QuantumRealization, i: usize, j: usize) -> Result<f64, RealizationError> {
    if i >= r.m() || j >= r.n() {
        return Err(RealizationError::IndexOutOfRange { i, j, m: r.m(), n: r.n() });
    }
    Ok(bipartite_expectation(&r.state, &r.observables_a[i], &r.observables_b[j])?.re)
}

pub fn expectation_grid(r: &QuantumRealization) -> Result<ExpectationGrid, RealizationError> {
    let d = 1usize << r.nu;
    let psi = DenseMatrix::from_vec(d, d, r.state.clone())?;
    let psi_adj = psi.adjoint();
    let mut values = Vec::with_capacity(r.m());
    let mut max_imaginary = 0.0f64;
    for a in &r.observables_a {
        let left = psi_adj.matmul(a)?.matmul(&psi)?;
        let row = r
            .observables_b
            .iter()
            .map(|b| {
                let e = trace_product_transposed(&left, b);
                max_imaginary = max_imaginary.max(e.im.abs());
                e.re
            })
            .collect();
        values.push(row);
    }
    Ok(ExpectationGrid { values, max_imaginary })
}

/// `max |⟨Ψ|A_i ⊗ B_j|Ψ⟩ − ⟨u^i|v^j⟩|`.
pub fn verify(r: &QuantumRealization, g: &GramSystem) -> Result<f64, RealizationError> {
    if r.m() != g.m() || r.n() != g.n() {
        return Err(RealizationError::Shape(format!(
            "realization is {}x{}, gram system is {}x{}",
            r.m(),
            r.n(),
            g.m(),
            g.n()
        )));
    }
    let grid = expectation_grid(r)?;
    let target = g.cross_inner_products();
    Ok(grid
        .values
        .iter()
        .flatten()
        .zip(target.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// ±1 outcome with marginals `⟨A_i ⊗ I⟩`, `⟨I ⊗ B_j⟩` and joints `⟨A_i ⊗ B_j⟩`.
pub fn correlation_outcome(r: &QuantumRealization) -> Result<CorrelationOutcome, RealizationError> {
    let d = 1usize << r.nu;
    let id = DenseMatrix::identity(d);
    let clamp = |x: f64| x.clamp(-1.0, 1.0);
    let a = r
        .observables_a
        .iter()
        .map(|a| bipartite_expectation(&r.state, a, &id).map(|e| clamp(e.re)))
        .collect::<Result<Vec<_>, _>>()?;
    let b = r
        .observables_b
        .iter()
        .map(|b| bipartite_expectation(&r.state, &id, b).map(|e| clamp(e.re)))
        .collect::<Result<Vec<_>, _>>()?;
    let joint: Vec<f64> = expectation_grid(r)?.values.into_iter().flatten().map(clamp).collect();
    Ok(CorrelationOutcome::new(
        Scenario::new(r.m(), r.n())?,
        Convention::PmOne,
        a,
        b,
        joint,
    )?)
}

type ComplexPair = [f64; 2];

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PauliDecompDoc {
    generators: Vec<String>,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RealizationDoc {
    nu: usize,
    #[serde(default)]
    xi: usize,
    #[serde(default = "default_form")]
    form: GeneratorForm,
    state: Vec<ComplexPair>,
    observables_a: Vec<Vec<Vec<ComplexPair>>>,
    observables_b: Vec<Vec<Vec<ComplexPair>>>,
    #[serde(default)]
    pauli_decomp: Option<PauliDecompDoc>,
    #[serde(default)]
    signs: Vec<u8>,
}

fn default_form() -> GeneratorForm {
    GeneratorForm::XForm
}

fn matrix_doc(m: &DenseMatrix) -> Vec<Vec<ComplexPair>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn matrix_from_doc(rows: &[Vec<ComplexPair>]) -> DenseMatrix {
    DenseMatrix::from_rows(
        &rows
            .iter()
            .map(|r| r.iter().map(|p| Complex64::new(p[0], p[1])).collect())
            .collect::<Vec<_>>(),
    )
}

impl Serialize for QuantumRealization {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let doc = RealizationDoc {
            nu: self.nu,
            xi: self.xi,
            form: self.form,
            state: self.state.iter().map(|z| [z.re, z.im]).collect(),
            observables_a: self.observables_a.iter().map(matrix_doc).collect(),
            observables_b: self.observables_b.iter().map(matrix_doc).collect(),
            pauli_decomp: (!self.generators.is_empty()).then(|| PauliDecompDoc {
                generators: self.generators.iter().map(ToString::to_string).collect(),
                a: self.decomp_a.clone(),
                b: self.decomp_b.clone(),
            }),
            signs: self.signs.clone(),
        };
        doc.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuantumRealization {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = RealizationDoc::deserialize(d)?;
        if doc.observables_a.iter().chain(&doc.observables_b).flatten().any(|row| row.len() != 1 << doc.nu) {
            return Err(D::Error::custom(format!("observable rows must have length {}", 1usize << doc.nu)));
        }
        let mut r = QuantumRealization::from_parts(
            doc.nu,
            doc.state.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
            doc.observables_a.iter().map(|m| matrix_from_doc(m)).collect(),
            doc.observables_b.iter().map(|m| matrix_from_doc(m)).collect(),
        )
        .map_err(D::Error::custom)?;
        r.xi = doc.xi;
        r.form = doc.form;
        r.signs = doc.signs;
        if let Some(p) = doc.pauli_decomp {
            r.generators = p
                .generators
                .iter()
                .map(|s| PauliString::parse(s).ok_or_else(|| D::Error::custom(format!("bad Pauli string {s:?}"))))
                .collect::<Result<_, _>>()?;
            r.decomp_a = p.a;
            r.decomp_b = p.b;
        }
        Ok(r)
    }
}
