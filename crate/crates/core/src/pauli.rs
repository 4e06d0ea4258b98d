//! Pauli strings with exact phases in `{±1, ±i}`.
//!
//! A single-qubit factor is `σ(z, x)` with `σ(0,0)=I`, `σ(0,1)=X`, `σ(1,1)=Y`, `σ(1,0)=Z`.
//! Qubit 0 is the leftmost tensor factor (most significant bit of a basis index).

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

use crate::numerics::{kron, DenseMatrix, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(z: bool, x: bool) -> Self {
        match (z, x) {
            (false, false) => Self::I,
            (false, true) => Self::X,
            (true, true) => Self::Y,
            (true, false) => Self::Z,
        }
    }

    /// `(z, x)` bits.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Self::I => (false, false),
            Self::X => (false, true),
            Self::Y => (true, true),
            Self::Z => (true, false),
        }
    }

    /// `self · other = i^k · product`; returns `(k, product)`.
    pub fn mul(self, other: Self) -> (u8, Self) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    pub fn matrix(self) -> DenseMatrix {
        match self {
            Self::I => DenseMatrix::identity(2),
            Self::X => DenseMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
            Self::Y => {
                let mut m = DenseMatrix::zeros(2, 2);
                m[(0, 1)] = -I;
                m[(1, 0)] = I;
                m
            }
            Self::Z => DenseMatrix::diag_real(&[1.0, -1.0]),
        }
    }

    fn letter(self) -> char {
        match self {
            Self::I => 'I',
            Self::X => 'X',
            Self::Y => 'Y',
            Self::Z => 'Z',
        }
    }
}

/// `i^phase · P_0 ⊗ … ⊗ P_{N−1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    phase: u8,
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(phase: u8, ops: Vec<Pauli>) -> Self {
        Self { phase: phase % 4, ops }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(0, vec![Pauli::I; n])
    }

    /// Builds from `(z | x)` bit vectors with phase `+1`.
    pub fn from_bits(z: &[bool], x: &[bool]) -> Self {
        assert_eq!(z.len(), x.len(), "z and x parts must have equal length");
        Self::new(0, z.iter().zip(x).map(|(&a, &b)| Pauli::from_bits(a, b)).collect())
    }

    /// Parses strings such as `"XZ"`, `"-YI"`, `"+iZZ"`, `"-iX"`.
    pub fn parse(s: &str) -> Option<Self> {
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            (0, s.strip_prefix('+').unwrap_or(s))
        };
        let ops = rest
            .chars()
            .map(|c| match c {
                'I' => Some(Pauli::I),
                'X' => Some(Pauli::X),
                'Y' => Some(Pauli::Y),
                'Z' => Some(Pauli::Z),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Self::new(phase, ops))
    }

    pub fn qubits(&self) -> usize {
        self.ops.len()
    }

    /// Exponent `k` of the overall phase `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn z_bits(&self) -> Vec<bool> {
        self.ops.iter().map(|p| p.bits().0).collect()
    }

    pub fn x_bits(&self) -> Vec<bool> {
        self.ops.iter().map(|p| p.bits().1).collect()
    }

    pub fn phase_factor(&self) -> Complex64 {
        [ONE, I, -ONE, -I][self.phase as usize]
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    /// Multiplies the phase by `i^k`.
    pub fn times_i_pow(mut self, k: u8) -> Self {
        self.phase = (self.phase + k) % 4;
        self
    }

    pub fn neg(self) -> Self {
        self.times_i_pow(2)
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        let anti = self
            .ops
            .iter()
            .zip(&other.ops)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut ops = self.ops.clone();
        ops.extend_from_slice(&other.ops);
        Self::new(self.phase + other.phase, ops)
    }

    pub fn to_matrix(&self) -> DenseMatrix {
        let mut m = DenseMatrix::identity(1);
        for p in &self.ops {
            m = kron(&m, &p.matrix());
        }
        m.scale(self.phase_factor())
    }

    /// Applies the operator to a state vector of length `2^N`.
    pub fn apply(&self, state: &[Complex64]) -> Vec<Complex64> {
        let n = self.ops.len();
        assert_eq!(state.len(), 1 << n, "state length must be 2^N");
        let mut flip = 0usize;
        for (q, p) in self.ops.iter().enumerate() {
            if p.bits().1 {
                flip |= 1 << (n - 1 - q);
            }
        }
        let global = self.phase_factor();
        let mut out = vec![ZERO; state.len()];
        for (b, amp) in state.iter().enumerate() {
            if *amp == ZERO {
                continue;
            }
            let mut k = 0u8;
            for (q, p) in self.ops.iter().enumerate() {
                let bit = (b >> (n - 1 - q)) & 1 == 1;
                match p {
                    Pauli::Z if bit => k += 2,
                    // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
                    Pauli::Y => k += if bit { 3 } else { 1 },
                    _ => {}
                }
            }
            out[b ^ flip] += amp * global * [ONE, I, -ONE, -I][(k % 4) as usize];
        }
        out
    }
}

impl Mul for &PauliString {
    type Output = PauliString;

    fn mul(self, rhs: &PauliString) -> PauliString {
        assert_eq!(self.qubits(), rhs.qubits(), "qubit count mismatch");
        let mut phase = self.phase + rhs.phase;
        let ops = self
            .ops
            .iter()
            .zip(&rhs.ops)
            .map(|(a, b)| {
                let (k, p) = a.mul(*b);
                phase += k;
                p
            })
            .collect();
        PauliString::new(phase, ops)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}")?;
        for p in &self.ops {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

/// Dense matrix of a Pauli string.
pub fn pauli_to_matrix(p: &PauliString) -> DenseMatrix {
    p.to_matrix()
}
