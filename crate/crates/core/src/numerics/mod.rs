//! Dense complex/real linear algebra and GF(2) matrices.

mod dense;
mod eigen;
mod gf2;

pub use dense::{kron, DenseMatrix, RealMatrix, I, ONE, ZERO};
pub use eigen::{
    hermitian_eig, psd_project, psd_project_real, real_symmetric_eig, HermitianEigen, SymmetricEigen,
    HERMITIAN_TOL,
};
pub(crate) use eigen::{psd_reconstruct, sym_eig_slice};
pub use gf2::{gf2_solve_basis_change, Gf2Matrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("block sizes do not line up")]
    BlockLayout,
    #[error("symplectic space needs an even number of rows, got {0}")]
    OddSymplecticDimension(usize),
    #[error("generator columns are linearly dependent over GF(2)")]
    DependentColumns,
    #[error("not local-Clifford-basis-change equivalent")]
    NotBasisChangeEquivalent,
    #[error("parse error: {0}")]
    Parse(String),
}
