use nalgebra::DMatrix;
use num_complex::Complex64;

use super::dense::{DenseMatrix, RealMatrix};
use super::NumericsError;

/// Tolerance used to decide whether an input is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Spectral decomposition `m = V diag(values) V†` with eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: DenseMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.values.len();
        let mut out = DenseMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            for i in 0..n {
                let vik = self.vectors[(i, k)] * lambda;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig(m: &DenseMatrix) -> Result<HermitianEigen, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NotSquare(m.rows(), m.cols()));
    }
    let scale = m.max_abs().max(1.0);
    if !m.is_hermitian(HERMITIAN_TOL * scale) {
        return Err(NumericsError::NotHermitian);
    }
    let n = m.rows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: DenseMatrix::zeros(0, 0),
        });
    }
    if m.is_real(0.0) {
        let real = real_symmetric_eig(&m.real_part())?;
        return Ok(HermitianEigen {
            values: real.values,
            vectors: real.vectors.to_complex(),
        });
    }
    let mat = DMatrix::<Complex64>::from_row_slice(n, n, m.as_slice());
    let eig = mat.symmetric_eigen();
    let order = descending_order(eig.eigenvalues.as_slice());
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, dst)] = eig.eigenvectors[(i, src)];
        }
    }
    Ok(HermitianEigen {
        values: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        vectors,
    })
}

/// Real symmetric eigendecomposition, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: RealMatrix,
}

pub fn real_symmetric_eig(m: &RealMatrix) -> Result<SymmetricEigen, NumericsError> {
    if m.rows() != m.cols() {
        return Err(NumericsError::NotSquare(m.rows(), m.cols()));
    }
    let n = m.rows();
    let scale = m.as_slice().iter().fold(1.0f64, |a, x| a.max(x.abs()));
    if !m.is_symmetric(HERMITIAN_TOL * scale) {
        return Err(NumericsError::NotHermitian);
    }
    let (values, vectors) = sym_eig_slice(n, m.as_slice());
    Ok(SymmetricEigen {
        values,
        vectors: RealMatrix::from_rows(
            &(0..n).map(|i| vectors[i * n..(i + 1) * n].to_vec()).collect::<Vec<_>>(),
        ),
    })
}

/// Unchecked kernel: returns descending eigenvalues and row-major eigenvector matrix
/// (column k is the k-th eigenvector).
pub(crate) fn sym_eig_slice(n: usize, data: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mat = DMatrix::<f64>::from_row_slice(n, n, data);
    let eig = mat.symmetric_eigen();
    let order = descending_order(eig.eigenvalues.as_slice());
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + dst] = eig.eigenvectors[(i, src)];
        }
    }
    (order.iter().map(|&k| eig.eigenvalues[k]).collect(), vectors)
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// Nearest positive semidefinite matrix in Frobenius norm (negative eigenvalues clipped to zero).
pub fn psd_project(m: &DenseMatrix) -> Result<DenseMatrix, NumericsError> {
    let eig = hermitian_eig(m)?;
    let clipped = HermitianEigen {
        values: eig.values.iter().map(|&v| v.max(0.0)).collect(),
        vectors: eig.vectors,
    };
    let mut out = clipped.reconstruct();
    symmetrize(&mut out);
    Ok(out)
}

/// Real symmetric variant of [`psd_project`].
pub fn psd_project_real(m: &RealMatrix) -> Result<RealMatrix, NumericsError> {
    let n = m.rows();
    let eig = real_symmetric_eig(m)?;
    let mut out = RealMatrix::zeros(n, n);
    psd_reconstruct(n, &eig.values, eig.vectors.as_slice(), |i, j, v| out[(i, j)] = v);
    Ok(out)
}

/// Writes `Σ_k max(λ_k,0) v_k v_kᵀ` through `set(i, j, value)`, visiting both triangles.
pub(crate) fn psd_reconstruct(n: usize, values: &[f64], vectors: &[f64], mut set: impl FnMut(usize, usize, f64)) {
    let positive: Vec<usize> = (0..n).filter(|&k| values[k] > 0.0).collect();
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for &k in &positive {
                acc += values[k] * vectors[i * n + k] * vectors[j * n + k];
            }
            set(i, j, acc);
            if i != j {
                set(j, i, acc);
            }
        }
    }
}

fn symmetrize(m: &mut DenseMatrix) {
    let n = m.rows();
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}
