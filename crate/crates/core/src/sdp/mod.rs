//! Small dense semidefinite programs and the elliptope bounds built on them.

mod bounds;
mod solver;

use crate::correlation::CorrelationError;
use crate::numerics::{NumericsError, RealMatrix};

pub use bounds::{
    elliptope_membership, gram_factorize, split_witness, suspension_bound, tsirelson_bound, upper_bound_nc,
    ElliptopeGraph, ElliptopeVerdict, SdpBound, ELLIPTOPE_INSIDE_TOL,
};
pub use solver::{solve, SdpOptions, SdpSolution, SdpStatus};

/// Largest matrix size accepted by [`solve`].
pub const MAX_DIM: usize = 400;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdpError {
    #[error("matrix dimension {0} outside 1..={MAX_DIM}")]
    Dimension(usize),
    #[error("index ({0}, {1}) outside a {2}x{2} matrix")]
    Index(usize, usize, usize),
    #[error("functional has marginal terms in the ±1 convention; use upper_bound_nc")]
    MarginalTerms,
    #[error("values must lie in [-1, 1]; entry {0} is {1}")]
    OutOfRange(usize, f64),
    #[error("matrix is indefinite: eigenvalue {0:e}")]
    Indefinite(f64),
    #[error("solver stopped with status {0:?}")]
    Solver(SdpStatus),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
}

/// `Σ w · X_ij` over the listed entries of a symmetric matrix variable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearForm {
    terms: Vec<(usize, usize, f64)>,
}

impl LinearForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entry(i: usize, j: usize, w: f64) -> Self {
        Self { terms: vec![(i, j, w)] }
    }

    pub fn from_terms(terms: Vec<(usize, usize, f64)>) -> Self {
        Self { terms }
    }

    /// `Tr(F X)` for symmetric `F`.
    pub fn from_matrix(f: &RealMatrix) -> Self {
        let n = f.rows();
        let mut terms = Vec::new();
        for i in 0..n {
            if f[(i, i)] != 0.0 {
                terms.push((i, i, f[(i, i)]));
            }
            for j in i + 1..n {
                let w = f[(i, j)] + f[(j, i)];
                if w != 0.0 {
                    terms.push((i, j, w));
                }
            }
        }
        Self { terms }
    }

    pub fn add(&mut self, i: usize, j: usize, w: f64) -> &mut Self {
        self.terms.push((i, j, w));
        self
    }

    pub fn terms(&self) -> &[(usize, usize, f64)] {
        &self.terms
    }

    pub fn evaluate(&self, x: &RealMatrix) -> f64 {
        self.terms.iter().map(|&(i, j, w)| w * x[(i, j)]).sum()
    }

    fn max_index(&self) -> Option<(usize, usize)> {
        self.terms.iter().map(|&(i, j, _)| (i, j)).max_by_key(|&(i, j)| i.max(j))
    }
}

/// `max ⟨objective, X⟩` subject to equalities, `≤` inequalities and `X ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    dim: usize,
    objective: LinearForm,
    equalities: Vec<(LinearForm, f64)>,
    inequalities: Vec<(LinearForm, f64)>,
}

impl SdpProblem {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            objective: LinearForm::new(),
            equalities: Vec::new(),
            inequalities: Vec::new(),
        }
    }

    fn check(&self, form: &LinearForm) -> Result<(), SdpError> {
        match form.max_index() {
            Some((i, j)) if i.max(j) >= self.dim => Err(SdpError::Index(i, j, self.dim)),
            _ => Ok(()),
        }
    }

    pub fn maximize(&mut self, objective: LinearForm) -> Result<&mut Self, SdpError> {
        self.check(&objective)?;
        self.objective = objective;
        Ok(self)
    }

    pub fn add_equality(&mut self, form: LinearForm, value: f64) -> Result<&mut Self, SdpError> {
        self.check(&form)?;
        self.equalities.push((form, value));
        Ok(self)
    }

    /// `form(X) ≤ bound`.
    pub fn add_inequality(&mut self, form: LinearForm, bound: f64) -> Result<&mut Self, SdpError> {
        self.check(&form)?;
        self.inequalities.push((form, bound));
        Ok(self)
    }

    /// Pins `X_ii = 1` for every `i`.
    pub fn unit_diagonal(&mut self) -> &mut Self {
        for i in 0..self.dim {
            self.equalities.push((LinearForm::entry(i, i, 1.0), 1.0));
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objective(&self) -> &LinearForm {
        &self.objective
    }

    pub fn equalities(&self) -> &[(LinearForm, f64)] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[(LinearForm, f64)] {
        &self.inequalities
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::real_symmetric_eig;

    #[test]
    fn fixed_scalar() {
        let mut p = SdpProblem::new(1);
        p.maximize(LinearForm::entry(0, 0, 1.0)).unwrap();
        p.add_equality(LinearForm::entry(0, 0, 1.0), 0.5).unwrap();
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.objective_value - 0.5).abs() < 1e-7);
    }

    #[test]
    fn correlation_matrix_edge() {
        let mut p = SdpProblem::new(2);
        p.maximize(LinearForm::entry(0, 1, 1.0)).unwrap();
        p.unit_diagonal();
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.objective_value - 1.0).abs() < 1e-6);
        assert!((s.x[(0, 1)] - 1.0).abs() < 1e-6);
        assert!((s.dual_objective - 1.0).abs() < 1e-5);
    }

    #[test]
    fn chsh_elliptope() {
        // Σ ±⟨u_i|v_j⟩ over a 4x4 unit-diagonal Gram matrix.
        let mut p = SdpProblem::new(4);
        let mut obj = LinearForm::new();
        obj.add(0, 2, 1.0).add(0, 3, 1.0).add(1, 2, 1.0).add(1, 3, -1.0);
        p.maximize(obj).unwrap();
        p.unit_diagonal();
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.objective_value - 2.0 * 2f64.sqrt()).abs() < 1e-4);
        let eig = real_symmetric_eig(&s.x).unwrap();
        assert!(eig.values.iter().all(|v| *v >= -1e-8));
        for i in 0..4 {
            assert!((s.x[(i, i)] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn inequality_binds() {
        // max X_01 with unit diagonal and X_01 ≤ 0.3.
        let mut p = SdpProblem::new(2);
        p.maximize(LinearForm::entry(0, 1, 1.0)).unwrap();
        p.unit_diagonal();
        p.add_inequality(LinearForm::entry(0, 1, 1.0), 0.3).unwrap();
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert!((s.objective_value - 0.3).abs() < 1e-6);
        assert!(s.primal_residual < 1e-6);
    }

    #[test]
    fn inconsistent_equalities_infeasible() {
        let mut p = SdpProblem::new(2);
        p.add_equality(LinearForm::entry(0, 0, 1.0), 1.0).unwrap();
        p.add_equality(LinearForm::entry(0, 0, 2.0), 1.0).unwrap();
        assert_eq!(solve(&p, &SdpOptions::default()).unwrap().status, SdpStatus::Infeasible);
    }

    #[test]
    fn index_and_dimension_checks() {
        let mut p = SdpProblem::new(2);
        assert!(p.add_equality(LinearForm::entry(0, 2, 1.0), 0.0).is_err());
        assert!(solve(&SdpProblem::new(0), &SdpOptions::default()).is_err());
        assert!(solve(&SdpProblem::new(MAX_DIM + 1), &SdpOptions::default()).is_err());
    }

    #[test]
    fn deterministic() {
        let mut p = SdpProblem::new(3);
        p.maximize(LinearForm::from_terms(vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])).unwrap();
        p.unit_diagonal();
        let opts = SdpOptions::default();
        assert_eq!(solve(&p, &opts).unwrap(), solve(&p, &opts).unwrap());
    }

    #[test]
    fn matrix_form_matches_entries() {
        let f = RealMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 2.0]]);
        let x = RealMatrix::from_rows(&[vec![3.0, -1.0], vec![-1.0, 4.0]]);
        // Tr(FX) = 3 + 8 − 1
        assert_eq!(LinearForm::from_matrix(&f).evaluate(&x), 10.0);
    }
}
