use serde::Serialize;

use super::{solve, LinearForm, SdpError, SdpOptions, SdpProblem, SdpStatus};
use crate::correlation::{BellFunctional, Convention, CorrelationError, GramSystem};
use crate::numerics::{real_symmetric_eig, RealMatrix};

/// Optimal value of an elliptope program with its Gram witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdpBound {
    /// Bound in the functional's own convention, constant included.
    pub bound: f64,
    pub status: SdpStatus,
    #[serde(serialize_with = "rows")]
    pub witness: RealMatrix,
    pub primal_residual: f64,
    pub dual_gap_estimate: f64,
    pub iterations: usize,
}

fn rows<S: serde::Serializer>(m: &RealMatrix, s: S) -> Result<S::Ok, S::Error> {
    m.to_rows().serialize(s)
}

/// Terms `Σ c_ij G[i, m+j]` for the joint part of a ±1 functional, offset by `shift`.
fn joint_objective(f: &BellFunctional, shift: usize) -> LinearForm {
    let s = f.scenario();
    let mut obj = LinearForm::new();
    for i in 0..s.m {
        for j in 0..s.n {
            let c = f.coeff_joint(i, j);
            if c != 0.0 {
                obj.add(shift + i, shift + s.m + j, c);
            }
        }
    }
    obj
}

fn finish(f: &BellFunctional, problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpBound, SdpError> {
    let pm = f.in_convention(Convention::PmOne);
    let sol = solve(problem, opts)?;
    if sol.status == SdpStatus::Infeasible {
        return Err(SdpError::Solver(sol.status));
    }
    // Same value in either convention: the conversion is an affine change of variables.
    Ok(SdpBound {
        bound: sol.objective_value + pm.constant(),
        status: sol.status,
        witness: sol.x,
        primal_residual: sol.primal_residual,
        dual_gap_estimate: sol.dual_gap_estimate,
        iterations: sol.iterations,
    })
}

/// Maximum of a correlation-only functional over the elliptope of `K_{m,n}`.
pub fn tsirelson_bound(f: &BellFunctional, opts: &SdpOptions) -> Result<SdpBound, SdpError> {
    let pm = f.in_convention(Convention::PmOne);
    if pm.has_marginal_terms() {
        return Err(SdpError::MarginalTerms);
    }
    let s = pm.scenario();
    let mut p = SdpProblem::new(s.m + s.n);
    p.maximize(joint_objective(&pm, 0))?;
    p.unit_diagonal();
    finish(f, &p, opts)
}

fn suspension_problem(pm: &BellFunctional) -> Result<SdpProblem, SdpError> {
    let s = pm.scenario();
    let mut obj = joint_objective(pm, 1);
    for (i, c) in pm.coeff_a().iter().enumerate() {
        obj.add(0, 1 + i, *c);
    }
    for (j, c) in pm.coeff_b().iter().enumerate() {
        obj.add(0, 1 + s.m + j, *c);
    }
    let mut p = SdpProblem::new(1 + s.m + s.n);
    p.maximize(obj)?;
    p.unit_diagonal();
    Ok(p)
}

/// Maximum over the elliptope of the suspension graph, without no-signalling constraints.
/// Node 0 is the root; marginals are inner products with it.
pub fn suspension_bound(f: &BellFunctional, opts: &SdpOptions) -> Result<SdpBound, SdpError> {
    let pm = f.in_convention(Convention::PmOne);
    finish(f, &suspension_problem(&pm)?, opts)
}

/// [`suspension_bound`] intersected with the four rooted-semimetric inequalities per pair.
pub fn upper_bound_nc(f: &BellFunctional, opts: &SdpOptions) -> Result<SdpBound, SdpError> {
    let pm = f.in_convention(Convention::PmOne);
    let s = pm.scenario();
    let mut p = suspension_problem(&pm)?;
    for i in 0..s.m {
        for j in 0..s.n {
            let (a, b, c) = ((0, 1 + i), (0, 1 + s.m + j), (1 + i, 1 + s.m + j));
            // a + b + c ≥ −1, a + b − c ≤ 1, a − b + c ≤ 1, −a + b + c ≤ 1
            for (sa, sb, sc, h) in [(-1.0, -1.0, -1.0, 1.0), (1.0, 1.0, -1.0, 1.0), (1.0, -1.0, 1.0, 1.0), (-1.0, 1.0, 1.0, 1.0)] {
                p.add_inequality(
                    LinearForm::from_terms(vec![(a.0, a.1, sa), (b.0, b.1, sb), (c.0, c.1, sc)]),
                    h,
                )?;
            }
        }
    }
    finish(f, &p, opts)
}

/// Graph with prescribed edge values `z_ij ∈ [−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElliptopeGraph {
    pub nodes: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl ElliptopeGraph {
    /// `K_{m,n}` with edge values from a row-major `m × n` grid; A nodes first.
    pub fn bipartite(values: &[Vec<f64>]) -> Self {
        let m = values.len();
        let n = values.first().map_or(0, Vec::len);
        let edges = values
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, z)| (i, m + j, *z)))
            .collect();
        Self { nodes: m + n, edges }
    }
}

/// Edge values closer than this to the elliptope count as inside.
pub const ELLIPTOPE_INSIDE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ElliptopeVerdict {
    Inside {
        #[serde(serialize_with = "rows")]
        witness: RealMatrix,
    },
    /// `scale` is the largest `t` with `t · z` in the elliptope.
    Outside { scale: f64 },
}

impl ElliptopeVerdict {
    pub fn is_inside(&self) -> bool {
        matches!(self, Self::Inside { .. })
    }
}

/// Decides whether `z` extends to a unit-diagonal PSD matrix by maximizing the scale
/// `t ≤ 1` for which `t · z` does.
pub fn elliptope_membership(g: &ElliptopeGraph, opts: &SdpOptions) -> Result<ElliptopeVerdict, SdpError> {
    for (k, &(_, _, z)) in g.edges.iter().enumerate() {
        if !(-1.0..=1.0).contains(&z) {
            return Err(SdpError::OutOfRange(k, z));
        }
    }
    // Slot 0 carries t on the diagonal; the graph nodes follow.
    let mut p = SdpProblem::new(1 + g.nodes);
    p.maximize(LinearForm::entry(0, 0, 1.0))?;
    for v in 0..g.nodes {
        p.add_equality(LinearForm::entry(1 + v, 1 + v, 1.0), 1.0)?;
    }
    for &(i, j, z) in &g.edges {
        p.add_equality(LinearForm::from_terms(vec![(1 + i, 1 + j, 1.0), (0, 0, -z)]), 0.0)?;
    }
    p.add_inequality(LinearForm::entry(0, 0, 1.0), 1.0)?;
    let sol = solve(&p, opts)?;
    if sol.status == SdpStatus::Infeasible {
        return Err(SdpError::Solver(sol.status));
    }
    let t = sol.objective_value;
    if t < 1.0 - ELLIPTOPE_INSIDE_TOL {
        return Ok(ElliptopeVerdict::Outside { scale: t });
    }
    let mut witness = RealMatrix::zeros(g.nodes, g.nodes);
    for i in 0..g.nodes {
        for j in 0..g.nodes {
            witness[(i, j)] = sol.x[(1 + i, 1 + j)];
        }
    }
    Ok(ElliptopeVerdict::Inside {
        witness: unit_diagonal(&witness),
    })
}

/// `D^{-1/2} G D^{-1/2}`; keeps PSD and makes the diagonal exactly one.
fn unit_diagonal(g: &RealMatrix) -> RealMatrix {
    let n = g.rows();
    let d: Vec<f64> = (0..n).map(|i| g[(i, i)].max(f64::MIN_POSITIVE).sqrt()).collect();
    let mut out = g.clone();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = if i == j { 1.0 } else { g[(i, j)] / (d[i] * d[j]) };
        }
    }
    out
}

/// Rows `w_i` with `⟨w_i|w_j⟩ = G_ij`, of length equal to the numerical rank.
pub fn gram_factorize(g: &RealMatrix, tol: f64) -> Result<Vec<Vec<f64>>, SdpError> {
    let eig = real_symmetric_eig(g)?;
    let n = g.rows();
    if let Some(&lowest) = eig.values.last() {
        if lowest < -tol {
            return Err(SdpError::Indefinite(lowest));
        }
    }
    let kept: Vec<usize> = (0..n).filter(|&k| eig.values[k] > tol).collect();
    Ok((0..n)
        .map(|i| kept.iter().map(|&k| eig.values[k].sqrt() * eig.vectors[(i, k)]).collect())
        .collect())
}

/// Splits a unit-diagonal witness on `offset + m + n` nodes into a [`GramSystem`],
/// normalizing each vector to unit length.
pub fn split_witness(g: &RealMatrix, offset: usize, m: usize, tol: f64) -> Result<GramSystem, SdpError> {
    let mut rows = gram_factorize(g, tol)?;
    for r in rows.iter_mut() {
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            r.iter_mut().for_each(|x| *x /= norm);
        }
    }
    let v = rows.split_off(offset + m);
    let u = rows.split_off(offset);
    GramSystem::new(u, v).map_err(|e: CorrelationError| e.into())
}
