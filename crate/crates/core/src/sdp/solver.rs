//! Douglas-Rachford splitting between the PSD cone and an affine subspace.
//!
//! The problem `max ⟨C, X⟩ s.t. A(X) = b, G(X) ≤ h, X ⪰ 0` is rewritten over
//! `z = (svec X, s)` as `max cᵀz s.t. Mz = r, z ∈ S₊ × ℝ₊ᵖ` and solved by over-relaxed
//! ADMM with residual-balancing step size. `svec` stacks the upper triangle with
//! off-diagonal entries scaled by `√2`, so the trace inner product becomes a dot product.

use serde::Serialize;

use super::{LinearForm, SdpError, SdpProblem};
use crate::numerics::{psd_reconstruct, sym_eig_slice, RealMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Initial ADMM penalty.
    pub rho: f64,
    /// Over-relaxation factor in `(0, 2)`.
    pub alpha: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200_000,
            rho: 1.0,
            alpha: 1.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    /// PSD iterate.
    pub x: RealMatrix,
    pub objective_value: f64,
    /// Largest violation of an equality or inequality at `x`.
    pub primal_residual: f64,
    /// Objective of the dual point recovered from the ADMM multipliers.
    pub dual_objective: f64,
    pub dual_gap_estimate: f64,
    /// Norm of the negative part of the recovered dual slack.
    pub dual_infeasibility: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Offsets of each row start in the packed upper triangle.
fn row_offsets(n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    let mut acc = 0;
    for i in 0..n {
        out.push(acc);
        acc += n - i;
    }
    out
}

/// Sparse row over the stacked variable.
#[derive(Clone)]
struct SparseRow(Vec<(usize, f64)>);

impl SparseRow {
    fn dot(&self, z: &[f64]) -> f64 {
        self.0.iter().map(|(k, a)| a * z[*k]).sum()
    }
}

fn form_to_row(form: &LinearForm, offsets: &[usize]) -> SparseRow {
    let mut entries: Vec<(usize, f64)> = Vec::with_capacity(form.terms().len());
    for &(i, j, w) in form.terms() {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let k = offsets[i] + (j - i);
        let a = if i == j { w } else { w / SQRT2 };
        match entries.iter_mut().find(|(idx, _)| *idx == k) {
            Some(e) => e.1 += a,
            None => entries.push((k, a)),
        }
    }
    entries.retain(|(_, a)| *a != 0.0);
    SparseRow(entries)
}

fn svec_to_matrix(n: usize, offsets: &[usize], z: &[f64], out: &mut [f64]) {
    for i in 0..n {
        out[i * n + i] = z[offsets[i]];
        for j in i + 1..n {
            let v = z[offsets[i] + j - i] / SQRT2;
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
}

fn project_psd(n: usize, offsets: &[usize], z: &mut [f64], scratch: &mut [f64]) {
    svec_to_matrix(n, offsets, z, scratch);
    let (values, vectors) = sym_eig_slice(n, scratch);
    psd_reconstruct(n, &values, &vectors, |i, j, v| {
        if i <= j {
            z[offsets[i] + j - i] = if i == j { v } else { v * SQRT2 };
        }
    });
}

struct AffineProjector {
    rows: Vec<SparseRow>,
    rhs: Vec<f64>,
    /// Pseudo-inverse of `M Mᵀ`, row-major.
    pinv: Vec<f64>,
}

impl AffineProjector {
    fn new(rows: Vec<SparseRow>, rhs: Vec<f64>, width: usize) -> Self {
        let m = rows.len();
        let mut dense_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); width];
        for (r, row) in rows.iter().enumerate() {
            for &(k, a) in &row.0 {
                dense_cols[k].push((r, a));
            }
        }
        let mut gram = vec![0.0; m * m];
        for col in &dense_cols {
            for &(r1, a1) in col {
                for &(r2, a2) in col {
                    gram[r1 * m + r2] += a1 * a2;
                }
            }
        }
        let mut pinv = vec![0.0; m * m];
        if m > 0 {
            let (values, vectors) = sym_eig_slice(m, &gram);
            let cutoff = values[0].abs().max(1.0) * 1e-12 * m as f64;
            for (k, &lambda) in values.iter().enumerate() {
                if lambda > cutoff {
                    for i in 0..m {
                        let vik = vectors[i * m + k] / lambda;
                        for j in 0..m {
                            pinv[i * m + j] += vik * vectors[j * m + k];
                        }
                    }
                }
            }
        }
        Self { rows, rhs, pinv }
    }

    fn residual(&self, z: &[f64]) -> Vec<f64> {
        self.rows.iter().zip(&self.rhs).map(|(row, b)| row.dot(z) - b).collect()
    }

    /// `(M Mᵀ)⁺ q`.
    fn solve(&self, q: &[f64]) -> Vec<f64> {
        let m = q.len();
        (0..m)
            .map(|i| self.pinv[i * m..(i + 1) * m].iter().zip(q).map(|(p, x)| p * x).sum())
            .collect()
    }

    fn add_transpose(&self, z: &mut [f64], weights: &[f64], scale: f64) {
        for (row, w) in self.rows.iter().zip(weights) {
            for &(k, a) in &row.0 {
                z[k] += scale * a * w;
            }
        }
    }

    fn project(&self, z: &mut [f64]) {
        let t = self.solve(&self.residual(z));
        self.add_transpose(z, &t, -1.0);
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn solve(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution, SdpError> {
    let n = p.dim();
    if n == 0 || n > super::MAX_DIM {
        return Err(SdpError::Dimension(n));
    }
    let offsets = row_offsets(n);
    let nvec = n * (n + 1) / 2;
    let slack = p.inequalities().len();
    let width = nvec + slack;

    let mut rows: Vec<SparseRow> = Vec::new();
    let mut rhs = Vec::new();
    for (form, g) in p.equalities() {
        rows.push(form_to_row(form, &offsets));
        rhs.push(*g);
    }
    for (l, (form, h)) in p.inequalities().iter().enumerate() {
        let mut row = form_to_row(form, &offsets);
        row.0.push((nvec + l, 1.0));
        rows.push(row);
        rhs.push(*h);
    }
    let aff = AffineProjector::new(rows, rhs, width);
    let mut c = vec![0.0; width];
    for (k, a) in form_to_row(p.objective(), &offsets).0 {
        c[k] += a;
    }

    // An empty affine set cannot be fixed by iterating.
    let mut probe = vec![0.0; width];
    aff.project(&mut probe);
    let inconsistency = aff.residual(&probe).iter().fold(0.0f64, |m, r| m.max(r.abs()));

    let mut scratch = vec![0.0; n * n];
    let project_cone = |z: &mut [f64], scratch: &mut [f64]| {
        project_psd(n, &offsets, &mut z[..nvec], scratch);
        z[nvec..].iter_mut().for_each(|s| *s = s.max(0.0));
    };

    let mut rho = opts.rho;
    let mut y = vec![0.0; width];
    let mut u = vec![0.0; width];
    let mut x = vec![0.0; width];
    let mut status = SdpStatus::MaxIter;
    let mut iterations = opts.max_iter;
    let mut history: Vec<f64> = Vec::new();
    let sqrt_len = (width as f64).sqrt();

    if inconsistency > 1e-8 {
        status = SdpStatus::Infeasible;
        iterations = 0;
    } else {
        for it in 0..opts.max_iter {
            for k in 0..width {
                x[k] = y[k] - u[k] + c[k] / rho;
            }
            aff.project(&mut x);
            let y_prev = y.clone();
            let mut relaxed = vec![0.0; width];
            for k in 0..width {
                relaxed[k] = opts.alpha * x[k] + (1.0 - opts.alpha) * y_prev[k];
                y[k] = relaxed[k] + u[k];
            }
            project_cone(&mut y, &mut scratch);
            for k in 0..width {
                u[k] += relaxed[k] - y[k];
            }

            let r_pri = norm(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
            let r_dual = rho * norm(&y.iter().zip(&y_prev).map(|(a, b)| a - b).collect::<Vec<_>>());
            let eps_pri = opts.tol * sqrt_len + opts.tol * norm(&x).max(norm(&y));
            let eps_dual = opts.tol * sqrt_len + opts.tol * rho * norm(&u);
            if r_pri <= eps_pri && r_dual <= eps_dual {
                status = SdpStatus::Optimal;
                iterations = it + 1;
                break;
            }
            if it % 1000 == 0 {
                let combined = r_pri + r_dual;
                if !history.is_empty() && combined > 1e3 * history[history.len() - 1].max(opts.tol) && combined > 1.0 {
                    status = SdpStatus::Infeasible;
                    iterations = it + 1;
                    break;
                }
                history.push(combined);
            }
            if it % 50 == 49 {
                let scale = if r_pri > 10.0 * r_dual {
                    2.0
                } else if r_dual > 10.0 * r_pri {
                    0.5
                } else {
                    1.0
                };
                if scale != 1.0 {
                    rho *= scale;
                    u.iter_mut().for_each(|v| *v /= scale);
                }
            }
        }
    }

    let objective_value: f64 = c.iter().zip(&y).map(|(a, b)| a * b).sum();
    let primal_residual = {
        let res = aff.residual(&y);
        let neq = p.equalities().len();
        let mut worst = res[..neq].iter().fold(0.0f64, |m, r| m.max(r.abs()));
        for (l, r) in res[neq..].iter().enumerate() {
            // Inequality violation is measured without the slack.
            worst = worst.max((r - y[nvec + l]).max(0.0));
        }
        worst
    };
    let (dual_objective, dual_infeasibility) = dual_point(&aff, &c, &u, rho, n, &offsets, nvec);
    let mut x_mat = RealMatrix::zeros(n, n);
    let mut full = vec![0.0; n * n];
    svec_to_matrix(n, &offsets, &y[..nvec], &mut full);
    for i in 0..n {
        for j in 0..n {
            x_mat[(i, j)] = full[i * n + j];
        }
    }
    Ok(SdpSolution {
        x: x_mat,
        objective_value,
        primal_residual,
        dual_objective,
        dual_gap_estimate: (dual_objective - objective_value).abs(),
        dual_infeasibility,
        status,
        iterations,
    })
}

/// Dual point `ν` that best explains `c − ρu ∈ range(Mᵀ)`, with its objective `rᵀν` and the
/// size of the negative part of the dual slack `Mᵀν − c` (zero for an exactly feasible dual).
fn dual_point(aff: &AffineProjector, c: &[f64], u: &[f64], rho: f64, n: usize, offsets: &[usize], nvec: usize) -> (f64, f64) {
    let target: Vec<f64> = c.iter().zip(u).map(|(ci, ui)| ci - rho * ui).collect();
    let m_target: Vec<f64> = aff.rows.iter().map(|row| row.dot(&target)).collect();
    let nu = aff.solve(&m_target);
    let mut s = vec![0.0; c.len()];
    aff.add_transpose(&mut s, &nu, 1.0);
    s.iter_mut().zip(c).for_each(|(a, b)| *a -= b);
    let mut mat = vec![0.0; n * n];
    svec_to_matrix(n, offsets, &s[..nvec], &mut mat);
    let (values, _) = sym_eig_slice(n, &mat);
    let negative = values.iter().filter(|v| **v < 0.0).map(|v| v * v).sum::<f64>()
        + s[nvec..].iter().filter(|v| **v < 0.0).map(|v| v * v).sum::<f64>();
    (nu.iter().zip(&aff.rhs).map(|(a, b)| a * b).sum(), negative.sqrt())
}
