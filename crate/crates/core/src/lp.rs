//! Dense revised simplex over an implicit column set.
//!
//! Solves `max cᵀλ` subject to `Aλ = b`, `λ ≥ 0`. Columns are produced on demand by a
//! [`Columns`] implementation so that very wide problems (one column per polytope vertex)
//! never materialize the full constraint matrix.

use nalgebra::DMatrix;

/// Column oracle for the constraint matrix `A` and the objective `c`.
pub trait Columns {
    fn rows(&self) -> usize;
    fn len(&self) -> usize;
    fn fill(&self, j: usize, out: &mut [f64]);
    fn cost(&self, _j: usize) -> f64 {
        0.0
    }
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LpOptions {
    /// Feasibility tolerance on the phase-one objective and pivot magnitudes.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal {
        value: f64,
        /// Basic structural columns and their weights.
        weights: Vec<(usize, f64)>,
    },
    /// `farkas` satisfies `farkasᵀA_j ≤ tol` for every column and `farkasᵀb = infeasibility > 0`.
    Infeasible { farkas: Vec<f64>, infeasibility: f64 },
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Column(usize),
    Artificial(usize),
}

struct Tableau<'a, C: Columns> {
    cols: &'a C,
    m: usize,
    sign: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<Var>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    scratch: Vec<f64>,
    opts: LpOptions,
    pivots_since_refactor: usize,
}

impl<'a, C: Columns> Tableau<'a, C> {
    fn new(cols: &'a C, b: &[f64], opts: LpOptions) -> Self {
        let m = cols.rows();
        let sign: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        let b: Vec<f64> = b.iter().zip(&sign).map(|(v, s)| v * s).collect();
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        Self {
            cols,
            m,
            sign,
            xb: b.clone(),
            b,
            basis: (0..m).map(Var::Artificial).collect(),
            binv,
            scratch: vec![0.0; m],
            opts,
            pivots_since_refactor: 0,
        }
    }

    fn column(&mut self, var: Var) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        match var {
            Var::Column(j) => {
                self.cols.fill(j, &mut self.scratch);
                for i in 0..self.m {
                    out[i] = self.scratch[i] * self.sign[i];
                }
            }
            Var::Artificial(i) => out[i] = 1.0,
        }
        out
    }

    fn duals(&self, cost: &dyn Fn(Var) -> f64) -> Vec<f64> {
        let m = self.m;
        let mut pi = vec![0.0; m];
        for (i, &var) in self.basis.iter().enumerate() {
            let c = cost(var);
            if c != 0.0 {
                for k in 0..m {
                    pi[k] += c * self.binv[i * m + k];
                }
            }
        }
        pi
    }

    fn ftran(&self, a: &[f64]) -> Vec<f64> {
        let m = self.m;
        (0..m)
            .map(|i| (0..m).map(|k| self.binv[i * m + k] * a[k]).sum())
            .collect()
    }

    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut bmat = DMatrix::<f64>::zeros(m, m);
        for (i, &var) in self.basis.clone().iter().enumerate() {
            let col = self.column(var);
            for k in 0..m {
                bmat[(k, i)] = col[k];
            }
        }
        let Some(inv) = bmat.try_inverse() else {
            return false;
        };
        for i in 0..m {
            for k in 0..m {
                self.binv[i * m + k] = inv[(i, k)];
            }
        }
        self.xb = self.ftran(&self.b.clone());
        for v in &mut self.xb {
            if *v < 0.0 && *v > -self.opts.tol {
                *v = 0.0;
            }
        }
        self.pivots_since_refactor = 0;
        true
    }

    fn pivot(&mut self, r: usize, entering: Var, w: &[f64]) {
        let m = self.m;
        let wr = w[r];
        for k in 0..m {
            self.binv[r * m + k] /= wr;
        }
        self.xb[r] /= wr;
        for i in 0..m {
            if i != r && w[i] != 0.0 {
                let f = w[i];
                for k in 0..m {
                    self.binv[i * m + k] -= f * self.binv[r * m + k];
                }
                self.xb[i] -= f * self.xb[r];
            }
        }
        self.basis[r] = entering;
        self.pivots_since_refactor += 1;
        if self.pivots_since_refactor >= 64 {
            self.refactor();
        }
    }

    /// Runs simplex iterations minimizing `cost`. Returns `None` on success,
    /// otherwise the terminal outcome.
    fn run(&mut self, cost: &dyn Fn(Var) -> f64, iter: &mut usize) -> Option<LpOutcome> {
        let tol = self.opts.tol;
        let n = self.cols.len();
        let mut degenerate_run = 0usize;
        let mut col = vec![0.0; self.m];
        loop {
            if *iter >= self.opts.max_iter {
                return Some(LpOutcome::IterationLimit);
            }
            *iter += 1;
            let pi = self.duals(cost);
            let bland = degenerate_run > 50;
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..n {
                if self.basis.contains(&Var::Column(j)) {
                    continue;
                }
                self.cols.fill(j, &mut col);
                let mut d = cost(Var::Column(j));
                for i in 0..self.m {
                    d -= pi[i] * col[i] * self.sign[i];
                }
                if d < -tol {
                    if bland {
                        entering = Some((j, d));
                        break;
                    }
                    if entering.is_none_or(|(_, best)| d < best) {
                        entering = Some((j, d));
                    }
                }
            }
            let Some((q, _)) = entering else {
                return None;
            };
            let a = self.column(Var::Column(q));
            let w = self.ftran(&a);
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let artificial_at_zero = matches!(self.basis[i], Var::Artificial(_)) && self.xb[i] <= tol;
                let ratio = if w[i] > tol {
                    self.xb[i].max(0.0) / w[i]
                } else if artificial_at_zero && w[i] < -tol {
                    0.0
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some((r, best)) => {
                        if ratio < best - 1e-12 {
                            true
                        } else if ratio <= best + 1e-12 {
                            if bland {
                                var_key(self.basis[i]) < var_key(self.basis[r])
                            } else {
                                w[i].abs() > w[r].abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else {
                return Some(LpOutcome::Unbounded);
            };
            if ratio <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, Var::Column(q), &w);
        }
    }
}

fn var_key(v: Var) -> (u8, usize) {
    match v {
        Var::Artificial(i) => (0, i),
        Var::Column(j) => (1, j),
    }
}

/// Phase one only: decides whether `Aλ = b, λ ≥ 0` is feasible.
pub fn feasibility<C: Columns>(cols: &C, b: &[f64], opts: LpOptions) -> LpOutcome {
    solve_impl(cols, b, opts, false)
}

/// Two-phase simplex maximizing `Σ cost(j) λ_j`.
pub fn maximize<C: Columns>(cols: &C, b: &[f64], opts: LpOptions) -> LpOutcome {
    solve_impl(cols, b, opts, true)
}

fn solve_impl<C: Columns>(cols: &C, b: &[f64], opts: LpOptions, phase_two: bool) -> LpOutcome {
    assert_eq!(b.len(), cols.rows(), "rhs length must match row count");
    let mut t = Tableau::new(cols, b, opts);
    let mut iter = 0usize;
    let phase_one_cost = |v: Var| match v {
        Var::Artificial(_) => 1.0,
        Var::Column(_) => 0.0,
    };
    if let Some(out) = t.run(&phase_one_cost, &mut iter) {
        return out;
    }
    t.refactor();
    let infeasibility: f64 = t
        .basis
        .iter()
        .zip(&t.xb)
        .filter(|(v, _)| matches!(v, Var::Artificial(_)))
        .map(|(_, x)| x)
        .sum();
    let scale = 1.0 + t.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if infeasibility > opts.tol * scale {
        let pi = t.duals(&phase_one_cost);
        let farkas: Vec<f64> = pi.iter().zip(&t.sign).map(|(p, s)| p * s).collect();
        return LpOutcome::Infeasible { farkas, infeasibility };
    }
    if phase_two {
        let phase_two_cost = |v: Var| match v {
            Var::Artificial(_) => 0.0,
            Var::Column(j) => -cols.cost(j),
        };
        if let Some(out) = t.run(&phase_two_cost, &mut iter) {
            return out;
        }
        t.refactor();
    }
    let weights: Vec<(usize, f64)> = t
        .basis
        .iter()
        .zip(&t.xb)
        .filter_map(|(v, &x)| match v {
            Var::Column(j) if x > opts.tol => Some((*j, x)),
            _ => None,
        })
        .collect();
    let value = weights.iter().map(|&(j, x)| cols.cost(j) * x).sum();
    LpOutcome::Optimal { value, weights }
}

/// Explicit dense column set, mostly for tests and small problems.
#[derive(Debug, Clone)]
pub struct DenseColumns {
    pub rows: usize,
    pub columns: Vec<Vec<f64>>,
    pub costs: Vec<f64>,
}

impl Columns for DenseColumns {
    fn rows(&self) -> usize {
        self.rows
    }
    fn len(&self) -> usize {
        self.columns.len()
    }
    fn fill(&self, j: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.columns[j]);
    }
    fn cost(&self, j: usize) -> f64 {
        self.costs.get(j).copied().unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense(columns: Vec<Vec<f64>>, costs: Vec<f64>) -> DenseColumns {
        DenseColumns {
            rows: columns[0].len(),
            columns,
            costs,
        }
    }

    #[test]
    fn convex_hull_membership_of_square() {
        // Unit square vertices with a convexity row.
        let cols = dense(
            vec![
                vec![0.0, 0.0, 1.0],
                vec![1.0, 0.0, 1.0],
                vec![0.0, 1.0, 1.0],
                vec![1.0, 1.0, 1.0],
            ],
            vec![],
        );
        assert!(matches!(
            feasibility(&cols, &[0.3, 0.6, 1.0], LpOptions::default()),
            LpOutcome::Optimal { .. }
        ));
        match feasibility(&cols, &[1.2, 0.5, 1.0], LpOptions::default()) {
            LpOutcome::Infeasible { farkas, infeasibility } => {
                assert!(infeasibility > 0.0);
                for c in &cols.columns {
                    let v: f64 = c.iter().zip(&farkas).map(|(a, y)| a * y).sum();
                    assert!(v <= 1e-9);
                }
                let at_x: f64 = [1.2, 0.5, 1.0].iter().zip(&farkas).map(|(a, y)| a * y).sum();
                assert!(at_x > 1e-9);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn small_maximization() {
        // max 3x + 2y s.t. x + y + s1 = 4, x + 3y + s2 = 6.
        let cols = dense(
            vec![vec![1.0, 1.0], vec![1.0, 3.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![3.0, 2.0, 0.0, 0.0],
        );
        match maximize(&cols, &[4.0, 6.0], LpOptions::default()) {
            LpOutcome::Optimal { value, .. } => assert!((value - 12.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbounded_detected() {
        let cols = dense(vec![vec![1.0], vec![-1.0]], vec![1.0, 0.0]);
        assert!(matches!(
            maximize(&cols, &[1.0], LpOptions::default()),
            LpOutcome::Unbounded
        ));
    }

    proptest! {
        #[test]
        fn hull_of_random_points_contains_their_averages(
            pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 2..12),
            w in prop::collection::vec(0.0f64..1.0, 12),
        ) {
            let k = pts.len();
            let total: f64 = w[..k].iter().sum::<f64>() + 1e-9;
            let mut target = vec![0.0; 4];
            for (p, wi) in pts.iter().zip(&w) {
                for d in 0..3 {
                    target[d] += p[d] * wi / total;
                }
                target[3] += wi / total;
            }
            let columns = pts.iter().map(|p| { let mut c = p.clone(); c.push(1.0); c }).collect();
            let cols = DenseColumns { rows: 4, columns, costs: vec![] };
            let outcome = feasibility(&cols, &target, LpOptions::default());
            let inside = matches!(outcome, LpOutcome::Optimal { .. });
            prop_assert!(inside || target[3] < 1.0 - 1e-6);
        }
    }
}
