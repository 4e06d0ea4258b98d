use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{build_moment_problem, Cell, GeneralScenario, Level, MomentProblem, NpaError, ProbSymbol, ProbabilityTable, ReducedFunctional};
use crate::correlation::BellFunctional;
use crate::numerics::{sym_eig_slice, RealMatrix};
use crate::sdp::{solve, LinearForm, SdpError, SdpOptions, SdpProblem, SdpStatus};

/// Behaviours whose best moment matrix has `λ_min ≥ −MEMBERSHIP_TOL` count as inside.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

const POLISH_STEPS: usize = 50;
const POLISH_TOL: f64 = 1e-14;
/// Eigenvalues below this fraction of the largest are dropped from the initial factor.
const RANK_FRACTION: f64 = 1e-6;

const QUICK_ITERATIONS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NpaBound {
    pub level: Level,
    pub bound: f64,
    /// Objective of the recovered dual point, constant included.
    pub dual_bound: f64,
    pub status: SdpStatus,
    pub sequences: usize,
    pub free_classes: usize,
    pub primal_residual: f64,
    pub dual_gap_estimate: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum NpaMembership {
    InQc { lambda: f64 },
    OutOfQc { lambda: f64 },
}

impl NpaMembership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Self::InQc { .. })
    }

    /// Estimate of the optimal `λ`: the better of a certified completion's smallest
    /// eigenvalue and the converged solver objective.
    pub fn lambda(&self) -> f64 {
        match self {
            Self::InQc { lambda } | Self::OutOfQc { lambda } => *lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Prob(ProbSymbol),
    Free(usize),
}

/// Upper-triangle cells grouped by the quantity they carry.
struct Layout {
    zero: Vec<(usize, usize)>,
    groups: BTreeMap<Key, Vec<(usize, usize)>>,
}

fn layout(p: &MomentProblem) -> Layout {
    let mut zero = Vec::new();
    let mut groups: BTreeMap<Key, Vec<(usize, usize)>> = BTreeMap::new();
    for k in 0..p.size() {
        for l in k..p.size() {
            match p.cell(k, l) {
                Cell::Zero => zero.push((k, l)),
                Cell::One => {}
                Cell::Prob(s) => groups.entry(Key::Prob(s)).or_default().push((k, l)),
                Cell::Free(c) => groups.entry(Key::Free(c)).or_default().push((k, l)),
            }
        }
    }
    Layout { zero, groups }
}

/// Upper bound on a functional over the level's relaxation of the quantum set.
pub fn npa_bound(
    scenario: &GeneralScenario,
    f: &ReducedFunctional,
    level: Level,
    opts: &SdpOptions,
) -> Result<NpaBound, NpaError> {
    let mp = build_moment_problem(scenario, level)?;
    let lay = layout(&mp);
    let mut sdp = SdpProblem::new(mp.size());
    sdp.add_equality(LinearForm::entry(0, 0, 1.0), 1.0)?;
    for &(k, l) in &lay.zero {
        sdp.add_equality(LinearForm::entry(k, l, 1.0), 0.0)?;
    }
    let mut objective = LinearForm::new();
    for (key, cells) in &lay.groups {
        let (k0, l0) = cells[0];
        for &(k, l) in &cells[1..] {
            sdp.add_equality(LinearForm::from_terms(vec![(k0, l0, 1.0), (k, l, -1.0)]), 0.0)?;
        }
        if let Key::Prob(s) = key {
            if let Some(&c) = f.coefficients.get(s) {
                objective.add(k0, l0, c);
            }
        }
    }
    if let Some(s) = f.coefficients.keys().find(|s| !lay.groups.contains_key(&Key::Prob(**s))) {
        return Err(NpaError::Symbol(*s));
    }
    sdp.maximize(objective)?;
    let sol = solve(&sdp, opts)?;
    if sol.status == SdpStatus::Infeasible {
        return Err(SdpError::Solver(sol.status).into());
    }
    Ok(NpaBound {
        level,
        bound: sol.objective_value + f.constant,
        dual_bound: sol.dual_objective + f.constant,
        status: sol.status,
        sequences: mp.size(),
        free_classes: mp.free_classes(),
        primal_residual: sol.primal_residual,
        dual_gap_estimate: sol.dual_gap_estimate,
        iterations: sol.iterations,
    })
}

/// NPA bound of a binary Bell functional in either convention.
pub fn npa_bound_bell(f: &BellFunctional, level: Level, opts: &SdpOptions) -> Result<NpaBound, NpaError> {
    let s = f.scenario();
    npa_bound(&GeneralScenario::binary(s.m, s.n), &ReducedFunctional::from_bell(f), level, opts)
}

/// Moment matrix with probabilities filled in, free classes averaged over `x`.
fn completion(mp: &MomentProblem, lay: &Layout, p: &ProbabilityTable, x: &RealMatrix) -> RealMatrix {
    let n = mp.size();
    let mut g = RealMatrix::zeros(n, n);
    g[(0, 0)] = 1.0;
    for (key, cells) in &lay.groups {
        let value = match key {
            Key::Prob(s) => p.value(*s),
            Key::Free(_) => cells.iter().map(|&(k, l)| x[(k, l)]).sum::<f64>() / cells.len() as f64,
        };
        for &(k, l) in cells {
            g[(k, l)] = value;
            g[(l, k)] = value;
        }
    }
    g
}

/// `Σ w Γ_kl = b` over the cells of a moment matrix.
struct Constraint {
    terms: Vec<(usize, usize, f64)>,
    value: f64,
}

fn constraints(lay: &Layout, p: &ProbabilityTable) -> Vec<Constraint> {
    let pin = |(k, l): (usize, usize), value: f64| Constraint {
        terms: vec![(k, l, 1.0)],
        value,
    };
    let mut out = vec![pin((0, 0), 1.0)];
    out.extend(lay.zero.iter().map(|&c| pin(c, 0.0)));
    for (key, cells) in &lay.groups {
        match key {
            Key::Prob(s) => out.extend(cells.iter().map(|&c| pin(c, p.value(*s)))),
            Key::Free(_) => {
                let (k0, l0) = cells[0];
                out.extend(cells[1..].iter().map(|&(k, l)| Constraint {
                    terms: vec![(k0, l0, 1.0), (k, l, -1.0)],
                    value: 0.0,
                }));
            }
        }
    }
    out
}

/// Residuals of `Γ = V Vᵀ` with `V` stored row-major as `n × r`.
fn residuals(cons: &[Constraint], v: &[f64], r: usize) -> DVector<f64> {
    let entry = |k: usize, l: usize| -> f64 { (0..r).map(|s| v[k * r + s] * v[l * r + s]).sum() };
    DVector::from_iterator(
        cons.len(),
        cons.iter().map(|c| c.terms.iter().map(|&(k, l, w)| w * entry(k, l)).sum::<f64>() - c.value),
    )
}

/// Minimum-norm Gauss-Newton on the factor `V`, so the iterate stays PSD by construction.
fn factor_polish(cons: &[Constraint], mut v: Vec<f64>, n: usize, r: usize) -> Vec<f64> {
    let mut res = residuals(cons, &v, r);
    for _ in 0..POLISH_STEPS {
        if res.amax() < POLISH_TOL {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(cons.len(), n * r);
        for (row, c) in cons.iter().enumerate() {
            for &(k, l, w) in &c.terms {
                for s in 0..r {
                    jac[(row, k * r + s)] += w * v[l * r + s];
                    jac[(row, l * r + s)] += w * v[k * r + s];
                }
            }
        }
        let mut normal = &jac * jac.transpose();
        let damping = 1e-14 * (1.0 + normal.diagonal().amax());
        for d in 0..cons.len() {
            normal[(d, d)] += damping;
        }
        let Some(chol) = normal.cholesky() else { break };
        let step = jac.transpose() * chol.solve(&res);
        let mut scale = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let trial: Vec<f64> = v.iter().zip(step.iter()).map(|(x, d)| x - scale * d).collect();
            let trial_res = residuals(cons, &trial, r);
            if trial_res.norm() < res.norm() {
                v = trial;
                res = trial_res;
                improved = true;
                break;
            }
            scale /= 2.0;
        }
        if !improved {
            break;
        }
    }
    v
}

/// Best certified `λ_min` over completions reachable from `g`.
///
/// Low-rank factors `V` of `g` are pushed onto the constraint set by Gauss-Newton; the
/// completion of `V Vᵀ` differs from a PSD matrix only by the final residual.
fn refine(mp: &MomentProblem, lay: &Layout, p: &ProbabilityTable, g: RealMatrix) -> f64 {
    let n = mp.size();
    let (values, vectors) = sym_eig_slice(n, g.as_slice());
    let mut best = values[n - 1];
    if best >= 0.0 {
        return best;
    }
    let cons = constraints(lay, p);
    let top = values[0].max(f64::MIN_POSITIVE);
    let rank = values.iter().filter(|&&x| x > RANK_FRACTION * top).count().max(1);
    let mut ranks = vec![rank, (2 * rank).min(n), n];
    ranks.dedup();
    for r in ranks {
        let mut v = vec![0.0; n * r];
        for k in 0..n {
            for s in 0..r {
                v[k * r + s] = vectors[k * n + s] * values[s].max(0.0).sqrt();
            }
        }
        let v = factor_polish(&cons, v, n, r);
        let mut gram = RealMatrix::zeros(n, n);
        for k in 0..n {
            for l in 0..n {
                gram[(k, l)] = (0..r).map(|s| v[k * r + s] * v[l * r + s]).sum();
            }
        }
        let (vals, _) = sym_eig_slice(n, completion(mp, lay, p, &gram).as_slice());
        best = best.max(vals[n - 1]);
        if best >= -MEMBERSHIP_TOL {
            break;
        }
    }
    best
}

/// Decides whether a behaviour admits a PSD moment matrix at the given level.
///
/// Solves `max λ` over completions with `Γ − λI ⪰ 0`; the variable is `diag(Γ − λI, λ + N)`.
/// Each solver iterate is turned into an explicit completion and polished on a low-rank
/// factor; its smallest eigenvalue is a certified lower bound on the optimum.
pub fn membership_check(p: &ProbabilityTable, level: Level, opts: &SdpOptions) -> Result<NpaMembership, NpaError> {
    p.check_consistent()?;
    let mp = build_moment_problem(p.scenario(), level)?;
    let lay = layout(&mp);
    let n = mp.size();
    let shift = n as f64;
    let t = n;
    let mut sdp = SdpProblem::new(n + 1);
    let diag = |k: usize, l: usize| if k == l { 1.0 } else { 0.0 };
    // Γ_kl = Y_kl + δ_kl (t − N)
    let pin = |sdp: &mut SdpProblem, k: usize, l: usize, value: f64| -> Result<(), SdpError> {
        let mut form = LinearForm::entry(k, l, 1.0);
        if k == l {
            form.add(t, t, 1.0);
        }
        sdp.add_equality(form, value + diag(k, l) * shift)?;
        Ok(())
    };
    pin(&mut sdp, 0, 0, 1.0)?;
    for &(k, l) in &lay.zero {
        pin(&mut sdp, k, l, 0.0)?;
    }
    for (key, cells) in &lay.groups {
        match key {
            Key::Prob(s) => {
                for &(k, l) in cells {
                    pin(&mut sdp, k, l, p.value(*s))?;
                }
            }
            Key::Free(_) => {
                let (k0, l0) = cells[0];
                for &(k, l) in &cells[1..] {
                    let dt = diag(k0, l0) - diag(k, l);
                    let mut form = LinearForm::from_terms(vec![(k0, l0, 1.0), (k, l, -1.0)]);
                    if dt != 0.0 {
                        form.add(t, t, dt);
                    }
                    sdp.add_equality(form, dt * shift)?;
                }
            }
        }
    }
    for k in 0..n {
        sdp.add_equality(LinearForm::entry(k, t, 1.0), 0.0)?;
    }
    sdp.maximize(LinearForm::entry(t, t, 1.0))?;
    let certify = |x: &RealMatrix| {
        let lambda_hat = x[(t, t)] - shift;
        let mut gamma = x.clone();
        for k in 0..n {
            gamma[(k, k)] += lambda_hat;
        }
        refine(&mp, &lay, p, completion(&mp, &lay, p, &gamma))
    };
    // Interior points certify long before the solver converges, so try a short run first.
    let quick = SdpOptions {
        max_iter: opts.max_iter.min(QUICK_ITERATIONS),
        ..*opts
    };
    let mut sol = solve(&sdp, &quick)?;
    if sol.status == SdpStatus::MaxIter && opts.max_iter > quick.max_iter {
        let lambda = certify(&sol.x);
        if lambda >= -MEMBERSHIP_TOL {
            return Ok(NpaMembership::InQc { lambda });
        }
        sol = solve(&sdp, opts)?;
    }
    match sol.status {
        SdpStatus::Optimal => {}
        status => return Err(SdpError::Solver(status).into()),
    }
    let lambda = certify(&sol.x).max(sol.objective_value - shift);
    Ok(if lambda >= -MEMBERSHIP_TOL {
        NpaMembership::InQc { lambda }
    } else {
        NpaMembership::OutOfQc { lambda }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{deterministic_vertex, Convention, Scenario};
    use crate::realization::{correlation_outcome, realize};
    use crate::sdp::tsirelson_bound;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn i3322() -> BellFunctional {
        let s = Scenario::new(3, 3).unwrap();
        let pa = [-1.0, 0.0, 0.0];
        let pb = [-2.0, -1.0, 0.0];
        let pab = [[1.0, 1.0, 1.0], [1.0, 1.0, -1.0], [1.0, -1.0, 0.0]];
        let mut a = pa.to_vec();
        let mut b = pb.to_vec();
        let mut joint = vec![0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                a[i] += pab[i][j] / 2.0;
                b[j] += pab[i][j] / 2.0;
                joint[i * 3 + j] = -pab[i][j] / 2.0;
            }
        }
        BellFunctional::new(s, Convention::ZeroOne, a, b, joint, 0.0).unwrap()
    }

    fn pr_box() -> ProbabilityTable {
        let s = GeneralScenario::binary(2, 2);
        let half = vec![vec![0.5, 0.5]; 2];
        let corr = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
        let anti = vec![vec![0.0, 0.5], vec![0.5, 0.0]];
        let ab = vec![vec![corr.clone(), corr.clone()], vec![corr, anti]];
        ProbabilityTable::from_parts(s, half.clone(), half, ab).unwrap()
    }

    #[test]
    fn chsh_level_one() {
        let b = npa_bound_bell(&BellFunctional::chsh(), Level::One, &SdpOptions::default()).unwrap();
        assert_eq!(b.status, SdpStatus::Optimal);
        assert!((b.bound - (2f64.sqrt() - 1.0)).abs() < 1e-4, "{}", b.bound);
        let pm = npa_bound_bell(&BellFunctional::chsh_pm(), Level::One, &SdpOptions::default()).unwrap();
        assert!((pm.bound - 2.0 * 2f64.sqrt()).abs() < 1e-4, "{}", pm.bound);
    }

    #[test]
    fn i3322_levels() {
        let f = i3322();
        let opts = SdpOptions::default();
        let one = npa_bound_bell(&f, Level::One, &opts).unwrap();
        let ab = npa_bound_bell(&f, Level::OneAb, &opts).unwrap();
        let two = npa_bound_bell(&f, Level::Two, &opts).unwrap();
        assert!((one.bound - 0.375).abs() < 1e-4, "{}", one.bound);
        assert!((0.25..=0.2519).contains(&ab.bound), "{}", ab.bound);
        assert!((0.25..=0.2513).contains(&two.bound), "{}", two.bound);
        assert!(two.bound <= ab.bound + 1e-6 && ab.bound <= one.bound + 1e-6);
    }

    #[test]
    fn levels_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = Scenario::new(2, 2).unwrap();
        let opts = SdpOptions::default();
        for _ in 0..50 {
            let a = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let joint = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = BellFunctional::new(s, Convention::ZeroOne, a, b, joint, 0.0).unwrap();
            let v: Vec<f64> = [Level::One, Level::OneAb, Level::Two]
                .iter()
                .map(|&l| npa_bound_bell(&f, l, &opts).unwrap().bound)
                .collect();
            assert!(v[1] <= v[0] + 1e-5 && v[2] <= v[1] + 1e-5, "{v:?}");
        }
    }

    #[test]
    fn level_one_matches_elliptope_for_correlators() {
        let f = BellFunctional::chsh_pm();
        let opts = SdpOptions::default();
        let npa = npa_bound_bell(&f, Level::One, &opts).unwrap().bound;
        let ell = tsirelson_bound(&f, &opts).unwrap().bound;
        assert!((npa - ell).abs() < 1e-4);
    }

    #[test]
    fn pr_box_outside() {
        let m = membership_check(&pr_box(), Level::One, &SdpOptions::default()).unwrap();
        assert!(!m.is_inside(), "{m:?}");
        assert!(m.lambda() < -1e-3);
    }

    #[test]
    fn deterministic_behaviours_inside() {
        let s = Scenario::new(2, 2).unwrap();
        for bits in 0u32..16 {
            let b: Vec<bool> = (0..4).map(|k| bits >> k & 1 == 1).collect();
            let p = ProbabilityTable::from_outcome(&deterministic_vertex(s, &b).unwrap());
            for level in [Level::One, Level::Two] {
                let m = membership_check(&p, level, &SdpOptions::default()).unwrap();
                assert!(m.is_inside(), "{bits} {level}: {m:?}");
            }
        }
    }

    #[test]
    fn realized_chsh_behaviour_inside() {
        let s = 0.5f64.sqrt();
        let x = crate::correlation::CorrelationOutcome::new(
            Scenario::new(2, 2).unwrap(),
            Convention::PmOne,
            vec![0.0; 2],
            vec![0.0; 2],
            vec![s, s, s, -s],
        )
        .unwrap();
        let gram = crate::sdp::split_witness(
            &tsirelson_bound(&BellFunctional::chsh_pm(), &SdpOptions::default()).unwrap().witness,
            0,
            2,
            1e-6,
        )
        .unwrap();
        let r = realize(&gram).unwrap();
        let born = ProbabilityTable::from_outcome(&correlation_outcome(&r).unwrap());
        let m = membership_check(&born, Level::OneAb, &SdpOptions::default()).unwrap();
        assert!(m.is_inside(), "{m:?}");
        let direct = ProbabilityTable::from_outcome(&x);
        assert!(membership_check(&direct, Level::Two, &SdpOptions::default()).unwrap().is_inside());
    }

    #[test]
    fn inconsistent_table_rejected() {
        let s = GeneralScenario::binary(1, 1);
        let p = ProbabilityTable::from_parts(
            s,
            vec![vec![0.9, 0.1]],
            vec![vec![0.5, 0.5]],
            vec![vec![vec![vec![0.25; 2]; 2]]],
        )
        .unwrap();
        assert!(matches!(
            membership_check(&p, Level::One, &SdpOptions::default()),
            Err(NpaError::Table(_))
        ));
    }
}
