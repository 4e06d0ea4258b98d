use serde::Serialize;

use super::{BellFunctional, Convention, CorrelationError, CorrelationOutcome, Scenario};
use crate::lp::{self, Columns, LpOptions, LpOutcome};

/// Largest `m + n` accepted by [`bell_polytope_membership`].
pub const MEMBERSHIP_VERTEX_LIMIT: usize = 20;
/// Largest `m + n` accepted by [`classical_max`].
pub const ENUMERATION_LIMIT: usize = 24;
/// Points within this distance of the polytope count as inside.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Deterministic 0/1 outcome for an assignment `(a_1..a_m, b_1..b_n)`.
/// Joint entries are 1 exactly when the two values differ.
pub fn deterministic_vertex(scenario: Scenario, bits: &[bool]) -> Result<CorrelationOutcome, CorrelationError> {
    if bits.len() != scenario.m + scenario.n {
        return Err(CorrelationError::Shape {
            field: "assignment",
            expected: scenario.m + scenario.n,
            found: bits.len(),
        });
    }
    let mut v = vec![0.0; scenario.vector_len()];
    fill_vertex(scenario, bits.iter().copied(), &mut v);
    CorrelationOutcome::from_vector(scenario, Convention::ZeroOne, &v)
}

fn fill_vertex(s: Scenario, bits: impl Iterator<Item = bool>, out: &mut [f64]) {
    let (m, n) = (s.m, s.n);
    for (k, b) in bits.enumerate() {
        out[k] = f64::from(u8::from(b));
    }
    for i in 0..m {
        for j in 0..n {
            out[m + n + i * n + j] = if out[i] != out[m + j] { 1.0 } else { 0.0 };
        }
    }
}

/// Bit `k` of assignment index `idx`, most significant first, so that integer order is
/// lexicographic order of bit strings.
fn assignment_bit(idx: u64, k: usize, width: usize) -> bool {
    (idx >> (width - 1 - k)) & 1 == 1
}

fn assignment_bits(idx: u64, width: usize) -> Vec<bool> {
    (0..width).map(|k| assignment_bit(idx, k, width)).collect()
}

struct VertexColumns {
    scenario: Scenario,
    costs: Option<Vec<f64>>,
}

impl Columns for VertexColumns {
    fn rows(&self) -> usize {
        self.scenario.vector_len() + 1
    }

    fn len(&self) -> usize {
        1 << (self.scenario.m + self.scenario.n)
    }

    fn fill(&self, j: usize, out: &mut [f64]) {
        let width = self.scenario.m + self.scenario.n;
        fill_vertex(self.scenario, (0..width).map(|k| assignment_bit(j as u64, k, width)), out);
        out[self.scenario.vector_len()] = 1.0;
    }

    fn cost(&self, j: usize) -> f64 {
        match &self.costs {
            None => 0.0,
            Some(c) => {
                let mut col = vec![0.0; self.rows()];
                self.fill(j, &mut col);
                c.iter().zip(&col).map(|(a, b)| a * b).sum()
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Membership {
    /// Convex weights over deterministic assignments reproducing the outcome.
    Inside { weights: Vec<(Vec<bool>, f64)> },
    /// `certificate` is at most 0 on every deterministic vertex and positive at the outcome.
    Outside {
        certificate: BellFunctional,
        value_at_outcome: f64,
    },
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Self::Inside { .. })
    }
}

/// Decides whether an outcome lies in the Bell polytope `B_{m,n}` by phase-one simplex over
/// its `2^{m+n}` vertices. Outside verdicts carry a separating 0/1 functional.
pub fn bell_polytope_membership(x: &CorrelationOutcome) -> Result<Membership, CorrelationError> {
    let s = x.scenario();
    if s.m + s.n > MEMBERSHIP_VERTEX_LIMIT {
        return Err(CorrelationError::TooLarge {
            size: s.m + s.n,
            limit: MEMBERSHIP_VERTEX_LIMIT,
        });
    }
    let z = x.in_convention(Convention::ZeroOne);
    let mut b = z.to_vector();
    b.push(1.0);
    let cols = VertexColumns { scenario: s, costs: None };
    let opts = LpOptions {
        tol: MEMBERSHIP_TOL,
        max_iter: 1_000_000,
    };
    match lp::feasibility(&cols, &b, opts) {
        LpOutcome::Optimal { weights, .. } => Ok(Membership::Inside {
            weights: weights
                .into_iter()
                .map(|(j, w)| (assignment_bits(j as u64, s.m + s.n), w))
                .collect(),
        }),
        LpOutcome::Infeasible { farkas, .. } => {
            let big = farkas.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
            let y: Vec<f64> = farkas.iter().map(|v| v / big).collect();
            let len = s.vector_len();
            let certificate = BellFunctional::new(
                s,
                Convention::ZeroOne,
                y[..s.m].to_vec(),
                y[s.m..s.m + s.n].to_vec(),
                y[s.m + s.n..len].to_vec(),
                y[len],
            )?
            .with_classical_bound(Some(0.0));
            let value_at_outcome = certificate.evaluate(&z)?;
            Ok(Membership::Outside {
                certificate,
                value_at_outcome,
            })
        }
        other => Err(CorrelationError::Solver(format!("{other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalMax {
    pub value: f64,
    /// Maximizing assignment `(a_1..a_m, b_1..b_n)` as 0/1 values.
    pub assignment: Vec<bool>,
}

const TIE_TOL: f64 = 1e-12;

/// Exact maximum of `f` over all deterministic assignments. Among maximizers the
/// lexicographically smallest bit string is returned.
pub fn classical_max(f: &BellFunctional) -> Result<ClassicalMax, CorrelationError> {
    let s = f.scenario();
    if s.m + s.n > ENUMERATION_LIMIT {
        return Err(CorrelationError::TooLarge {
            size: s.m + s.n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let g = f.in_convention(Convention::ZeroOne);
    let (m, n) = (s.m, s.n);
    let mut best: Option<ClassicalMax> = None;
    let mut b_bits = vec![false; n];
    // For a fixed A-assignment the objective separates over the B-side values.
    for a_idx in 0u64..(1u64 << m) {
        let a: Vec<bool> = assignment_bits(a_idx, m);
        let mut value = g.constant();
        for i in 0..m {
            if a[i] {
                value += g.coeff_a()[i];
            }
        }
        for (j, bit) in b_bits.iter_mut().enumerate() {
            let mut gain = [0.0f64; 2];
            for (bv, slot) in gain.iter_mut().enumerate() {
                let bv = bv == 1;
                let mut t = if bv { g.coeff_b()[j] } else { 0.0 };
                for i in 0..m {
                    if a[i] != bv {
                        t += g.coeff_joint(i, j);
                    }
                }
                *slot = t;
            }
            *bit = gain[1] > gain[0] + TIE_TOL;
            value += if *bit { gain[1] } else { gain[0] };
        }
        if best.as_ref().is_none_or(|b| value > b.value + TIE_TOL) {
            let mut assignment = a;
            assignment.extend_from_slice(&b_bits);
            best = Some(ClassicalMax { value, assignment });
        }
    }
    let mut best = best.expect("at least one assignment");
    // Report the value in the functional's own convention.
    let x = deterministic_vertex(s, &best.assignment)?;
    best.value = f.evaluate(&x)?;
    Ok(best)
}

/// Maximum of `f` over the vertex hull by linear programming; used to cross-check
/// [`classical_max`] on small scenarios.
pub fn classical_max_lp(f: &BellFunctional) -> Result<f64, CorrelationError> {
    let s = f.scenario();
    if s.m + s.n > MEMBERSHIP_VERTEX_LIMIT {
        return Err(CorrelationError::TooLarge {
            size: s.m + s.n,
            limit: MEMBERSHIP_VERTEX_LIMIT,
        });
    }
    let g = f.in_convention(Convention::ZeroOne);
    let mut costs = g.coefficients();
    costs.push(g.constant());
    // Only the convexity row is imposed; the objective carries the vertex coordinates.
    struct Hull<'a>(&'a VertexColumns);
    impl Columns for Hull<'_> {
        fn rows(&self) -> usize {
            1
        }
        fn len(&self) -> usize {
            self.0.len()
        }
        fn fill(&self, _j: usize, out: &mut [f64]) {
            out[0] = 1.0;
        }
        fn cost(&self, j: usize) -> f64 {
            self.0.cost(j)
        }
    }
    let vc = VertexColumns {
        scenario: s,
        costs: Some(costs),
    };
    match lp::maximize(&Hull(&vc), &[1.0], LpOptions::default()) {
        LpOutcome::Optimal { value, .. } => Ok(value),
        other => Err(CorrelationError::Solver(format!("{other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(m: usize, n: usize) -> Scenario {
        Scenario::new(m, n).unwrap()
    }

    fn viol() -> CorrelationOutcome {
        let s2 = std::f64::consts::SQRT_2;
        let hi = (2.0 + s2) / 4.0;
        let lo = (2.0 - s2) / 4.0;
        CorrelationOutcome::from_vector(s(2, 2), Convention::ZeroOne, &[0.5, 0.5, 0.5, 0.5, hi, lo, lo, lo])
            .unwrap()
    }

    #[test]
    fn vertex_examples() {
        assert_eq!(deterministic_vertex(s(1, 1), &[false, false]).unwrap().to_vector(), vec![0.0, 0.0, 0.0]);
        assert_eq!(deterministic_vertex(s(1, 1), &[false, true]).unwrap().to_vector(), vec![0.0, 1.0, 1.0]);
        let x = deterministic_vertex(s(2, 2), &[true; 4]).unwrap();
        assert_eq!(x.to_vector(), vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(deterministic_vertex(s(2, 2), &[true; 3]).is_err());
    }

    #[test]
    fn quantum_chsh_point_is_outside() {
        let x = viol();
        match bell_polytope_membership(&x).unwrap() {
            Membership::Outside {
                certificate,
                value_at_outcome,
            } => {
                assert!(value_at_outcome > 1e-6);
                for idx in 0..16u64 {
                    let v = deterministic_vertex(s(2, 2), &assignment_bits(idx, 4)).unwrap();
                    assert!(certificate.evaluate(&v).unwrap() <= 1e-9);
                }
            }
            Membership::Inside { .. } => panic!("CHSH-violating point reported inside"),
        }
        assert!(BellFunctional::chsh().evaluate(&x).unwrap() > 0.4);
    }

    #[test]
    fn uniform_point_is_inside() {
        let x = CorrelationOutcome::from_vector(s(2, 3), Convention::ZeroOne, &[0.5; 11]).unwrap();
        match bell_polytope_membership(&x).unwrap() {
            Membership::Inside { weights } => {
                let total: f64 = weights.iter().map(|(_, w)| w).sum();
                assert!((total - 1.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn too_large_scenarios_refused() {
        let x = CorrelationOutcome::from_vector(s(11, 10), Convention::ZeroOne, &vec![0.5; 21 + 110]).unwrap();
        assert!(matches!(bell_polytope_membership(&x), Err(CorrelationError::TooLarge { .. })));
        let f = BellFunctional::zero(s(13, 12), Convention::ZeroOne);
        assert!(matches!(classical_max(&f), Err(CorrelationError::TooLarge { .. })));
    }

    #[test]
    fn chsh_classical_maxima() {
        let r = classical_max(&BellFunctional::chsh()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.assignment, vec![false; 4]);
        assert_eq!(classical_max(&BellFunctional::chsh_pm()).unwrap().value, 2.0);
        let zero = BellFunctional::zero(s(3, 2), Convention::PmOne);
        let r = classical_max(&zero).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.assignment, vec![false; 5]);
    }

    #[test]
    fn brute_force_agrees_on_pm_chsh() {
        let f = BellFunctional::chsh_pm();
        let best = (0..16u64)
            .map(|idx| {
                let v = deterministic_vertex(s(2, 2), &assignment_bits(idx, 4)).unwrap();
                f.evaluate(&v).unwrap()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(best, 2.0);
    }

    fn functional_strategy() -> impl Strategy<Value = BellFunctional> {
        (1usize..=3, 1usize..=3, any::<bool>()).prop_flat_map(|(m, n, pm)| {
            (prop::collection::vec(-4i32..=4, m + n + m * n), -3i32..=3).prop_map(move |(c, k)| {
                let c: Vec<f64> = c.into_iter().map(f64::from).collect();
                let conv = if pm { Convention::PmOne } else { Convention::ZeroOne };
                BellFunctional::new(
                    Scenario { m, n },
                    conv,
                    c[..m].to_vec(),
                    c[m..m + n].to_vec(),
                    c[m + n..].to_vec(),
                    f64::from(k),
                )
                .unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn enumeration_matches_lp(f in functional_strategy()) {
            let e = classical_max(&f).unwrap();
            let l = classical_max_lp(&f).unwrap();
            // Compare in the 0/1 convention, where the LP runs.
            let e01 = f.in_convention(Convention::ZeroOne)
                .evaluate(&deterministic_vertex(f.scenario(), &e.assignment).unwrap())
                .unwrap();
            prop_assert!((e01 - l).abs() < 1e-9, "enumeration {} vs lp {}", e01, l);
        }

        #[test]
        fn enumeration_matches_brute_force(f in functional_strategy()) {
            let sc = f.scenario();
            let width = sc.m + sc.n;
            let mut best = f64::NEG_INFINITY;
            let mut arg = vec![];
            for idx in 0..(1u64 << width) {
                let bits = assignment_bits(idx, width);
                let v = f.evaluate(&deterministic_vertex(sc, &bits).unwrap()).unwrap();
                if v > best + 1e-12 {
                    best = v;
                    arg = bits;
                }
            }
            let e = classical_max(&f).unwrap();
            prop_assert!((e.value - best).abs() < 1e-9);
            prop_assert_eq!(e.assignment, arg);
        }

        #[test]
        fn vertices_are_members(bits in prop::collection::vec(any::<bool>(), 2..7), split in 1usize..6) {
            let m = split.min(bits.len() - 1);
            let x = deterministic_vertex(Scenario { m, n: bits.len() - m }, &bits).unwrap();
            prop_assert!(bell_polytope_membership(&x).unwrap().is_inside());
        }
    }
}
