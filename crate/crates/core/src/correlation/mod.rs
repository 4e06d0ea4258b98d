//! Bipartite correlation vectors, Bell functionals and classical membership tests.
//!
//! Outcomes use the `(marginals_a, marginals_b, joint)` layout. In the 0/1 convention the
//! joint entry `x_ij` is the probability that `A_i` and `B_j` *disagree*; in the ±1
//! convention it is the product expectation `⟨A_i B_j⟩`. The two are related by
//! `⟨α⟩ = 1 − 2⟨A⟩` and `⟨αβ⟩ = 1 − 2 x_ij`.

mod embedding;
mod nosignal;
mod polytope;

use serde::{Deserialize, Serialize};

pub use embedding::{gram_verify, l1_verify, GramMode, GramSystem};
pub use nosignal::{no_signalling_check, NO_SIGNALLING_TOL, NoSignallingReport, RsmInequality, RsmViolation};
pub use polytope::{
    bell_polytope_membership, classical_max, classical_max_lp, deterministic_vertex, ClassicalMax, Membership,
    MEMBERSHIP_TOL, MEMBERSHIP_VERTEX_LIMIT, ENUMERATION_LIMIT,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorrelationError {
    #[error("scenario needs m >= 1 and n >= 1 (got m={m}, n={n})")]
    EmptyScenario { m: usize, n: usize },
    #[error("{field} has length {found}, expected {expected}")]
    Shape {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{field}[{index}] = {value} is outside the {convention:?} range")]
    OutOfRange {
        field: &'static str,
        index: usize,
        value: f64,
        convention: Convention,
    },
    #[error("{field}[{index}] is not finite")]
    NonFinite { field: &'static str, index: usize },
    #[error("expected {expected:?} convention, got {found:?}")]
    Convention { expected: Convention, found: Convention },
    #[error("scenario mismatch: {left:?} vs {right:?}")]
    ScenarioMismatch { left: Scenario, right: Scenario },
    #[error("scenario too large: m+n = {size} exceeds {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("vector dimension mismatch: {0}")]
    Dimension(String),
    #[error("linear program did not terminate: {0}")]
    Solver(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub m: usize,
    pub n: usize,
}

impl Scenario {
    pub fn new(m: usize, n: usize) -> Result<Self, CorrelationError> {
        if m == 0 || n == 0 {
            return Err(CorrelationError::EmptyScenario { m, n });
        }
        Ok(Self { m, n })
    }

    /// Length `M = m + n + mn` of a full correlation vector.
    pub fn vector_len(&self) -> usize {
        self.m + self.n + self.m * self.n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    ZeroOne,
    PmOne,
}

impl Convention {
    pub fn other(self) -> Self {
        match self {
            Self::ZeroOne => Self::PmOne,
            Self::PmOne => Self::ZeroOne,
        }
    }

    fn range(self) -> (f64, f64) {
        match self {
            Self::ZeroOne => (0.0, 1.0),
            Self::PmOne => (-1.0, 1.0),
        }
    }
}

fn check_len(field: &'static str, v: &[f64], expected: usize) -> Result<(), CorrelationError> {
    if v.len() != expected {
        return Err(CorrelationError::Shape {
            field,
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

fn check_finite(field: &'static str, v: &[f64]) -> Result<(), CorrelationError> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(CorrelationError::NonFinite { field, index }),
        None => Ok(()),
    }
}

/// Slack allowed on range checks for values produced by floating-point arithmetic.
const RANGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OutcomeDoc", into = "OutcomeDoc")]
pub struct CorrelationOutcome {
    scenario: Scenario,
    convention: Convention,
    marginals_a: Vec<f64>,
    marginals_b: Vec<f64>,
    joint: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutcomeDoc {
    m: usize,
    n: usize,
    convention: Convention,
    marginals_a: Vec<f64>,
    marginals_b: Vec<f64>,
    joint: Vec<Vec<f64>>,
}

impl TryFrom<OutcomeDoc> for CorrelationOutcome {
    type Error = CorrelationError;

    fn try_from(doc: OutcomeDoc) -> Result<Self, Self::Error> {
        let scenario = Scenario::new(doc.m, doc.n)?;
        let joint = flatten_joint(&doc.joint, scenario)?;
        Self::new(scenario, doc.convention, doc.marginals_a, doc.marginals_b, joint)
    }
}

impl From<CorrelationOutcome> for OutcomeDoc {
    fn from(x: CorrelationOutcome) -> Self {
        Self {
            m: x.scenario.m,
            n: x.scenario.n,
            convention: x.convention,
            joint: x.joint_rows(),
            marginals_a: x.marginals_a,
            marginals_b: x.marginals_b,
        }
    }
}

fn flatten_joint(rows: &[Vec<f64>], s: Scenario) -> Result<Vec<f64>, CorrelationError> {
    if rows.len() != s.m {
        return Err(CorrelationError::Shape {
            field: "joint",
            expected: s.m,
            found: rows.len(),
        });
    }
    let mut out = Vec::with_capacity(s.m * s.n);
    for row in rows {
        check_len("joint row", row, s.n)?;
        out.extend_from_slice(row);
    }
    Ok(out)
}

impl CorrelationOutcome {
    /// `joint` is row-major `m × n`.
    pub fn new(
        scenario: Scenario,
        convention: Convention,
        marginals_a: Vec<f64>,
        marginals_b: Vec<f64>,
        joint: Vec<f64>,
    ) -> Result<Self, CorrelationError> {
        check_len("marginals_a", &marginals_a, scenario.m)?;
        check_len("marginals_b", &marginals_b, scenario.n)?;
        check_len("joint", &joint, scenario.m * scenario.n)?;
        let (lo, hi) = convention.range();
        for (field, v) in [("marginals_a", &marginals_a), ("marginals_b", &marginals_b), ("joint", &joint)] {
            check_finite(field, v)?;
            if let Some((index, &value)) = v
                .iter()
                .enumerate()
                .find(|(_, &x)| x < lo - RANGE_SLACK || x > hi + RANGE_SLACK)
            {
                return Err(CorrelationError::OutOfRange {
                    field,
                    index,
                    value,
                    convention,
                });
            }
        }
        Ok(Self {
            scenario,
            convention,
            marginals_a,
            marginals_b,
            joint,
        })
    }

    /// Builds from a flat vector in `(a, b, joint)` order.
    pub fn from_vector(scenario: Scenario, convention: Convention, x: &[f64]) -> Result<Self, CorrelationError> {
        check_len("outcome", x, scenario.vector_len())?;
        let (m, n) = (scenario.m, scenario.n);
        Self::new(
            scenario,
            convention,
            x[..m].to_vec(),
            x[m..m + n].to_vec(),
            x[m + n..].to_vec(),
        )
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn marginals_a(&self) -> &[f64] {
        &self.marginals_a
    }

    pub fn marginals_b(&self) -> &[f64] {
        &self.marginals_b
    }

    pub fn joint(&self, i: usize, j: usize) -> f64 {
        self.joint[i * self.scenario.n + j]
    }

    pub fn joint_flat(&self) -> &[f64] {
        &self.joint
    }

    pub fn joint_rows(&self) -> Vec<Vec<f64>> {
        self.joint.chunks(self.scenario.n).map(<[f64]>::to_vec).collect()
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.scenario.vector_len());
        v.extend_from_slice(&self.marginals_a);
        v.extend_from_slice(&self.marginals_b);
        v.extend_from_slice(&self.joint);
        v
    }

    /// Returns the outcome expressed in `convention`.
    pub fn in_convention(&self, convention: Convention) -> Self {
        if convention == self.convention {
            self.clone()
        } else {
            convert_convention(self)
        }
    }
}

/// Switches between the 0/1 and ±1 conventions. Applying it twice is the identity.
pub fn convert_convention(x: &CorrelationOutcome) -> CorrelationOutcome {
    let map: fn(f64) -> f64 = match x.convention {
        Convention::ZeroOne => |p| 1.0 - 2.0 * p,
        Convention::PmOne => |e| (1.0 - e) / 2.0,
    };
    CorrelationOutcome {
        scenario: x.scenario,
        convention: x.convention.other(),
        marginals_a: x.marginals_a.iter().map(|&v| map(v)).collect(),
        marginals_b: x.marginals_b.iter().map(|&v| map(v)).collect(),
        joint: x.joint.iter().map(|&v| map(v)).collect(),
    }
}

/// Affine functional `Σ coeff·x + constant` over outcomes of one convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionalDoc", into = "FunctionalDoc")]
pub struct BellFunctional {
    scenario: Scenario,
    convention: Convention,
    coeff_a: Vec<f64>,
    coeff_b: Vec<f64>,
    coeff_joint: Vec<f64>,
    constant: f64,
    classical_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionalDoc {
    m: usize,
    n: usize,
    convention: Convention,
    marginals_a: Vec<f64>,
    marginals_b: Vec<f64>,
    joint: Vec<Vec<f64>>,
    #[serde(default)]
    constant: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classical_bound: Option<f64>,
}

impl TryFrom<FunctionalDoc> for BellFunctional {
    type Error = CorrelationError;

    fn try_from(doc: FunctionalDoc) -> Result<Self, Self::Error> {
        let scenario = Scenario::new(doc.m, doc.n)?;
        let joint = flatten_joint(&doc.joint, scenario)?;
        let mut f = Self::new(scenario, doc.convention, doc.marginals_a, doc.marginals_b, joint, doc.constant)?;
        if let Some(b) = doc.classical_bound {
            if !b.is_finite() {
                return Err(CorrelationError::NonFinite {
                    field: "classical_bound",
                    index: 0,
                });
            }
            f.classical_bound = Some(b);
        }
        Ok(f)
    }
}

impl From<BellFunctional> for FunctionalDoc {
    fn from(f: BellFunctional) -> Self {
        Self {
            m: f.scenario.m,
            n: f.scenario.n,
            convention: f.convention,
            joint: f.coeff_joint.chunks(f.scenario.n).map(<[f64]>::to_vec).collect(),
            marginals_a: f.coeff_a,
            marginals_b: f.coeff_b,
            constant: f.constant,
            classical_bound: f.classical_bound,
        }
    }
}

impl BellFunctional {
    pub fn new(
        scenario: Scenario,
        convention: Convention,
        coeff_a: Vec<f64>,
        coeff_b: Vec<f64>,
        coeff_joint: Vec<f64>,
        constant: f64,
    ) -> Result<Self, CorrelationError> {
        check_len("marginals_a", &coeff_a, scenario.m)?;
        check_len("marginals_b", &coeff_b, scenario.n)?;
        check_len("joint", &coeff_joint, scenario.m * scenario.n)?;
        check_finite("marginals_a", &coeff_a)?;
        check_finite("marginals_b", &coeff_b)?;
        check_finite("joint", &coeff_joint)?;
        check_finite("constant", &[constant])?;
        Ok(Self {
            scenario,
            convention,
            coeff_a,
            coeff_b,
            coeff_joint,
            constant,
            classical_bound: None,
        })
    }

    pub fn zero(scenario: Scenario, convention: Convention) -> Self {
        Self {
            scenario,
            convention,
            coeff_a: vec![0.0; scenario.m],
            coeff_b: vec![0.0; scenario.n],
            coeff_joint: vec![0.0; scenario.m * scenario.n],
            constant: 0.0,
            classical_bound: None,
        }
    }

    /// `x₁₁ − x₁₂ − x₂₁ − x₂₂` over disagreement probabilities; classically `≤ 0`.
    pub fn chsh() -> Self {
        let mut f = Self::zero(Scenario { m: 2, n: 2 }, Convention::ZeroOne);
        f.coeff_joint = vec![1.0, -1.0, -1.0, -1.0];
        f.classical_bound = Some(0.0);
        f
    }

    /// `y₁₁ − y₁₂ − y₂₁ − y₂₂` over ±1 products; classically `≤ 2`.
    pub fn chsh_pm() -> Self {
        let mut f = Self::zero(Scenario { m: 2, n: 2 }, Convention::PmOne);
        f.coeff_joint = vec![1.0, -1.0, -1.0, -1.0];
        f.classical_bound = Some(2.0);
        f
    }

    pub fn with_classical_bound(mut self, bound: Option<f64>) -> Self {
        self.classical_bound = bound;
        self
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn coeff_a(&self) -> &[f64] {
        &self.coeff_a
    }

    pub fn coeff_b(&self) -> &[f64] {
        &self.coeff_b
    }

    pub fn coeff_joint(&self, i: usize, j: usize) -> f64 {
        self.coeff_joint[i * self.scenario.n + j]
    }

    pub fn coeff_joint_flat(&self) -> &[f64] {
        &self.coeff_joint
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn classical_bound(&self) -> Option<f64> {
        self.classical_bound
    }

    pub fn has_marginal_terms(&self) -> bool {
        self.coeff_a.iter().chain(&self.coeff_b).any(|&c| c != 0.0)
    }

    /// Coefficients in `(a, b, joint)` order.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut v = self.coeff_a.clone();
        v.extend_from_slice(&self.coeff_b);
        v.extend_from_slice(&self.coeff_joint);
        v
    }

    pub fn evaluate(&self, x: &CorrelationOutcome) -> Result<f64, CorrelationError> {
        if x.scenario != self.scenario {
            return Err(CorrelationError::ScenarioMismatch {
                left: self.scenario,
                right: x.scenario,
            });
        }
        let x = x.in_convention(self.convention);
        Ok(self.evaluate_vector(&x.to_vector()))
    }

    /// Evaluates on a raw vector already in this functional's convention.
    pub fn evaluate_vector(&self, x: &[f64]) -> f64 {
        self.coefficients().iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.constant
    }

    /// Returns an equivalent functional in `convention`.
    pub fn in_convention(&self, convention: Convention) -> Self {
        if convention == self.convention {
            self.clone()
        } else {
            convert_functional(self)
        }
    }
}

/// Rewrites a functional for the other convention so that `f(x) = f'(convert(x))`.
pub fn convert_functional(f: &BellFunctional) -> BellFunctional {
    // 0/1 → ±1: x = (1 − y)/2, so c·x = c/2 − (c/2)·y.
    // ±1 → 0/1: y = 1 − 2x, so c·y = c − 2c·x.
    let (scale, shift) = match f.convention {
        Convention::ZeroOne => (-0.5, 0.5),
        Convention::PmOne => (-2.0, 1.0),
    };
    let total: f64 = f.coefficients().iter().sum();
    let map = |v: &Vec<f64>| v.iter().map(|c| c * scale).collect::<Vec<_>>();
    BellFunctional {
        scenario: f.scenario,
        convention: f.convention.other(),
        coeff_a: map(&f.coeff_a),
        coeff_b: map(&f.coeff_b),
        coeff_joint: map(&f.coeff_joint),
        constant: f.constant + shift * total,
        classical_bound: f.classical_bound,
    }
}
