use serde::Serialize;

use super::{Convention, CorrelationOutcome};

/// Tolerance on each rooted-semimetric inequality, in 0/1 units.
pub const NO_SIGNALLING_TOL: f64 = 1e-9;

/// The four rooted-semimetric inequalities for a pair `(i, j)`, written in 0/1 form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RsmInequality {
    /// `x_i + x_j + x_ij ≤ 2`
    SumAtMostTwo,
    /// `x_i + x_j − x_ij ≥ 0`
    JointAtMostSum,
    /// `x_i − x_j + x_ij ≥ 0`
    BBoundedByA,
    /// `−x_i + x_j + x_ij ≥ 0`
    ABoundedByB,
}

impl RsmInequality {
    pub const ALL: [Self; 4] = [
        Self::SumAtMostTwo,
        Self::JointAtMostSum,
        Self::BBoundedByA,
        Self::ABoundedByB,
    ];

    pub fn describe(self, convention: Convention) -> &'static str {
        match (self, convention) {
            (Self::SumAtMostTwo, Convention::ZeroOne) => "x_i + x_j + x_ij <= 2",
            (Self::JointAtMostSum, Convention::ZeroOne) => "x_i + x_j - x_ij >= 0",
            (Self::BBoundedByA, Convention::ZeroOne) => "x_i - x_j + x_ij >= 0",
            (Self::ABoundedByB, Convention::ZeroOne) => "-x_i + x_j + x_ij >= 0",
            (Self::SumAtMostTwo, Convention::PmOne) => "a_i + b_j + c_ij >= -1",
            (Self::JointAtMostSum, Convention::PmOne) => "a_i + b_j - c_ij <= 1",
            (Self::BBoundedByA, Convention::PmOne) => "a_i - b_j + c_ij <= 1",
            (Self::ABoundedByB, Convention::PmOne) => "-a_i + b_j + c_ij <= 1",
        }
    }

    /// Slack in 0/1 units; negative means violated.
    fn slack(self, xi: f64, xj: f64, xij: f64) -> f64 {
        match self {
            Self::SumAtMostTwo => 2.0 - (xi + xj + xij),
            Self::JointAtMostSum => xi + xj - xij,
            Self::BBoundedByA => xi - xj + xij,
            Self::ABoundedByB => -xi + xj + xij,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RsmViolation {
    pub i: usize,
    pub j: usize,
    pub inequality: RsmInequality,
    pub description: &'static str,
    /// Left-hand side evaluated in the outcome's own convention.
    pub value: f64,
    /// Signed slack in the outcome's own convention (negative when violated).
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoSignallingReport {
    pub violations: Vec<RsmViolation>,
}

impl NoSignallingReport {
    pub fn is_satisfied(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks all `4mn` rooted-semimetric (no-signalling) inequalities.
pub fn no_signalling_check(x: &CorrelationOutcome) -> NoSignallingReport {
    let convention = x.convention();
    let z = x.in_convention(Convention::ZeroOne);
    let s = x.scenario();
    let mut violations = Vec::new();
    for i in 0..s.m {
        for j in 0..s.n {
            let (xi, xj, xij) = (z.marginals_a()[i], z.marginals_b()[j], z.joint(i, j));
            for ineq in RsmInequality::ALL {
                let slack01 = ineq.slack(xi, xj, xij);
                if slack01 < -NO_SIGNALLING_TOL {
                    let (value, slack) = own_convention(ineq, x, i, j, slack01);
                    violations.push(RsmViolation {
                        i,
                        j,
                        inequality: ineq,
                        description: ineq.describe(convention),
                        value,
                        slack,
                    });
                }
            }
        }
    }
    NoSignallingReport { violations }
}

fn own_convention(ineq: RsmInequality, x: &CorrelationOutcome, i: usize, j: usize, slack01: f64) -> (f64, f64) {
    let (a, b, c) = (x.marginals_a()[i], x.marginals_b()[j], x.joint(i, j));
    // Both conventions share the left-hand sides; only the bound and the scale differ.
    let value = match ineq {
        RsmInequality::SumAtMostTwo => a + b + c,
        RsmInequality::JointAtMostSum => a + b - c,
        RsmInequality::BBoundedByA => a - b + c,
        RsmInequality::ABoundedByB => -a + b + c,
    };
    let slack = match x.convention() {
        Convention::ZeroOne => slack01,
        Convention::PmOne => 2.0 * slack01,
    };
    (value, slack)
}
