use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::GeneralScenario;
use crate::correlation::{BellFunctional, Convention, CorrelationOutcome};

/// Tolerance for normalization and no-signalling of probability tables.
pub const TABLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TableError {
    #[error("{0} has the wrong shape")]
    Shape(String),
    #[error("{0} is not finite or lies outside [0, 1]")]
    Range(String),
    #[error("{0} does not sum to one")]
    Normalization(String),
    #[error("marginal of {0} depends on the other party's setting")]
    Signalling(String),
}

/// Probability of an event that involves only outcomes other than the last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProbSymbol {
    A { i: usize, alpha: usize },
    B { j: usize, beta: usize },
    Ab { i: usize, j: usize, alpha: usize, beta: usize },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entries {
    #[serde(rename = "a|i", default)]
    a: Vec<Vec<f64>>,
    #[serde(rename = "b|j", default)]
    b: Vec<Vec<f64>>,
    /// Indexed `[i][j][α][β]`.
    #[serde(rename = "ab|ij", default)]
    ab: Vec<Vec<Vec<Vec<f64>>>>,
}

/// Full behaviour `P(α|i)`, `P(β|j)`, `P(α,β|i,j)` over all outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProbabilityDoc", into = "ProbabilityDoc")]
pub struct ProbabilityTable {
    scenario: GeneralScenario,
    entries: Entries,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbabilityDoc {
    outcomes_a: Vec<usize>,
    outcomes_b: Vec<usize>,
    #[serde(rename = "P")]
    p: Entries,
}

impl TryFrom<ProbabilityDoc> for ProbabilityTable {
    type Error = String;
    fn try_from(doc: ProbabilityDoc) -> Result<Self, String> {
        let scenario = GeneralScenario::new(doc.outcomes_a, doc.outcomes_b).map_err(|e| e.to_string())?;
        check_shape(&scenario, &doc.p, false).map_err(|e| e.to_string())?;
        Ok(Self { scenario, entries: doc.p })
    }
}

impl From<ProbabilityTable> for ProbabilityDoc {
    fn from(t: ProbabilityTable) -> Self {
        Self {
            outcomes_a: t.scenario.outcomes_a,
            outcomes_b: t.scenario.outcomes_b,
            p: t.entries,
        }
    }
}

fn check_shape(s: &GeneralScenario, e: &Entries, allow_empty: bool) -> Result<(), TableError> {
    let ok_side = |rows: &Vec<Vec<f64>>, counts: &[usize]| {
        (allow_empty && rows.is_empty())
            || (rows.len() == counts.len() && rows.iter().zip(counts).all(|(r, &k)| r.len() == k))
    };
    if !ok_side(&e.a, &s.outcomes_a) {
        return Err(TableError::Shape("a|i".into()));
    }
    if !ok_side(&e.b, &s.outcomes_b) {
        return Err(TableError::Shape("b|j".into()));
    }
    let ab_ok = (allow_empty && e.ab.is_empty())
        || (e.ab.len() == s.m()
            && e.ab.iter().zip(&s.outcomes_a).all(|(row, &ka)| {
                row.len() == s.n()
                    && row
                        .iter()
                        .zip(&s.outcomes_b)
                        .all(|(block, &kb)| block.len() == ka && block.iter().all(|r| r.len() == kb))
            }));
    if !ab_ok {
        return Err(TableError::Shape("ab|ij".into()));
    }
    Ok(())
}

impl ProbabilityTable {
    pub fn scenario(&self) -> &GeneralScenario {
        &self.scenario
    }

    pub fn from_parts(
        scenario: GeneralScenario,
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        ab: Vec<Vec<Vec<Vec<f64>>>>,
    ) -> Result<Self, TableError> {
        let entries = Entries { a, b, ab };
        check_shape(&scenario, &entries, false)?;
        Ok(Self { scenario, entries })
    }

    /// Binary behaviour of a correlation outcome; outcome 0 is the event `A_i = 1`.
    pub fn from_outcome(x: &CorrelationOutcome) -> Self {
        let x = x.in_convention(Convention::ZeroOne);
        let s = x.scenario();
        let pa = x.marginals_a();
        let pb = x.marginals_b();
        let a = pa.iter().map(|p| vec![*p, 1.0 - p]).collect();
        let b = pb.iter().map(|q| vec![*q, 1.0 - q]).collect();
        let ab = (0..s.m)
            .map(|i| {
                (0..s.n)
                    .map(|j| {
                        let both = (pa[i] + pb[j] - x.joint(i, j)) / 2.0;
                        vec![
                            vec![both, pa[i] - both],
                            vec![pb[j] - both, 1.0 - pa[i] - pb[j] + both],
                        ]
                    })
                    .collect()
            })
            .collect();
        Self {
            scenario: GeneralScenario::binary(s.m, s.n),
            entries: Entries { a, b, ab },
        }
    }

    pub fn marginal_a(&self, i: usize, alpha: usize) -> f64 {
        self.entries.a[i][alpha]
    }

    pub fn marginal_b(&self, j: usize, beta: usize) -> f64 {
        self.entries.b[j][beta]
    }

    pub fn joint(&self, i: usize, j: usize, alpha: usize, beta: usize) -> f64 {
        self.entries.ab[i][j][alpha][beta]
    }

    pub fn value(&self, symbol: ProbSymbol) -> f64 {
        match symbol {
            ProbSymbol::A { i, alpha } => self.marginal_a(i, alpha),
            ProbSymbol::B { j, beta } => self.marginal_b(j, beta),
            ProbSymbol::Ab { i, j, alpha, beta } => self.joint(i, j, alpha, beta),
        }
    }

    /// Range, normalization and no-signalling checks.
    pub fn check_consistent(&self) -> Result<(), TableError> {
        let s = &self.scenario;
        let in_range = |v: f64| v.is_finite() && (-TABLE_TOL..=1.0 + TABLE_TOL).contains(&v);
        for (i, row) in self.entries.a.iter().enumerate() {
            if !row.iter().copied().all(in_range) {
                return Err(TableError::Range(format!("P(·|A{})", i + 1)));
            }
            if (row.iter().sum::<f64>() - 1.0).abs() > TABLE_TOL {
                return Err(TableError::Normalization(format!("P(·|A{})", i + 1)));
            }
        }
        for (j, row) in self.entries.b.iter().enumerate() {
            if !row.iter().copied().all(in_range) {
                return Err(TableError::Range(format!("P(·|B{})", j + 1)));
            }
            if (row.iter().sum::<f64>() - 1.0).abs() > TABLE_TOL {
                return Err(TableError::Normalization(format!("P(·|B{})", j + 1)));
            }
        }
        for i in 0..s.m() {
            for j in 0..s.n() {
                let block = &self.entries.ab[i][j];
                let name = format!("P(·,·|A{},B{})", i + 1, j + 1);
                if !block.iter().flatten().copied().all(in_range) {
                    return Err(TableError::Range(name));
                }
                for (alpha, row) in block.iter().enumerate() {
                    if (row.iter().sum::<f64>() - self.marginal_a(i, alpha)).abs() > TABLE_TOL {
                        return Err(TableError::Signalling(format!("A{}", i + 1)));
                    }
                }
                for beta in 0..s.outcomes_b[j] {
                    let col: f64 = block.iter().map(|r| r[beta]).sum();
                    if (col - self.marginal_b(j, beta)).abs() > TABLE_TOL {
                        return Err(TableError::Signalling(format!("B{}", j + 1)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Linear functional over the reduced probabilities plus a constant.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReducedFunctional {
    pub coefficients: BTreeMap<ProbSymbol, f64>,
    pub constant: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoefficientDoc {
    outcomes_a: Vec<usize>,
    outcomes_b: Vec<usize>,
    #[serde(rename = "V")]
    v: Entries,
    #[serde(default)]
    constant: f64,
}

impl ReducedFunctional {
    fn add(&mut self, symbol: ProbSymbol, c: f64) {
        if c != 0.0 {
            *self.coefficients.entry(symbol).or_insert(0.0) += c;
        }
    }

    pub fn evaluate(&self, p: &ProbabilityTable) -> f64 {
        self.constant + self.coefficients.iter().map(|(s, c)| c * p.value(*s)).sum::<f64>()
    }

    /// Binary-outcome form of a Bell functional, with outcome 0 the event `A_i = 1`.
    /// The disagreement probability is `x_ij = P(A) + P(B) − 2 P(A, B)`.
    pub fn from_bell(f: &BellFunctional) -> Self {
        let f = f.in_convention(Convention::ZeroOne);
        let s = f.scenario();
        let mut out = Self {
            constant: f.constant(),
            ..Default::default()
        };
        for i in 0..s.m {
            out.add(ProbSymbol::A { i, alpha: 0 }, f.coeff_a()[i]);
        }
        for j in 0..s.n {
            out.add(ProbSymbol::B { j, beta: 0 }, f.coeff_b()[j]);
        }
        for i in 0..s.m {
            for j in 0..s.n {
                let c = f.coeff_joint(i, j);
                out.add(ProbSymbol::A { i, alpha: 0 }, c);
                out.add(ProbSymbol::B { j, beta: 0 }, c);
                out.add(ProbSymbol::Ab { i, j, alpha: 0, beta: 0 }, -2.0 * c);
            }
        }
        out
    }

    /// Parses a coefficient table over all outcomes and eliminates each last outcome.
    pub fn from_coefficient_json(text: &str) -> Result<(GeneralScenario, Self), String> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: CoefficientDoc = serde_path_to_error::deserialize(de).map_err(|e| format!("at `{}`: {}", e.path(), e.inner()))?;
        let s = GeneralScenario::new(doc.outcomes_a, doc.outcomes_b).map_err(|e| e.to_string())?;
        check_shape(&s, &doc.v, true).map_err(|e| e.to_string())?;
        Ok((s.clone(), Self::from_full(&s, &doc.v.a, &doc.v.b, &doc.v.ab, doc.constant)))
    }

    /// Eliminates last outcomes through `P(last|i) = 1 − Σ_α P(α|i)` and its joint analogues.
    /// Empty coefficient lists count as zero.
    pub fn from_full(
        s: &GeneralScenario,
        a: &[Vec<f64>],
        b: &[Vec<f64>],
        ab: &[Vec<Vec<Vec<f64>>>],
        constant: f64,
    ) -> Self {
        let mut out = Self {
            constant,
            ..Default::default()
        };
        for (i, row) in a.iter().enumerate() {
            let last = s.outcomes_a[i] - 1;
            out.constant += row[last];
            for alpha in 0..last {
                out.add(ProbSymbol::A { i, alpha }, row[alpha] - row[last]);
            }
        }
        for (j, row) in b.iter().enumerate() {
            let last = s.outcomes_b[j] - 1;
            out.constant += row[last];
            for beta in 0..last {
                out.add(ProbSymbol::B { j, beta }, row[beta] - row[last]);
            }
        }
        for (i, blocks) in ab.iter().enumerate() {
            for (j, v) in blocks.iter().enumerate() {
                let la = s.outcomes_a[i] - 1;
                let lb = s.outcomes_b[j] - 1;
                // V(α,β) P(α,β) summed over all outcomes, with
                // P(α,lb) = P(α) − Σ_β P(α,β), P(la,β) = P(β) − Σ_α P(α,β),
                // P(la,lb) = 1 − Σ_α P(α) − Σ_β P(β) + Σ P(α,β).
                out.constant += v[la][lb];
                for alpha in 0..la {
                    out.add(ProbSymbol::A { i, alpha }, v[alpha][lb] - v[la][lb]);
                }
                for beta in 0..lb {
                    out.add(ProbSymbol::B { j, beta }, v[la][beta] - v[la][lb]);
                }
                for alpha in 0..la {
                    for beta in 0..lb {
                        let c = v[alpha][beta] - v[alpha][lb] - v[la][beta] + v[la][lb];
                        out.add(ProbSymbol::Ab { i, j, alpha, beta }, c);
                    }
                }
            }
        }
        out
    }
}
