//! Moment-matrix relaxations of the quantum set over projector sequences.
//!
//! Every measurement contributes one projector per outcome except the last; the last is
//! implied by completeness. Products are reduced with three rules: A and B projectors
//! commute, a projector is idempotent, and distinct outcomes of one measurement are
//! orthogonal. Cells of the moment matrix whose words reduce to the same operator (or its
//! reverse, since the matrix is taken real) share one variable.

mod behavior;
mod relax;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use behavior::{ProbabilityTable, ProbSymbol, ReducedFunctional, TableError};
pub use relax::{membership_check, npa_bound, npa_bound_bell, NpaBound, NpaMembership, MEMBERSHIP_TOL};

/// Largest accepted `|S_c|`.
pub const SEQUENCE_LIMIT: usize = 2000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NpaError {
    #[error("every measurement needs at least 2 outcomes")]
    TooFewOutcomes,
    #[error("scenario needs at least one measurement per side")]
    Empty,
    #[error("{0} sequences exceed the limit of {SEQUENCE_LIMIT}")]
    TooManySequences(usize),
    #[error("unknown level {0:?}; expected 1, 1ab or 2")]
    Level(String),
    #[error("{0:?} is not part of the scenario")]
    Symbol(ProbSymbol),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Sdp(#[from] crate::sdp::SdpError),
}

/// Measurements with `outcomes_a[i]` and `outcomes_b[j]` outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneralScenario {
    pub outcomes_a: Vec<usize>,
    pub outcomes_b: Vec<usize>,
}

impl GeneralScenario {
    pub fn new(outcomes_a: Vec<usize>, outcomes_b: Vec<usize>) -> Result<Self, NpaError> {
        if outcomes_a.is_empty() || outcomes_b.is_empty() {
            return Err(NpaError::Empty);
        }
        if outcomes_a.iter().chain(&outcomes_b).any(|&k| k < 2) {
            return Err(NpaError::TooFewOutcomes);
        }
        Ok(Self { outcomes_a, outcomes_b })
    }

    pub fn binary(m: usize, n: usize) -> Self {
        Self {
            outcomes_a: vec![2; m],
            outcomes_b: vec![2; n],
        }
    }

    pub fn m(&self) -> usize {
        self.outcomes_a.len()
    }

    pub fn n(&self) -> usize {
        self.outcomes_b.len()
    }

    /// Projector symbols of one side, excluding each measurement's last outcome.
    pub fn symbols(&self, party: Party) -> Vec<Symbol> {
        let counts = match party {
            Party::A => &self.outcomes_a,
            Party::B => &self.outcomes_b,
        };
        counts
            .iter()
            .enumerate()
            .flat_map(|(measurement, &k)| {
                (0..k - 1).map(move |outcome| Symbol {
                    party,
                    measurement,
                    outcome,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

/// Projector `E_α^{(i)}` (party A) or `F_β^{(j)}` (party B).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub party: Party,
    pub measurement: usize,
    pub outcome: usize,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = match self.party {
            Party::A => 'E',
            Party::B => 'F',
        };
        write!(f, "{letter}{}_{}", self.measurement + 1, self.outcome)
    }
}

/// Product of projectors; the empty word is the identity.
pub type Word = Vec<Symbol>;

/// Reduced form of a word, or `None` when it vanishes.
pub fn canonical_form(word: &[Symbol]) -> Option<Word> {
    let mut a: Word = Vec::with_capacity(word.len());
    let mut b: Word = Vec::new();
    for s in word {
        let side = if s.party == Party::A { &mut a } else { &mut b };
        match side.last() {
            Some(top) if top.measurement == s.measurement => {
                if top.outcome != s.outcome {
                    return None;
                }
            }
            _ => side.push(*s),
        }
    }
    a.extend(b);
    Some(a)
}

/// Applies the rewrite rules one at a time at positions chosen by `pick`, until none applies.
/// `pick(k)` must return an index below `k`.
pub fn canonical_form_by(word: &[Symbol], mut pick: impl FnMut(usize) -> usize) -> Option<Word> {
    let mut w = word.to_vec();
    loop {
        let sites: Vec<usize> = (0..w.len().saturating_sub(1))
            .filter(|&k| {
                let (x, y) = (w[k], w[k + 1]);
                (x.party == Party::B && y.party == Party::A) || (x.party == y.party && x.measurement == y.measurement)
            })
            .collect();
        if sites.is_empty() {
            return Some(w);
        }
        let k = sites[pick(sites.len())];
        let (x, y) = (w[k], w[k + 1]);
        if x.party != y.party {
            w.swap(k, k + 1);
        } else if x.outcome == y.outcome {
            w.remove(k + 1);
        } else {
            return None;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    #[serde(rename = "1")]
    One,
    /// Level one plus every product `E F`.
    #[serde(rename = "1ab")]
    OneAb,
    #[serde(rename = "2")]
    Two,
}

impl std::str::FromStr for Level {
    type Err = NpaError;
    fn from_str(s: &str) -> Result<Self, NpaError> {
        match s {
            "1" => Ok(Self::One),
            "1ab" | "1+ab" | "one_ab" => Ok(Self::OneAb),
            "2" => Ok(Self::Two),
            other => Err(NpaError::Level(other.to_string())),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::One => "1",
            Self::OneAb => "1ab",
            Self::Two => "2",
        })
    }
}

/// `S_c`: identity, then A symbols, B symbols, then products in lexicographic order.
pub fn build_sequences(s: &GeneralScenario, level: Level) -> Result<Vec<Word>, NpaError> {
    let a = s.symbols(Party::A);
    let b = s.symbols(Party::B);
    let mut out: Vec<Word> = vec![vec![]];
    out.extend(a.iter().map(|x| vec![*x]));
    out.extend(b.iter().map(|y| vec![*y]));
    let mut products: Vec<Word> = Vec::new();
    match level {
        Level::One => {}
        Level::OneAb => {
            for x in &a {
                for y in &b {
                    products.push(vec![*x, *y]);
                }
            }
        }
        Level::Two => {
            let all: Vec<Symbol> = a.iter().chain(&b).copied().collect();
            for x in &all {
                for y in &all {
                    if let Some(w) = canonical_form(&[*x, *y]) {
                        if w.len() == 2 {
                            products.push(w);
                        }
                    }
                }
            }
        }
    }
    products.sort();
    products.dedup();
    out.extend(products);
    if out.len() > SEQUENCE_LIMIT {
        return Err(NpaError::TooManySequences(out.len()));
    }
    Ok(out)
}

/// What a moment-matrix cell is pinned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Zero,
    One,
    Prob(ProbSymbol),
    /// Shared variable with the given class index.
    Free(usize),
}

/// Moment matrix structure: which cells are equal, pinned, or carry probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentProblem {
    pub scenario: GeneralScenario,
    pub level: Level,
    pub sequences: Vec<Word>,
    cells: Vec<Cell>,
    free_classes: usize,
}

fn classify(word: Option<Word>) -> Result<Word, Cell> {
    let Some(w) = word else { return Err(Cell::Zero) };
    match w.as_slice() {
        [] => Err(Cell::One),
        [x] if x.party == Party::A => Err(Cell::Prob(ProbSymbol::A {
            i: x.measurement,
            alpha: x.outcome,
        })),
        [y] => Err(Cell::Prob(ProbSymbol::B {
            j: y.measurement,
            beta: y.outcome,
        })),
        [x, y] if x.party == Party::A && y.party == Party::B => Err(Cell::Prob(ProbSymbol::Ab {
            i: x.measurement,
            j: y.measurement,
            alpha: x.outcome,
            beta: y.outcome,
        })),
        _ => Ok(w),
    }
}

pub fn build_moment_problem(s: &GeneralScenario, level: Level) -> Result<MomentProblem, NpaError> {
    let sequences = build_sequences(s, level)?;
    let n = sequences.len();
    let mut cells = vec![Cell::Zero; n * n];
    let mut classes: HashMap<Word, usize> = HashMap::new();
    for k in 0..n {
        for l in k..n {
            let mut word: Word = sequences[k].iter().rev().copied().collect();
            word.extend_from_slice(&sequences[l]);
            let cell = match classify(canonical_form(&word)) {
                Err(c) => c,
                Ok(w) => {
                    let rev: Word = w.iter().rev().copied().collect();
                    let back = canonical_form(&rev).expect("reverse of a nonzero word is nonzero");
                    let key = w.min(back);
                    let next = classes.len();
                    let id = *classes.entry(key).or_insert(next);
                    Cell::Free(id)
                }
            };
            cells[k * n + l] = cell;
            cells[l * n + k] = cell;
        }
    }
    Ok(MomentProblem {
        scenario: s.clone(),
        level,
        sequences,
        cells,
        free_classes: classes.len(),
    })
}

impl MomentProblem {
    pub fn size(&self) -> usize {
        self.sequences.len()
    }

    pub fn cell(&self, k: usize, l: usize) -> Cell {
        self.cells[k * self.size() + l]
    }

    pub fn free_classes(&self) -> usize {
        self.free_classes
    }

    /// Position of a sequence in `S_c`.
    pub fn index_of(&self, word: &[Symbol]) -> Option<usize> {
        self.sequences.iter().position(|w| w == word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(i: usize, o: usize) -> Symbol {
        Symbol {
            party: Party::A,
            measurement: i,
            outcome: o,
        }
    }

    fn f(j: usize, o: usize) -> Symbol {
        Symbol {
            party: Party::B,
            measurement: j,
            outcome: o,
        }
    }

    #[test]
    fn sequence_counts() {
        let chsh = GeneralScenario::binary(2, 2);
        assert_eq!(build_sequences(&chsh, Level::One).unwrap().len(), 5);
        assert_eq!(build_sequences(&chsh, Level::OneAb).unwrap().len(), 9);
        assert_eq!(build_sequences(&chsh, Level::Two).unwrap().len(), 13);
        let s3322 = GeneralScenario::binary(3, 3);
        assert_eq!(build_sequences(&s3322, Level::OneAb).unwrap().len(), 16);
        assert_eq!(build_sequences(&s3322, Level::Two).unwrap().len(), 28);
        let seq = build_sequences(&chsh, Level::One).unwrap();
        assert_eq!(seq, vec![vec![], vec![e(0, 0)], vec![e(1, 0)], vec![f(0, 0)], vec![f(1, 0)]]);
    }

    #[test]
    fn scenario_validation() {
        assert!(GeneralScenario::new(vec![2, 1], vec![2]).is_err());
        assert!(GeneralScenario::new(vec![], vec![2]).is_err());
        let s = GeneralScenario::new(vec![3], vec![2, 2]).unwrap();
        assert_eq!(s.symbols(Party::A).len(), 2);
    }

    #[test]
    fn rewrite_examples() {
        assert_eq!(canonical_form(&[e(0, 0), e(0, 0)]), Some(vec![e(0, 0)]));
        assert_eq!(canonical_form(&[f(0, 0), e(0, 0)]), Some(vec![e(0, 0), f(0, 0)]));
        assert_eq!(canonical_form(&[e(0, 0), e(0, 1)]), None);
        assert_eq!(canonical_form(&[e(0, 0), f(1, 0), e(0, 0)]), Some(vec![e(0, 0), f(1, 0)]));
        assert_eq!(canonical_form(&[e(0, 0), e(1, 0), e(0, 0)]), Some(vec![e(0, 0), e(1, 0), e(0, 0)]));
        assert_eq!(canonical_form(&[]), Some(vec![]));
    }

    #[test]
    fn chsh_level_one_cells() {
        let p = build_moment_problem(&GeneralScenario::binary(2, 2), Level::One).unwrap();
        let (id, e1, e2, f2) = (0, 1, 2, 4);
        assert_eq!(p.cell(id, id), Cell::One);
        assert_eq!(p.cell(e1, e1), p.cell(id, e1));
        assert_eq!(p.cell(e1, e1), Cell::Prob(ProbSymbol::A { i: 0, alpha: 0 }));
        assert_eq!(p.cell(e1, f2), Cell::Prob(ProbSymbol::Ab { i: 0, j: 1, alpha: 0, beta: 0 }));
        assert!(matches!(p.cell(e1, e2), Cell::Free(_)));
        assert_eq!(p.free_classes(), 2);
    }

    #[test]
    fn three_outcome_zero_cells() {
        let s = GeneralScenario::new(vec![3], vec![2]).unwrap();
        let p = build_moment_problem(&s, Level::One).unwrap();
        assert_eq!(p.cell(1, 2), Cell::Zero);
    }

    #[test]
    fn level_parsing() {
        assert_eq!("1ab".parse::<Level>().unwrap(), Level::OneAb);
        assert!("3".parse::<Level>().is_err());
        assert_eq!(Level::Two.to_string(), "2");
    }

    fn symbol() -> impl Strategy<Value = Symbol> {
        (any::<bool>(), 0usize..2, 0usize..2).prop_map(|(a, measurement, outcome)| Symbol {
            party: if a { Party::A } else { Party::B },
            measurement,
            outcome,
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn rewriting_is_confluent(word in prop::collection::vec(symbol(), 0..8), seed in any::<u64>()) {
            let mut state = seed | 1;
            let random = canonical_form_by(&word, |k| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state % k as u64) as usize
            });
            prop_assert_eq!(random, canonical_form(&word));
        }
    }
}
