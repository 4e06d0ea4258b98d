use serde::{Deserialize, Serialize};

use super::{Convention, CorrelationError, CorrelationOutcome};

/// Vectors `u^1..u^m` and `v^1..v^n` sharing one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GramDoc", into = "GramDoc")]
pub struct GramSystem {
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GramDoc {
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl TryFrom<GramDoc> for GramSystem {
    type Error = CorrelationError;
    fn try_from(doc: GramDoc) -> Result<Self, Self::Error> {
        Self::new(doc.u, doc.v)
    }
}

impl From<GramSystem> for GramDoc {
    fn from(g: GramSystem) -> Self {
        Self { u: g.u, v: g.v }
    }
}

impl GramSystem {
    pub fn new(u: Vec<Vec<f64>>, v: Vec<Vec<f64>>) -> Result<Self, CorrelationError> {
        if u.is_empty() || v.is_empty() {
            return Err(CorrelationError::EmptyScenario { m: u.len(), n: v.len() });
        }
        let dim = u[0].len();
        for (side, list) in [("u", &u), ("v", &v)] {
            for (k, w) in list.iter().enumerate() {
                if w.len() != dim {
                    return Err(CorrelationError::Dimension(format!(
                        "{side}[{k}] has length {}, expected {dim}",
                        w.len()
                    )));
                }
                if w.iter().any(|x| !x.is_finite()) {
                    return Err(CorrelationError::NonFinite { field: "gram vector", index: k });
                }
            }
        }
        Ok(Self { u, v, dim })
    }

    pub fn u(&self) -> &[Vec<f64>] {
        &self.u
    }

    pub fn v(&self) -> &[Vec<f64>] {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> usize {
        self.u.len()
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    /// `⟨u^i | v^j⟩` as a row-major `m × n` grid.
    pub fn cross_inner_products(&self) -> Vec<Vec<f64>> {
        self.u.iter().map(|a| self.v.iter().map(|b| dot(a, b)).collect()).collect()
    }

    /// Largest Euclidean norm over all vectors.
    pub fn max_norm(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.v)
            .map(|w| dot(w, w).sqrt())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn check_shape(g: &GramSystem, x: &CorrelationOutcome) -> Result<(), CorrelationError> {
    let s = x.scenario();
    if g.m() != s.m || g.n() != s.n {
        return Err(CorrelationError::Dimension(format!(
            "gram system has {}x{} vectors, outcome is {}x{}",
            g.m(),
            g.n(),
            s.m,
            s.n
        )));
    }
    Ok(())
}

fn require(x: &CorrelationOutcome, expected: Convention) -> Result<(), CorrelationError> {
    if x.convention() != expected {
        return Err(CorrelationError::Convention {
            expected,
            found: x.convention(),
        });
    }
    Ok(())
}

/// Max deviation of a 0/1 outcome from the L1 embedding `x_i = ‖u^i‖₁`,
/// `x_{m+j} = ‖v^j‖₁`, `x_ij = ‖u^i − v^j‖₁`.
pub fn l1_verify(g: &GramSystem, x: &CorrelationOutcome) -> Result<f64, CorrelationError> {
    require(x, Convention::ZeroOne)?;
    check_shape(g, x)?;
    let mut dev = 0.0f64;
    for (i, u) in g.u.iter().enumerate() {
        dev = dev.max((x.marginals_a()[i] - l1(u)).abs());
    }
    for (j, v) in g.v.iter().enumerate() {
        dev = dev.max((x.marginals_b()[j] - l1(v)).abs());
    }
    for (i, u) in g.u.iter().enumerate() {
        for (j, v) in g.v.iter().enumerate() {
            dev = dev.max((x.joint(i, j) - l1(&diff(u, v))).abs());
        }
    }
    Ok(dev)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GramMode {
    /// ±1 joint entries against `⟨u^i | v^j⟩`.
    InnerProduct,
    /// 0/1 entries against squared norms and squared distances.
    SquaredDistance,
}

/// Max deviation between an outcome and the inner products or squared distances of `g`.
pub fn gram_verify(g: &GramSystem, x: &CorrelationOutcome, mode: GramMode) -> Result<f64, CorrelationError> {
    check_shape(g, x)?;
    let mut dev = 0.0f64;
    match mode {
        GramMode::InnerProduct => {
            require(x, Convention::PmOne)?;
            for (i, u) in g.u.iter().enumerate() {
                for (j, v) in g.v.iter().enumerate() {
                    dev = dev.max((x.joint(i, j) - dot(u, v)).abs());
                }
            }
        }
        GramMode::SquaredDistance => {
            require(x, Convention::ZeroOne)?;
            for (i, u) in g.u.iter().enumerate() {
                dev = dev.max((x.marginals_a()[i] - dot(u, u)).abs());
            }
            for (j, v) in g.v.iter().enumerate() {
                dev = dev.max((x.marginals_b()[j] - dot(v, v)).abs());
            }
            for (i, u) in g.u.iter().enumerate() {
                for (j, v) in g.v.iter().enumerate() {
                    let d = diff(u, v);
                    dev = dev.max((x.joint(i, j) - dot(&d, &d)).abs());
                }
            }
        }
    }
    Ok(dev)
}
