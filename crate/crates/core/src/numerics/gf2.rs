use std::fmt;

use super::NumericsError;

/// Dense matrix over GF(2), stored as packed bit rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = words_for(cols);
        Self {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds from rows of 0/1 values. Any nonzero entry counts as 1.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.as_ref().len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &b) in row.iter().enumerate() {
                if b != 0 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Builds from column vectors of 0/1 values.
    pub fn from_columns<C: AsRef<[u8]>>(cols: &[C]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.as_ref().len());
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            let col = col.as_ref();
            assert_eq!(col.len(), r, "ragged columns");
            for (i, &b) in col.iter().enumerate() {
                if b != 0 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.rows && j < self.cols);
        (self.data[i * self.words + j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        debug_assert!(i < self.rows && j < self.cols);
        let w = &mut self.data[i * self.words + j / 64];
        if value {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        for w in 0..self.words {
            let v = self.data[src * self.words + w];
            self.data[dst * self.words + w] ^= v;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.words {
            self.data.swap(a * self.words + w, b * self.words + w);
        }
    }

    pub fn row(&self, i: usize) -> Vec<u8> {
        (0..self.cols).map(|j| self.get(i, j) as u8).collect()
    }

    pub fn column(&self, j: usize) -> Vec<u8> {
        (0..self.rows).map(|i| self.get(i, j) as u8).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    out.set(j, i, true);
                }
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, NumericsError> {
        if self.cols != rhs.rows {
            return Err(NumericsError::ShapeMismatch {
                expected: (self.cols, rhs.cols),
                found: (rhs.rows, rhs.cols),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.get(i, k) {
                    for w in 0..rhs.words {
                        out.data[i * out.words + w] ^= rhs.data[k * rhs.words + w];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, NumericsError> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(NumericsError::ShapeMismatch {
                expected: (self.rows, self.cols),
                found: (rhs.rows, rhs.cols),
            });
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a ^= b;
        }
        Ok(out)
    }

    /// Stacks `blocks` (a grid of equally sized rows/columns) into one matrix.
    pub fn block(blocks: &[&[&Gf2Matrix]]) -> Result<Self, NumericsError> {
        let row_heights: Vec<usize> = blocks.iter().map(|r| r.first().map_or(0, |b| b.rows)).collect();
        let col_widths: Vec<usize> = blocks
            .first()
            .map(|r| r.iter().map(|b| b.cols).collect())
            .unwrap_or_default();
        let mut out = Self::zeros(row_heights.iter().sum(), col_widths.iter().sum());
        let mut r0 = 0;
        for (bi, brow) in blocks.iter().enumerate() {
            if brow.len() != col_widths.len() {
                return Err(NumericsError::BlockLayout);
            }
            let mut c0 = 0;
            for (bj, b) in brow.iter().enumerate() {
                if b.rows != row_heights[bi] || b.cols != col_widths[bj] {
                    return Err(NumericsError::BlockLayout);
                }
                for i in 0..b.rows {
                    for j in 0..b.cols {
                        if b.get(i, j) {
                            out.set(r0 + i, c0 + j, true);
                        }
                    }
                }
                c0 += b.cols;
            }
            r0 += row_heights[bi];
        }
        Ok(out)
    }

    /// Reduced row echelon form; returns the pivot columns.
    fn row_reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(r, p);
            for i in 0..self.rows {
                if i != r && self.get(i, c) {
                    self.xor_row_into(r, i);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().row_reduce().len()
    }

    pub fn has_independent_columns(&self) -> bool {
        self.rank() == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let id = Self::identity(n);
        let mut aug = Self::block(&[&[self, &id]]).ok()?;
        let pivots = aug.row_reduce();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, aug.get(i, n + j));
            }
        }
        Some(inv)
    }

    /// Solves `self · x = b`; `None` if inconsistent. Free variables are set to zero.
    pub fn solve(&self, b: &[u8]) -> Option<Vec<u8>> {
        assert_eq!(b.len(), self.rows, "rhs length");
        let col = Self::from_columns(&[b]);
        let mut aug = Self::block(&[&[self, &col]]).ok()?;
        let pivots = aug.row_reduce();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![0u8; self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(r, self.cols) as u8;
        }
        Some(x)
    }

    /// Basis of the right null space `{x : self · x = 0}`.
    pub fn null_space(&self) -> Vec<Vec<u8>> {
        let mut red = self.clone();
        let pivots = red.row_reduce();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![0u8; self.cols];
                x[f] = 1;
                for (r, &c) in pivots.iter().enumerate() {
                    if red.get(r, f) {
                        x[c] = 1;
                    }
                }
                x
            })
            .collect()
    }

    /// Solves `self · X = rhs` column by column.
    pub fn solve_right(&self, rhs: &Self) -> Option<Self> {
        if rhs.rows != self.rows {
            return None;
        }
        let cols: Option<Vec<Vec<u8>>> = (0..rhs.cols).map(|j| self.solve(&rhs.column(j))).collect();
        Some(Self::from_columns(&cols?))
    }

    /// The symplectic form `P = [[0, I], [I, 0]]` on `2·n` bits.
    pub fn symplectic_form(n: usize) -> Self {
        let mut p = Self::zeros(2 * n, 2 * n);
        for i in 0..n {
            p.set(i, n + i, true);
            p.set(n + i, i, true);
        }
        p
    }

    /// `selfᵀ P self == P`.
    pub fn is_symplectic(&self) -> bool {
        if self.rows != self.cols || !self.rows.is_multiple_of(2) {
            return false;
        }
        let p = Self::symplectic_form(self.rows / 2);
        let lhs = self.transpose().mul(&p).and_then(|m| m.mul(self));
        matches!(lhs, Ok(m) if m == p)
    }

    /// One line per row, `0`/`1` characters, columns = generators.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.rows * (self.cols + 1));
        for i in 0..self.rows {
            for j in 0..self.cols {
                s.push(if self.get(i, j) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self, NumericsError> {
        let mut rows: Vec<Vec<u8>> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: Result<Vec<u8>, _> = line
                .chars()
                .map(|ch| match ch {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    other => Err(NumericsError::Parse(format!("line {}: unexpected {other:?}", ln + 1))),
                })
                .collect();
            let row = row?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(NumericsError::Parse(format!("line {}: ragged row", ln + 1)));
                }
            }
            rows.push(row);
        }
        Ok(Self::from_rows(&rows))
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        write!(f, "{}", self.to_text())
    }
}

// Symplectic inner product of (z|x) vectors: ω(a, b) = a_z·b_x + a_x·b_z.
fn omega(a: &[u8], b: &[u8]) -> u8 {
    let n = a.len() / 2;
    let mut acc = 0u8;
    for k in 0..n {
        acc ^= (a[k] & b[n + k]) ^ (a[n + k] & b[k]);
    }
    acc
}

fn xor_into(dst: &mut [u8], src: &[u8]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

// P·v, i.e. swap the z and x halves.
fn swap_halves(v: &[u8]) -> Vec<u8> {
    let n = v.len() / 2;
    v[n..].iter().chain(&v[..n]).copied().collect()
}

/// Finds `b` with ω(targets[i], b) = rhs[i].
fn solve_omega(targets: &[&[u8]], rhs: &[u8], bits: usize) -> Option<Vec<u8>> {
    if targets.is_empty() {
        return Some(vec![0; bits]);
    }
    let rows: Vec<Vec<u8>> = targets.iter().map(|t| swap_halves(t)).collect();
    Gf2Matrix::from_rows(&rows).solve(rhs)
}

struct AdaptedBasis {
    pairs: Vec<(Vec<u8>, Vec<u8>)>,
    radical: Vec<Vec<u8>>,
}

/// Splits span(columns) into hyperbolic pairs and a totally isotropic radical.
fn adapted_basis(m: &Gf2Matrix) -> AdaptedBasis {
    let mut remaining: Vec<Vec<u8>> = (0..m.cols()).map(|j| m.column(j)).collect();
    let mut pairs = Vec::new();
    loop {
        let mut found = None;
        'outer: for i in 0..remaining.len() {
            for j in i + 1..remaining.len() {
                if omega(&remaining[i], &remaining[j]) == 1 {
                    found = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((i, j)) = found else { break };
        let q = remaining.remove(j);
        let p = remaining.remove(i);
        for r in remaining.iter_mut() {
            let wq = omega(r, &q);
            let wp = omega(r, &p);
            if wq == 1 {
                xor_into(r, &p);
            }
            if wp == 1 {
                xor_into(r, &q);
            }
        }
        pairs.push((p, q));
    }
    AdaptedBasis {
        pairs,
        radical: remaining,
    }
}

/// Extends an adapted basis to a full symplectic basis, returned as the matrix
/// `[a_1 … a_N | b_1 … b_N]` with ω(a_i, b_j) = δ_ij.
fn complete_symplectic_basis(basis: &AdaptedBasis, bits: usize) -> Option<Gf2Matrix> {
    let n = bits / 2;
    let mut pairs = basis.pairs.clone();
    for (idx, r) in basis.radical.iter().enumerate() {
        let mut targets: Vec<&[u8]> = vec![r];
        let mut rhs = vec![1u8];
        for (k, other) in basis.radical.iter().enumerate() {
            if k != idx {
                targets.push(other);
                rhs.push(0);
            }
        }
        for (a, b) in &pairs {
            targets.push(a);
            targets.push(b);
            rhs.extend([0, 0]);
        }
        let b = solve_omega(&targets, &rhs, bits)?;
        pairs.push((r.clone(), b));
    }
    while pairs.len() < n {
        let constraint_rows: Vec<Vec<u8>> = pairs
            .iter()
            .flat_map(|(a, b)| [swap_halves(a), swap_halves(b)])
            .collect();
        let w = if constraint_rows.is_empty() {
            let mut e = vec![0u8; bits];
            e[0] = 1;
            e
        } else {
            Gf2Matrix::from_rows(&constraint_rows).null_space().into_iter().next()?
        };
        let mut targets: Vec<&[u8]> = vec![&w];
        let mut rhs = vec![1u8];
        for (a, b) in &pairs {
            targets.push(a);
            targets.push(b);
            rhs.extend([0, 0]);
        }
        let b = solve_omega(&targets, &rhs, bits)?;
        pairs.push((w, b));
    }
    let cols: Vec<&Vec<u8>> = pairs.iter().map(|(a, _)| a).chain(pairs.iter().map(|(_, b)| b)).collect();
    Some(Gf2Matrix::from_columns(&cols))
}

/// Finds a symplectic `l` and an invertible `r` with `l · e · r = f` over GF(2).
///
/// `e` and `f` are `2N × k` generator matrices in (z|x) layout with independent columns.
/// A solution exists exactly when the symplectic Gram matrices `eᵀPe` and `fᵀPf` have the
/// same rank; otherwise the two generator sets are not related by a local Clifford
/// operation plus a change of stabilizer basis.
pub fn gf2_solve_basis_change(e: &Gf2Matrix, f: &Gf2Matrix) -> Result<(Gf2Matrix, Gf2Matrix), NumericsError> {
    if (e.rows(), e.cols()) != (f.rows(), f.cols()) {
        return Err(NumericsError::ShapeMismatch {
            expected: (e.rows(), e.cols()),
            found: (f.rows(), f.cols()),
        });
    }
    if !e.rows().is_multiple_of(2) {
        return Err(NumericsError::OddSymplecticDimension(e.rows()));
    }
    if !e.has_independent_columns() || !f.has_independent_columns() {
        return Err(NumericsError::DependentColumns);
    }
    let bits = e.rows();
    let be = adapted_basis(e);
    let bf = adapted_basis(f);
    if be.pairs.len() != bf.pairs.len() || be.radical.len() != bf.radical.len() {
        return Err(NumericsError::NotBasisChangeEquivalent);
    }
    let basis_e = complete_symplectic_basis(&be, bits).ok_or(NumericsError::NotBasisChangeEquivalent)?;
    let basis_f = complete_symplectic_basis(&bf, bits).ok_or(NumericsError::NotBasisChangeEquivalent)?;
    let inv_e = basis_e.inverse().ok_or(NumericsError::NotBasisChangeEquivalent)?;
    let l = basis_f.mul(&inv_e)?;
    let le = l.mul(e)?;
    let r = le.solve_right(f).ok_or(NumericsError::NotBasisChangeEquivalent)?;
    if r.inverse().is_none() || le.mul(&r)? != *f || !l.is_symplectic() {
        return Err(NumericsError::NotBasisChangeEquivalent);
    }
    Ok((l, r))
}
