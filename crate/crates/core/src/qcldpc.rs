//! Type-I quasi-cyclic LDPC codes: every block of the parity-check matrix is
//! a nonzero multiple of a z x z circulant shift matrix.
//!
//! The shift matrix `C^p` has, in local row `r`, a single one at local column
//! `(r - p) mod z`. All indices in this module are 0-based.

use std::fmt;

use thiserror::Error;

use crate::gf::{FieldElem, FieldSpec};
use crate::linalg::DenseMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QcError {
    #[error("lifting factor must be at least 2, got {0}")]
    LiftingTooSmall(usize),
    #[error("base matrix must be non-empty with gamma <= kappa, got {gamma}x{kappa}")]
    BadShape { gamma: usize, kappa: usize },
    #[error("row {row} has {len} entries, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },
    #[error("power p[{row}][{col}] = {value} is not below z = {z}")]
    PowerOutOfRange { row: usize, col: usize, value: u32, z: usize },
    #[error("scale s[{row}][{col}] = {value} is not a nonzero element of GF({q})")]
    BadScale { row: usize, col: usize, value: u32, q: u32 },
    #[error("power matrix is {0:?} but scaling matrix is {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("girth order g = {0} is outside 2..=5")]
    GirthOrder(usize),
    #[error("vector has length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("symbol {value} at position {pos} is not a field element")]
    SymbolOutOfRange { pos: usize, value: FieldElem },
    #[error("column {col} is out of range for {n} columns")]
    ColumnOutOfRange { col: usize, n: usize },
}

pub type Result<T> = std::result::Result<T, QcError>;

fn check_grid<T>(rows: &[Vec<T>]) -> Result<(usize, usize)> {
    let gamma = rows.len();
    let kappa = rows.first().map_or(0, Vec::len);
    if gamma == 0 || kappa == 0 || gamma > kappa {
        return Err(QcError::BadShape { gamma, kappa });
    }
    for (row, r) in rows.iter().enumerate() {
        if r.len() != kappa {
            return Err(QcError::RaggedRow { row, len: r.len(), expected: kappa });
        }
    }
    Ok((gamma, kappa))
}

/// The gamma x kappa grid of circulant exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PowerMatrix {
    gamma: usize,
    kappa: usize,
    z: usize,
    entries: Vec<u32>,
}

impl PowerMatrix {
    pub fn new(z: usize, rows: &[Vec<u32>]) -> Result<Self> {
        if z < 2 {
            return Err(QcError::LiftingTooSmall(z));
        }
        let (gamma, kappa) = check_grid(rows)?;
        for (row, r) in rows.iter().enumerate() {
            for (col, &value) in r.iter().enumerate() {
                if value as usize >= z {
                    return Err(QcError::PowerOutOfRange { row, col, value, z });
                }
            }
        }
        Ok(PowerMatrix { gamma, kappa, z, entries: rows.concat() })
    }

    pub fn zeros(gamma: usize, kappa: usize, z: usize) -> Result<Self> {
        Self::new(z, &vec![vec![0; kappa]; gamma])
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn z(&self) -> usize {
        self.z
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.kappa + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.entries.chunks(self.kappa).map(<[u32]>::to_vec).collect()
    }
}

/// The gamma x kappa grid of nonzero circulant scale factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScalingMatrix {
    gamma: usize,
    kappa: usize,
    entries: Vec<FieldElem>,
}

impl ScalingMatrix {
    pub fn new(field: &FieldSpec, rows: &[Vec<u32>]) -> Result<Self> {
        let (gamma, kappa) = check_grid(rows)?;
        let mut entries = Vec::with_capacity(gamma * kappa);
        for (row, r) in rows.iter().enumerate() {
            for (col, &value) in r.iter().enumerate() {
                if value == 0 || value >= field.q() {
                    return Err(QcError::BadScale { row, col, value, q: field.q() });
                }
                entries.push(value as FieldElem);
            }
        }
        Ok(ScalingMatrix { gamma, kappa, entries })
    }

    /// All-ones scaling, i.e. a plain (unscaled) QC-LDPC code.
    pub fn ones(gamma: usize, kappa: usize) -> Self {
        ScalingMatrix { gamma, kappa, entries: vec![1; gamma * kappa] }
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElem {
        self.entries[i * self.kappa + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.entries.chunks(self.kappa).map(|r| r.iter().map(|&v| v as u32).collect()).collect()
    }
}

/// A (gamma, kappa, z) QC-LDPC code over GF(2^m).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QcCode {
    field: FieldSpec,
    power: PowerMatrix,
    scaling: ScalingMatrix,
}

impl QcCode {
    pub fn new(field: FieldSpec, power: PowerMatrix, scaling: ScalingMatrix) -> Result<Self> {
        let ps = (power.gamma, power.kappa);
        let ss = (scaling.gamma, scaling.kappa);
        if ps != ss {
            return Err(QcError::ShapeMismatch(ps, ss));
        }
        if let Some((idx, &v)) = scaling.entries.iter().enumerate().find(|(_, &v)| !field.contains(v as u64)) {
            return Err(QcError::BadScale {
                row: idx / scaling.kappa,
                col: idx % scaling.kappa,
                value: v as u32,
                q: field.q(),
            });
        }
        Ok(QcCode { field, power, scaling })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn power(&self) -> &PowerMatrix {
        &self.power
    }

    pub fn scaling(&self) -> &ScalingMatrix {
        &self.scaling
    }

    pub fn gamma(&self) -> usize {
        self.power.gamma
    }

    pub fn kappa(&self) -> usize {
        self.power.kappa
    }

    pub fn z(&self) -> usize {
        self.power.z
    }

    /// Code length N = kappa * z.
    pub fn n(&self) -> usize {
        self.kappa() * self.z()
    }

    /// Number of checks M = gamma * z.
    pub fn m(&self) -> usize {
        self.gamma() * self.z()
    }

    /// 1 - gamma/kappa.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.gamma() as f64 / self.kappa() as f64
    }

    /// Design rate as a reduced fraction (numerator, denominator).
    pub fn design_rate_fraction(&self) -> (usize, usize) {
        let (mut a, mut b) = (self.kappa() - self.gamma(), self.kappa());
        let (mut x, mut y) = (a, b);
        while y != 0 {
            (x, y) = (y, x % y);
        }
        if x > 0 {
            a /= x;
            b /= x;
        }
        (a, b)
    }

    pub fn expand(&self) -> SparseParityCheck {
        expand(self)
    }
}

/// Sparse M x N parity-check matrix stored by rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseParityCheck {
    field: FieldSpec,
    n_cols: usize,
    rows: Vec<Vec<(u32, FieldElem)>>,
}

impl SparseParityCheck {
    /// Builds a matrix from explicit rows of `(column, coefficient)` pairs.
    /// Zero coefficients are dropped.
    pub fn from_rows(field: FieldSpec, n_cols: usize, rows: Vec<Vec<(u32, FieldElem)>>) -> Result<Self> {
        let mut clean = Vec::with_capacity(rows.len());
        for row in rows {
            let mut r = Vec::with_capacity(row.len());
            for (c, v) in row {
                if c as usize >= n_cols {
                    return Err(QcError::ColumnOutOfRange { col: c as usize, n: n_cols });
                }
                if !field.contains(v as u64) {
                    return Err(QcError::SymbolOutOfRange { pos: c as usize, value: v });
                }
                if v != 0 {
                    r.push((c, v));
                }
            }
            clean.push(r);
        }
        Ok(SparseParityCheck { field, n_cols, rows: clean })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[(u32, FieldElem)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(u32, FieldElem)>] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn column_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.n_cols];
        for row in &self.rows {
            for &(c, _) in row {
                w[c as usize] += 1;
            }
        }
        w
    }

    /// Iterates over `(row, col, coeff)` triples in row-major order.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, FieldElem)> + '_ {
        self.rows.iter().enumerate().flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c as usize, v)))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows(), self.n_cols);
        for (r, c, v) in self.triples() {
            d.set(r, c, v);
        }
        d
    }

    /// z = H x over the field.
    pub fn syndrome(&self, x: &[FieldElem]) -> Result<Vec<FieldElem>> {
        syndrome(self, x)
    }

    /// True if `H x` equals `target`. Lengths are assumed consistent.
    pub fn satisfies(&self, x: &[FieldElem], target: &[FieldElem]) -> bool {
        self.rows
            .iter()
            .zip(target)
            .all(|(row, &t)| row.iter().fold(0, |acc, &(c, h)| acc ^ self.field.mul(h, x[c as usize])) == t)
    }
}

/// Lifts a QC code to its sparse parity-check matrix.
pub fn expand(code: &QcCode) -> SparseParityCheck {
    let z = code.z();
    let mut rows = Vec::with_capacity(code.m());
    for i in 0..code.gamma() {
        for r in 0..z {
            let row = (0..code.kappa())
                .map(|j| {
                    let p = code.power.get(i, j) as usize;
                    let col = j * z + (r + z - p) % z;
                    (col as u32, code.scaling.get(i, j))
                })
                .collect();
            rows.push(row);
        }
    }
    SparseParityCheck { field: code.field.clone(), n_cols: code.n(), rows }
}

/// z = H x over the field of `h`.
pub fn syndrome(h: &SparseParityCheck, x: &[FieldElem]) -> Result<Vec<FieldElem>> {
    if x.len() != h.n_cols {
        return Err(QcError::LengthMismatch { got: x.len(), expected: h.n_cols });
    }
    if let Some((pos, &value)) = x.iter().enumerate().find(|(_, &v)| !h.field.contains(v as u64)) {
        return Err(QcError::SymbolOutOfRange { pos, value });
    }
    Ok(h.rows.iter().map(|row| row.iter().fold(0, |acc, &(c, v)| acc ^ h.field.mul(v, x[c as usize]))).collect())
}

/// Dense submatrix of `h` keeping the listed columns in the given order.
pub fn column_submatrix(h: &SparseParityCheck, cols: &[usize]) -> Result<DenseMatrix> {
    let mut position = vec![usize::MAX; h.n_cols];
    for (k, &c) in cols.iter().enumerate() {
        if c >= h.n_cols {
            return Err(QcError::ColumnOutOfRange { col: c, n: h.n_cols });
        }
        position[c] = k;
    }
    let mut d = DenseMatrix::zeros(h.n_rows(), cols.len());
    for (r, c, v) in h.triples() {
        if position[c] != usize::MAX {
            d.set(r, position[c], v);
        }
    }
    Ok(d)
}

/// Visits every closed block walk of length `m` (alternating row and column
/// indices, consecutive rows distinct, consecutive columns distinct,
/// cyclically) and reports whether any walk has a zero shift sum mod z.
///
/// `entry` may return `None` for unassigned entries; walks through them are
/// skipped, which lets the power-matrix search test partial matrices.
pub(crate) fn has_zero_sum_walk<F>(gamma: usize, kappa: usize, z: usize, m: usize, entry: &F) -> bool
where
    F: Fn(usize, usize) -> Option<u32>,
{
    let mut rows = vec![0usize; m];
    let mut cols = vec![0usize; m];
    walk_rows(gamma, kappa, z as i64, m, 0, &mut rows, &mut cols, entry)
}

#[allow(clippy::too_many_arguments)]
fn walk_rows<F>(
    gamma: usize,
    kappa: usize,
    z: i64,
    m: usize,
    depth: usize,
    rows: &mut [usize],
    cols: &mut [usize],
    entry: &F,
) -> bool
where
    F: Fn(usize, usize) -> Option<u32>,
{
    if depth == m {
        if rows[m - 1] == rows[0] {
            return false;
        }
        return walk_cols(kappa, z, m, 0, 0, rows, cols, entry);
    }
    for i in 0..gamma {
        if depth > 0 && rows[depth - 1] == i {
            continue;
        }
        rows[depth] = i;
        if walk_rows(gamma, kappa, z, m, depth + 1, rows, cols, entry) {
            return true;
        }
    }
    false
}

#[allow(clippy::too_many_arguments)]
fn walk_cols<F>(
    kappa: usize,
    z: i64,
    m: usize,
    depth: usize,
    sum: i64,
    rows: &[usize],
    cols: &mut [usize],
    entry: &F,
) -> bool
where
    F: Fn(usize, usize) -> Option<u32>,
{
    if depth == m {
        return cols[m - 1] != cols[0] && sum.rem_euclid(z) == 0;
    }
    let next_row = rows[(depth + 1) % m];
    for j in 0..kappa {
        if depth > 0 && cols[depth - 1] == j {
            continue;
        }
        let (Some(a), Some(b)) = (entry(rows[depth], j), entry(next_row, j)) else {
            continue;
        };
        cols[depth] = j;
        if walk_cols(kappa, z, m, depth + 1, sum + a as i64 - b as i64, rows, cols, entry) {
            return true;
        }
    }
    false
}

/// True iff the lifted Tanner graph has no cycle shorter than 2(g + 1),
/// decided on the base matrix alone by checking that no closed block walk
/// of length 2..=g has a shift sum divisible by z.
pub fn girth_at_least(p: &PowerMatrix, g: usize) -> Result<bool> {
    if !(2..=5).contains(&g) {
        return Err(QcError::GirthOrder(g));
    }
    let entry = |i: usize, j: usize| Some(p.get(i, j));
    Ok((2..=g).all(|m| !has_zero_sum_walk(p.gamma, p.kappa, p.z, m, &entry)))
}

/// Girth of the lifted Tanner graph, as far as the block-walk test resolves it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Girth {
    Exact(usize),
    /// No cycle shorter than this; the enumeration stops at 12.
    AtLeast(usize),
    /// Cycle-free (a single block row or column).
    Infinite,
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Exact(g) => write!(f, "{g}"),
            Girth::AtLeast(g) => write!(f, ">={g}"),
            Girth::Infinite => write!(f, "infinite"),
        }
    }
}

pub fn girth(p: &PowerMatrix) -> Girth {
    if p.gamma < 2 || p.kappa < 2 {
        return Girth::Infinite;
    }
    for g in 2..=5 {
        if !girth_at_least(p, g).expect("g in range") {
            return Girth::Exact(2 * g);
        }
    }
    Girth::AtLeast(12)
}
