//! Dense matrices over GF(2^m) and rank by Gaussian elimination.

use crate::gf::{FieldElem, FieldSpec};

/// Row-major dense matrix over a small field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from nested rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<FieldElem>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        DenseMatrix { rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElem {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FieldElem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, field: &FieldSpec, x: &[FieldElem]) -> Vec<FieldElem> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|r| self.row(r).iter().zip(x).fold(0, |acc, (&h, &v)| acc ^ field.mul(h, v))).collect()
    }

    /// Rank over `field`, computed on a copy.
    pub fn rank(&self, field: &FieldSpec) -> usize {
        let mut m = self.clone();
        m.eliminate(field)
    }

    /// Reduces to row echelon form in place and returns the rank.
    fn eliminate(&mut self, field: &FieldSpec) -> usize {
        let q = field.q() as usize;
        let mut table = vec![0u8; q];
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(pivot) = (rank..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            if pivot != rank {
                for c in col..self.cols {
                    self.data.swap(pivot * self.cols + c, rank * self.cols + c);
                }
            }
            let inv = field.inv(self.get(rank, col)).expect("pivot is nonzero");
            for c in col..self.cols {
                let v = self.get(rank, c);
                self.set(rank, c, field.mul(v, inv));
            }
            let (head, tail) = self.data.split_at_mut((rank + 1) * self.cols);
            let pivot_row = &head[rank * self.cols + col..];
            for row in tail.chunks_exact_mut(self.cols) {
                let factor = row[col];
                if factor == 0 {
                    continue;
                }
                for (v, t) in table.iter_mut().enumerate() {
                    *t = field.mul(factor, v as u8);
                }
                for (dst, &src) in row[col..].iter_mut().zip(pivot_row) {
                    *dst ^= table[src as usize];
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Rank of `matrix` over `field`.
pub fn rank_fq(field: &FieldSpec, matrix: &DenseMatrix) -> usize {
    matrix.rank(field)
}
