//! Compressed sparse row storage for symmetric positive definite operators.

use std::io::{self, Write};

use super::GridError;

/// Symmetric matrix in CSR layout. Column indices within a row are sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Builds a matrix from raw CSR arrays, checking structure, symmetry and
    /// the positivity of the diagonal.
    pub fn from_csr(dim: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<f64>) -> Result<Self, GridError> {
        if row_ptr.len() != dim + 1 || col_idx.len() != values.len() {
            return Err(GridError::Malformed("CSR array lengths disagree".into()));
        }
        if row_ptr[0] != 0 || row_ptr[dim] != col_idx.len() {
            return Err(GridError::Malformed("row pointer bounds".into()));
        }
        for row in 0..dim {
            let cols = &col_idx[row_ptr[row]..row_ptr[row + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= dim) {
                return Err(GridError::Malformed(format!(
                    "row {row} columns unsorted or out of range"
                )));
            }
        }
        let m = Self {
            dim,
            row_ptr,
            col_idx,
            values,
        };
        if !m.is_symmetric() {
            return Err(GridError::Malformed("matrix is not symmetric".into()));
        }
        if m.diagonal().iter().any(|&d| d <= 0.0) {
            return Err(GridError::Malformed("non-positive diagonal entry".into()));
        }
        Ok(m)
    }

    /// 1×1 matrix `[a]`, handy for scalar checks.
    pub fn scalar(a: f64) -> Result<Self, GridError> {
        Self::from_csr(1, vec![0, 1], vec![0], vec![a])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim)
            .all(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).all(|p| self.get(self.col_idx[p], i) == self.values[p]))
    }

    /// `y = (A + shift·I) x`.
    pub fn mul_shifted(&self, shift: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = shift * x[row];
            for p in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *out = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.mul_shifted(0.0, x, &mut y);
        y
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim)
            .map(|row| {
                self.values[self.row_ptr[row]..self.row_ptr[row + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Returns `A + diag(q)`.
    pub fn add_to_diagonal(&self, q: &[f64]) -> Self {
        let mut out = self.clone();
        for (row, &qi) in q.iter().enumerate() {
            let range = out.row_ptr[row]..out.row_ptr[row + 1];
            let pos = out.col_idx[range.clone()]
                .binary_search(&row)
                .expect("assembled operators store their diagonal");
            out.values[range.start + pos] += qi;
        }
        out
    }

    /// Dense row-major copy; only sensible for small matrices.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.dim * self.dim];
        for row in 0..self.dim {
            for p in self.row_ptr[row]..self.row_ptr[row + 1] {
                dense[row * self.dim + self.col_idx[p]] = self.values[p];
            }
        }
        dense
    }

    /// Writes the matrix in Matrix Market coordinate format. Every stored
    /// entry is emitted (general layout) with 1-based indices.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "% symmetric positive definite operator")?;
        writeln!(w, "{} {} {}", self.dim, self.dim, self.nnz())?;
        for row in 0..self.dim {
            for p in self.row_ptr[row]..self.row_ptr[row + 1] {
                writeln!(w, "{} {} {:.17e}", row + 1, self.col_idx[p] + 1, self.values[p])?;
            }
        }
        Ok(())
    }
}
