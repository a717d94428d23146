//! Two-level sum tree over the squared entries of a matrix.
//!
//! Each row owns a heap-ordered binary tree whose leaves are `X(i, j)^2`
//! (padded with zeros to a power of two) and whose internal nodes hold
//! partial sums. A root tree of the same shape sits over the row norms.
//! Leaves of the row trees are not stored: they are recomputed from the
//! signed values kept alongside, so the structure costs about one extra
//! `f64` per entry.
//!
//! Every internal node is always recomputed as `left + right` from its
//! children, never adjusted by deltas, so a sequence of updates leaves the
//! structure bit-identical to a fresh build of the final matrix.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone)]
pub struct SegTreeMatrix {
    values: DenseMatrix,
    /// leaves per row tree (power of two, >= 2)
    row_cap: usize,
    /// `rows * row_cap`; slot `i * row_cap + k` is internal node `k` of row
    /// `i` (`k` in `1..row_cap`, slot 0 unused)
    row_nodes: Vec<f64>,
    root_cap: usize,
    /// heap array of length `2 * root_cap`; leaves are row norms
    root_nodes: Vec<f64>,
}

impl SegTreeMatrix {
    /// All-zero store of the given shape, ready for [`update`](Self::update)
    /// or [`set_row`](Self::set_row).
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        let row_cap = cols.next_power_of_two().max(2);
        let root_cap = rows.next_power_of_two().max(2);
        Ok(Self {
            values: DenseMatrix::zeros(rows, cols),
            row_cap,
            row_nodes: vec![0.0; rows * row_cap],
            root_cap,
            root_nodes: vec![0.0; 2 * root_cap],
        })
    }

    pub fn build(x: &DenseMatrix) -> Result<Self> {
        Self::from_dense(x.clone())
    }

    /// Takes ownership of `x` to avoid a copy of large design matrices.
    pub fn from_dense(x: DenseMatrix) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        if !x.all_finite() {
            return Err(Error::NonFinite);
        }
        let mut t = Self::zeros(x.rows(), x.cols())?;
        t.values = x;
        for i in 0..t.rows() {
            t.rebuild_row(i);
            t.root_nodes[t.root_cap + i] = t.row_norm_sq_unchecked(i);
        }
        for k in (1..t.root_cap).rev() {
            t.root_nodes[k] = t.root_nodes[2 * k] + t.root_nodes[2 * k + 1];
        }
        Ok(t)
    }

    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    /// The stored signed matrix.
    pub fn matrix(&self) -> &DenseMatrix {
        &self.values
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Result<f64> {
        self.values.try_get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    pub fn fro_norm_sq(&self) -> f64 {
        self.root_nodes[1]
    }

    pub fn row_norm_sq(&self, i: usize) -> Result<f64> {
        if i >= self.rows() {
            return Err(self.out_of_range(i, 0));
        }
        Ok(self.row_norm_sq_unchecked(i))
    }

    #[inline]
    fn row_norm_sq_unchecked(&self, i: usize) -> f64 {
        self.row_nodes[i * self.row_cap + 1]
    }

    /// Writes one entry and refreshes the two root-to-leaf paths.
    pub fn update(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        if i >= self.rows() || j >= self.cols() {
            return Err(self.out_of_range(i, j));
        }
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        self.values.set(i, j, v);
        let mut k = (self.row_cap + j) / 2;
        while k >= 1 {
            self.row_nodes[i * self.row_cap + k] = self.row_child(i, 2 * k) + self.row_child(i, 2 * k + 1);
            k /= 2;
        }
        self.refresh_root_path(i);
        Ok(())
    }

    /// Replaces a whole row, rebuilding its tree in `O(cols)`.
    pub fn set_row(&mut self, i: usize, row: &[f64]) -> Result<()> {
        if i >= self.rows() {
            return Err(self.out_of_range(i, 0));
        }
        if row.len() != self.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        self.values.row_mut(i).copy_from_slice(row);
        self.rebuild_row(i);
        self.refresh_root_path(i);
        Ok(())
    }

    /// Draws a row with probability `|X(i,:)|^2 / |X|_F^2`.
    pub fn sample_row<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        let total = self.fro_norm_sq();
        if total <= 0.0 {
            return Err(Error::ZeroMatrix);
        }
        let mut u = rng.gen::<f64>() * total;
        let mut k = 1;
        while k < self.root_cap {
            let (l, r) = (self.root_nodes[2 * k], self.root_nodes[2 * k + 1]);
            k = if (u < l || r <= 0.0) && l > 0.0 {
                2 * k
            } else {
                u -= l;
                2 * k + 1
            };
        }
        Ok(k - self.root_cap)
    }

    /// Draws a column of row `i` with probability `X(i,j)^2 / |X(i,:)|^2`.
    pub fn sample_col_in_row<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Result<usize> {
        let total = self.row_norm_sq(i)?;
        if total <= 0.0 {
            return Err(Error::ZeroRow(i));
        }
        let mut u = rng.gen::<f64>() * total;
        let mut k = 1;
        while k < self.row_cap {
            let (l, r) = (self.row_child(i, 2 * k), self.row_child(i, 2 * k + 1));
            k = if (u < l || r <= 0.0) && l > 0.0 {
                2 * k
            } else {
                u -= l;
                2 * k + 1
            };
        }
        Ok(k - self.row_cap)
    }

    /// Verifies the partial-sum invariants; used by tests.
    pub fn check_invariants(&self, rel_tol: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= rel_tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        for i in 0..self.rows() {
            let direct: f64 = self.row(i).iter().map(|v| v * v).sum();
            if !close(direct, self.row_norm_sq_unchecked(i))
                || !close(direct, self.root_nodes[self.root_cap + i])
            {
                return false;
            }
            for k in 1..self.row_cap {
                if self.row_nodes[i * self.row_cap + k] < 0.0 {
                    return false;
                }
            }
        }
        let total: f64 = (0..self.rows()).map(|i| self.root_nodes[self.root_cap + i]).sum();
        close(total, self.fro_norm_sq()) && self.root_nodes.iter().all(|v| *v >= 0.0)
    }

    #[inline]
    fn row_child(&self, i: usize, c: usize) -> f64 {
        if c >= self.row_cap {
            let j = c - self.row_cap;
            if j < self.cols() {
                let v = self.values.get(i, j);
                v * v
            } else {
                0.0
            }
        } else {
            self.row_nodes[i * self.row_cap + c]
        }
    }

    fn rebuild_row(&mut self, i: usize) {
        for k in (1..self.row_cap).rev() {
            self.row_nodes[i * self.row_cap + k] = self.row_child(i, 2 * k) + self.row_child(i, 2 * k + 1);
        }
    }

    fn refresh_root_path(&mut self, i: usize) {
        let mut k = self.root_cap + i;
        self.root_nodes[k] = self.row_norm_sq_unchecked(i);
        k /= 2;
        while k >= 1 {
            self.root_nodes[k] = self.root_nodes[2 * k] + self.root_nodes[2 * k + 1];
            k /= 2;
        }
    }

    fn out_of_range(&self, row: usize, col: usize) -> Error {
        Error::IndexOutOfRange {
            row,
            col,
            rows: self.rows(),
            cols: self.cols(),
        }
    }
}
