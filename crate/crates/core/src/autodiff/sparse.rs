use crate::error::{Error, Result};
use crate::tensor::{Matrix, Real};

/// Constant sparse linear map acting on the rows of a dense matrix:
/// `out[i, :] = Σ_k coef_k · in[col_k, :]` over the entries of row `i`.
///
/// Every structural operator (normalized adjacency, relation means, pooling,
/// row gathers) is one of these.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp<T> {
    out_rows: usize,
    in_rows: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> SparseOp<T> {
    /// Builds from `(out_row, in_row, coefficient)` triplets; entries are
    /// kept in the given order within each output row.
    pub fn from_triplets(out_rows: usize, in_rows: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let mut counts = vec![0usize; out_rows + 1];
        for &(r, c, _) in triplets {
            if r >= out_rows || c >= in_rows {
                return Err(Error::input(format!(
                    "sparse entry ({r}, {c}) outside {out_rows}x{in_rows}"
                )));
            }
            counts[r + 1] += 1;
        }
        for i in 0..out_rows {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut cols = vec![0; triplets.len()];
        let mut vals = vec![T::zero(); triplets.len()];
        for &(r, c, v) in triplets {
            cols[fill[r]] = c;
            vals[fill[r]] = v;
            fill[r] += 1;
        }
        Ok(Self { out_rows, in_rows, row_ptr: counts, cols, vals })
    }

    /// Picks input row `index[i]` for output row `i`.
    pub fn gather(in_rows: usize, index: &[usize]) -> Result<Self> {
        let t: Vec<_> = index.iter().enumerate().map(|(i, &c)| (i, c, T::one())).collect();
        Self::from_triplets(index.len(), in_rows, &t)
    }

    pub fn out_rows(&self) -> usize {
        self.out_rows
    }

    pub fn in_rows(&self) -> usize {
        self.in_rows
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn to_dense(&self) -> Matrix<T> {
        let mut m = Matrix::zeros(self.out_rows, self.in_rows);
        for i in 0..self.out_rows {
            for (c, v) in self.row_entries(i) {
                m[(i, c)] = m[(i, c)] + v;
            }
        }
        m
    }

    pub fn apply(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        if x.rows() != self.in_rows {
            return Err(Error::input(format!(
                "sparse operator expects {} input rows, got {}",
                self.in_rows,
                x.rows()
            )));
        }
        let d = x.cols();
        let mut out = Matrix::zeros(self.out_rows, d);
        for i in 0..self.out_rows {
            let o = out.row_mut(i);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let (c, v) = (self.cols[k], self.vals[k]);
                for (o, &x) in o.iter_mut().zip(x.row(c)) {
                    *o = *o + v * x;
                }
            }
        }
        Ok(out)
    }

    /// `grad_in += Aᵀ · grad_out`
    pub(crate) fn apply_transpose_acc(&self, grad_out: &Matrix<T>, grad_in: &mut Matrix<T>) {
        for i in 0..self.out_rows {
            let g = grad_out.row(i);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let (c, v) = (self.cols[k], self.vals[k]);
                for (o, &g) in grad_in.row_mut(c).iter_mut().zip(g) {
                    *o = *o + v * g;
                }
            }
        }
    }
}
