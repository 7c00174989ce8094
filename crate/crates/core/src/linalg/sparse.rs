use crate::error::{Error, Result};
use crate::linalg::dense::DenseMatrix;

/// Row-compressed sparse matrix.
///
/// Column indices inside each row are strictly increasing; duplicate triplets
/// are summed in insertion order so assembly is bit-reproducible.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn from_csr(
        rows: usize,
        cols: usize,
        offsets: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if offsets.len() != rows + 1 || offsets[0] != 0 {
            return Err(Error::InvalidInput("bad row offsets".into()));
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput("row offsets must be non-decreasing".into()));
        }
        if *offsets.last().unwrap() != values.len() || indices.len() != values.len() {
            return Err(Error::InvalidInput("final offset must equal value count".into()));
        }
        for r in 0..rows {
            let idx = &indices[offsets[r]..offsets[r + 1]];
            if idx.windows(2).any(|w| w[0] >= w[1]) || idx.iter().any(|&c| c >= cols) {
                return Err(Error::InvalidInput(format!(
                    "row {r}: column indices must be strictly increasing and in range"
                )));
            }
        }
        Ok(Self {
            rows,
            cols,
            offsets,
            indices,
            values,
        })
    }

    /// Assembles from (row, col, value) triplets, summing duplicates.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        // Stable sort keeps the summation order of duplicates fixed.
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut offsets = vec![0; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (r, c, v) = triplets[k];
            assert!(r < rows && c < cols, "triplet ({r}, {c}) out of range");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            offsets[r + 1] += offsets[r];
        }
        Self {
            rows,
            cols,
            offsets,
            indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            offsets: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Keeps every nonzero entry of a dense matrix.
    pub fn from_dense(a: &DenseMatrix) -> Self {
        let mut trip = Vec::new();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                let v = a[(i, j)];
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(a.rows(), a.cols(), &trip)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                d[(r, c)] = v;
            }
        }
        d
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row_indices(&self, r: usize) -> &[usize] {
        &self.indices[self.offsets[r]..self.offsets[r + 1]]
    }

    #[inline]
    pub fn row_values(&self, r: usize) -> &[f64] {
        &self.values[self.offsets[r]..self.offsets[r + 1]]
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row_indices(r)
            .iter()
            .copied()
            .zip(self.row_values(r).iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let idx = self.row_indices(r);
        match idx.binary_search(&c) {
            Ok(k) => self.row_values(r)[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                y[c] += v * x[r];
            }
        }
        y
    }

    /// Sparse-times-dense product, column by column.
    pub fn mul_dense(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, b.rows());
        let mut out = DenseMatrix::zeros(self.rows, b.cols());
        for j in 0..b.cols() {
            let y = self.matvec(b.col(j));
            out.col_mut(j).copy_from_slice(&y);
        }
        out
    }

    /// Lower and upper bandwidths: max(i - j) and max(j - i) over stored entries.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for r in 0..self.rows {
            for &c in self.row_indices(r) {
                if c < r {
                    kl = kl.max(r - c);
                } else {
                    ku = ku.max(c - r);
                }
            }
        }
        (kl, ku)
    }

    /// Removes the stored entries of the given columns, except on the diagonal.
    pub fn drop_columns_off_diagonal(&self, columns: &[usize]) -> SparseMatrix {
        let mut mask = vec![false; self.cols];
        for &c in columns {
            mask[c] = true;
        }
        let mut offsets = vec![0; self.rows + 1];
        let mut indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                if !mask[c] || c == r {
                    indices.push(c);
                    values.push(v);
                }
            }
            offsets[r + 1] = indices.len();
        }
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            offsets,
            indices,
            values,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        crate::linalg::dense::norm2(&self.values)
    }

    /// Solves (D + L) x = b by forward substitution on the lower triangle.
    pub fn solve_lower(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.rows;
        let mut x = vec![0.0; n];
        for r in 0..n {
            let mut s = b[r];
            let mut d = 0.0;
            for (c, v) in self.row(r) {
                if c < r {
                    s -= v * x[c];
                } else if c == r {
                    d = v;
                }
            }
            if d == 0.0 {
                return Err(Error::ZeroPivot { row: r });
            }
            x[r] = s / d;
        }
        Ok(x)
    }

    /// Solves (D + U) x = b by backward substitution on the upper triangle.
    pub fn solve_upper(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.rows;
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let mut s = b[r];
            let mut d = 0.0;
            for (c, v) in self.row(r) {
                if c > r {
                    s -= v * x[c];
                } else if c == r {
                    d = v;
                }
            }
            if d == 0.0 {
                return Err(Error::ZeroPivot { row: r });
            }
            x[r] = s / d;
        }
        Ok(x)
    }
}

/// Symmetric tridiagonal matrix with constant bands, handy in tests and demos.
pub fn tridiagonal(n: usize, lower: f64, diag: f64, upper: f64) -> SparseMatrix {
    let mut trip = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i > 0 {
            trip.push((i, i - 1, lower));
        }
        trip.push((i, i, diag));
        if i + 1 < n {
            trip.push((i, i + 1, upper));
        }
    }
    SparseMatrix::from_triplets(n, n, &trip)
}
