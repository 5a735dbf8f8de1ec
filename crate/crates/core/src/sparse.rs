//! Square CSR matrices used for adjacency, motif and propagation matrices.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Square sparse matrix in compressed sparse row form.
///
/// Column indices are sorted within each row and no explicit zeros are
/// stored. Symmetry is not enforced here; consumers that need it check
/// [`SparseMatrix::is_symmetric`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            row_offsets: vec![0; n + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed and
    /// entries that end up exactly zero are dropped.
    pub fn from_triplets(
        n: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (r, c, v) in triplets {
            if r >= n || c >= n {
                return Err(Error::InvalidInput(format!(
                    "entry ({r}, {c}) outside a {n}x{n} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite value at ({r}, {c})"
                )));
            }
            rows[r].push((c, v));
        }
        Ok(Self::from_unsorted_rows(n, rows))
    }

    pub(crate) fn from_unsorted_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        debug_assert_eq!(rows.len(), n);
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut i = 0;
            while i < row.len() {
                let c = row[i].0;
                let mut v = 0.0;
                while i < row.len() && row[i].0 == c {
                    v += row[i].1;
                    i += 1;
                }
                if v != 0.0 {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self {
            n,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Assembles from rows whose columns are already sorted and unique, with
    /// no zero values. Used by the kernels, which produce rows in order.
    pub(crate) fn from_sorted_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        debug_assert_eq!(rows.len(), n);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_offsets.push(0);
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            for (c, v) in row {
                debug_assert!(v != 0.0);
                col_indices.push(c);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Self {
            n,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::shape(
                "from_dense",
                format!("{}x{} is not square", m.rows(), m.cols()),
            ));
        }
        let n = m.rows();
        let rows = (0..n)
            .map(|r| {
                m.row(r)
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(c, &v)| (c, v))
                    .collect()
            })
            .collect();
        Ok(Self::from_sorted_rows(n, rows))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                m.set(r, c, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_offsets[r], self.row_offsets[r + 1]);
        (&self.col_indices[a..b], &self.values[a..b])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map_or(0.0, |i| vals[i])
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        self.row(r).0.binary_search(&c).is_ok()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.row(r).1.iter().sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn transpose(&self) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        // row-major traversal keeps each output row sorted
        for (r, c, v) in self.iter() {
            rows[c].push((r, v));
        }
        Self::from_sorted_rows(self.n, rows)
    }

    /// Same sparsity pattern as the transpose.
    pub fn is_structurally_symmetric(&self) -> bool {
        self.iter().all(|(r, c, _)| self.contains(c, r))
    }

    /// Structural symmetry plus `|a_ij - a_ji| <= tol` everywhere.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.iter().all(|(r, c, v)| {
            let (cols, vals) = self.row(c);
            match cols.binary_search(&r) {
                Ok(i) => (vals[i] - v).abs() <= tol,
                Err(_) => false,
            }
        })
    }

    pub fn scale(&self, alpha: f64) -> Self {
        if alpha == 0.0 {
            return Self::zeros(self.n);
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `self + alpha * other`, merging rows. Cancelled entries are dropped.
    pub fn add_scaled(&self, other: &Self, alpha: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::shape(
                "add_scaled",
                format!("dimension {} vs {}", self.n, other.n),
            ));
        }
        let mut rows = Vec::with_capacity(self.n);
        for r in 0..self.n {
            let (ac, av) = self.row(r);
            let (bc, bv) = other.row(r);
            let mut row = Vec::with_capacity(ac.len() + bc.len());
            let (mut i, mut j) = (0, 0);
            while i < ac.len() || j < bc.len() {
                let (c, v) = if j == bc.len() || (i < ac.len() && ac[i] < bc[j]) {
                    i += 1;
                    (ac[i - 1], av[i - 1])
                } else if i == ac.len() || bc[j] < ac[i] {
                    j += 1;
                    (bc[j - 1], alpha * bv[j - 1])
                } else {
                    i += 1;
                    j += 1;
                    (ac[i - 1], av[i - 1] + alpha * bv[j - 1])
                };
                if v != 0.0 {
                    row.push((c, v));
                }
            }
            rows.push(row);
        }
        Ok(Self::from_sorted_rows(self.n, rows))
    }

    /// Returns a matrix with the same pattern and values replaced by `f(row, col, value)`.
    /// Entries mapped to zero are kept out of the result.
    pub fn map_entries(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let rows = (0..self.n)
            .map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter()
                    .zip(vals)
                    .map(|(&c, &v)| (c, f(r, c, v)))
                    .filter(|&(_, v)| v != 0.0)
                    .collect()
            })
            .collect();
        Self::from_sorted_rows(self.n, rows)
    }

    /// Same column pattern in every row, ignoring values.
    pub fn same_pattern(&self, other: &Self) -> bool {
        self.n == other.n
            && self.row_offsets == other.row_offsets
            && self.col_indices == other.col_indices
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = SparseMatrix::from_triplets(
            3,
            [(0, 1, 1.0), (0, 1, 2.0), (2, 0, 1.0), (2, 0, -1.0), (1, 1, 5.0)],
        )
        .unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(2, 0), 0.0);
        assert!(!m.contains(2, 0));
    }

    #[test]
    fn out_of_range_triplet_is_rejected() {
        assert!(SparseMatrix::from_triplets(2, [(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn add_scaled_merges() {
        let a = SparseMatrix::from_triplets(2, [(0, 0, 1.0), (0, 1, 2.0)]).unwrap();
        let b = SparseMatrix::from_triplets(2, [(0, 1, 1.0), (1, 0, 4.0)]).unwrap();
        let c = a.add_scaled(&b, -2.0).unwrap();
        assert_eq!(c.to_dense().as_slice(), &[1.0, 0.0, -8.0, 0.0]);
        assert_eq!(c.nnz(), 2);
    }

    #[test]
    fn symmetry_checks() {
        let a = SparseMatrix::from_triplets(2, [(0, 1, 1.0)]).unwrap();
        assert!(!a.is_structurally_symmetric());
        let b = SparseMatrix::from_triplets(2, [(0, 1, 1.0), (1, 0, 1.0 + 1e-9)]).unwrap();
        assert!(b.is_structurally_symmetric());
        assert!(!b.is_symmetric(1e-12));
        assert!(b.is_symmetric(1e-8));
    }

    proptest! {
        #[test]
        fn dense_round_trip(n in 1usize..8, entries in proptest::collection::vec((0usize..8, 0usize..8, -3i32..4), 0..30)) {
            let m = SparseMatrix::from_triplets(
                n,
                entries.into_iter().filter(|&(r, c, _)| r < n && c < n).map(|(r, c, v)| (r, c, v as f64)),
            ).unwrap();
            let back = SparseMatrix::from_dense(&m.to_dense()).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(m.transpose().transpose(), m);
        }
    }
}
