//! Minimal compressed-sparse-row matrices.
//!
//! Boundary operators are stored with integer entries so that identities such
//! as `∂∂ = 0` can be checked exactly; metric operators use `f64`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul};

/// Entry types a [`CsrMatrix`] can hold.
pub trait Entry:
    Copy + PartialEq + Default + Add<Output = Self> + Mul<Output = Self> + Send + Sync
{
}

impl<T> Entry for T where
    T: Copy + PartialEq + Default + Add<Output = T> + Mul<Output = T> + Send + Sync
{
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Entry> CsrMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Assemble from `(row, col, value)` triplets. Duplicates are summed and
    /// entries that sum to zero are dropped.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut rows: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); nrows];
        for (i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            let slot = rows[i].entry(j).or_default();
            *slot = *slot + v;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            for (j, v) in row {
                if v != T::default() {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzeros of row `i` as `(col, value)` pairs in increasing column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.indptr[i]..self.indptr[i + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let range = self.indptr[i]..self.indptr[i + 1];
        match self.indices[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => T::default(),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.triplets().map(|(i, j, v)| (j, i, v)),
        )
    }

    pub fn map<U: Entry>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U> {
        CsrMatrix::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets().map(|(i, j, v)| (i, j, f(v))),
        )
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols, "dimension mismatch in mul_vec");
        (0..self.nrows)
            .map(|i| {
                self.row(i)
                    .fold(T::default(), |acc, (j, v)| acc + v * x[j])
            })
            .collect()
    }

    pub fn matmul(&self, other: &CsrMatrix<T>) -> CsrMatrix<T> {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch in matmul");
        let mut triplets = Vec::new();
        for i in 0..self.nrows {
            let mut acc: BTreeMap<usize, T> = BTreeMap::new();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    let slot = acc.entry(j).or_default();
                    *slot = *slot + a * b;
                }
            }
            triplets.extend(acc.into_iter().map(|(j, v)| (i, j, v)));
        }
        CsrMatrix::from_triplets(self.nrows, other.ncols, triplets)
    }

    /// True when no stored entry is nonzero.
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == T::default())
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::default(); self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            out[i][j] = v;
        }
        out
    }
}

impl CsrMatrix<f64> {
    /// `Aᵀ x` without materializing the transpose.
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "dimension mismatch in mul_transpose_vec");
        let mut out = vec![0.0; self.ncols];
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            for (j, v) in self.row(i) {
                out[j] += v * xi;
            }
        }
        out
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        let mut out = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            out[(i, j)] = v;
        }
        out
    }

    /// Largest entrywise asymmetry relative to the largest entry.
    pub fn relative_asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
            / scale
    }
}

impl CsrMatrix<i32> {
    pub fn to_f64(&self) -> CsrMatrix<f64> {
        self.map(f64::from)
    }

    /// Apply an integer matrix to a real vector.
    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "dimension mismatch in apply_real");
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| f64::from(v) * x[j]).sum())
            .collect()
    }

    /// Apply the transpose of an integer matrix to a real vector.
    pub fn apply_real_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "dimension mismatch in apply_real_transpose");
        let mut out = vec![0.0; self.ncols];
        for (i, xi) in x.iter().enumerate() {
            for (j, v) in self.row(i) {
                out[j] += f64::from(v) * xi;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let m = CsrMatrix::from_triplets(2, 2, [(0, 0, 1), (0, 0, 2), (1, 1, 1), (1, 1, -1)]);
        assert_eq!(m.get(0, 0), 3);
        assert_eq!(m.nnz(), 1);
    }

    #[test]
    fn transpose_and_matmul() {
        let a = CsrMatrix::from_triplets(2, 3, [(0, 0, 1i64), (0, 2, 2), (1, 1, -1)]);
        let at = a.transpose();
        assert_eq!(at.get(2, 0), 2);
        let aat = a.matmul(&at);
        assert_eq!(aat.to_dense(), vec![vec![5, 0], vec![0, 1]]);
        assert_eq!(a.mul_vec(&[1, 1, 1]), vec![3, -1]);
    }

    #[test]
    fn transpose_product_matches_explicit_transpose() {
        let a = CsrMatrix::from_triplets(2, 3, [(0, 0, 1.5), (0, 2, 2.0), (1, 1, -1.0)]);
        let x = [0.5, -2.0];
        assert_eq!(a.mul_transpose_vec(&x), a.transpose().mul_vec(&x));
    }
}
