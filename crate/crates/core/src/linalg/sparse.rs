use num_complex::Complex;

use super::CMatrix;
use crate::scalar::{czero, Real};

/// Compressed sparse row matrix over complex scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex<T>>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, indptr: vec![0; rows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn from_dense(m: &CMatrix<T>) -> Self {
        let mut triplets = Vec::new();
        for i in 0..m.rows() {
            for (j, v) in m.row(i).iter().enumerate() {
                if *v != czero() {
                    triplets.push((i, j, *v));
                }
            }
        }
        Self::from_triplets(m.rows(), m.cols(), triplets)
    }

    /// Builds from `(row, col, value)` entries; duplicates are summed and exact zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, Complex<T>)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex<T>> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < rows && j < cols, "triplet ({i}, {j}) outside {rows}x{cols}");
            if last == Some((i, j)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                indptr[i + 1] += 1;
                indices.push(j);
                values.push(v);
                last = Some((i, j));
            }
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        let mut out = Self { rows, cols, indptr, indices, values };
        out.prune();
        out
    }

    fn prune(&mut self) {
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.rows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                if self.values[k] != czero() {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[i + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates the stored entries of row `i` as `(col, value)`.
    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, Complex<T>)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex<T>)> + '_ {
        (0..self.rows).flat_map(move |i| self.row_entries(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn to_dense(&self) -> CMatrix<T> {
        let mut m = CMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let t = self.triplets().map(|(i, j, v)| (j, i, v.conj())).collect();
        Self::from_triplets(self.cols, self.rows, t)
    }

    pub fn transpose(&self) -> Self {
        let t = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.cols, self.rows, t)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.prune();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "sparse add shape mismatch");
        let t = self.triplets().chain(other.triplets()).collect();
        Self::from_triplets(self.rows, self.cols, t)
    }

    pub fn matvec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.cols, "sparse matvec length mismatch");
        (0..self.rows)
            .map(|i| self.row_entries(i).fold(czero(), |s, (j, v)| s + v * x[j]))
            .collect()
    }

    /// `self · X` for dense `X`.
    pub fn mul_dense(&self, x: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.cols, x.rows(), "sparse·dense shape mismatch");
        let mut out = CMatrix::zeros(self.rows, x.cols());
        for i in 0..self.rows {
            for (k, v) in self.row_entries(i) {
                let src = x.row(k);
                let dst = out.row_mut(i);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += v * *s;
                }
            }
        }
        out
    }

    /// `X · self` for dense `X`.
    pub fn left_mul_dense(&self, x: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(x.cols(), self.rows, "dense·sparse shape mismatch");
        let mut out = CMatrix::zeros(x.rows(), self.cols);
        for r in 0..x.rows() {
            for k in 0..self.rows {
                let a = x[(r, k)];
                if a == czero() {
                    continue;
                }
                for (j, v) in self.row_entries(k) {
                    out[(r, j)] += a * v;
                }
            }
        }
        out
    }

    /// Sparse Kronecker product.
    pub fn kron(&self, other: &Self) -> Self {
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, j, a) in self.triplets() {
            for (k, l, b) in other.triplets() {
                t.push((i * other.rows + k, j * other.cols + l, a * b));
            }
        }
        Self::from_triplets(self.rows * other.rows, self.cols * other.cols, t)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, Complex::new(T::one(), T::zero()))).collect())
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn dense() -> CMatrix<f64> {
        CMatrix::from_fn(3, 4, |i, j| if (i + j) % 2 == 0 { c(i as f64 + 1.0, j as f64) } else { c(0., 0.) })
    }

    #[test]
    fn products_agree_with_dense() {
        let a = dense();
        let s = CsrMatrix::from_dense(&a);
        assert_eq!(s.nnz(), 6);
        let x = CMatrix::from_fn(4, 2, |i, j| c(i as f64 - j as f64, 0.5));
        assert!(s.mul_dense(&x).max_diff(&a.matmul(&x)) < 1e-14);
        let y = CMatrix::from_fn(2, 3, |i, j| c(1.0 + i as f64, j as f64));
        assert!(s.left_mul_dense(&y).max_diff(&y.matmul(&a)) < 1e-14);
        assert!(s.adjoint().to_dense().max_diff(&a.adjoint()) < 1e-15);
        let k = s.kron(&CsrMatrix::from_dense(&a.adjoint()));
        assert!(k.to_dense().max_diff(&a.kron(&a.adjoint())) < 1e-13);
    }

    #[test]
    fn duplicates_sum_and_cancellations_vanish() {
        let s = CsrMatrix::<f64>::from_triplets(
            2,
            2,
            vec![(0, 1, c(1., 0.)), (0, 1, c(2., 0.)), (1, 0, c(1., 0.)), (1, 0, c(-1., 0.))],
        );
        assert_eq!(s.nnz(), 1);
        assert_eq!(s.to_dense()[(0, 1)], c(3., 0.));
    }
}
