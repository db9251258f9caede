use num_complex::Complex;

use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{czero, Real};

/// Dense LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: CMatrix<T>,
    piv: Vec<usize>,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &CMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!("LU of {}x{} matrix", a.rows(), a.cols())));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut p, mut best) = (k, T::zero());
            for i in k..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == T::zero() {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                piv.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f == czero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, piv })
    }

    pub fn solve_vec(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.lu.rows();
        assert_eq!(b.len(), n, "rhs length mismatch");
        let mut x: Vec<Complex<T>> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    /// Solves `A X = B` column by column.
    pub fn solve(&self, b: &CMatrix<T>) -> CMatrix<T> {
        let n = self.lu.rows();
        assert_eq!(b.rows(), n, "rhs row mismatch");
        let mut out = CMatrix::zeros(n, b.cols());
        for j in 0..b.cols() {
            let col: Vec<_> = (0..n).map(|i| b[(i, j)]).collect();
            for (i, v) in self.solve_vec(&col).into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn solves_small_complex_system() {
        let a = CMatrix::<f64>::from_row_major(
            2,
            2,
            vec![c(0.0, 0.0), c(2.0, 1.0), c(1.0, 0.0), c(3.0, 0.0)],
        );
        let x_true = vec![c(1.0, -1.0), c(0.5, 2.0)];
        let b = a.matvec(&x_true);
        let x = Lu::new(&a).unwrap().solve_vec(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = CMatrix::<f64>::zeros(3, 3);
        assert_eq!(Lu::new(&a).unwrap_err(), Error::Singular);
    }
}
