use num_complex::Complex;

use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigen-decomposition of a Hermitian matrix: ascending real eigenvalues and
/// the unitary whose columns are the matching eigenvectors.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic complex Jacobi. Only the Hermitian part of `a` is used.
pub fn hermitian_eigen<T: Real>(a: &CMatrix<T>) -> Result<HermitianEigen<T>> {
    jacobi(a, true)
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues<T: Real>(a: &CMatrix<T>) -> Result<Vec<T>> {
    jacobi(a, false).map(|e| e.values)
}

fn jacobi<T: Real>(a: &CMatrix<T>, want_vectors: bool) -> Result<HermitianEigen<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("eigen of {}x{} matrix", a.rows(), a.cols())));
    }
    let n = a.rows();
    let mut m = a.hermitian_part();
    for i in 0..n {
        m[(i, i)].im = T::zero();
    }
    let mut v = if want_vectors { CMatrix::identity(n) } else { CMatrix::zeros(0, 0) };
    let total = m.frobenius();
    let tol = T::epsilon() * total;
    let mut converged = n < 2 || total == T::zero();
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence(format!("Jacobi after {MAX_SWEEPS} sweeps")));
        }
        sweep += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= tol / T::from_usize_lossy(n) {
                    m[(p, q)] = Complex::new(T::zero(), T::zero());
                    m[(q, p)] = Complex::new(T::zero(), T::zero());
                    continue;
                }
                rotate(&mut m, &mut v, p, q, apq / mag, mag, want_vectors);
            }
        }
        let mut off = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += m[(i, j)].norm_sqr();
                }
            }
        }
        converged = off.sqrt() <= tol;
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = if want_vectors { v.select(&(0..n).collect::<Vec<_>>(), &order) } else { v };
    Ok(HermitianEigen { values, vectors })
}

fn rotate<T: Real>(
    m: &mut CMatrix<T>,
    v: &mut CMatrix<T>,
    p: usize,
    q: usize,
    phase: Complex<T>,
    mag: T,
    want_vectors: bool,
) {
    let n = m.rows();
    // rescale basis vector q so the (p, q) entry becomes real and positive
    let dq = phase.conj();
    for r in 0..n {
        m[(r, q)] *= dq;
        m[(q, r)] *= phase;
    }
    if want_vectors {
        for r in 0..n {
            v[(r, q)] *= dq;
        }
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let tau = (aqq - app) / (T::lit(2.0) * mag);
    let t = if tau == T::zero() {
        T::one()
    } else {
        tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt())
    };
    let cth = T::one() / (T::one() + t * t).sqrt();
    let sth = t * cth;
    for r in 0..n {
        let (xp, xq) = (m[(r, p)], m[(r, q)]);
        m[(r, p)] = xp * cth - xq * sth;
        m[(r, q)] = xp * sth + xq * cth;
    }
    for r in 0..n {
        let (xp, xq) = (m[(p, r)], m[(q, r)]);
        m[(p, r)] = xp * cth - xq * sth;
        m[(q, r)] = xp * sth + xq * cth;
    }
    m[(p, q)] = Complex::new(T::zero(), T::zero());
    m[(q, p)] = Complex::new(T::zero(), T::zero());
    m[(p, p)] = Complex::new(app - t * mag, T::zero());
    m[(q, q)] = Complex::new(aqq + t * mag, T::zero());
    if want_vectors {
        for r in 0..n {
            let (xp, xq) = (v[(r, p)], v[(r, q)]);
            v[(r, p)] = xp * cth - xq * sth;
            v[(r, q)] = xp * sth + xq * cth;
        }
    }
}

/// Sum of singular values, ‖X‖₁ = tr √(X†X). Input within 1e-8 (relative)
/// of Hermitian takes the cheaper route through its Hermitian part's eigenvalues.
pub fn trace_norm<T: Real>(x: &CMatrix<T>) -> Result<T> {
    let scale = x.max_abs();
    if scale == T::zero() {
        return Ok(T::zero());
    }
    if x.is_hermitian(T::lit(1e-8)) {
        let ev = hermitian_eigenvalues(x)?;
        return Ok(ev.iter().map(|e| e.abs()).sum());
    }
    let gram = x.adjoint().matmul(x);
    let ev = hermitian_eigenvalues(&gram)?;
    Ok(ev.iter().map(|e| e.max(T::zero()).sqrt()).sum())
}
