use num_complex::Complex;

use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{czero, Real};

/// Least-squares solution of an overdetermined system `A x ≈ b` (rows ≥ cols)
/// via Householder QR. Returns the solution and the residual 2-norm. The
/// system is reported singular when a diagonal entry of `R` falls below
/// `rank_tol · max|R|`.
pub fn least_squares<T: Real>(a: &CMatrix<T>, b: &[Complex<T>], rank_tol: T) -> Result<(Vec<Complex<T>>, T)> {
    let (m, n) = (a.rows(), a.cols());
    if m < n || b.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "least squares with A {m}x{n} and b of length {}",
            b.len()
        )));
    }
    let mut r = a.clone();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let norm_x = (k..m).fold(T::zero(), |s, i| s + r[(i, k)].norm_sqr()).sqrt();
        if norm_x == T::zero() {
            return Err(Error::Singular);
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() == T::zero() { Complex::new(T::one(), T::zero()) } else { x0 / x0.norm() };
        let alpha = -phase * norm_x;
        let mut v: Vec<Complex<T>> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2 = v.iter().fold(T::zero(), |s, z| s + z.norm_sqr());
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        for j in k..n {
            let dot = v.iter().enumerate().fold(czero(), |s, (ii, vi)| s + vi.conj() * r[(k + ii, j)]);
            let f = dot * two / vnorm2;
            for (ii, vi) in v.iter().enumerate() {
                r[(k + ii, j)] -= *vi * f;
            }
        }
        let dot = v.iter().enumerate().fold(czero(), |s, (ii, vi)| s + vi.conj() * rhs[k + ii]);
        let f = dot * two / vnorm2;
        for (ii, vi) in v.iter().enumerate() {
            rhs[k + ii] -= *vi * f;
        }
    }
    let scale = r.max_abs();
    let mut x = vec![czero(); n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in i + 1..n {
            s -= r[(i, j)] * x[j];
        }
        let d = r[(i, i)];
        if d.norm() <= rank_tol.max(T::epsilon()) * scale {
            return Err(Error::Singular);
        }
        x[i] = s / d;
    }
    let residual = rhs[n..].iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt();
    Ok((x, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn consistent_overdetermined_system_is_solved_exactly() {
        let a = CMatrix::<f64>::from_row_major(
            3,
            2,
            vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(1.0, 0.0), c(0.0, -1.0), c(3.0, 0.0)],
        );
        let x_true = vec![c(0.25, 1.0), c(-2.0, 0.5)];
        let b = a.matvec(&x_true);
        let (x, res) = least_squares(&a, &b, 1e-12).unwrap();
        assert!(res < 1e-13);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-13);
        }
    }

    #[test]
    fn line_fit_residual_matches_hand_value() {
        // fit y = x0 + x1 t through (0,0),(1,1),(2,1): normal equations give x0 = 1/6, x1 = 1/2
        let a = CMatrix::<f64>::from_row_major(
            3,
            2,
            vec![c(1., 0.), c(0., 0.), c(1., 0.), c(1., 0.), c(1., 0.), c(2., 0.)],
        );
        let b = vec![c(0., 0.), c(1., 0.), c(1., 0.)];
        let (x, res) = least_squares(&a, &b, 1e-12).unwrap();
        assert!((x[0].re - 1.0 / 6.0).abs() < 1e-14);
        assert!((x[1].re - 0.5).abs() < 1e-14);
        // residuals (-1/6, 1/3, -1/6) → norm sqrt(1/6)
        assert!((res - (1.0f64 / 6.0).sqrt()).abs() < 1e-14);
    }
}
