use super::{CMatrix, Lu};
use crate::error::Result;
use crate::scalar::{re, Real};

const PADE_ORDER: usize = 6;

/// Matrix exponential by scaling and squaring with a diagonal Padé approximant.
pub fn expm<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.rows();
    let norm = a.norm_one();
    let mut squarings = 0i32;
    if norm > T::lit(0.5) {
        squarings = (norm / T::lit(0.5)).log2().ceil().to_i32().unwrap_or(0).max(0);
    }
    let scaled = a.scale_real(T::lit(2.0).powi(-squarings));
    let mut coeff = T::one();
    let mut num = CMatrix::identity(n);
    let mut den = CMatrix::identity(n);
    let mut power = CMatrix::identity(n);
    let q = PADE_ORDER as f64;
    for k in 1..=PADE_ORDER {
        let kf = k as f64;
        coeff = coeff * T::lit((q - kf + 1.0) / (kf * (2.0 * q - kf + 1.0)));
        power = power.matmul(&scaled);
        num.axpy(re(coeff), &power);
        let sign = if k % 2 == 0 { coeff } else { -coeff };
        den.axpy(re(sign), &power);
    }
    let mut out = Lu::new(&den)?.solve(&num);
    for _ in 0..squarings {
        out = out.matmul(&out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn diagonal_exponential() {
        let a = CMatrix::<f64>::from_diag(&[c(1.0, 0.0), c(-3.0, 2.0), c(0.0, 0.0)]);
        let e = expm(&a).unwrap();
        let expect = [c(1.0f64, 0.0).exp(), c(-3.0f64, 2.0).exp(), c(1.0, 0.0)];
        for i in 0..3 {
            assert!((e[(i, i)] - expect[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn rotation_generator() {
        let t = 7.3;
        let a = CMatrix::<f64>::from_row_major(2, 2, vec![c(0., 0.), c(-t, 0.), c(t, 0.), c(0., 0.)]);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-12);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-12);
    }

    #[test]
    fn nilpotent_is_exact() {
        let mut a = CMatrix::<f64>::zeros(2, 2);
        a[(0, 1)] = c(5.0, 0.0);
        let e = expm(&a).unwrap();
        assert!((e[(0, 1)] - c(5.0, 0.0)).norm() < 1e-13);
        assert!((e[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
    }
}
