use num_complex::Complex;

use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{czero, Real};

/// Eigenvalues of a general complex square matrix by Hessenberg reduction
/// followed by single-shift QR iteration with Wilkinson shifts.
pub fn eigenvalues<T: Real>(a: &CMatrix<T>) -> Result<Vec<Complex<T>>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("eigenvalues of {}x{} matrix", a.rows(), a.cols())));
    }
    let n = a.rows();
    let mut h = a.clone();
    hessenberg(&mut h);
    let mut out = vec![czero(); n];
    if n == 0 {
        return Ok(out);
    }
    let eps = T::epsilon();
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let budget = 60 * n.max(4);
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let near = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            let floor = if near == T::zero() { h.max_abs() } else { near };
            if sub <= eps * floor {
                h[(l, l - 1)] = czero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            out[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        total += 1;
        if total > budget {
            return Err(Error::NoConvergence(format!("QR eigenvalues after {budget} steps")));
        }
        iter += 1;
        let mu = if iter % 11 == 10 {
            h[(hi, hi)] + Complex::new(T::lit(0.75) * h[(hi, hi - 1)].norm(), T::zero())
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_step(&mut h, l, hi, mu);
    }
    out[0] = h[(0, 0)];
    Ok(out)
}

fn wilkinson<T: Real>(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Complex<T> {
    let half = T::lit(0.5);
    let m = (a + d) * half;
    let disc = ((a - d) * half * (a - d) * half + b * c).sqrt();
    let (r1, r2) = (m + disc, m - disc);
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

fn qr_step<T: Real>(h: &mut CMatrix<T>, l: usize, hi: usize, mu: Complex<T>) {
    for k in l..=hi {
        h[(k, k)] -= mu;
    }
    let mut rots = Vec::with_capacity(hi - l);
    for k in l..hi {
        let x = h[(k, k)];
        let y = h[(k + 1, k)];
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == T::zero() {
            (Complex::new(T::one(), T::zero()), czero())
        } else {
            (x / r, y / r)
        };
        for j in k..=hi {
            let (u, v) = (h[(k, j)], h[(k + 1, j)]);
            h[(k, j)] = c.conj() * u + s.conj() * v;
            h[(k + 1, j)] = -s * u + c * v;
        }
        rots.push((c, s));
    }
    for (idx, (c, s)) in rots.into_iter().enumerate() {
        let k = l + idx;
        let top = (k + 2).min(hi);
        for i in l..=top {
            let (u, v) = (h[(i, k)], h[(i, k + 1)]);
            h[(i, k)] = u * c + v * s;
            h[(i, k + 1)] = -u * s.conj() + v * c.conj();
        }
    }
    for k in l..=hi {
        h[(k, k)] += mu;
    }
}

fn hessenberg<T: Real>(h: &mut CMatrix<T>) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let two = T::lit(2.0);
    for k in 0..n - 2 {
        let norm_x = (k + 1..n).fold(T::zero(), |s, i| s + h[(i, k)].norm_sqr()).sqrt();
        if norm_x == T::zero() {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == T::zero() { Complex::new(T::one(), T::zero()) } else { x0 / x0.norm() };
        let mut v: Vec<Complex<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] += phase * norm_x;
        let vn2 = v.iter().fold(T::zero(), |s, z| s + z.norm_sqr());
        if vn2 == T::zero() {
            continue;
        }
        for j in 0..n {
            let dot = v.iter().enumerate().fold(czero(), |s, (ii, vi)| s + vi.conj() * h[(k + 1 + ii, j)]);
            let f = dot * two / vn2;
            for (ii, vi) in v.iter().enumerate() {
                h[(k + 1 + ii, j)] -= *vi * f;
            }
        }
        for i in 0..n {
            let dot = v.iter().enumerate().fold(czero(), |s, (jj, vj)| s + h[(i, k + 1 + jj)] * *vj);
            let f = dot * two / vn2;
            for (jj, vj) in v.iter().enumerate() {
                h[(i, k + 1 + jj)] -= f * vj.conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = czero();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn sorted(mut v: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn triangular_matrix_returns_its_diagonal() {
        let a = CMatrix::<f64>::from_fn(4, 4, |i, j| if j >= i { c(i as f64 - 1.5, (j as f64) * 0.3) } else { c(0., 0.) });
        let ev = sorted(eigenvalues(&a).unwrap());
        let expect = sorted(a.diagonal());
        for (u, v) in ev.iter().zip(&expect) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_generator_has_imaginary_pair() {
        let a = CMatrix::<f64>::from_row_major(2, 2, vec![c(0., 0.), c(-2., 0.), c(2., 0.), c(0., 0.)]);
        let ev = sorted(eigenvalues(&a).unwrap());
        assert!((ev[0] - c(0., -2.)).norm() < 1e-14);
        assert!((ev[1] - c(0., 2.)).norm() < 1e-14);
    }

    #[test]
    fn similarity_transform_preserves_spectrum() {
        let d = [c(-1.0, 0.5), c(-0.2, 0.0), c(-3.0, -2.0), c(0.0, 1.0), c(-0.7, 0.3)];
        let s = CMatrix::<f64>::from_fn(5, 5, |i, j| c(if i == j { 2.0 } else { 0.3 * ((i + 2 * j) % 4) as f64 }, 0.1 * (i as f64 - j as f64)));
        let sinv = super::super::Lu::new(&s).unwrap().solve(&CMatrix::identity(5));
        let a = s.matmul(&CMatrix::from_diag(&d)).matmul(&sinv);
        let ev = sorted(eigenvalues(&a).unwrap());
        for (u, v) in ev.iter().zip(&sorted(d.to_vec())) {
            assert!((u - v).norm() < 1e-11, "{u} vs {v}");
        }
    }
}
