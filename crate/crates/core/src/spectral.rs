//! Closed-form eigensystems of the damped spin and damped oscillator generators.
//!
//! Spin: `ℒ_S = γ(1−m̄)D[σ₋] + γm̄ D[σ₊]`.
//! Oscillator: `ℒ_HO = γ(n̄+1)D[a] + γn̄ D[a†]`, with right eigenmatrices
//!
//! `ρ_{n,k} = (−1)ⁿ/(n̄+1)^{|k|+1} · a†^{(|k|+k)/2} :L_n^{(|k|)}(N/(n̄+1)) e^{−N/(n̄+1)}: a^{(|k|−k)/2}`
//!
//! and left eigenmatrices
//!
//! `ρ̌_{n,k} = (−n̄)ⁿ n! / ((n̄+1)ⁿ (n+|k|)!) · a†^{(|k|+k)/2} :L_n^{(|k|)}(N/n̄): a^{(|k|−k)/2}`,
//!
//! both with eigenvalue `−γ(n + |k|/2)`. The n̄ → 0 limit of the left family is
//! taken coefficient by coefficient.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hilbert::{mk_destroy, mk_spin_ops, Operator, SpaceSpec, SubsystemSpec};
use crate::linalg::CMatrix;
use crate::liouvillian::{LindbladTerm, Liouvillian};
use crate::scalar::{re, Real};

/// Highest Laguerre degree expanded into monomials.
pub const LAGUERRE_MAX_DEGREE: usize = 20;

/// Minimum number of Fock levels kept above `n_max + k_range`.
pub const TRUNCATION_MARGIN: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinMode {
    Zero,
    Z,
    Plus,
    Minus,
}

pub const SPIN_MODES: [SpinMode; 4] = [SpinMode::Zero, SpinMode::Z, SpinMode::Plus, SpinMode::Minus];

#[derive(Clone, Debug)]
pub struct SpinEigensystem<T> {
    pub gamma: T,
    pub mbar: T,
    /// Ordered as [`SPIN_MODES`].
    pub eigenvalues: [T; 4],
    pub right: [Operator<T>; 4],
    pub left: [Operator<T>; 4],
}

pub fn spin_eigensystem<T: Real>(gamma: T, mbar: T) -> Result<SpinEigensystem<T>> {
    if !(gamma > T::zero()) {
        return Err(Error::InvalidParameter(format!("spin damping rate {gamma} must be positive")));
    }
    if !(mbar >= T::zero() && mbar <= T::one()) {
        return Err(Error::InvalidParameter(format!("spin bias {mbar} outside [0, 1]")));
    }
    let ops = mk_spin_ops::<T>(SubsystemSpec::spin())?;
    let id = Operator::identity(ops.z.space())?;
    let half = T::lit(0.5);
    let bias = (T::lit(2.0) * mbar - T::one()) * half;
    let rho0 = id.scale(re(half)).add(&ops.z.scale(re(bias)))?;
    let check_z = ops.z.scale(re(half)).sub(&id.scale(re(bias)))?;
    Ok(SpinEigensystem {
        gamma,
        mbar,
        eigenvalues: [T::zero(), -gamma, -gamma * half, -gamma * half],
        right: [rho0, ops.z.clone(), ops.plus.clone(), ops.minus.clone()],
        left: [id, check_z, ops.plus, ops.minus],
    })
}

impl<T: Real> SpinEigensystem<T> {
    pub fn generator(&self) -> Result<Liouvillian<T>> {
        let ops = mk_spin_ops::<T>(SubsystemSpec::spin())?;
        Liouvillian::new(
            Operator::zeros(ops.z.space())?,
            vec![
                LindbladTerm::new(ops.minus, self.gamma * (T::one() - self.mbar))?,
                LindbladTerm::new(ops.plus, self.gamma * self.mbar)?,
            ],
        )
    }

    /// `G_ij = Tr(ρ̌ᵢ† ρⱼ)`.
    pub fn gram(&self) -> CMatrix<T> {
        CMatrix::from_fn(4, 4, |i, j| hs_inner(self.left[i].matrix(), self.right[j].matrix()))
    }

    /// Largest max-norm residual of the right and left eigen-equations.
    pub fn max_residual(&self) -> Result<T> {
        let l = self.generator()?;
        let mut worst = T::zero();
        for i in 0..4 {
            let lam = re(self.eigenvalues[i]);
            let r = l.apply_matrix(self.right[i].matrix());
            worst = worst.max(r.max_diff(&self.right[i].matrix().scale(lam)));
            let lft = l.adjoint_apply_matrix(self.left[i].matrix());
            worst = worst.max(lft.max_diff(&self.left[i].matrix().scale(lam)));
        }
        Ok(worst)
    }
}

/// Hilbert-Schmidt pairing `Tr(A† B)`.
pub fn hs_inner<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    a.as_slice().iter().zip(b.as_slice()).fold(Complex::new(T::zero(), T::zero()), |s, (x, y)| s + x.conj() * y)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn factorial(n: usize) -> u128 {
    (1..=n).fold(1u128, |acc, i| acc * i as u128)
}

/// Monomial coefficients `c_j` of `L_n^{(α)}(x) = Σ_j c_j x^j`, with
/// `c_j = (−1)^j C(n+α, n−j) / j!`.
pub fn laguerre_coefficients(n: usize, alpha: usize) -> Result<Vec<f64>> {
    if n > LAGUERRE_MAX_DEGREE {
        return Err(Error::Unsupported(format!("Laguerre degree {n} above {LAGUERRE_MAX_DEGREE}")));
    }
    Ok((0..=n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(n + alpha, n - j) as f64 / factorial(j) as f64
        })
        .collect())
}

/// Diagonal weight `D_m = Σ_j c_j m!/(m−j)! (1−z)^{m−j}` of `:Σ_j c_j N^j e^{−zN}:`
/// on the Fock state `|m⟩`, using `:N^j (1−z)^N: = a†^j (1−z)^N a^j`.
fn normal_ordered_weight<T: Real>(coeffs: &[T], z: T, m: usize) -> T {
    let w = T::one() - z;
    let mut falling = T::one();
    let mut acc = T::zero();
    for (j, &c) in coeffs.iter().enumerate().take(m + 1) {
        if j > 0 {
            falling *= T::from_usize_lossy(m + 1 - j);
        }
        let e = (m - j) as i32;
        let wp = if e == 0 { T::one() } else { w.powi(e) };
        acc += c * falling * wp;
    }
    acc
}

/// `√((m+p)!/m!)`.
fn rising_sqrt<T: Real>(m: usize, p: usize) -> T {
    (1..=p).fold(T::one(), |acc, i| acc * T::from_usize_lossy(m + i)).sqrt()
}

/// Fock matrix of `a†^{p_L} :poly(N) e^{−zN}: a^{p_R}` where `poly(N) = Σ_j coeffs[j] N^j`.
pub fn normal_ordered_fock_matrix<T: Real>(
    coeffs: &[T],
    z: T,
    power_left: usize,
    power_right: usize,
    dim: usize,
) -> Result<Operator<T>> {
    if !(z >= T::zero() && z <= T::one()) {
        return Err(Error::InvalidParameter(format!("exponent weight z = {z} outside [0, 1]")));
    }
    if dim <= power_left.max(power_right) {
        return Err(Error::InvalidParameter(format!(
            "dimension {dim} too small for ladder powers ({power_left}, {power_right})"
        )));
    }
    let mut m = CMatrix::zeros(dim, dim);
    let mut mid = 0;
    while mid + power_left < dim && mid + power_right < dim {
        let v = rising_sqrt::<T>(mid, power_left)
            * rising_sqrt::<T>(mid, power_right)
            * normal_ordered_weight(coeffs, z, mid);
        m[(mid + power_left, mid + power_right)] = re(v);
        mid += 1;
    }
    Operator::new(SpaceSpec::single(SubsystemSpec::oscillator(dim)?), m)
}

/// Analytic eigensystem of the damped oscillator on a truncated Fock space.
#[derive(Clone, Debug)]
pub struct OscEigensystem<T> {
    gamma: T,
    nbar: T,
    n_max: usize,
    k_range: usize,
    dim: usize,
}

/// Ladder powers `(p_L, p_R) = ((|k|+k)/2, (|k|−k)/2)`.
fn powers(k: i64) -> (usize, usize) {
    let a = k.unsigned_abs() as usize;
    if k >= 0 {
        (a, 0)
    } else {
        (0, a)
    }
}

pub fn osc_eigensystem<T: Real>(gamma: T, nbar: T, n_max: usize, k_range: usize, dim: usize) -> Result<OscEigensystem<T>> {
    OscEigensystem::new(gamma, nbar, n_max, k_range, dim)
}

impl<T: Real> OscEigensystem<T> {
    pub fn new(gamma: T, nbar: T, n_max: usize, k_range: usize, dim: usize) -> Result<Self> {
        if !(gamma > T::zero()) {
            return Err(Error::InvalidParameter(format!("oscillator damping rate {gamma} must be positive")));
        }
        if !(nbar >= T::zero()) || !nbar.is_finite() {
            return Err(Error::InvalidParameter(format!("thermal occupation {nbar} must be nonnegative")));
        }
        if n_max > LAGUERRE_MAX_DEGREE {
            return Err(Error::Unsupported(format!("n_max = {n_max} above {LAGUERRE_MAX_DEGREE}")));
        }
        if dim < n_max + k_range + TRUNCATION_MARGIN {
            return Err(Error::InvalidParameter(format!(
                "dimension {dim} below n_max + k_range + {TRUNCATION_MARGIN}"
            )));
        }
        Ok(Self { gamma, nbar, n_max, k_range, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All `(n, k)` labels with `n ≤ n_max`, `|k| ≤ k_range`.
    pub fn labels(&self) -> Vec<(usize, i64)> {
        let kr = self.k_range as i64;
        (0..=self.n_max).flat_map(|n| (-kr..=kr).map(move |k| (n, k))).collect()
    }

    pub fn eigenvalue(&self, n: usize, k: i64) -> T {
        -self.gamma * (T::from_usize_lossy(n) + T::lit(0.5) * T::from_usize_lossy(k.unsigned_abs() as usize))
    }

    pub fn generator(&self) -> Result<Liouvillian<T>> {
        let a = mk_destroy::<T>(SubsystemSpec::oscillator(self.dim)?)?;
        Liouvillian::new(
            Operator::zeros(a.space())?,
            vec![
                LindbladTerm::new(a.clone(), self.gamma * (self.nbar + T::one()))?,
                LindbladTerm::new(a.adjoint(), self.gamma * self.nbar)?,
            ],
        )
    }

    fn check_label(&self, n: usize, k: i64) -> Result<()> {
        if n > self.n_max || k.unsigned_abs() as usize > self.k_range {
            return Err(Error::InvalidParameter(format!(
                "label ({n}, {k}) outside n ≤ {}, |k| ≤ {}",
                self.n_max, self.k_range
            )));
        }
        Ok(())
    }

    /// Coefficients and exponent weight of the right eigenmatrix's normal-ordered core,
    /// with the scalar prefactor folded into the coefficients.
    fn right_core(&self, n: usize, k: i64) -> Result<(Vec<T>, T)> {
        let ak = k.unsigned_abs() as usize;
        let q = T::one() / (self.nbar + T::one());
        let sign = if n % 2 == 0 { T::one() } else { -T::one() };
        let pre = sign * q.powi(ak as i32 + 1);
        let lag = laguerre_coefficients(n, ak)?;
        let coeffs = lag.iter().enumerate().map(|(j, &c)| pre * T::lit(c) * q.powi(j as i32)).collect();
        Ok((coeffs, q))
    }

    /// Same for the left eigenmatrix (no exponential, z = 0). The `(−n̄)ⁿ n̄^{−j}`
    /// combination is evaluated as `(−1)ⁿ n̄^{n−j}`, finite at n̄ = 0.
    fn left_core(&self, n: usize, k: i64) -> Result<Vec<T>> {
        let ak = k.unsigned_abs() as usize;
        let lag = laguerre_coefficients(n, ak)?;
        let ratio = T::lit(factorial(n) as f64 / factorial(n + ak) as f64);
        let pre = ratio / (self.nbar + T::one()).powi(n as i32);
        let sign = if n % 2 == 0 { T::one() } else { -T::one() };
        Ok(lag
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let e = (n - j) as i32;
                let nb = if e == 0 { T::one() } else { self.nbar.powi(e) };
                sign * pre * T::lit(c) * nb
            })
            .collect())
    }

    pub fn right(&self, n: usize, k: i64) -> Result<Operator<T>> {
        self.check_label(n, k)?;
        let (coeffs, z) = self.right_core(n, k)?;
        let (pl, pr) = powers(k);
        normal_ordered_fock_matrix(&coeffs, z, pl, pr, self.dim)
    }

    pub fn left(&self, n: usize, k: i64) -> Result<Operator<T>> {
        self.check_label(n, k)?;
        let coeffs = self.left_core(n, k)?;
        let (pl, pr) = powers(k);
        normal_ordered_fock_matrix(&coeffs, T::zero(), pl, pr, self.dim)
    }

    /// `Tr(ρ̌_{n,k}† ρ_{n',k'})` in the untruncated space, summed over Fock
    /// levels until the terms are negligible.
    pub fn pairing(&self, n: usize, k: i64, n2: usize, k2: i64) -> Result<T> {
        self.check_label(n, k)?;
        self.check_label(n2, k2)?;
        if k != k2 {
            return Ok(T::zero());
        }
        let lc = self.left_core(n, k)?;
        let (rc, z) = self.right_core(n2, k2)?;
        let (pl, pr) = powers(k);
        let mut acc = T::zero();
        let mut peak = T::zero();
        let mut quiet = 0usize;
        for m in 0..200_000usize {
            let weight = rising_sqrt::<T>(m, pl).powi(2) * rising_sqrt::<T>(m, pr).powi(2);
            let term = weight * normal_ordered_weight(&lc, T::zero(), m) * normal_ordered_weight(&rc, z, m);
            acc += term;
            peak = peak.max(term.abs());
            // right factor vanishes identically beyond n2 when n̄ = 0
            if z == T::one() && m > n2 {
                break;
            }
            if term.abs() <= T::epsilon() * T::lit(1e-4) * peak.max(T::min_positive_value()) {
                quiet += 1;
                if quiet >= 10 && m > 2 * (n + n2 + pl + pr) {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        Ok(acc)
    }

    /// Biorthogonality matrix over [`OscEigensystem::labels`].
    pub fn gram(&self) -> Result<CMatrix<T>> {
        let labels = self.labels();
        let mut g = CMatrix::zeros(labels.len(), labels.len());
        for (i, &(n, k)) in labels.iter().enumerate() {
            for (j, &(n2, k2)) in labels.iter().enumerate() {
                g[(i, j)] = re(self.pairing(n, k, n2, k2)?);
            }
        }
        Ok(g)
    }

    /// Relative residuals `‖ℒρ − λρ‖_max / ‖ρ‖_max` on the block `[0, dim − margin)`
    /// for right and left eigenmatrices, per label.
    pub fn residuals(&self) -> Result<Vec<EigenResidual<T>>> {
        let l = self.generator()?;
        let keep = self.dim - TRUNCATION_MARGIN;
        let mut out = Vec::new();
        for (n, k) in self.labels() {
            let lam = re(self.eigenvalue(n, k));
            let r = self.right(n, k)?;
            let lr = l.apply_matrix(r.matrix());
            let right = (&lr - &r.matrix().scale(lam)).leading_block(keep).max_abs()
                / r.matrix().leading_block(keep).max_abs();
            let c = self.left(n, k)?;
            let lc = l.adjoint_apply_matrix(c.matrix());
            let left = (&lc - &c.matrix().scale(lam)).leading_block(keep).max_abs()
                / c.matrix().leading_block(keep).max_abs();
            out.push(EigenResidual { n, k, right, left });
        }
        Ok(out)
    }

    /// `Σ_{n,k} e^{λ_{n,k} t} Tr(ρ̌_{n,k}† ρ₀) ρ_{n,k}` over the stored labels.
    pub fn propagate(&self, rho0: &CMatrix<T>, t: T) -> Result<CMatrix<T>> {
        if rho0.rows() != self.dim || rho0.cols() != self.dim {
            return Err(Error::DimensionMismatch(format!("{}x{} state for dimension {}", rho0.rows(), rho0.cols(), self.dim)));
        }
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (n, k) in self.labels() {
            let coef = hs_inner(self.left(n, k)?.matrix(), rho0);
            if coef.norm() == T::zero() {
                continue;
            }
            let decay = (self.eigenvalue(n, k) * t).exp();
            out.axpy(coef * decay, self.right(n, k)?.matrix());
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenResidual<T> {
    pub n: usize,
    pub k: i64,
    pub right: T,
    pub left: T,
}
