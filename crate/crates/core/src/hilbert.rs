//! Tensor-product spaces of spins and truncated oscillators and dense operators on them.
//!
//! Basis order within a factor is `|0⟩, |1⟩, …`; composite indices are row-major
//! over the factor list, so the last factor varies fastest.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{trace_norm, CMatrix};
use crate::scalar::{czero, Real};

/// Largest composite dimension materialized as a dense operator.
pub const DENSE_DIM_CAP: usize = 512;

/// Relative tolerance of [`Operator::is_hermitian`].
pub const TOL_HERM: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsystemKind {
    Spin,
    Oscillator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsystemSpec {
    kind: SubsystemKind,
    dim: usize,
}

impl SubsystemSpec {
    pub fn spin() -> Self {
        Self { kind: SubsystemKind::Spin, dim: 2 }
    }

    /// Oscillator truncated to the Fock states `|0⟩ … |dim−1⟩`.
    pub fn oscillator(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSubsystem(format!("oscillator truncation {dim} < 2")));
        }
        Ok(Self { kind: SubsystemKind::Oscillator, dim })
    }

    pub fn kind(&self) -> SubsystemKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceSpec {
    factors: Vec<SubsystemSpec>,
    total_dim: usize,
}

impl SpaceSpec {
    pub fn new(factors: Vec<SubsystemSpec>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSubsystem("space with no factors".into()));
        }
        let total_dim = factors.iter().map(|f| f.dim).product();
        Ok(Self { factors, total_dim })
    }

    pub fn single(factor: SubsystemSpec) -> Self {
        Self { total_dim: factor.dim, factors: vec![factor] }
    }

    pub fn factors(&self) -> &[SubsystemSpec] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    /// Per-factor basis labels of a composite index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = index % f.dim;
            index /= f.dim;
        }
        out
    }

    /// Composite index of per-factor labels.
    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.factors).fold(0, |acc, (d, f)| acc * f.dim + d)
    }

    /// The space formed by the listed factors, in the listed order.
    pub fn subspace(&self, indices: &[usize]) -> Result<Self> {
        let mut factors = Vec::with_capacity(indices.len());
        for &i in indices {
            factors.push(*self.factors.get(i).ok_or(Error::FactorIndex { index: i, len: self.factors.len() })?);
        }
        Self::new(factors)
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Self { total_dim: self.total_dim * other.total_dim, factors }
    }
}

/// Dense operator on a declared space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<T> {
    space: SpaceSpec,
    matrix: CMatrix<T>,
}

impl<T: Real> Operator<T> {
    pub fn new(space: SpaceSpec, matrix: CMatrix<T>) -> Result<Self> {
        let d = space.total_dim();
        if d > DENSE_DIM_CAP {
            return Err(Error::DimensionCap { what: "dense operator dimension", value: d, cap: DENSE_DIM_CAP });
        }
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on a space of dimension {d}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: &SpaceSpec) -> Result<Self> {
        Self::new(space.clone(), CMatrix::identity(space.total_dim()))
    }

    pub fn zeros(space: &SpaceSpec) -> Result<Self> {
        Self::new(space.clone(), CMatrix::zeros(space.total_dim(), space.total_dim()))
    }

    /// Projector `|ψ⟩⟨ψ|` of a (not necessarily normalized) state vector.
    pub fn projector(space: &SpaceSpec, psi: &[Complex<T>]) -> Result<Self> {
        if psi.len() != space.total_dim() {
            return Err(Error::DimensionMismatch(format!("state of length {} on dimension {}", psi.len(), space.total_dim())));
        }
        let conj: Vec<_> = psi.iter().map(|z| z.conj()).collect();
        Self::new(space.clone(), CMatrix::outer(psi, &conj))
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    /// Same space, new entries.
    pub fn with_matrix(&self, matrix: CMatrix<T>) -> Result<Self> {
        Self::new(self.space.clone(), matrix)
    }

    pub fn is_hermitian(&self) -> bool {
        self.matrix.is_hermitian(T::lit(TOL_HERM))
    }

    pub fn trace(&self) -> Complex<T> {
        self.matrix.trace()
    }

    pub fn trace_norm(&self) -> Result<T> {
        trace_norm(&self.matrix)
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch("operators on different spaces".into()));
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { space: self.space.clone(), matrix: self.matrix.matmul(&other.matrix) })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { space: self.space.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { space: self.space.clone(), matrix: &self.matrix - &other.matrix })
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.scale(s) }
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { space: self.space.clone(), matrix: CMatrix::commutator(&self.matrix, &other.matrix) })
    }

    /// `Tr(obs · self)`.
    pub fn expectation(&self, obs: &Self) -> Result<Complex<T>> {
        self.check_same(obs)?;
        let d = self.dim();
        let mut acc = czero();
        for i in 0..d {
            for k in 0..d {
                acc += obs.matrix[(i, k)] * self.matrix[(k, i)];
            }
        }
        Ok(acc)
    }

    /// `self ⊗ other` on the concatenated space.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Self::new(self.space.tensor(&other.space), self.matrix.kron(&other.matrix))
    }
}

/// Truncated annihilation operator, `⟨n−1|a|n⟩ = √n`.
pub fn mk_destroy<T: Real>(spec: SubsystemSpec) -> Result<Operator<T>> {
    if spec.kind != SubsystemKind::Oscillator {
        return Err(Error::InvalidSubsystem("annihilation operator requested for a spin".into()));
    }
    let mut m = CMatrix::zeros(spec.dim, spec.dim);
    for n in 1..spec.dim {
        m[(n - 1, n)] = Complex::new(T::from_usize_lossy(n).sqrt(), T::zero());
    }
    Operator::new(SpaceSpec::single(spec), m)
}

/// Excitation number of one factor: `a†a` or `σ₊σ₋`, i.e. `diag(0, 1, …)`.
pub fn mk_number<T: Real>(spec: SubsystemSpec) -> Result<Operator<T>> {
    let diag: Vec<T> = (0..spec.dim).map(T::from_usize_lossy).collect();
    Operator::new(SpaceSpec::single(spec), CMatrix::from_real_diag(&diag))
}

/// Spin ladder and Pauli-z operators in the basis `(|0⟩, |1⟩)`.
#[derive(Clone, Debug)]
pub struct SpinOps<T> {
    pub minus: Operator<T>,
    pub plus: Operator<T>,
    pub z: Operator<T>,
}

pub fn mk_spin_ops<T: Real>(spec: SubsystemSpec) -> Result<SpinOps<T>> {
    if spec.kind != SubsystemKind::Spin {
        return Err(Error::InvalidSubsystem("spin operators requested for an oscillator".into()));
    }
    let space = SpaceSpec::single(spec);
    let mut minus = CMatrix::zeros(2, 2);
    minus[(0, 1)] = Complex::new(T::one(), T::zero());
    let z = CMatrix::from_real_diag(&[-T::one(), T::one()]);
    Ok(SpinOps {
        plus: Operator::new(space.clone(), minus.adjoint())?,
        minus: Operator::new(space.clone(), minus)?,
        z: Operator::new(space, z)?,
    })
}

/// Places `op` on factor `factor_index` of `space`, with identities elsewhere.
pub fn embed<T: Real>(op: &Operator<T>, factor_index: usize, space: &SpaceSpec) -> Result<Operator<T>> {
    let n = space.factors().len();
    if factor_index >= n {
        return Err(Error::FactorIndex { index: factor_index, len: n });
    }
    let target = space.factors()[factor_index];
    if op.space().factors() != [target] {
        return Err(Error::DimensionMismatch(format!(
            "operator space {:?} does not match factor {factor_index} ({:?})",
            op.space().factors(),
            target
        )));
    }
    let before: usize = space.factors()[..factor_index].iter().map(|f| f.dim()).product();
    let after: usize = space.factors()[factor_index + 1..].iter().map(|f| f.dim()).product();
    let m = CMatrix::identity(before).kron(op.matrix()).kron(&CMatrix::identity(after));
    Operator::new(space.clone(), m)
}

/// Traces out every factor not listed in `keep`. Kept factors retain their
/// original relative order.
pub fn partial_trace<T: Real>(rho: &Operator<T>, keep: &[usize]) -> Result<Operator<T>> {
    let space = rho.space();
    let nf = space.factors().len();
    if keep.is_empty() {
        return Err(Error::InvalidParameter("partial trace with an empty keep set".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&i| i >= nf) {
        return Err(Error::FactorIndex { index: bad, len: nf });
    }
    let traced: Vec<usize> = (0..nf).filter(|i| !kept.contains(i)).collect();
    let kept_space = space.subspace(&kept)?;
    if traced.is_empty() {
        return Operator::new(kept_space, rho.matrix().clone());
    }
    let traced_space = space.subspace(&traced)?;
    let (dk, dt) = (kept_space.total_dim(), traced_space.total_dim());
    let mut full = vec![0usize; dk * dt];
    let mut digits = vec![0usize; nf];
    for k in 0..dk {
        let kd = kept_space.digits(k);
        for t in 0..dt {
            let td = traced_space.digits(t);
            for (slot, &f) in kept.iter().enumerate() {
                digits[f] = kd[slot];
            }
            for (slot, &f) in traced.iter().enumerate() {
                digits[f] = td[slot];
            }
            full[k * dt + t] = space.index_of(&digits);
        }
    }
    let m = rho.matrix();
    let out = CMatrix::from_fn(dk, dk, |i, j| {
        (0..dt).fold(czero(), |acc, t| acc + m[(full[i * dt + t], full[j * dt + t])])
    });
    Operator::new(kept_space, out)
}
