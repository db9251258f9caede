//! Lindblad generators, applied matrix-free or materialized as superoperators.
//!
//! Vectorization is column stacking: entry `(i, j)` of ρ sits at `i + d·j`, so
//! `AρB ↦ (Bᵀ ⊗ A) vec(ρ)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hilbert::{Operator, SpaceSpec};
use crate::linalg::{CMatrix, CsrMatrix};
use crate::scalar::{re, Real};

/// Largest Hilbert dimension for which [`Liouvillian::materialize`] builds a dense matrix.
pub const SUPEROPERATOR_DIM_CAP: usize = 64;

/// Relative tolerance for trace annihilation checks.
pub const TOL_TRACE: f64 = 1e-12;

/// One damping channel `rate · D[jump]`.
#[derive(Clone, Debug)]
pub struct LindbladTerm<T> {
    jump: Operator<T>,
    rate: T,
}

impl<T: Real> LindbladTerm<T> {
    pub fn new(jump: Operator<T>, rate: T) -> Result<Self> {
        if !(rate >= T::zero()) || !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("Lindblad rate {rate} must be finite and nonnegative")));
        }
        Ok(Self { jump, rate })
    }

    pub fn jump(&self) -> &Operator<T> {
        &self.jump
    }

    pub fn rate(&self) -> T {
        self.rate
    }
}

#[derive(Clone, Debug)]
struct Channel<T> {
    rate: T,
    jump: CsrMatrix<T>,
    jump_adj: CsrMatrix<T>,
}

/// `ℒρ = −i[H, ρ] + Σ rate·D[J]ρ`.
#[derive(Clone, Debug)]
pub struct Liouvillian<T> {
    space: SpaceSpec,
    hamiltonian: Operator<T>,
    terms: Vec<LindbladTerm<T>>,
    h_eff: CsrMatrix<T>,
    h_eff_adj: CsrMatrix<T>,
    channels: Vec<Channel<T>>,
}

/// `−i·z`.
#[inline]
fn times_minus_i<T: Real>(z: Complex<T>) -> Complex<T> {
    Complex::new(z.im, -z.re)
}

impl<T: Real> Liouvillian<T> {
    pub fn new(hamiltonian: Operator<T>, terms: Vec<LindbladTerm<T>>) -> Result<Self> {
        if !hamiltonian.is_hermitian() {
            return Err(Error::InvalidParameter("Hamiltonian is not Hermitian".into()));
        }
        let space = hamiltonian.space().clone();
        if let Some(t) = terms.iter().find(|t| t.jump.space() != &space) {
            return Err(Error::DimensionMismatch(format!(
                "jump operator of dimension {} on a generator of dimension {}",
                t.jump.dim(),
                space.total_dim()
            )));
        }
        let half = T::lit(0.5);
        let mut heff = hamiltonian.matrix().clone();
        let mut channels = Vec::new();
        for t in terms.iter().filter(|t| t.rate > T::zero()) {
            let j = t.jump.matrix();
            let jd = j.adjoint();
            heff.axpy(Complex::new(T::zero(), -half * t.rate), &jd.matmul(j));
            channels.push(Channel { rate: t.rate, jump: CsrMatrix::from_dense(j), jump_adj: CsrMatrix::from_dense(&jd) });
        }
        Ok(Self {
            h_eff: CsrMatrix::from_dense(&heff),
            h_eff_adj: CsrMatrix::from_dense(&heff.adjoint()),
            space,
            hamiltonian,
            terms,
            channels,
        })
    }

    /// Purely Hamiltonian generator.
    pub fn unitary(hamiltonian: Operator<T>) -> Result<Self> {
        Self::new(hamiltonian, Vec::new())
    }

    /// The zero generator on `space`.
    pub fn zero(space: &SpaceSpec) -> Result<Self> {
        Self::new(Operator::zeros(space)?, Vec::new())
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn hamiltonian(&self) -> &Operator<T> {
        &self.hamiltonian
    }

    pub fn terms(&self) -> &[LindbladTerm<T>] {
        &self.terms
    }

    /// Generator of the sum `self + other`.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        let h = self.hamiltonian.add(&other.hamiltonian)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(h, terms)
    }

    /// Same generator with every term rate and the Hamiltonian multiplied by `s ≥ 0`.
    pub fn scaled(&self, s: T) -> Result<Self> {
        let h = self.hamiltonian.scale(re(s));
        let terms = self
            .terms
            .iter()
            .map(|t| LindbladTerm::new(t.jump.clone(), t.rate * s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(h, terms)
    }

    fn check_dim(&self, m: &CMatrix<T>) -> Result<()> {
        let d = self.dim();
        if m.rows() != d || m.cols() != d {
            return Err(Error::DimensionMismatch(format!("{}x{} input to a generator of dimension {d}", m.rows(), m.cols())));
        }
        Ok(())
    }

    /// `ℒρ` on raw matrices; panics on shape mismatch (hot path of integrators).
    pub fn apply_matrix(&self, rho: &CMatrix<T>) -> CMatrix<T> {
        let mut out = self.h_eff.mul_dense(rho).map(times_minus_i);
        let right = self.h_eff_adj.left_mul_dense(rho).map(|z| -times_minus_i(z));
        out += &right;
        for ch in &self.channels {
            let jr = ch.jump.mul_dense(rho);
            let jrj = ch.jump_adj.left_mul_dense(&jr);
            out.axpy(re(ch.rate), &jrj);
        }
        out
    }

    /// Heisenberg-picture generator `ℒ†X = i[H, X] + Σ rate·(J†XJ − ½{J†J, X})` on raw matrices.
    pub fn adjoint_apply_matrix(&self, x: &CMatrix<T>) -> CMatrix<T> {
        let mut out = self.h_eff_adj.mul_dense(x).map(|z| -times_minus_i(z));
        let right = self.h_eff.left_mul_dense(x).map(times_minus_i);
        out += &right;
        for ch in &self.channels {
            let jx = ch.jump_adj.mul_dense(x);
            let jxj = ch.jump.left_mul_dense(&jx);
            out.axpy(re(ch.rate), &jxj);
        }
        out
    }

    pub fn apply(&self, rho: &Operator<T>) -> Result<Operator<T>> {
        self.check_dim(rho.matrix())?;
        rho.with_matrix(self.apply_matrix(rho.matrix()))
    }

    pub fn adjoint_apply(&self, obs: &Operator<T>) -> Result<Operator<T>> {
        self.check_dim(obs.matrix())?;
        obs.with_matrix(self.adjoint_apply_matrix(obs.matrix()))
    }

    /// Sparse `d² × d²` superoperator under column stacking.
    pub fn sparse_superoperator(&self) -> CsrMatrix<T> {
        let d = self.dim();
        let id = CsrMatrix::identity(d);
        let mi = Complex::new(T::zero(), -T::one());
        let mut m = id.kron(&self.h_eff).scale(mi);
        m = m.add(&self.h_eff.conj().kron(&id).scale(-mi));
        for ch in &self.channels {
            m = m.add(&ch.jump.conj().kron(&ch.jump).scale(re(ch.rate)));
        }
        m
    }

    /// Dense superoperator; refused above [`SUPEROPERATOR_DIM_CAP`].
    pub fn materialize(&self) -> Result<CMatrix<T>> {
        let d = self.dim();
        if d > SUPEROPERATOR_DIM_CAP {
            return Err(Error::DimensionCap { what: "superoperator Hilbert dimension", value: d, cap: SUPEROPERATOR_DIM_CAP });
        }
        Ok(self.sparse_superoperator().to_dense())
    }
}

/// `D[J]ρ = JρJ† − ½{J†J, ρ}`.
pub fn dissipator_apply<T: Real>(jump: &Operator<T>, rho: &Operator<T>) -> Result<Operator<T>> {
    if jump.space() != rho.space() {
        return Err(Error::DimensionMismatch("jump operator and state live on different spaces".into()));
    }
    let j = jump.matrix();
    let jd = j.adjoint();
    let r = rho.matrix();
    let jdj = jd.matmul(j);
    let mut out = j.matmul(r).matmul(&jd);
    out.axpy(re(T::lit(-0.5)), &CMatrix::anticommutator(&jdj, r));
    rho.with_matrix(out)
}

pub fn liouvillian_apply<T: Real>(l: &Liouvillian<T>, rho: &Operator<T>) -> Result<Operator<T>> {
    l.apply(rho)
}

pub fn liouvillian_adjoint_apply<T: Real>(l: &Liouvillian<T>, obs: &Operator<T>) -> Result<Operator<T>> {
    l.adjoint_apply(obs)
}

pub fn materialize_superoperator<T: Real>(l: &Liouvillian<T>) -> Result<CMatrix<T>> {
    l.materialize()
}
