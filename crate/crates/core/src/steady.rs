//! Steady states: analytic single-system fixed points, a numerical null-space
//! solver for composite generators, and the pure-damping recurrences.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{mk_destroy, mk_number, Operator, SpaceSpec, SubsystemSpec};
use crate::liouvillian::{LindbladTerm, Liouvillian};
use crate::linalg::{factor_component, hermitian_eigen, least_squares, rcm_components, trace_norm, BandLu, CMatrix};
use crate::models::Model;
use crate::ode::{integrate_until, OdeOptions};
use crate::scalar::{czero, re, Real};

/// Largest Hilbert dimension handled by the dense trace-augmented least squares.
pub const DENSE_STEADY_DIM: usize = 16;
/// Target for `‖ℒρ‖₁`.
pub const RESIDUAL_TARGET: f64 = 1e-9;
/// Eigenvalues below `-POSITIVITY_TOL` are a failure, not truncation noise.
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SteadyMethod {
    Analytic,
    NullSpace,
    LongTime,
}

#[derive(Clone, Debug)]
pub struct SteadyReport<T> {
    pub rho_st: Operator<T>,
    /// `‖ℒρ_st‖₁`.
    pub residual: T,
    pub method: SteadyMethod,
    /// Largest relative change of the tracked observables when every
    /// oscillator truncation grows by 5; `None` when not computed.
    pub truncation_shift: Option<T>,
    /// Total weight removed by clipping small negative eigenvalues.
    pub clipped_weight: T,
    pub min_eigenvalue: T,
}

/// Truncated thermal state `∝ Σ (n̄/(n̄+1))^n |n⟩⟨n|`, renormalized on `dim` levels.
pub fn thermal_state<T: Real>(nbar: T, dim: usize) -> Result<Operator<T>> {
    if !(nbar >= T::zero()) || !nbar.is_finite() {
        return Err(Error::InvalidParameter(format!("thermal occupation must be >= 0, got {nbar}")));
    }
    let space = SpaceSpec::single(SubsystemSpec::oscillator(dim)?);
    let ratio = nbar / (nbar + T::one());
    let mut p = Vec::with_capacity(dim);
    let mut w = T::one();
    for _ in 0..dim {
        p.push(w);
        w *= ratio;
    }
    let z: T = p.iter().copied().sum();
    for v in &mut p {
        *v /= z;
    }
    Operator::new(space, CMatrix::from_real_diag(&p))
}

/// `diag(1 - s, s)` in the basis `{|0⟩, |1⟩}`.
pub fn spin_steady<T: Real>(s: T) -> Result<Operator<T>> {
    if !(s >= T::zero() && s <= T::one()) {
        return Err(Error::InvalidParameter(format!("spin bias must lie in [0, 1], got {s}")));
    }
    Operator::new(SpaceSpec::single(SubsystemSpec::spin()), CMatrix::from_real_diag(&[T::one() - s, s]))
}

fn trace_indices(d: usize) -> impl Iterator<Item = usize> {
    (0..d).map(move |i| i * (d + 1))
}

/// Solves `ℒρ = 0, Tr ρ = 1`. Small systems use dense least squares on the
/// trace-augmented superoperator; larger ones use shifted inverse iteration on
/// banded factorizations of the coupled blocks that carry the diagonal, with
/// long-time integration as the fallback.
pub fn solve_steady<T: Real>(l: &Liouvillian<T>) -> Result<SteadyReport<T>> {
    let d = l.dim();
    let raw = if d <= DENSE_STEADY_DIM {
        dense_null_space(l)?
    } else {
        match sparse_null_space(l) {
            Ok(v) => v,
            Err(Error::Singular) => return solve_steady_long_time(l, None, None, T::lit(1e5)),
            Err(e) => return Err(e),
        }
    };
    finish(l, CMatrix::from_vec_columns(d, &raw), SteadyMethod::NullSpace)
}

fn dense_null_space<T: Real>(l: &Liouvillian<T>) -> Result<Vec<Complex<T>>> {
    let d = l.dim();
    let n = d * d;
    let m = l.materialize()?;
    let scale = m.max_abs().max(T::one());
    let mut a = CMatrix::zeros(n + 1, n);
    for i in 0..n {
        a.row_mut(i).copy_from_slice(m.row(i));
    }
    for k in trace_indices(d) {
        a[(n, k)] = re(scale);
    }
    let mut b = vec![czero(); n + 1];
    b[n] = re(scale);
    match least_squares(&a, &b, T::lit(1e-10)) {
        Ok((x, _)) => Ok(x),
        // a rank-deficient augmented system means more than one normalized fixed point
        Err(Error::Singular) => Err(Error::DegenerateNullSpace { separation: f64::NAN }),
        Err(e) => Err(e),
    }
}

fn sparse_null_space<T: Real>(l: &Liouvillian<T>) -> Result<Vec<Complex<T>>> {
    let d = l.dim();
    let s = l.sparse_superoperator();
    let n = s.rows();
    let is_diag = |g: usize| g % (d + 1) == 0;
    // the trace of a steady state is nonzero, so only blocks touching the diagonal matter
    let comps: Vec<Vec<usize>> = rcm_components(&s).into_iter().filter(|c| c.iter().any(|&g| is_diag(g))).collect();
    let shift = re(-T::lit(1e-8) * s.max_abs().max(T::one()));
    let mut scratch = vec![usize::MAX; n];
    let mut factors = Vec::with_capacity(comps.len());
    for c in &comps {
        factors.push(factor_component(&s, c, shift, &mut scratch)?);
    }
    let run = |start: Vec<Complex<T>>| -> Result<Vec<Complex<T>>> {
        inverse_iteration(d, &comps, &factors, start)
    };
    let mut x0 = vec![czero(); n];
    for k in trace_indices(d) {
        x0[k] = re(T::one() / T::from_usize_lossy(d));
    }
    let x = run(x0)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut y0 = vec![czero(); n];
    for k in trace_indices(d) {
        y0[k] = re(T::lit(rng.gen::<f64>() + 0.1));
    }
    let y = run(y0)?;
    let sep = x.iter().zip(&y).fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()));
    if sep > T::lit(1e-6) {
        return Err(Error::DegenerateNullSpace { separation: sep.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(x)
}

fn inverse_iteration<T: Real>(
    d: usize,
    comps: &[Vec<usize>],
    factors: &[BandLu<T>],
    mut x: Vec<Complex<T>>,
) -> Result<Vec<Complex<T>>> {
    for _ in 0..50 {
        let mut next = vec![czero(); x.len()];
        for (c, lu) in comps.iter().zip(factors) {
            let mut b: Vec<Complex<T>> = c.iter().map(|&g| x[g]).collect();
            lu.solve_in_place(&mut b);
            for (&g, v) in c.iter().zip(b) {
                next[g] = v;
            }
        }
        let tr: Complex<T> = trace_indices(d).map(|k| next[k]).fold(czero(), |a, b| a + b);
        if tr.norm() == T::zero() || !tr.norm().is_finite() {
            return Err(Error::Singular);
        }
        for v in &mut next {
            *v /= tr;
        }
        let change = next.iter().zip(&x).fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()));
        x = next;
        if change < T::lit(1e-13) {
            return Ok(x);
        }
    }
    Ok(x)
}

/// Integrates `dρ/dt = ℒρ` from `rho0` (maximally mixed by default) until
/// `‖ℒρ‖₁ ≤ 1e-9`. Gives up when the residual stops improving.
pub fn solve_steady_long_time<T: Real>(
    l: &Liouvillian<T>,
    rho0: Option<&Operator<T>>,
    check_every: Option<T>,
    t_max: T,
) -> Result<SteadyReport<T>> {
    let d = l.dim();
    let y0 = match rho0 {
        Some(r) => r.matrix().clone(),
        None => CMatrix::identity(d).scale_real(T::one() / T::from_usize_lossy(d)),
    };
    let every = check_every.unwrap_or_else(|| T::lit(10.0) / l.sparse_superoperator().max_abs().max(T::lit(1e-3)));
    let target = T::lit(RESIDUAL_TARGET);
    let mut best = T::infinity();
    let mut stalled = 0usize;
    let (rho, _) = integrate_until(
        |_, y: &CMatrix<T>| l.apply_matrix(y),
        y0,
        every,
        t_max,
        &OdeOptions::default(),
        |_, y| {
            let r = trace_norm(&l.apply_matrix(y))?;
            if r <= target {
                return Ok(true);
            }
            if r < best * T::lit(0.9) {
                best = r;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= 50 {
                    return Err(Error::NoConvergence(format!("steady residual stalled at {r}")));
                }
            }
            Ok(false)
        },
    )?;
    finish(l, rho, SteadyMethod::LongTime)
}

/// Hermitizes, checks positivity, clips eigenvalues in `[-1e-8, 0)` and renormalizes.
fn finish<T: Real>(l: &Liouvillian<T>, rho: CMatrix<T>, method: SteadyMethod) -> Result<SteadyReport<T>> {
    let mut rho = rho.hermitian_part();
    let tr = rho.trace().re;
    rho = rho.scale_real(T::one() / tr);
    let eig = hermitian_eigen(&rho)?;
    let min_eigenvalue = eig.values.iter().copied().fold(T::infinity(), T::min);
    if min_eigenvalue < -T::lit(POSITIVITY_TOL) {
        return Err(Error::NotPositive(min_eigenvalue.to_f64().unwrap_or(f64::NAN)));
    }
    let mut clipped_weight = T::zero();
    if min_eigenvalue < T::zero() {
        let kept: Vec<T> = eig
            .values
            .iter()
            .map(|&v| {
                if v < T::zero() {
                    clipped_weight -= v;
                    T::zero()
                } else {
                    v
                }
            })
            .collect();
        let v = &eig.vectors;
        let lam = CMatrix::from_real_diag(&kept);
        rho = v.matmul(&lam).matmul(&v.adjoint()).hermitian_part();
        let tr = rho.trace().re;
        rho = rho.scale_real(T::one() / tr);
    }
    let residual = trace_norm(&l.apply_matrix(&rho))?;
    Ok(SteadyReport {
        rho_st: Operator::new(l.space().clone(), rho)?,
        residual,
        method,
        truncation_shift: None,
        clipped_weight,
        min_eigenvalue,
    })
}

/// Steady state of a built model; with `trunc_check` the oscillator
/// truncations are enlarged by 5 and the shift of the occupations recorded.
pub fn model_steady<T: Real>(model: &Model<T>, trunc_check: bool) -> Result<SteadyReport<T>> {
    let mut report = solve_steady(&model.liouvillian)?;
    if trunc_check {
        report.truncation_shift = Some(crate::evolve::certify_truncation::<T>(&model.config, |_, r| occupations(r))?);
    }
    Ok(report)
}

/// `⟨n_A⟩, ⟨n_B⟩` of a two-factor state, with `σ₊σ₋` for spins.
pub fn occupations<T: Real>(rho: &Operator<T>) -> Result<Vec<T>> {
    let space = rho.space();
    let mut out = Vec::new();
    for (k, f) in space.factors().iter().enumerate() {
        let num = mk_number::<T>(*f)?;
        let reduced = crate::hilbert::partial_trace(rho, &[k])?;
        out.push(reduced.expectation(&num)?.re);
    }
    Ok(out)
}

/// `γ₁ D[a] + γ₂ D[a†]` on `dim` Fock levels.
pub fn pure_damping_generator<T: Real>(gamma1: T, gamma2: T, dim: usize) -> Result<Liouvillian<T>> {
    let f = SubsystemSpec::oscillator(dim)?;
    let a = mk_destroy::<T>(f)?;
    let space = SpaceSpec::single(f);
    Liouvillian::new(
        Operator::zeros(&space)?,
        vec![LindbladTerm::new(a.adjoint(), gamma2)?, LindbladTerm::new(a, gamma1)?],
    )
}

fn check_rates<T: Real>(gamma1: T, gamma2: T) -> Result<()> {
    if !(gamma1 > T::zero()) || !(gamma2 >= T::zero()) || !(gamma2 < gamma1) {
        return Err(Error::InvalidParameter(format!(
            "pure damping needs 0 <= gamma2 < gamma1, got gamma1 = {gamma1}, gamma2 = {gamma2}"
        )));
    }
    Ok(())
}

/// Populations `ρ_{0,0} … ρ_{n_max,n_max}` of the pure-damping steady state from
/// the three-term diagonal recurrence, checked against `ε^n (1 - ε)`.
pub fn pure_damping_recurrence<T: Real>(gamma1: T, gamma2: T, n_max: usize) -> Result<Vec<T>> {
    check_rates(gamma1, gamma2)?;
    let eps = gamma2 / gamma1;
    let mut rho = Vec::with_capacity(n_max + 1);
    rho.push(T::one() - eps);
    for n in 0..n_max {
        let nf = T::from_usize_lossy(n);
        let prev = if n == 0 { T::zero() } else { rho[n - 1] };
        let next = ((gamma1 * nf + gamma2 * (nf + T::one())) * rho[n] - gamma2 * nf * prev) / (gamma1 * (nf + T::one()));
        rho.push(next);
    }
    let mut closed = T::one() - eps;
    for (n, v) in rho.iter().enumerate() {
        if (*v - closed).abs() > T::lit(1e-12) {
            return Err(Error::NoConvergence(format!("diagonal recurrence departs from the geometric law at n = {n}")));
        }
        closed *= eps;
    }
    Ok(rho)
}

/// Off-diagonal recurrence of the pure-damping steady state along the `l`-th
/// diagonal, `r_{n+1} = (f + εg) r_n − εh r_{n−1}`, together with the exact
/// polynomial coefficients `r_n = Σ_i a_i^n ε^i`.
///
/// The coefficients are stored as `a_i^n = b_i^n / P_n` with rational `b` and
/// `P_n = Π_{j<n} √((j+1)(j+l+1))`.
#[derive(Clone, Debug)]
pub struct DampingRecurrence<T> {
    pub gamma1: T,
    pub gamma2: T,
    pub epsilon: T,
    pub l: usize,
    pub r_values: Vec<T>,
    pub scaled_coeffs: Vec<Vec<BigRational>>,
}

/// `(f, g, h)` at step `n` for diagonal `l`.
pub fn fgh<T: Real>(l: usize, n: usize) -> (T, T, T) {
    let (nf, lf) = (T::from_usize_lossy(n), T::from_usize_lossy(l));
    let half = T::lit(0.5);
    let dn = ((nf + T::one()) * (nf + lf + T::one())).sqrt();
    ((nf + lf * half) / dn, (nf + T::one() + lf * half) / dn, (nf * (nf + lf)).sqrt() / dn)
}

/// `r_{l,0..=n_max}^ε` by the floating-point recurrence.
pub fn off_diagonal_sequence<T: Real>(epsilon: T, l: usize, n_max: usize) -> Vec<T> {
    let mut r = Vec::with_capacity(n_max + 1);
    r.push(T::one());
    for n in 0..n_max {
        let (f, g, h) = fgh::<T>(l, n);
        let prev = if n == 0 { T::zero() } else { r[n - 1] };
        r.push((f + epsilon * g) * r[n] - epsilon * h * prev);
    }
    r
}

/// `b_i^n` for `0 <= i <= n <= n_max` from
/// `s_{n+1} = ((n + l/2) + ε(n + 1 + l/2)) s_n − ε n(n+l) s_{n−1}`.
pub fn scaled_coefficients(l: usize, n_max: usize) -> Vec<Vec<BigRational>> {
    let half_l = BigRational::new(BigInt::from(l), BigInt::from(2));
    let mut b: Vec<Vec<BigRational>> = vec![vec![BigRational::one()]];
    for n in 0..n_max {
        let nr = BigRational::from_integer(BigInt::from(n));
        let alpha = &nr + &half_l;
        let beta = &alpha + BigRational::one();
        let c = BigRational::from_integer(BigInt::from(n * (n + l)));
        let mut row = vec![BigRational::zero(); n + 2];
        for (i, v) in row.iter_mut().enumerate() {
            if i <= n {
                *v += &alpha * &b[n][i];
            }
            if i >= 1 {
                *v += &beta * &b[n][i - 1];
                if n >= 1 && i - 1 <= n - 1 {
                    *v -= &c * &b[n - 1][i - 1];
                }
            }
        }
        b.push(row);
    }
    b
}

/// `P_n² = n!(n+l)!/l!` as an exact integer.
fn p_squared(l: usize, n: usize) -> BigInt {
    (0..n).fold(BigInt::one(), |acc, j| acc * BigInt::from((j + 1) * (j + l + 1)))
}

/// Outcome of the exact positivity and monotonicity check on `a_i^{n,l}`.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientCheck {
    pub l: usize,
    pub n_max: usize,
    pub positive: bool,
    pub monotone: bool,
    /// First `(n, i)` where a condition failed.
    pub first_failure: Option<(usize, usize)>,
}

impl<T: Real> DampingRecurrence<T> {
    pub fn new(gamma1: T, gamma2: T, l: usize, n_max: usize) -> Result<Self> {
        check_rates(gamma1, gamma2)?;
        if l == 0 {
            return Err(Error::InvalidParameter("off-diagonal index l must be >= 1".into()));
        }
        let epsilon = gamma2 / gamma1;
        Ok(Self {
            gamma1,
            gamma2,
            epsilon,
            l,
            r_values: off_diagonal_sequence(epsilon, l, n_max),
            scaled_coeffs: scaled_coefficients(l, n_max),
        })
    }

    pub fn n_max(&self) -> usize {
        self.r_values.len() - 1
    }

    /// `a_i^n` in floating point.
    pub fn coeff(&self, n: usize, i: usize) -> T {
        let b = self.scaled_coeffs[n][i].to_f64().unwrap_or(f64::NAN);
        let p = p_squared(self.l, n).to_f64().unwrap_or(f64::INFINITY).sqrt();
        T::lit(b / p)
    }

    /// `Σ_i a_i^n ε^i`.
    pub fn expanded(&self, n: usize) -> T {
        (0..=n).rev().fold(T::zero(), |acc, i| acc * self.epsilon + self.coeff(n, i))
    }

    /// Checks `a_i^n > 0` and `a_i^{n−1} < a_{i+1}^n` exactly. With `a = b/P`
    /// and `P_n = P_{n−1}√(n(n+l))` the second condition is
    /// `(b_i^{n−1})² n(n+l) < (b_{i+1}^n)²` once both sides are positive.
    pub fn check_coefficients(&self) -> CoefficientCheck {
        let b = &self.scaled_coeffs;
        let n_max = b.len() - 1;
        let mut out = CoefficientCheck { l: self.l, n_max, positive: true, monotone: true, first_failure: None };
        for (n, row) in b.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                if !v.is_positive() {
                    out.positive = false;
                    out.first_failure.get_or_insert((n, i));
                }
            }
        }
        if !out.positive {
            out.monotone = false;
            return out;
        }
        for n in 1..=n_max {
            let w = BigRational::from_integer(BigInt::from(n * (n + self.l)));
            for i in 0..n {
                let lhs = &b[n - 1][i] * &b[n - 1][i] * &w;
                let rhs = &b[n][i + 1] * &b[n][i + 1];
                if lhs >= rhs {
                    out.monotone = false;
                    out.first_failure.get_or_insert((n, i));
                }
            }
        }
        out
    }
}

/// `r_{l,n}^0 = Γ(n + l/2)/Γ(l/2) · √(l!/(n!(n+l)!))` through log-gamma.
pub fn r0_closed_form(l: usize, n: usize) -> f64 {
    let (nf, lf) = (n as f64, l as f64);
    let ln = libm::lgamma(nf + lf / 2.0) - libm::lgamma(lf / 2.0)
        + 0.5 * (libm::lgamma(lf + 1.0) - libm::lgamma(nf + 1.0) - libm::lgamma(nf + lf + 1.0));
    ln.exp()
}

/// `1/(√(π e^{1/3}) (n+1))`.
pub fn stirling_lower_bound(n: usize) -> f64 {
    1.0 / ((std::f64::consts::PI * (1.0f64 / 3.0).exp()).sqrt() * (n as f64 + 1.0))
}

/// Numerical evidence that the `l`-th off-diagonal of the pure-damping steady
/// state must vanish: the recurrence forces `ρ_{n,n+l} ∝ r_{l,n}` and the partial
/// sums of `r` are unbounded, while a trace-class state keeps them below 1.
#[derive(Clone, Debug)]
pub struct OffDiagonalWitness<T> {
    pub r_sequence: Vec<T>,
    pub partial_sums: Vec<T>,
    pub lower_bound_curve: Vec<T>,
    /// Largest relative gap between the ε = 0 recurrence and the Gamma closed form.
    pub closed_form_error: T,
    /// Whether `r_{l,n}^0` exceeds the Stirling bound at every `n`.
    pub exceeds_lower_bound: bool,
    /// Largest gap between the floating recurrence and the exact expansion (n ≤ 25).
    pub expansion_error: T,
    pub coefficients: CoefficientCheck,
    /// Whether the partial sums pass 1.
    pub exceeds_trace_cap: bool,
}

/// Largest `n` for which coefficient arrays are built in rational arithmetic.
pub const EXACT_COEFF_MAX_N: usize = 25;

pub fn off_diagonal_witness<T: Real>(epsilon: T, l: usize, n_max: usize) -> Result<OffDiagonalWitness<T>> {
    if !(epsilon >= T::zero() && epsilon < T::one()) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in [0, 1), got {epsilon}")));
    }
    let rec = DampingRecurrence::new(T::one(), epsilon, l, n_max.min(EXACT_COEFF_MAX_N))?;
    let r_sequence = off_diagonal_sequence(epsilon, l, n_max);
    let mut partial_sums = Vec::with_capacity(r_sequence.len());
    let mut acc = T::zero();
    for v in &r_sequence {
        acc += *v;
        partial_sums.push(acc);
    }
    let r0 = off_diagonal_sequence(T::zero(), l, n_max);
    let mut closed_form_error = T::zero();
    let mut exceeds_lower_bound = true;
    let mut lower_bound_curve = Vec::with_capacity(r0.len());
    for (n, v) in r0.iter().enumerate() {
        let exact = T::lit(r0_closed_form(l, n));
        closed_form_error = closed_form_error.max(((*v - exact) / exact).abs());
        let bound = T::lit(stirling_lower_bound(n));
        exceeds_lower_bound &= *v > bound;
        lower_bound_curve.push(bound);
    }
    let expansion_error = (0..=rec.n_max()).fold(T::zero(), |m, n| m.max((rec.expanded(n) - r_sequence[n]).abs()));
    Ok(OffDiagonalWitness {
        exceeds_trace_cap: acc > T::one(),
        r_sequence,
        partial_sums,
        lower_bound_curve,
        closed_form_error,
        exceeds_lower_bound,
        expansion_error,
        coefficients: rec.check_coefficients(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_examples() {
        let r = thermal_state(0.0f64, 6).unwrap();
        assert_eq!(r.matrix()[(0, 0)].re, 1.0);
        assert_eq!(r.trace().re, 1.0);
        let r = thermal_state(1.0f64, 60).unwrap();
        for n in 0..10 {
            assert!((r.matrix()[(n, n)].re - 0.5f64.powi(n as i32 + 1)).abs() < 1e-15);
        }
        assert!(thermal_state(-0.1f64, 4).is_err());
    }

    #[test]
    fn spin_examples() {
        let r = spin_steady(0.8f64).unwrap();
        assert!((r.matrix()[(0, 0)].re - 0.2).abs() < 1e-15);
        assert!(spin_steady(1.2f64).is_err());
    }

    #[test]
    fn recurrence_matches_thermal() {
        let rho = pure_damping_recurrence(2.0f64, 1.0, 30).unwrap();
        for (n, v) in rho.iter().enumerate() {
            assert!((v - 0.5f64.powi(n as i32 + 1)).abs() < 1e-15);
        }
        assert!(pure_damping_recurrence(1.0f64, 1.0, 3).is_err());
        // n̄ = γ₂/(γ₁−γ₂)
        let th = thermal_state(0.3f64 / 0.7, 80).unwrap();
        let rho = pure_damping_recurrence(1.0f64, 0.3, 20).unwrap();
        for n in 0..=20 {
            assert!((th.matrix()[(n, n)].re - rho[n]).abs() < 1e-13);
        }
    }

    #[test]
    fn damping_steady_state_numeric() {
        let l = pure_damping_generator(1.0f64, 0.3, 30).unwrap();
        let r = solve_steady(&l).unwrap();
        assert_eq!(r.method, SteadyMethod::NullSpace);
        assert!(r.residual < 1e-9, "{}", r.residual);
        let m = r.rho_st.matrix();
        let z = 1.0 - 0.3f64.powi(30);
        for i in 0..30 {
            assert!((m[(i, i)].re - 0.3f64.powi(i as i32) * 0.7 / z).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_and_sparse_agree() {
        let l = pure_damping_generator(1.0f64, 0.5, 12).unwrap();
        let dense = solve_steady(&l).unwrap();
        let sparse = CMatrix::from_vec_columns(12, &sparse_null_space(&l).unwrap());
        assert!(dense.rho_st.matrix().max_diff(&sparse) < 1e-12);
    }

    #[test]
    fn degenerate_null_space_is_reported() {
        let space = SpaceSpec::single(SubsystemSpec::oscillator(3).unwrap());
        let l = Liouvillian::<f64>::zero(&space).unwrap();
        assert!(matches!(solve_steady(&l), Err(Error::DegenerateNullSpace { .. })));
        let space = SpaceSpec::single(SubsystemSpec::oscillator(20).unwrap());
        let l = Liouvillian::<f64>::zero(&space).unwrap();
        assert!(matches!(solve_steady(&l), Err(Error::DegenerateNullSpace { .. })));
    }

    #[test]
    fn long_time_agrees_with_null_space() {
        let l = pure_damping_generator(1.0f64, 0.4, 8).unwrap();
        let a = solve_steady(&l).unwrap();
        let b = solve_steady_long_time(&l, None, Some(2.0), 1e4).unwrap();
        assert_eq!(b.method, SteadyMethod::LongTime);
        assert!(b.residual <= 1e-9);
        assert!(a.rho_st.matrix().max_diff(b.rho_st.matrix()) < 1e-8);
    }

    // r_{1,n}^0 = C(2n, n) 4^{-n} / √(n+1)
    fn central_binomial_route(n: usize) -> f64 {
        let mut c = 1.0f64;
        for k in 1..=n {
            c *= (2 * k - 1) as f64 / (2 * k) as f64;
        }
        c / ((n + 1) as f64).sqrt()
    }

    #[test]
    fn r0_three_routes() {
        let r = off_diagonal_sequence(0.0f64, 1, 200);
        for n in [0, 1, 2, 7, 50, 200] {
            let a = central_binomial_route(n);
            assert!((r[n] - a).abs() < 1e-13 * a.max(1e-300), "n = {n}");
            assert!((r0_closed_form(1, n) - a).abs() < 1e-11 * a);
        }
        // r_{1,1}^0 = (1/2)/√2
        assert!((r[1] - 0.5 / 2f64.sqrt()).abs() < 1e-16);
    }

    #[test]
    fn small_coefficients_by_hand() {
        // s_1 = l/2 + ε(1 + l/2); l = 2 gives b = [1, 2]
        let b = scaled_coefficients(2, 2);
        assert_eq!(b[1], vec![BigRational::from_integer(1.into()), BigRational::from_integer(2.into())]);
        // s_2 = (2 + 3ε)(1 + 2ε) − 3ε = 2 + 4ε + 6ε²
        let expect: Vec<BigRational> = [2, 4, 6].iter().map(|&v| BigRational::from_integer(v.into())).collect();
        assert_eq!(b[2], expect);
    }

    #[test]
    fn witness_l1() {
        let w = off_diagonal_witness(0.0f64, 1, 10_000).unwrap();
        assert!(w.exceeds_lower_bound);
        assert!(w.closed_form_error < 1e-10, "{}", w.closed_form_error);
        assert!(w.partial_sums[10_000] > 5.0);
        assert!(w.exceeds_trace_cap);
        assert!(w.coefficients.positive && w.coefficients.monotone, "{:?}", w.coefficients);
        let w = off_diagonal_witness(0.6f64, 3, 25).unwrap();
        assert!(w.expansion_error < 1e-12, "{}", w.expansion_error);
        assert!(off_diagonal_witness(1.0f64, 1, 5).is_err());
    }
}
