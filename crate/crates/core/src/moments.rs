//! Closed moment equations of the spin-oscillator and optomechanical models,
//! their steady values, and the Gaussian-ansatz coefficient equations for the
//! spin coherence.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hilbert::{embed, mk_destroy, mk_number, mk_spin_ops, Operator};
use crate::models::{OptomechanicalConfig, SpinOscillatorConfig};
use crate::ode::{integrate, integrate_until, OdeOptions};
use crate::scalar::{re, Real};

/// `⟨b†b⟩, ⟨σ_z b⟩, ⟨b⟩, ⟨σ_z⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentStateSpinOsc<T> {
    pub b_dag_b: T,
    pub sz_b: Complex<T>,
    pub b: Complex<T>,
    pub sz: T,
}

/// `⟨b†b⟩, ⟨a†a b⟩, ⟨b⟩, ⟨(a†a)²⟩, ⟨a†a⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentStateOptomech<T> {
    pub b_dag_b: T,
    pub adaga_b: Complex<T>,
    pub b: Complex<T>,
    pub adaga_sq: T,
    pub adaga: T,
}

fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}

fn i_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

impl<T: Real> MomentStateSpinOsc<T> {
    fn pack(&self) -> Vec<Complex<T>> {
        vec![re(self.b_dag_b), self.sz_b, self.b, re(self.sz)]
    }

    fn unpack(v: &[Complex<T>]) -> Self {
        Self { b_dag_b: v[0].re, sz_b: v[1], b: v[2], sz: v[3].re }
    }

    /// Moments of a spin ⊗ oscillator density matrix.
    pub fn of_state(rho: &Operator<T>) -> Result<Self> {
        let space = rho.space();
        let f = space.factors();
        if f.len() != 2 {
            return Err(Error::DimensionMismatch("spin-oscillator moments need two factors".into()));
        }
        let sz = embed(&mk_spin_ops::<T>(f[0])?.z, 0, space)?;
        let b = embed(&mk_destroy::<T>(f[1])?, 1, space)?;
        let n = embed(&mk_number::<T>(f[1])?, 1, space)?;
        Ok(Self {
            b_dag_b: rho.expectation(&n)?.re,
            sz_b: rho.expectation(&sz.matmul(&b)?)?,
            b: rho.expectation(&b)?,
            sz: rho.expectation(&sz)?.re,
        })
    }
}

impl<T: Real> MomentStateOptomech<T> {
    fn pack(&self) -> Vec<Complex<T>> {
        vec![re(self.b_dag_b), self.adaga_b, self.b, re(self.adaga_sq), re(self.adaga)]
    }

    fn unpack(v: &[Complex<T>]) -> Self {
        Self { b_dag_b: v[0].re, adaga_b: v[1], b: v[2], adaga_sq: v[3].re, adaga: v[4].re }
    }

    /// Moments of an oscillator ⊗ oscillator density matrix.
    pub fn of_state(rho: &Operator<T>) -> Result<Self> {
        let space = rho.space();
        let f = space.factors();
        if f.len() != 2 {
            return Err(Error::DimensionMismatch("optomechanical moments need two factors".into()));
        }
        let na = embed(&mk_number::<T>(f[0])?, 0, space)?;
        let b = embed(&mk_destroy::<T>(f[1])?, 1, space)?;
        let nb = embed(&mk_number::<T>(f[1])?, 1, space)?;
        Ok(Self {
            b_dag_b: rho.expectation(&nb)?.re,
            adaga_b: rho.expectation(&na.matmul(&b)?)?,
            b: rho.expectation(&b)?,
            adaga_sq: rho.expectation(&na.matmul(&na)?)?.re,
            adaga: rho.expectation(&na)?.re,
        })
    }
}

fn spin_osc_rhs<T: Real>(cfg: &SpinOscillatorConfig, y: &[Complex<T>]) -> Vec<Complex<T>> {
    let (wb, ga, gb, om, s, nb) = (
        lit::<T>(cfg.omega_b),
        lit::<T>(cfg.gamma_a),
        lit::<T>(cfg.gamma_b),
        lit::<T>(cfg.coupling),
        lit::<T>(cfg.s),
        lit::<T>(cfg.nbar),
    );
    let i = i_unit::<T>();
    let half = lit::<T>(0.5);
    let bias = lit::<T>(2.0) * s - T::one();
    let m = MomentStateSpinOsc::unpack(y);
    let d_n = -lit::<T>(2.0) * om * m.sz_b.im - gb * m.b_dag_b + gb * nb;
    let d_szb = (-i * wb - re(gb * half + ga)) * m.sz_b - i * om + m.b * (ga * bias);
    let d_b = (-i * wb - re(gb * half)) * m.b - i * (om * m.sz);
    let d_sz = -ga * m.sz + ga * bias;
    vec![re(d_n), d_szb, d_b, re(d_sz)]
}

fn optomech_rhs<T: Real>(cfg: &OptomechanicalConfig, y: &[Complex<T>]) -> Vec<Complex<T>> {
    let (nu, kappa, gamma, nbar, mbar, g) = (
        lit::<T>(cfg.nu),
        lit::<T>(cfg.kappa),
        lit::<T>(cfg.gamma),
        lit::<T>(cfg.nbar),
        lit::<T>(cfg.mbar),
        lit::<T>(cfg.g),
    );
    let i = i_unit::<T>();
    let two = lit::<T>(2.0);
    let m = MomentStateOptomech::unpack(y);
    let d_nb = -two * g * m.adaga_b.im - gamma * m.b_dag_b + gamma * mbar;
    let d_nab = m.b * (kappa * nbar) - Complex::new(gamma + two * kappa, two * nu) * m.adaga_b * lit::<T>(0.5)
        - i * (g * m.adaga_sq);
    let d_b = -i * nu * m.b - i * (g * m.adaga) - m.b * (gamma / two);
    let d_nsq = kappa * nbar - two * kappa * m.adaga_sq + kappa * (lit::<T>(4.0) * nbar + T::one()) * m.adaga;
    let d_na = -kappa * m.adaga + kappa * nbar;
    vec![re(d_nb), d_nab, d_b, re(d_nsq), re(d_na)]
}

/// Integrates the four spin-oscillator moment equations over `t_grid`.
pub fn integrate_spin_osc_moments<T: Real>(
    cfg: &SpinOscillatorConfig,
    m0: &MomentStateSpinOsc<T>,
    t_grid: &[T],
) -> Result<Vec<MomentStateSpinOsc<T>>> {
    let mut out = Vec::with_capacity(t_grid.len());
    integrate(|_, y: &Vec<Complex<T>>| spin_osc_rhs(cfg, y), m0.pack(), t_grid, &OdeOptions::default(), |_, y| {
        out.push(MomentStateSpinOsc::unpack(y));
        Ok(())
    })?;
    Ok(out)
}

/// Integrates the five optomechanical moment equations over `t_grid`.
pub fn integrate_optomech_moments<T: Real>(
    cfg: &OptomechanicalConfig,
    m0: &MomentStateOptomech<T>,
    t_grid: &[T],
) -> Result<Vec<MomentStateOptomech<T>>> {
    let mut out = Vec::with_capacity(t_grid.len());
    integrate(|_, y: &Vec<Complex<T>>| optomech_rhs(cfg, y), m0.pack(), t_grid, &OdeOptions::default(), |_, y| {
        out.push(MomentStateOptomech::unpack(y));
        Ok(())
    })?;
    Ok(out)
}

/// Steady `⟨b†b⟩` of the spin-oscillator model in closed form.
pub fn steady_spin_osc_excitation<T: Real>(cfg: &SpinOscillatorConfig) -> Result<T> {
    if !(cfg.gamma_b > 0.0) {
        return Err(Error::InvalidParameter("steady excitation needs gamma_b > 0".into()));
    }
    let (wb, ga, gb, om, s, nb) = (
        lit::<T>(cfg.omega_b),
        lit::<T>(cfg.gamma_a),
        lit::<T>(cfg.gamma_b),
        lit::<T>(cfg.coupling),
        lit::<T>(cfg.s),
        lit::<T>(cfg.nbar),
    );
    let (two, four) = (lit::<T>(2.0), lit::<T>(4.0));
    let bias = two * s - T::one();
    let drive = four * om * om;
    let slow = two * ga + gb;
    Ok(nb + bias * bias * drive / (gb * gb + four * wb * wb)
        + four * (T::one() - s) * s * (slow / gb) * drive / (slow * slow + four * wb * wb))
}

/// Steady `(⟨a†a⟩, ⟨b†b⟩)` of the optomechanical model in closed form.
pub fn steady_optomech<T: Real>(cfg: &OptomechanicalConfig) -> Result<(T, T)> {
    if !(cfg.kappa > 0.0 && cfg.gamma > 0.0) {
        return Err(Error::InvalidParameter("steady moments need kappa > 0 and gamma > 0".into()));
    }
    let (nu, kappa, gamma, nbar, mbar, g) = (
        lit::<T>(cfg.nu),
        lit::<T>(cfg.kappa),
        lit::<T>(cfg.gamma),
        lit::<T>(cfg.nbar),
        lit::<T>(cfg.mbar),
        lit::<T>(cfg.g),
    );
    let (two, four) = (lit::<T>(2.0), lit::<T>(4.0));
    let slow = two * kappa + gamma;
    let phonons = mbar
        + four * nbar * nbar * g * g / (gamma * gamma + four * nu * nu)
        + four * nbar * (nbar + T::one()) * slow * g * g / (gamma * (slow * slow + four * nu * nu));
    Ok((nbar, phonons))
}

/// Integrates until the relative change over one relaxation time `1/min(rates)`
/// drops below `1e-12`.
fn relax<T: Real>(
    rhs: impl Fn(&[Complex<T>]) -> Vec<Complex<T>>,
    y0: Vec<Complex<T>>,
    slowest_rate: f64,
) -> Result<Vec<Complex<T>>> {
    let tau = T::lit(1.0 / slowest_rate);
    let mut prev = y0.clone();
    let (y, _) = integrate_until(
        |_, y: &Vec<Complex<T>>| rhs(y),
        y0,
        tau,
        tau * T::lit(1e4),
        &OdeOptions::default(),
        |_, y| {
            let scale = y.iter().fold(T::zero(), |m, z| m.max(z.norm())).max(T::lit(1e-300));
            let change = y.iter().zip(&prev).fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()));
            prev = y.clone();
            Ok(change / scale < T::lit(1e-12))
        },
    )?;
    Ok(y)
}

/// `t → ∞` limit of the spin-oscillator moment equations.
pub fn relax_spin_osc_moments<T: Real>(cfg: &SpinOscillatorConfig, m0: &MomentStateSpinOsc<T>) -> Result<MomentStateSpinOsc<T>> {
    let slowest = cfg.gamma_a.min(cfg.gamma_b / 2.0);
    Ok(MomentStateSpinOsc::unpack(&relax(|y| spin_osc_rhs(cfg, y), m0.pack(), slowest)?))
}

/// `t → ∞` limit of the optomechanical moment equations.
pub fn relax_optomech_moments<T: Real>(cfg: &OptomechanicalConfig, m0: &MomentStateOptomech<T>) -> Result<MomentStateOptomech<T>> {
    let slowest = cfg.kappa.min(cfg.gamma / 2.0);
    Ok(MomentStateOptomech::unpack(&relax(|y| optomech_rhs(cfg, y), m0.pack(), slowest)?))
}

/// Coefficients of `P_{0,1} = exp(−a + bα + cα* − d|α|²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianAnsatz<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub c: Complex<T>,
    pub d: Complex<T>,
}

impl<T: Real> GaussianAnsatz<T> {
    pub fn zero() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self { a: z, b: z, c: z, d: z }
    }

    fn pack(&self) -> Vec<Complex<T>> {
        vec![self.a, self.b, self.c, self.d]
    }

    fn unpack(v: &[Complex<T>]) -> Self {
        Self { a: v[0], b: v[1], c: v[2], d: v[3] }
    }

    pub fn is_finite(&self) -> bool {
        self.pack().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Right-hand side of the `ȧ, ḃ, ċ, ḋ` system.
pub fn gaussian_rhs<T: Real>(cfg: &SpinOscillatorConfig, s: &GaussianAnsatz<T>) -> GaussianAnsatz<T> {
    let (wa, wb, ga, gb, om, nb) = (
        lit::<T>(cfg.omega_a),
        lit::<T>(cfg.omega_b),
        lit::<T>(cfg.gamma_a),
        lit::<T>(cfg.gamma_b),
        lit::<T>(cfg.coupling),
        lit::<T>(cfg.nbar),
    );
    let i = i_unit::<T>();
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);
    let GaussianAnsatz { b, c, d, .. } = *s;
    let drive = i * om * (d + re(two));
    GaussianAnsatz {
        a: -i * (two * wa) - i * om * (c + b) - (b * c - d) * (gb * nb) + re(ga * half - gb),
        b: i * wb * b - drive + b * (gb * half) - b * d * (gb * nb),
        c: -i * wb * c - drive + c * (gb * half) - c * d * (gb * nb),
        d: d * gb - d * d * (gb * nb),
    }
}

/// Fixed points `(b*, c*, d*)` of the `b, c, d` equations: `d* ∈ {0, 1/n̄}`.
pub fn gaussian_fixed_points<T: Real>(cfg: &SpinOscillatorConfig) -> Vec<(Complex<T>, Complex<T>, Complex<T>)> {
    let (wb, gb, om, nb) = (lit::<T>(cfg.omega_b), lit::<T>(cfg.gamma_b), lit::<T>(cfg.coupling), lit::<T>(cfg.nbar));
    let i = i_unit::<T>();
    let mut ds = vec![T::zero()];
    if nb > T::zero() {
        ds.push(T::one() / nb);
    }
    ds.into_iter()
        .map(|d| {
            let drive = i * om * (d + lit::<T>(2.0));
            let damp = gb * lit::<T>(0.5) - gb * nb * d;
            let b = drive / Complex::new(damp, wb);
            let c = drive / Complex::new(damp, -wb);
            (b, c, re(d))
        })
        .collect()
}

/// `Re ȧ` evaluated at a fixed point: the asymptotic growth rate of `Re a(t)`.
pub fn gaussian_slope_at<T: Real>(cfg: &SpinOscillatorConfig, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> T {
    gaussian_rhs(cfg, &GaussianAnsatz { a: re(T::zero()), b, c, d }).a.re
}

/// Integrated ansatz with its long-time diagnostics.
#[derive(Clone, Debug)]
pub struct GaussianTrajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<GaussianAnsatz<T>>,
    /// Slope of `Re a(t)` fitted over the second half of the recorded grid.
    pub slope: Option<T>,
    /// `(b, c, d)` at the last time when their rates of change have died out.
    pub fixed_point: Option<(Complex<T>, Complex<T>, Complex<T>)>,
    /// Set when `d` left every bounded region before the end of the grid.
    pub diverged: bool,
}

/// Bound on `|d|` beyond which the ansatz is reported as divergent.
pub const ANSATZ_DIVERGENCE: f64 = 1e8;

pub fn integrate_gaussian_ansatz<T: Real>(
    cfg: &SpinOscillatorConfig,
    init: &GaussianAnsatz<T>,
    t_grid: &[T],
) -> Result<GaussianTrajectory<T>> {
    if !init.is_finite() {
        return Err(Error::InvalidParameter("non-finite initial ansatz".into()));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut diverged = false;
    let mut y = init.pack();
    for (k, &t) in t_grid.iter().enumerate() {
        if k > 0 {
            let span = [t_grid[k - 1], t];
            match integrate(
                |_, v: &Vec<Complex<T>>| gaussian_rhs(cfg, &GaussianAnsatz::unpack(v)).pack(),
                y.clone(),
                &span,
                &OdeOptions::default(),
                |_, _| Ok(()),
            ) {
                Ok(next) => y = next,
                Err(Error::StepUnderflow { .. }) | Err(Error::NoConvergence(_)) => {
                    diverged = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let s = GaussianAnsatz::unpack(&y);
        if !s.is_finite() || s.d.norm() > T::lit(ANSATZ_DIVERGENCE) {
            diverged = true;
            break;
        }
        times.push(t);
        states.push(s);
    }
    let half = times.len() / 2;
    let slope = if !diverged && times.len() >= 4 {
        let xs = &times[half..];
        let ys: Vec<T> = states[half..].iter().map(|s| s.a.re).collect();
        let n = T::from_usize_lossy(xs.len());
        let mx = xs.iter().copied().sum::<T>() / n;
        let my = ys.iter().copied().sum::<T>() / n;
        let sxy: T = xs.iter().zip(&ys).map(|(x, y)| (*x - mx) * (*y - my)).sum();
        let sxx: T = xs.iter().map(|x| (*x - mx) * (*x - mx)).sum();
        Some(sxy / sxx)
    } else {
        None
    };
    let fixed_point = states.last().filter(|_| !diverged).and_then(|s| {
        let r = gaussian_rhs(cfg, s);
        let scale = s.b.norm().max(s.c.norm()).max(s.d.norm()).max(T::one());
        let still = r.b.norm().max(r.c.norm()).max(r.d.norm()) < T::lit(1e-8) * scale;
        still.then_some((s.b, s.c, s.d))
    });
    Ok(GaussianTrajectory { times, states, slope, fixed_point, diverged })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(s: f64, nbar: f64, coupling: f64) -> SpinOscillatorConfig {
        SpinOscillatorConfig {
            omega_a: 1.0,
            omega_b: 1.0,
            gamma_a: 1.0,
            gamma_b: 1.0,
            s,
            nbar,
            coupling,
            n_trunc: 10,
        }
    }

    #[test]
    fn excitation_examples() {
        let v: f64 = steady_spin_osc_excitation(&cfg(0.5, 0.0, 1.0)).unwrap();
        assert!((v - 12.0 / 13.0).abs() < 1e-15);
        let c = SpinOscillatorConfig { omega_b: 2.0, gamma_b: 0.5, ..cfg(0.0, 0.0, 0.7) };
        let v: f64 = steady_spin_osc_excitation(&c).unwrap();
        assert_eq!(v, 4.0 * 0.7 * 0.7 / (0.5 * 0.5 + 4.0 * 2.0 * 2.0));
        let v: f64 = steady_spin_osc_excitation(&cfg(0.3, 0.4, 0.0)).unwrap();
        assert_eq!(v, 0.4);
        assert!(steady_spin_osc_excitation::<f64>(&SpinOscillatorConfig { gamma_b: 0.0, ..cfg(0.3, 0.4, 1.0) }).is_err());
    }

    #[test]
    fn unbiased_spin_stays_unpolarized() {
        let c = cfg(0.5, 0.3, 0.0);
        let m0 = MomentStateSpinOsc { b_dag_b: 0.0, sz_b: re(0.0), b: re(0.0), sz: 0.0 };
        let traj = integrate_spin_osc_moments(&c, &m0, &[0.0, 1.0, 3.0]).unwrap();
        assert!(traj.iter().all(|m| m.sz == 0.0));
    }

    #[test]
    fn moments_relax_to_closed_forms() {
        for (s, nbar, om) in [(0.0, 0.0, 0.5), (0.9, 0.5, 2.0), (0.5, 0.2, 1.0)] {
            let c = cfg(s, nbar, om);
            let m0 = MomentStateSpinOsc { b_dag_b: 1.0, sz_b: re(0.1), b: re(0.3), sz: -1.0 };
            let m = relax_spin_osc_moments(&c, &m0).unwrap();
            assert!((m.sz - (2.0 * s - 1.0)).abs() < 1e-10);
            let want: f64 = steady_spin_osc_excitation(&c).unwrap();
            assert!((m.b_dag_b - want).abs() < 1e-8, "{} vs {want}", m.b_dag_b);
        }
    }

    #[test]
    fn optomech_closed_form_example() {
        let c = OptomechanicalConfig {
            omega: 10.0,
            nu: 1.0,
            kappa: 1.0,
            gamma: 1.0,
            nbar: 1.0,
            mbar: 0.0,
            g: 1.0,
            n_trunc_a: 4,
            n_trunc_b: 4,
        };
        let (na, nb): (f64, f64) = steady_optomech(&c).unwrap();
        assert_eq!(na, 1.0);
        assert!((nb - (0.8 + 24.0 / 13.0)).abs() < 1e-14);
        let m0 = MomentStateOptomech { b_dag_b: 0.0, adaga_b: re(0.0), b: re(0.0), adaga_sq: 0.0, adaga: 0.0 };
        let m: MomentStateOptomech<f64> = relax_optomech_moments(&c, &m0).unwrap();
        assert!((m.adaga - 1.0).abs() < 1e-10);
        assert!((m.adaga_sq - 3.0).abs() < 1e-9);
        assert!((m.b_dag_b - nb).abs() < 1e-8);
        let cold = OptomechanicalConfig { nbar: 0.0, mbar: 0.3, ..c };
        assert_eq!(steady_optomech::<f64>(&cold).unwrap().1, 0.3);
    }

    #[test]
    fn decoupled_ansatz_is_linear() {
        let c = SpinOscillatorConfig { omega_a: 0.0, ..cfg(0.5, 0.0, 0.0) };
        let grid: Vec<f64> = (0..=10).map(|k| k as f64).collect();
        let tr = integrate_gaussian_ansatz(&c, &GaussianAnsatz::zero(), &grid).unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            assert!((s.a.re - (0.5 - 1.0) * t).abs() < 1e-10);
            assert_eq!(s.d, re(0.0));
        }
    }

    #[test]
    fn d_fixed_points_are_roots() {
        let c = cfg(0.5, 0.25, 1.0);
        let fps = gaussian_fixed_points::<f64>(&c);
        // roots of γd − γn̄d² by the quadratic formula
        let (qa, qb) = (-c.gamma_b * c.nbar, c.gamma_b);
        let roots = [0.0, -qb / qa];
        for (fp, r) in fps.iter().zip(roots) {
            assert!((fp.2.re - r).abs() < 1e-14);
            let rhs = gaussian_rhs(&c, &GaussianAnsatz { a: re(0.0), b: fp.0, c: fp.1, d: fp.2 });
            assert!(rhs.b.norm() < 1e-13 && rhs.c.norm() < 1e-13 && rhs.d.norm() < 1e-13);
        }
    }

    #[test]
    fn warm_uncoupled_slope_is_half_gamma_a() {
        let c = cfg(0.5, 0.5, 0.0);
        let init = GaussianAnsatz { d: re(0.5), ..GaussianAnsatz::zero() };
        let grid: Vec<f64> = (0..=120).map(|k| k as f64 * 0.5).collect();
        let tr = integrate_gaussian_ansatz(&c, &init, &grid).unwrap();
        assert!(!tr.diverged);
        assert!((tr.slope.unwrap() - 0.5).abs() < 1e-8);
        assert!((tr.fixed_point.unwrap().2.re - 2.0).abs() < 1e-8);
    }

    #[test]
    fn negative_d_blows_up() {
        let c = cfg(0.5, 0.5, 0.0);
        let init = GaussianAnsatz { d: re(-1.0), ..GaussianAnsatz::zero() };
        let grid: Vec<f64> = (0..=20).map(|k| k as f64).collect();
        let tr = integrate_gaussian_ansatz(&c, &init, &grid).unwrap();
        assert!(tr.diverged);
    }
}
