//! Adaptive fourth-order Runge-Kutta with step-doubling error control.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::Real;

/// State vector of an ODE: supports `y += a·x` and a max-norm.
pub trait OdeState<T: Real>: Clone {
    fn axpy(&mut self, a: T, x: &Self);
    fn max_norm(&self) -> T;
    fn is_finite(&self) -> bool;
}

impl<T: Real> OdeState<T> for CMatrix<T> {
    fn axpy(&mut self, a: T, x: &Self) {
        for (y, v) in self.as_mut_slice().iter_mut().zip(x.as_slice()) {
            *y += *v * a;
        }
    }

    fn max_norm(&self) -> T {
        self.max_abs()
    }

    fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl<T: Real> OdeState<T> for Vec<Complex<T>> {
    fn axpy(&mut self, a: T, x: &Self) {
        for (y, v) in self.iter_mut().zip(x) {
            *y += *v * a;
        }
    }

    fn max_norm(&self) -> T {
        self.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl<T: Real> OdeState<T> for Vec<T> {
    fn axpy(&mut self, a: T, x: &Self) {
        for (y, v) in self.iter_mut().zip(x) {
            *y += *v * a;
        }
    }

    fn max_norm(&self) -> T {
        self.iter().fold(T::zero(), |m, z| m.max(z.abs()))
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|z| z.is_finite())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions<T> {
    /// Local error target per step, scaled by `max(1, ‖y‖_max)`.
    pub tol: T,
    pub initial_step: T,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-10), initial_step: T::lit(1e-3), max_steps: 5_000_000 }
    }
}

fn rk4_step<T: Real, S: OdeState<T>>(f: &mut impl FnMut(T, &S) -> S, t: T, y: &S, k1: &S, h: T) -> S {
    let half = T::lit(0.5);
    let mut y2 = y.clone();
    y2.axpy(h * half, k1);
    let k2 = f(t + h * half, &y2);
    let mut y3 = y.clone();
    y3.axpy(h * half, &k2);
    let k3 = f(t + h * half, &y3);
    let mut y4 = y.clone();
    y4.axpy(h, &k3);
    let k4 = f(t + h, &y4);
    let sixth = h / T::lit(6.0);
    let mut out = y.clone();
    out.axpy(sixth, k1);
    out.axpy(sixth * T::lit(2.0), &k2);
    out.axpy(sixth * T::lit(2.0), &k3);
    out.axpy(sixth, &k4);
    out
}

/// Integrates `dy/dt = f(t, y)` from `times[0]` through each later entry of
/// `times` (non-decreasing), calling `observe(t, y)` at every grid point
/// including the first. Returns the final state.
pub fn integrate<T: Real, S: OdeState<T>>(
    mut f: impl FnMut(T, &S) -> S,
    y0: S,
    times: &[T],
    opts: &OdeOptions<T>,
    mut observe: impl FnMut(T, &S) -> Result<()>,
) -> Result<S> {
    let Some(&t0) = times.first() else {
        return Ok(y0);
    };
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("time grid must be non-decreasing".into()));
    }
    let mut y = y0;
    let mut t = t0;
    observe(t, &y)?;
    let mut h = opts.initial_step;
    let mut steps = 0usize;
    let fifteen = T::lit(15.0);
    for &target in &times[1..] {
        while t < target {
            let span = target - t;
            let floor = T::epsilon() * T::lit(64.0) * t.abs().max(T::one());
            if span <= floor {
                t = target;
                break;
            }
            let hh = h.min(span);
            if hh < floor {
                return Err(Error::StepUnderflow { t: t.to_f64().unwrap_or(f64::NAN) });
            }
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::NoConvergence(format!("ODE exceeded {} steps", opts.max_steps)));
            }
            let k1 = f(t, &y);
            let full = rk4_step(&mut f, t, &y, &k1, hh);
            let half = T::lit(0.5) * hh;
            let mid = rk4_step(&mut f, t, &y, &k1, half);
            let kmid = f(t + half, &mid);
            let two = rk4_step(&mut f, t + half, &mid, &kmid, half);
            let mut diff = two.clone();
            diff.axpy(-T::one(), &full);
            let err = diff.max_norm() / fifteen;
            let scale = T::one().max(y.max_norm());
            let allowed = opts.tol * scale;
            if !two.is_finite() || !err.is_finite() {
                h = hh * T::lit(0.25);
                continue;
            }
            if err <= allowed {
                let mut next = two;
                next.axpy(T::one() / fifteen, &diff);
                y = next;
                t = if hh == span { target } else { t + hh };
                let grow = if err == T::zero() {
                    T::lit(4.0)
                } else {
                    (T::lit(0.9) * (allowed / err).powf(T::lit(0.2))).min(T::lit(4.0))
                };
                let proposed = hh * grow;
                // a step clipped to land on the grid says nothing about the natural step size
                h = if hh < h { h.max(proposed) } else { proposed };
            } else {
                let shrink = (T::lit(0.9) * (allowed / err).powf(T::lit(0.2))).max(T::lit(0.1));
                h = hh * shrink;
            }
        }
        observe(target, &y)?;
    }
    Ok(y)
}

/// Integrates until `converged(t, y)` holds, checking at multiples of `check_every`.
/// Returns the state and the time reached.
pub fn integrate_until<T: Real, S: OdeState<T>>(
    mut f: impl FnMut(T, &S) -> S,
    y0: S,
    check_every: T,
    t_max: T,
    opts: &OdeOptions<T>,
    mut converged: impl FnMut(T, &S) -> Result<bool>,
) -> Result<(S, T)> {
    let mut y = y0;
    let mut t = T::zero();
    while t < t_max {
        let next = (t + check_every).min(t_max);
        y = integrate(&mut f, y, &[t, next], opts, |_, _| Ok(()))?;
        t = next;
        if converged(t, &y)? {
            return Ok((y, t));
        }
    }
    Err(Error::NoConvergence(format!("no convergence before t = {}", t_max.to_f64().unwrap_or(f64::NAN))))
}
