//! Density-matrix time evolution, decay-bound checks, Trotter splitting and
//! truncation certification.

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hilbert::{embed, mk_number, mk_spin_ops, partial_trace, Operator, SpaceSpec, SubsystemKind};
use crate::liouvillian::Liouvillian;
use crate::linalg::{expm, CMatrix};
use crate::models::{build_model, sector_decay_rate, Model, ModelConfig};
use crate::ode::{integrate, OdeOptions};
use crate::scalar::{re, Real};
use crate::sectors::{q_norm, ExcitationStructure};
use crate::steady::solve_steady;

pub use crate::linalg::trace_norm;

/// Trace drift along a trajectory that aborts the run.
pub const TRACE_DRIFT_ABORT: f64 = 1e-6;
/// Relative slack on `‖Q_l ρ(t)‖₁ ≤ e^{η_l t}‖Q_l ρ(0)‖₁`.
pub const TOL_BOUND: f64 = 1e-6;
/// Truncation shift below which a run counts as certified.
pub const TRUNCATION_CERTIFIED: f64 = 1e-6;
/// Denominator floor for the relative truncation shift.
pub const SHIFT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct TrajectoryRecord<T> {
    /// Name of the rate that scales `times`.
    pub time_unit: String,
    pub reference_rate: T,
    /// Times multiplied by the reference rate.
    pub times: Vec<T>,
    pub observables: Vec<(String, Vec<Complex<T>>)>,
    /// `‖Tr_B ρ(t) − ρ^A_st‖₁`, empty when no target was given.
    pub trace_norm_distance_to_a_steady: Vec<T>,
    pub q_norms: BTreeMap<usize, Vec<T>>,
    pub max_trace_drift: T,
    pub final_state: Operator<T>,
}

impl<T: Real> TrajectoryRecord<T> {
    pub fn observable(&self, name: &str) -> Option<&[Complex<T>]> {
        self.observables.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

/// What to record while evolving.
#[derive(Clone, Debug)]
pub struct Probes<T> {
    pub observables: Vec<(String, Operator<T>)>,
    /// Steady state of factor 0, compared against the reduced state.
    pub a_target: Option<Operator<T>>,
    pub excitation: Option<ExcitationStructure<T>>,
    pub q_levels: Vec<usize>,
    pub time_unit: String,
    pub reference_rate: T,
    pub ode: OdeOptions<T>,
}

impl<T: Real> Probes<T> {
    pub fn none() -> Self {
        Self {
            observables: Vec::new(),
            a_target: None,
            excitation: None,
            q_levels: Vec::new(),
            time_unit: "1".into(),
            reference_rate: T::one(),
            ode: OdeOptions::default(),
        }
    }
}

/// Integrates `dρ/dt = ℒρ` over `t_grid` (physical time).
pub fn evolve<T: Real>(l: &Liouvillian<T>, rho0: &Operator<T>, t_grid: &[T], probes: &Probes<T>) -> Result<TrajectoryRecord<T>> {
    if rho0.space() != l.space() {
        return Err(Error::DimensionMismatch("initial state and generator on different spaces".into()));
    }
    let tr0 = rho0.trace();
    let mut record = TrajectoryRecord {
        time_unit: probes.time_unit.clone(),
        reference_rate: probes.reference_rate,
        times: Vec::with_capacity(t_grid.len()),
        observables: probes.observables.iter().map(|(n, _)| (n.clone(), Vec::with_capacity(t_grid.len()))).collect(),
        trace_norm_distance_to_a_steady: Vec::new(),
        q_norms: probes.q_levels.iter().map(|&q| (q, Vec::new())).collect(),
        max_trace_drift: T::zero(),
        final_state: rho0.clone(),
    };
    let space = l.space().clone();
    let last = integrate(
        |_, y: &CMatrix<T>| l.apply_matrix(y),
        rho0.matrix().clone(),
        t_grid,
        &probes.ode,
        |t, y| {
            let drift = (y.trace() - tr0).norm();
            if drift > T::lit(TRACE_DRIFT_ABORT) {
                return Err(Error::TraceDrift {
                    t: t.to_f64().unwrap_or(f64::NAN),
                    drift: drift.to_f64().unwrap_or(f64::NAN),
                });
            }
            record.max_trace_drift = record.max_trace_drift.max(drift);
            record.times.push(t * probes.reference_rate);
            let rho = Operator::new(space.clone(), y.clone())?;
            for ((_, op), (_, series)) in probes.observables.iter().zip(record.observables.iter_mut()) {
                series.push(rho.expectation(op)?);
            }
            if let Some(target) = &probes.a_target {
                let reduced = partial_trace(&rho, &[0])?;
                record.trace_norm_distance_to_a_steady.push(reduced.sub(target)?.trace_norm()?);
            }
            if let Some(es) = &probes.excitation {
                for (q, series) in record.q_norms.iter_mut() {
                    series.push(q_norm(es, y, *q)?);
                }
            }
            Ok(())
        },
    )?;
    record.final_state = Operator::new(space, last)?;
    Ok(record)
}

/// Occupation of every factor (`a†a` or `σ₊σ₋`) and `σ_z` of every spin,
/// named `n_A`, `n_B`, `sz_A`, `sz_B`.
pub fn default_observables<T: Real>(space: &SpaceSpec) -> Result<Vec<(String, Operator<T>)>> {
    let mut out = Vec::new();
    for (k, f) in space.factors().iter().enumerate() {
        let tag = if k == 0 { "A" } else if k == 1 { "B" } else { "X" };
        out.push((format!("n_{tag}"), embed(&mk_number::<T>(*f)?, k, space)?));
        if f.kind() == SubsystemKind::Spin {
            out.push((format!("sz_{tag}"), embed(&mk_spin_ops::<T>(*f)?.z, k, space)?));
        }
    }
    Ok(out)
}

/// Sectors `1..=max` of system A that stay clear of the truncation edge.
pub fn bulk_sectors<T: Real>(es: &ExcitationStructure<T>) -> Vec<usize> {
    (1..=es.max_sector()).filter(|&l| !es.is_edge_sector(l)).collect()
}

/// Probes for a built model: default observables, distance to `ρ^A_st`, and
/// the bulk `Q_l` norms; times scaled by the model's reference rate.
pub fn model_probes<T: Real>(model: &Model<T>) -> Result<Probes<T>> {
    Ok(Probes {
        observables: default_observables(model.space())?,
        a_target: Some(model.a_steady.clone()),
        q_levels: bulk_sectors(&model.excitation),
        excitation: Some(model.excitation.clone()),
        time_unit: model.config.reference_rate_name().into(),
        reference_rate: model.reference_rate(),
        ode: OdeOptions::default(),
    })
}

/// Evolves a model over `scaled_grid` given in units of its reference rate.
pub fn evolve_model<T: Real>(model: &Model<T>, rho0: &Operator<T>, scaled_grid: &[T]) -> Result<TrajectoryRecord<T>> {
    let rate = model.reference_rate();
    let grid: Vec<T> = scaled_grid.iter().map(|&s| s / rate).collect();
    evolve(&model.liouvillian, rho0, &grid, &model_probes(model)?)
}

#[derive(Clone, Debug)]
pub struct DecayRow<T> {
    pub l: usize,
    pub eta: T,
    /// Physical times.
    pub times: Vec<T>,
    pub norms: Vec<T>,
    pub bounds: Vec<T>,
    /// Largest `norm / bound − 1` over the grid (points with zero bound skipped).
    pub max_excess: T,
    /// Least-squares slope of `ln ‖Q_l ρ(t)‖₁` against `t`.
    pub fitted_rate: Option<T>,
    pub holds: bool,
}

/// Evolves `rho0` and compares `‖Q_l ρ(t)‖₁` with `e^{η_l t}‖Q_l ρ(0)‖₁` for every bulk sector.
pub fn check_decay_bound<T: Real>(model: &Model<T>, rho0: &Operator<T>, t_grid: &[T]) -> Result<Vec<DecayRow<T>>> {
    let es = &model.excitation;
    let levels = bulk_sectors(es);
    let probes = Probes { excitation: Some(es.clone()), q_levels: levels.clone(), ..Probes::none() };
    let rec = evolve(&model.liouvillian, rho0, t_grid, &probes)?;
    let mut rows = Vec::new();
    for l in levels {
        let eta = T::lit(sector_decay_rate(&model.config, l as i64)?);
        let norms = rec.q_norms[&l].clone();
        let n0 = norms[0];
        let bounds: Vec<T> = t_grid.iter().map(|&t| (eta * (t - t_grid[0])).exp() * n0).collect();
        let mut max_excess = -T::one();
        let mut holds = true;
        for (n, b) in norms.iter().zip(&bounds) {
            if *n > *b * T::lit(1.0 + TOL_BOUND) {
                holds = false;
            }
            if *b > T::zero() {
                max_excess = max_excess.max(*n / *b - T::one());
            }
        }
        let fitted_rate = fit_log_slope(t_grid, &norms);
        rows.push(DecayRow { l, eta, times: t_grid.to_vec(), norms, bounds, max_excess, fitted_rate, holds });
    }
    Ok(rows)
}

fn fit_log_slope<T: Real>(t: &[T], y: &[T]) -> Option<T> {
    let pts: Vec<(T, T)> = t.iter().zip(y).filter(|(_, v)| **v > T::lit(1e-12)).map(|(a, v)| (*a, v.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = T::from_usize_lossy(pts.len());
    let mt = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxy: T = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: T = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    (sxx > T::zero()).then(|| sxy / sxx)
}

/// Largest Hilbert dimension for the dense Trotter comparison.
pub const TROTTER_DIM_CAP: usize = 32;

#[derive(Clone, Debug)]
pub struct TrotterReport<T> {
    pub steps: Vec<usize>,
    /// Max-norm error of the split product against the exact exponential.
    pub errors: Vec<T>,
    /// `error(N_{k+1}) / error(N_k)`.
    pub ratios: Vec<T>,
    /// `−d ln error / d ln N` over the last two points.
    pub fitted_order: Option<T>,
}

/// Compares `(e^{ℒ̃_l^A t/N} e^{(ℒ_l − ℒ̃_l^A)t/N})^N` with `e^{ℒ_l t}` on the `±l` sector.
pub fn trotter_compare<T: Real>(model: &Model<T>, l: usize, t: T, steps: &[usize]) -> Result<TrotterReport<T>> {
    let d = model.space().total_dim();
    if d > TROTTER_DIM_CAP {
        return Err(Error::DimensionCap { what: "Trotter comparison Hilbert dimension", value: d, cap: TROTTER_DIM_CAP });
    }
    if steps.is_empty() || steps.windows(2).any(|w| w[1] <= w[0]) || steps[0] == 0 {
        return Err(Error::InvalidParameter("Trotter step counts must be positive and increasing".into()));
    }
    let es = &model.excitation;
    let full = es.restrict(&model.liouvillian, l as i64, true)?;
    let split = es.restrict(&model.tilde_a, l as i64, true)?;
    let rest = &full - &split;
    let exact = expm(&full.scale_real(t))?;
    let mut errors = Vec::with_capacity(steps.len());
    for &n in steps {
        let h = t / T::from_usize_lossy(n);
        let step = expm(&split.scale_real(h))?.matmul(&expm(&rest.scale_real(h))?);
        errors.push(step.powi(n).max_diff(&exact));
    }
    let ratios: Vec<T> = errors.windows(2).map(|w| w[1] / w[0]).collect();
    let k = steps.len();
    let fitted_order = (k >= 2 && errors[k - 1] > T::zero() && errors[k - 2] > T::zero()).then(|| {
        let (n1, n2) = (T::from_usize_lossy(steps[k - 2]), T::from_usize_lossy(steps[k - 1]));
        -(errors[k - 1] / errors[k - 2]).ln() / (n2 / n1).ln()
    });
    Ok(TrotterReport { steps: steps.to_vec(), errors, ratios, fitted_order })
}

/// Reruns the steady state with every oscillator truncation raised by 5 and
/// returns the largest relative change of `extract`, with magnitudes below
/// [`SHIFT_FLOOR`] compared absolutely. Zero when nothing is truncated.
pub fn certify_truncation<T: Real>(
    cfg: &ModelConfig,
    extract: impl Fn(&Model<T>, &Operator<T>) -> Result<Vec<T>>,
) -> Result<T> {
    if !cfg.has_oscillator() {
        return Ok(T::zero());
    }
    let small = build_model::<T>(cfg)?;
    let large = build_model::<T>(&cfg.with_truncation_increase(5))?;
    let a = extract(&small, &solve_steady(&small.liouvillian)?.rho_st)?;
    let b = extract(&large, &solve_steady(&large.liouvillian)?.rho_st)?;
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch("extractor returned different lengths".into()));
    }
    Ok(a.iter().zip(&b).fold(T::zero(), |m, (x, y)| {
        let scale = x.abs().max(y.abs()).max(T::lit(SHIFT_FLOOR));
        m.max((*x - *y).abs() / scale)
    }))
}

/// `|ψ⟩⟨ψ|` for a product of per-factor amplitude vectors.
pub fn product_pure_state<T: Real>(space: &SpaceSpec, amplitudes: &[Vec<Complex<T>>]) -> Result<Operator<T>> {
    if amplitudes.len() != space.factors().len() {
        return Err(Error::DimensionMismatch("one amplitude vector per factor expected".into()));
    }
    let mut psi = vec![re(T::one())];
    for (f, a) in space.factors().iter().zip(amplitudes) {
        if a.len() > f.dim() {
            return Err(Error::DimensionMismatch(format!("{} amplitudes for a factor of dimension {}", a.len(), f.dim())));
        }
        let mut padded = a.clone();
        padded.resize(f.dim(), re(T::zero()));
        psi = psi.iter().flat_map(|x| padded.iter().map(move |y| *x * *y)).collect();
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if norm == T::zero() {
        return Err(Error::InvalidParameter("zero state vector".into()));
    }
    let psi: Vec<Complex<T>> = psi.iter().map(|z| *z / norm).collect();
    Operator::projector(space, &psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::SubsystemSpec;
    use crate::liouvillian::LindbladTerm;
    use crate::models::SpinOscillatorConfig;
    use crate::scalar::c;

    use crate::hilbert::mk_destroy;

    fn damped(kappa: f64, dim: usize) -> Liouvillian<f64> {
        let f = SubsystemSpec::oscillator(dim).unwrap();
        let a = mk_destroy::<f64>(f).unwrap();
        Liouvillian::new(Operator::zeros(&SpaceSpec::single(f)).unwrap(), vec![LindbladTerm::new(a, kappa).unwrap()]).unwrap()
    }

    #[test]
    fn zero_generator_is_frozen() {
        let space = SpaceSpec::single(SubsystemSpec::oscillator(3).unwrap());
        let l = Liouvillian::<f64>::zero(&space).unwrap();
        let rho = product_pure_state(&space, &[vec![c(0.6, 0.0), c(0.0, 0.8)]]).unwrap();
        let rec = evolve(&l, &rho, &[0.0, 1.0, 5.0], &Probes::none()).unwrap();
        assert!(rec.final_state.matrix().max_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn damped_number_decays_exponentially() {
        let l = damped(0.7, 4);
        let space = l.space().clone();
        let rho = product_pure_state(&space, &[vec![c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let probes = Probes { observables: default_observables(&space).unwrap(), ..Probes::none() };
        let grid: Vec<f64> = (0..=8).map(|k| k as f64 * 0.5).collect();
        let rec = evolve(&l, &rho, &grid, &probes).unwrap();
        for (t, n) in grid.iter().zip(rec.observable("n_A").unwrap()) {
            assert!((n.re - (-0.7 * t).exp()).abs() < 1e-9);
        }
        assert!(rec.max_trace_drift < 1e-9);
    }

    fn spin_osc(coupling: f64, n: usize) -> Model<f64> {
        build_model(&ModelConfig::SpinOscillator(SpinOscillatorConfig {
            omega_a: 10.0,
            omega_b: 10.0,
            gamma_a: 1.0,
            gamma_b: 1.0,
            s: 0.5,
            nbar: 0.0,
            coupling,
            n_trunc: n,
        }))
        .unwrap()
    }

    #[test]
    fn trotter_commuting_split_is_exact() {
        let m = spin_osc(0.0, 4);
        let rep = trotter_compare(&m, 1, 1.0, &[1, 2, 8]).unwrap();
        assert!(rep.errors.iter().all(|e| *e < 1e-10), "{:?}", rep.errors);
    }

    #[test]
    fn spin_sector_split_is_exact_at_any_coupling() {
        // on l = 1 the spin dissipator is −γ^A/2 times the identity
        let m = spin_osc(5.0, 4);
        let rep = trotter_compare(&m, 1, 1.0, &[1, 4, 16]).unwrap();
        assert!(rep.errors.iter().all(|e| *e < 1e-12), "{:?}", rep.errors);
    }

    #[test]
    fn trotter_first_order() {
        let m = build_model::<f64>(&ModelConfig::Optomechanical(crate::models::OptomechanicalConfig {
            omega: 1.0,
            nu: 1.5,
            kappa: 1.0,
            gamma: 0.9,
            nbar: 0.2,
            mbar: 0.1,
            g: 0.9,
            n_trunc_a: 4,
            n_trunc_b: 4,
        }))
        .unwrap();
        let rep = trotter_compare(&m, 1, 0.5, &[16, 32, 64]).unwrap();
        assert!(rep.errors[0] > rep.errors[2]);
        let last = *rep.ratios.last().unwrap();
        assert!((last - 0.5).abs() < 0.1, "{:?}", rep.ratios);
    }

    #[test]
    fn uncoupled_sector_norm_tracks_bound() {
        let m = spin_osc(0.0, 5);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rho = product_pure_state(m.space(), &[vec![c(h, 0.0), c(h, 0.0)], vec![c(1.0, 0.0)]]).unwrap();
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.25).collect();
        let rows = check_decay_bound(&m, &rho, &grid).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].holds);
        let slope = rows[0].fitted_rate.unwrap();
        assert!((slope + 0.5).abs() < 1e-6, "{slope}");
    }

    #[test]
    fn certify_trivial_thermal() {
        let cfg = ModelConfig::SpinOscillator(SpinOscillatorConfig {
            omega_a: 1.0,
            omega_b: 1.0,
            gamma_a: 1.0,
            gamma_b: 1.0,
            s: 0.3,
            nbar: 0.0,
            coupling: 0.0,
            n_trunc: 4,
        });
        let shift = certify_truncation::<f64>(&cfg, |m, _| Ok(vec![m.b_steady.matrix()[(0, 0)].re])).unwrap();
        assert_eq!(shift, 0.0);
        let shift = certify_truncation::<f64>(&cfg, |_, r| crate::steady::occupations(r)).unwrap();
        assert!(shift < 1e-9, "{shift}");
    }
}
