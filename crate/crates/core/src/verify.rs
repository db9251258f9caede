//! Invariant suite for a model configuration, serialized as a JSON report.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::Result;
use crate::evolve::certify_truncation;
use crate::hilbert::partial_trace;
use crate::linalg::CMatrix;
use crate::models::{build_model, Model, ModelConfig};
use crate::steady::{occupations, solve_steady, RESIDUAL_TARGET};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `None` for informational entries that cannot fail.
    pub tolerance: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub config: ModelConfig,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn below(name: &str, value: f64, tol: f64) -> Check {
    Check { name: name.into(), value, tolerance: Some(tol), passed: value <= tol }
}

fn info(name: &str, value: f64) -> Check {
    Check { name: name.into(), value, tolerance: None, passed: true }
}

/// Seeded random Hermitian matrix with unit trace.
pub fn random_hermitian(d: usize, seed: u64) -> CMatrix<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let x = CMatrix::from_fn(d, d, |_, _| Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    let h = x.hermitian_part();
    let tr = h.trace().re;
    if tr.abs() > 1e-3 {
        h.scale_real(1.0 / tr)
    } else {
        h
    }
}

/// Structural checks of the generator on a random Hermitian input.
pub fn generator_checks(model: &Model<f64>, seed: u64) -> Result<Vec<Check>> {
    let l = &model.liouvillian;
    let es = &model.excitation;
    let rho = random_hermitian(l.dim(), seed);
    let lr = l.apply_matrix(&rho);
    let scale = lr.max_abs().max(1e-300);
    let mut out = vec![
        below("trace_annihilation", lr.trace().norm() / scale, 1e-12),
        below("hermiticity_preservation", lr.hermiticity_defect() / scale, 1e-12),
    ];
    let lhs = es.apply_ca(&lr)?;
    let rhs = l.apply_matrix(&es.apply_ca(&rho)?);
    out.push(below("ca_commutes_with_generator", lhs.max_diff(&rhs) / scale, 1e-10));
    let top = es.max_sector() as i64;
    let mut worst = 0.0f64;
    let tilde = &model.tilde_a;
    let tr = tilde.apply_matrix(&rho);
    for k in -top..=top {
        let a = es.project_sector(&lr, k)?;
        let b = l.apply_matrix(&es.project_sector(&rho, k)?);
        worst = worst.max(a.max_diff(&b) / scale);
        let a = es.project_sector(&tr, k)?;
        let b = tilde.apply_matrix(&es.project_sector(&rho, k)?);
        worst = worst.max(a.max_diff(&b) / scale);
    }
    out.push(below("sector_preservation", worst, 1e-10));
    Ok(out)
}

/// Steady-state checks: residual, positivity clip, the reduced A state, and
/// (informational) the distance of the reduced B state from its own fixed point.
pub fn steady_checks(model: &Model<f64>, trunc_check: bool) -> Result<Vec<Check>> {
    let rep = solve_steady(&model.liouvillian)?;
    let rho_a = partial_trace(&rep.rho_st, &[0])?;
    let rho_b = partial_trace(&rep.rho_st, &[1])?;
    let mut out = vec![
        below("steady_residual", rep.residual, RESIDUAL_TARGET),
        below("steady_clipped_weight", rep.clipped_weight, 1e-8),
        below("steady_trace_defect", (rep.rho_st.trace().re - 1.0).abs(), 1e-10),
        below("reduced_a_distance", rho_a.sub(&model.a_steady)?.trace_norm()?, 1e-7),
        info("reduced_b_distance", rho_b.sub(&model.b_steady)?.trace_norm()?),
    ];
    if trunc_check && model.config.has_oscillator() {
        let shift = certify_truncation::<f64>(&model.config, |_, r| occupations(r))?;
        out.push(below("truncation_shift", shift, crate::evolve::TRUNCATION_CERTIFIED));
    }
    Ok(out)
}

pub fn verify(cfg: &ModelConfig, trunc_check: bool) -> Result<VerifyReport> {
    let model = build_model::<f64>(cfg)?;
    let mut checks = generator_checks(&model, 7)?;
    checks.extend(steady_checks(&model, trunc_check)?);
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { config: cfg.clone(), checks, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::figures::{fig1_config, fig4_config};

    #[test]
    fn two_spin_report_passes() {
        let r = verify(&fig1_config(1.0, 2.0), false).unwrap();
        assert!(r.passed, "{}", r.to_json());
        let b = r.checks.iter().find(|c| c.name == "reduced_b_distance").unwrap();
        assert!(b.value > 1e-3);
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["config"]["model"], "two_spins");
    }

    #[test]
    fn optomech_report_passes() {
        let r = verify(&fig4_config(0.9, 5, 6), false).unwrap();
        assert!(r.passed, "{}", r.to_json());
    }
}
