//! The three coupled systems: two spins, a spin and an oscillator, and the
//! optomechanical pair of oscillators.
//!
//! Each generator has the form `ℒ = ℒ^A + ℒ^B − i[V^A ⊗ V^B, ·]` with system A
//! as the first tensor factor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{embed, mk_destroy, mk_spin_ops, Operator, SpaceSpec, SubsystemKind, SubsystemSpec};
use crate::linalg::eigenvalues;
use crate::liouvillian::{LindbladTerm, Liouvillian};
use crate::scalar::{re, Real};
use crate::sectors::{additive_decay_rate, build_excitation_structure, ExcitationStructure, FactorDamping};
use crate::steady::{spin_steady, thermal_state};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoSpinsConfig {
    pub omega_a: f64,
    pub omega_b: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub s_a: f64,
    pub s_b: f64,
    #[serde(rename = "Omega")]
    pub coupling: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinOscillatorConfig {
    pub omega_a: f64,
    pub omega_b: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub s: f64,
    pub nbar: f64,
    #[serde(rename = "Omega")]
    pub coupling: f64,
    pub n_trunc: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptomechanicalConfig {
    pub omega: f64,
    pub nu: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub nbar: f64,
    pub mbar: f64,
    pub g: f64,
    pub n_trunc_a: usize,
    pub n_trunc_b: usize,
}

/// Physical parameters of one of the supported models. Serialized with a
/// `"model"` tag (`two_spins`, `spin_oscillator`, `optomechanical`); unknown
/// keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelConfig {
    TwoSpins(TwoSpinsConfig),
    SpinOscillator(SpinOscillatorConfig),
    Optomechanical(OptomechanicalConfig),
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} = {v} must be a positive rate")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} = {v} must be nonnegative")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be finite")))
    }
}

fn unit_interval(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} = {v} outside [0, 1]")))
    }
}

fn truncation(name: &str, n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} = {n} must be at least 2")))
    }
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::TwoSpins(c) => {
                finite("omega_a", c.omega_a)?;
                finite("omega_b", c.omega_b)?;
                positive("gamma_a", c.gamma_a)?;
                positive("gamma_b", c.gamma_b)?;
                unit_interval("s_a", c.s_a)?;
                unit_interval("s_b", c.s_b)?;
                nonnegative("Omega", c.coupling)
            }
            Self::SpinOscillator(c) => {
                finite("omega_a", c.omega_a)?;
                finite("omega_b", c.omega_b)?;
                positive("gamma_a", c.gamma_a)?;
                positive("gamma_b", c.gamma_b)?;
                unit_interval("s", c.s)?;
                nonnegative("nbar", c.nbar)?;
                nonnegative("Omega", c.coupling)?;
                truncation("n_trunc", c.n_trunc)
            }
            Self::Optomechanical(c) => {
                finite("omega", c.omega)?;
                finite("nu", c.nu)?;
                positive("kappa", c.kappa)?;
                positive("gamma", c.gamma)?;
                nonnegative("nbar", c.nbar)?;
                nonnegative("mbar", c.mbar)?;
                nonnegative("g", c.g)?;
                truncation("n_trunc_a", c.n_trunc_a)?;
                truncation("n_trunc_b", c.n_trunc_b)
            }
        }
    }

    /// The rate used as the time unit in reports (`γ^A` or `κ`).
    pub fn reference_rate(&self) -> f64 {
        match self {
            Self::TwoSpins(c) => c.gamma_a,
            Self::SpinOscillator(c) => c.gamma_a,
            Self::Optomechanical(c) => c.kappa,
        }
    }

    pub fn reference_rate_name(&self) -> &'static str {
        match self {
            Self::Optomechanical(_) => "kappa",
            _ => "gamma_a",
        }
    }

    /// Coupling strength (`Ω` or `g`).
    pub fn coupling(&self) -> f64 {
        match self {
            Self::TwoSpins(c) => c.coupling,
            Self::SpinOscillator(c) => c.coupling,
            Self::Optomechanical(c) => c.g,
        }
    }

    pub fn with_coupling(&self, value: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Self::TwoSpins(c) => c.coupling = value,
            Self::SpinOscillator(c) => c.coupling = value,
            Self::Optomechanical(c) => c.g = value,
        }
        out
    }

    pub fn has_oscillator(&self) -> bool {
        !matches!(self, Self::TwoSpins(_))
    }

    /// Every oscillator truncation raised by `extra` levels.
    pub fn with_truncation_increase(&self, extra: usize) -> Self {
        let mut out = self.clone();
        match &mut out {
            Self::TwoSpins(_) => {}
            Self::SpinOscillator(c) => c.n_trunc += extra,
            Self::Optomechanical(c) => {
                c.n_trunc_a += extra;
                c.n_trunc_b += extra;
            }
        }
        out
    }

    /// Per-factor damping of system A, as used by [`additive_decay_rate`].
    pub fn a_damping(&self) -> Vec<FactorDamping> {
        match self {
            Self::TwoSpins(c) => vec![FactorDamping { kind: SubsystemKind::Spin, rate: c.gamma_a, dim: 2 }],
            Self::SpinOscillator(c) => vec![FactorDamping { kind: SubsystemKind::Spin, rate: c.gamma_a, dim: 2 }],
            Self::Optomechanical(c) => {
                vec![FactorDamping { kind: SubsystemKind::Oscillator, rate: c.kappa, dim: c.n_trunc_a }]
            }
        }
    }
}

/// `η_l`, the slowest decay rate of the A dissipator on sector `l`:
/// `−γ^A/2` for a spin at `l = ±1`, `−κ|l|/2` for an oscillator.
pub fn sector_decay_rate(cfg: &ModelConfig, l: i64) -> Result<f64> {
    additive_decay_rate(&cfg.a_damping(), l.unsigned_abs() as usize)
}

/// Largest real part of the spectrum of `ℒ̃^A` restricted to sector `l` on
/// the A space alone, from dense eigenvalues.
pub fn sector_decay_rate_numeric<T: Real>(model: &Model<T>, l: i64) -> Result<T> {
    let es = build_excitation_structure::<T>(model.a_space())?;
    let block = es.restrict(&model.tilde_a_local, l, false)?;
    if block.rows() == 0 {
        return Err(Error::InvalidParameter(format!("sector {l} is empty")));
    }
    let ev = eigenvalues(&block)?;
    Ok(ev.iter().map(|z| z.re).fold(T::neg_infinity(), T::max))
}

/// A model assembled on its truncated space.
#[derive(Clone, Debug)]
pub struct Model<T> {
    pub config: ModelConfig,
    /// Full generator `ℒ`.
    pub liouvillian: Liouvillian<T>,
    /// A dissipators only, embedded on the full space (`ℒ̃^A`).
    pub tilde_a: Liouvillian<T>,
    /// `ℒ̃^A` on the A space alone.
    pub tilde_a_local: Liouvillian<T>,
    /// `ℒ^A` on the A space alone.
    pub local_a: Liouvillian<T>,
    /// `ℒ^B` on the B space alone.
    pub local_b: Liouvillian<T>,
    /// Sector structure of system A on the full space.
    pub excitation: ExcitationStructure<T>,
    /// Steady state of `ℒ^A` (spin bias state or renormalized truncated thermal state).
    pub a_steady: Operator<T>,
    /// Steady state of `ℒ^B` alone.
    pub b_steady: Operator<T>,
}

impl<T: Real> Model<T> {
    pub fn space(&self) -> &SpaceSpec {
        self.liouvillian.space()
    }

    pub fn a_space(&self) -> &SpaceSpec {
        self.local_a.space()
    }

    pub fn b_space(&self) -> &SpaceSpec {
        self.local_b.space()
    }

    pub fn reference_rate(&self) -> T {
        T::lit(self.config.reference_rate())
    }
}

/// Single-factor pieces: Hamiltonian, damping channels, coupling operator `V`.
struct Side<T> {
    factor: SubsystemSpec,
    hamiltonian: Operator<T>,
    channels: Vec<(Operator<T>, T)>,
    coupling: Operator<T>,
    steady: Operator<T>,
}

fn spin_side<T: Real>(omega: f64, gamma: f64, s: f64, coupling_is_z: bool) -> Result<Side<T>> {
    let f = SubsystemSpec::spin();
    let ops = mk_spin_ops::<T>(f)?;
    let coupling = if coupling_is_z { ops.z.clone() } else { ops.plus.add(&ops.minus)? };
    Ok(Side {
        factor: f,
        hamiltonian: ops.z.scale(re(T::lit(omega))),
        channels: vec![(ops.minus, T::lit(gamma * (1.0 - s))), (ops.plus, T::lit(gamma * s))],
        coupling,
        steady: spin_steady(T::lit(s))?,
    })
}

fn oscillator_side<T: Real>(freq: f64, rate: f64, nbar: f64, dim: usize, coupling_is_number: bool) -> Result<Side<T>> {
    let f = SubsystemSpec::oscillator(dim)?;
    let a = mk_destroy::<T>(f)?;
    let num = a.adjoint().matmul(&a)?;
    let coupling = if coupling_is_number { num.clone() } else { a.add(&a.adjoint())? };
    Ok(Side {
        factor: f,
        hamiltonian: num.scale(re(T::lit(freq))),
        channels: vec![(a.clone(), T::lit(rate * (nbar + 1.0))), (a.adjoint(), T::lit(rate * nbar))],
        coupling,
        steady: thermal_state(T::lit(nbar), dim)?,
    })
}

fn local_generator<T: Real>(side: &Side<T>, with_hamiltonian: bool) -> Result<Liouvillian<T>> {
    let h = if with_hamiltonian { side.hamiltonian.clone() } else { Operator::zeros(side.hamiltonian.space())? };
    let terms = side
        .channels
        .iter()
        .map(|(j, r)| LindbladTerm::new(j.clone(), *r))
        .collect::<Result<Vec<_>>>()?;
    Liouvillian::new(h, terms)
}

fn embedded_terms<T: Real>(side: &Side<T>, index: usize, full: &SpaceSpec) -> Result<Vec<LindbladTerm<T>>> {
    side.channels.iter().map(|(j, r)| LindbladTerm::new(embed(j, index, full)?, *r)).collect()
}

pub fn build_model<T: Real>(cfg: &ModelConfig) -> Result<Model<T>> {
    cfg.validate()?;
    let (a, b, strength) = match cfg {
        ModelConfig::TwoSpins(c) => (
            spin_side::<T>(c.omega_a, c.gamma_a, c.s_a, true)?,
            spin_side::<T>(c.omega_b, c.gamma_b, c.s_b, false)?,
            c.coupling,
        ),
        ModelConfig::SpinOscillator(c) => (
            spin_side::<T>(c.omega_a, c.gamma_a, c.s, true)?,
            oscillator_side::<T>(c.omega_b, c.gamma_b, c.nbar, c.n_trunc, false)?,
            c.coupling,
        ),
        ModelConfig::Optomechanical(c) => (
            oscillator_side::<T>(c.omega, c.kappa, c.nbar, c.n_trunc_a, true)?,
            oscillator_side::<T>(c.nu, c.gamma, c.mbar, c.n_trunc_b, false)?,
            c.g,
        ),
    };
    let full = SpaceSpec::new(vec![a.factor, b.factor])?;
    let interaction = a.coupling.tensor(&b.coupling)?.scale(re(T::lit(strength)));
    let h = embed(&a.hamiltonian, 0, &full)?.add(&embed(&b.hamiltonian, 1, &full)?)?.add(&interaction)?;
    let a_terms = embedded_terms(&a, 0, &full)?;
    let mut terms = a_terms.clone();
    terms.extend(embedded_terms(&b, 1, &full)?);
    let liouvillian = Liouvillian::new(h, terms)?;
    let tilde_a = Liouvillian::new(Operator::zeros(&full)?, a_terms)?;
    let excitation = build_excitation_structure::<T>(&SpaceSpec::single(a.factor))?.on_full_space(&full)?;
    Ok(Model {
        config: cfg.clone(),
        liouvillian,
        tilde_a,
        tilde_a_local: local_generator(&a, false)?,
        local_a: local_generator(&a, true)?,
        local_b: local_generator(&b, true)?,
        excitation,
        a_steady: a.steady,
        b_steady: b.steady,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;

    pub(crate) fn spin_osc_cfg(coupling: f64, n: usize) -> ModelConfig {
        ModelConfig::SpinOscillator(SpinOscillatorConfig {
            omega_a: 1.0,
            omega_b: 2.0,
            gamma_a: 1.0,
            gamma_b: 0.8,
            s: 0.3,
            nbar: 0.2,
            coupling,
            n_trunc: n,
        })
    }

    fn fig4_cfg() -> ModelConfig {
        ModelConfig::Optomechanical(OptomechanicalConfig {
            omega: 10.0,
            nu: 1.5,
            kappa: 1.0,
            gamma: 0.9,
            nbar: 0.015,
            mbar: 0.1,
            g: 0.9,
            n_trunc_a: 4,
            n_trunc_b: 6,
        })
    }

    fn two_spin_cfg(coupling: f64) -> ModelConfig {
        ModelConfig::TwoSpins(TwoSpinsConfig {
            omega_a: 1.0,
            omega_b: 1.0,
            gamma_a: 1.0,
            gamma_b: 1.0,
            s_a: 0.8,
            s_b: 0.6,
            coupling,
        })
    }

    fn random_state(d: usize, seed: u64) -> CMatrix<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = CMatrix::from_fn(d, d, |_, _| num_complex::Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        x.hermitian_part()
    }

    #[test]
    fn json_round_trip_and_strictness() {
        let cfg = fig4_cfg();
        let back = ModelConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        let text = r#"{"model":"two_spins","omega_a":1,"omega_b":1,"gamma_a":1,"gamma_b":1,"s_a":0.8,"s_b":0.6,"Omega":2}"#;
        assert_eq!(ModelConfig::from_json(text).unwrap().coupling(), 2.0);
        let extra = text.replace("\"Omega\":2", "\"Omega\":2,\"bogus\":1");
        assert!(matches!(ModelConfig::from_json(&extra), Err(Error::Config(_))));
        let bad = text.replace("\"s_a\":0.8", "\"s_a\":1.8");
        assert!(ModelConfig::from_json(&bad).is_err());
        let bad_rate = text.replace("\"gamma_b\":1", "\"gamma_b\":0");
        assert!(ModelConfig::from_json(&bad_rate).is_err());
    }

    #[test]
    fn every_model_commutes_with_the_excitation_superoperator() {
        for cfg in [two_spin_cfg(2.0), spin_osc_cfg(1.5, 5), fig4_cfg()] {
            let m: Model<f64> = build_model(&cfg).unwrap();
            let d = m.space().total_dim();
            let rho = random_state(d, 7);
            let l = &m.liouvillian;
            let es = &m.excitation;
            let lhs = es.apply_ca(&l.apply_matrix(&rho)).unwrap();
            let rhs = l.apply_matrix(&es.apply_ca(&rho).unwrap());
            let scale = l.apply_matrix(&rho).max_abs();
            assert!(lhs.max_diff(&rhs) <= 1e-10 * scale, "{cfg:?}");
            for sector in -2..=2 {
                let a = es.project_sector(&l.apply_matrix(&rho), sector).unwrap();
                let b = l.apply_matrix(&es.project_sector(&rho, sector).unwrap());
                assert!(a.max_diff(&b) <= 1e-10 * scale);
                let a = es.project_sector(&m.tilde_a.apply_matrix(&rho), sector).unwrap();
                let b = m.tilde_a.apply_matrix(&es.project_sector(&rho, sector).unwrap());
                assert!(a.max_diff(&b) <= 1e-10 * scale);
            }
            let out = l.apply_matrix(&rho);
            assert!(out.trace().norm() <= 1e-12 * rho.frobenius() * d as f64);
            assert!(out.is_hermitian(1e-12));
        }
    }

    #[test]
    fn uncoupled_two_spins_factorize() {
        let m: Model<f64> = build_model(&two_spin_cfg(0.0)).unwrap();
        let prod = m.a_steady.tensor(&m.b_steady).unwrap();
        assert!(m.liouvillian.apply_matrix(prod.matrix()).max_abs() < 1e-15);
        let a_part = m.local_a.apply_matrix(m.a_steady.matrix());
        assert!(a_part.max_abs() < 1e-15);
    }

    #[test]
    fn spin_hamiltonian_commutes_with_coupling_operator() {
        let ops = mk_spin_ops::<f64>(SubsystemSpec::spin()).unwrap();
        let h = ops.z.scale(re(3.0));
        assert_eq!(h.commutator(&ops.z).unwrap().matrix().max_abs(), 0.0);
    }

    #[test]
    fn decay_rates() {
        let cfg = two_spin_cfg(1.0);
        let ModelConfig::TwoSpins(mut c) = cfg else { unreachable!() };
        c.gamma_a = 2.0;
        assert_eq!(sector_decay_rate(&ModelConfig::TwoSpins(c.clone()), 1).unwrap(), -1.0);
        let opto = fig4_cfg();
        assert_eq!(sector_decay_rate(&opto, 3).unwrap(), -1.5);
        // with n̄ = 0 the truncated ladder is triangular and the rates are exact
        let ModelConfig::Optomechanical(mut oc) = opto.clone() else { unreachable!() };
        oc.nbar = 0.0;
        let cold = ModelConfig::Optomechanical(oc);
        let m: Model<f64> = build_model(&cold).unwrap();
        for l in 1..=3 {
            let numeric = sector_decay_rate_numeric(&m, l).unwrap();
            assert!((numeric - sector_decay_rate(&cold, l).unwrap()).abs() < 1e-10, "l = {l}: {numeric}");
        }
        let m: Model<f64> = build_model(&opto).unwrap();
        let numeric = sector_decay_rate_numeric(&m, 1).unwrap();
        assert!((numeric + 0.5).abs() < 1e-3, "{numeric}");
        let m2: Model<f64> = build_model(&ModelConfig::TwoSpins(c)).unwrap();
        assert!((sector_decay_rate_numeric(&m2, 1).unwrap() + 1.0).abs() < 1e-12);
    }
}
