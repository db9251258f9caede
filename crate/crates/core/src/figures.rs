//! Data behind the four published figures, with the captioned parameters,
//! and the eigenvalue tables printed by the CLI.

use num_complex::Complex;

use crate::error::Result;
use crate::evolve::{evolve_model, product_pure_state};
use crate::hilbert::{mk_spin_ops, partial_trace, Operator, SubsystemKind};
use crate::models::{build_model, sector_decay_rate, sector_decay_rate_numeric, ModelConfig, OptomechanicalConfig, SpinOscillatorConfig, TwoSpinsConfig};
use crate::moments::steady_spin_osc_excitation;
use crate::spectral::{osc_eigensystem, spin_eigensystem};
use crate::steady::{occupations, solve_steady};

/// A CSV-ready table.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FigureTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:.12e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Evenly spaced `samples` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Two spins with `γ^A = γ^B = 1`, `s^A = 0.8`, `s^B = 0.6`, `ω_A = ω_B = ω`.
pub fn fig1_config(omega: f64, coupling: f64) -> ModelConfig {
    ModelConfig::TwoSpins(TwoSpinsConfig {
        omega_a: omega,
        omega_b: omega,
        gamma_a: 1.0,
        gamma_b: 1.0,
        s_a: 0.8,
        s_b: 0.6,
        coupling,
    })
}

/// Spin-oscillator with `γ^A = γ^B = 1`, `n̄ = 0`, `s = 1/2`.
pub fn fig2_config(omega_b: f64, coupling: f64, n_trunc: usize) -> ModelConfig {
    ModelConfig::SpinOscillator(SpinOscillatorConfig {
        omega_a: 1.0,
        omega_b,
        gamma_a: 1.0,
        gamma_b: 1.0,
        s: 0.5,
        nbar: 0.0,
        coupling,
        n_trunc,
    })
}

/// Spin-oscillator with `γ^A = γ^B = 1`, `n̄ = 0`, `s = 1/2`, `ω_A = ω_B = 10`.
pub fn fig3_config(coupling: f64, n_trunc: usize) -> ModelConfig {
    ModelConfig::SpinOscillator(SpinOscillatorConfig {
        omega_a: 10.0,
        omega_b: 10.0,
        gamma_a: 1.0,
        gamma_b: 1.0,
        s: 0.5,
        nbar: 0.0,
        coupling,
        n_trunc,
    })
}

/// Optomechanics with `κ = 1`, `ω = 10`, `ν = 1.5`, `γ = 0.9`, `n̄ = 0.015`, `m̄ = 0.1`.
pub fn fig4_config(g: f64, n_trunc_a: usize, n_trunc_b: usize) -> ModelConfig {
    ModelConfig::Optomechanical(OptomechanicalConfig {
        omega: 10.0,
        nu: 1.5,
        kappa: 1.0,
        gamma: 0.9,
        nbar: 0.015,
        mbar: 0.1,
        g,
        n_trunc_a,
        n_trunc_b,
    })
}

/// Truncated coherent-state amplitudes `e^{−|α|²/2} αⁿ/√n!`.
pub fn coherent_amplitudes(alpha: Complex<f64>, dim: usize) -> Vec<Complex<f64>> {
    let mut out = Vec::with_capacity(dim);
    let mut c = Complex::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..dim {
        out.push(c);
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    out
}

fn sz_of(reduced: &Operator<f64>) -> Result<f64> {
    let f = reduced.space().factors()[0];
    Ok(reduced.expectation(&mk_spin_ops::<f64>(f)?.z)?.re)
}

pub const FIG1_OMEGAS: [f64; 2] = [1.0, 10.0];

/// Steady `⟨σ_z^A⟩` and `⟨σ_z^B⟩` against `Ω/γ^A` for `ω/γ^A ∈ {1, 10}`.
pub fn figure1(couplings: &[f64]) -> Result<FigureTable> {
    let mut header = vec!["omega_coupling_over_gamma_a".to_string()];
    for w in FIG1_OMEGAS {
        header.push(format!("sz_a_w{w}"));
        header.push(format!("sz_b_w{w}"));
    }
    let mut rows = Vec::with_capacity(couplings.len());
    for &om in couplings {
        let mut row = vec![om];
        for w in FIG1_OMEGAS {
            let m = build_model::<f64>(&fig1_config(w, om))?;
            let rho = solve_steady(&m.liouvillian)?.rho_st;
            row.push(sz_of(&partial_trace(&rho, &[0])?)?);
            row.push(sz_of(&partial_trace(&rho, &[1])?)?);
        }
        rows.push(row);
    }
    Ok(FigureTable { name: "fig1".into(), header, rows })
}

pub const FIG2_OMEGA_B: [f64; 2] = [1.0, 5.0];

/// Steady `⟨b†b⟩` against `Ω/γ^A` for `ω_B/γ^A ∈ {1, 5}`, closed form and full solve.
pub fn figure2(couplings: &[f64], n_trunc: usize) -> Result<FigureTable> {
    let mut header = vec!["omega_coupling_over_gamma_a".to_string()];
    for w in FIG2_OMEGA_B {
        header.push(format!("nbb_formula_wb{w}"));
        header.push(format!("nbb_numeric_wb{w}"));
    }
    let mut rows = Vec::with_capacity(couplings.len());
    for &om in couplings {
        let mut row = vec![om];
        for w in FIG2_OMEGA_B {
            let cfg = fig2_config(w, om, n_trunc);
            let ModelConfig::SpinOscillator(c) = &cfg else { unreachable!() };
            row.push(steady_spin_osc_excitation::<f64>(c)?);
            let m = build_model::<f64>(&cfg)?;
            row.push(occupations(&solve_steady(&m.liouvillian)?.rho_st)?[1]);
        }
        rows.push(row);
    }
    Ok(FigureTable { name: "fig2".into(), header, rows })
}

pub const FIG3_COUPLINGS: [f64; 2] = [0.0, 5.0];

/// `‖ρ^A(t) − ρ^A_st‖₁` against `γ^A t` from `(|0⟩+|1⟩)/√2 ⊗ |0⟩`.
pub fn figure3(scaled_times: &[f64], n_trunc: usize) -> Result<FigureTable> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut header = vec!["gamma_a_t".to_string()];
    let mut cols = Vec::new();
    for om in FIG3_COUPLINGS {
        let m = build_model::<f64>(&fig3_config(om, n_trunc))?;
        let rho0 = product_pure_state(m.space(), &[vec![Complex::new(h, 0.0), Complex::new(h, 0.0)], vec![Complex::new(1.0, 0.0)]])?;
        let rec = evolve_model(&m, &rho0, scaled_times)?;
        header.push(format!("distance_omega{om}"));
        cols.push(rec.trace_norm_distance_to_a_steady);
    }
    header.push("uncoupled_bound".into());
    let rows = scaled_times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut r = vec![t];
            r.extend(cols.iter().map(|c| c[k]));
            r.push((-t / 2.0).exp());
            r
        })
        .collect();
    Ok(FigureTable { name: "fig3".into(), header, rows })
}

pub const FIG4_COUPLINGS: [f64; 2] = [0.0, 0.9];
pub const FIG4_ALPHA: f64 = 0.15;

/// `‖ρ^A(t) − ρ^A_st‖₁` against `κt`, both modes starting in `|α = 0.15⟩`.
pub fn figure4(scaled_times: &[f64], n_trunc_a: usize, n_trunc_b: usize) -> Result<FigureTable> {
    let alpha = Complex::new(FIG4_ALPHA, 0.0);
    let mut header = vec!["kappa_t".to_string()];
    let mut cols = Vec::new();
    for g in FIG4_COUPLINGS {
        let m = build_model::<f64>(&fig4_config(g, n_trunc_a, n_trunc_b))?;
        let rho0 = product_pure_state(
            m.space(),
            &[coherent_amplitudes(alpha, n_trunc_a), coherent_amplitudes(alpha, n_trunc_b)],
        )?;
        let rec = evolve_model(&m, &rho0, scaled_times)?;
        header.push(format!("distance_g{g}"));
        cols.push(rec.trace_norm_distance_to_a_steady);
    }
    let rows = scaled_times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut r = vec![t];
            r.extend(cols.iter().map(|c| c[k]));
            r
        })
        .collect();
    Ok(FigureTable { name: "fig4".into(), header, rows })
}

/// Default sampling used by the CLI.
pub fn default_figure(which: u8, samples: usize) -> Result<FigureTable> {
    match which {
        1 => figure1(&linspace(0.0, 20.0, samples)),
        2 => figure2(&linspace(0.0, 2.0, samples), 30),
        3 => figure3(&linspace(0.0, 10.0, samples), 10),
        4 => figure4(&linspace(0.0, 20.0, samples), 8, 10),
        n => Err(crate::Error::InvalidParameter(format!("no figure {n}; expected 1-4"))),
    }
}

/// Local damping of one factor: kind, rate, bias (`m̄`/`s` or `n̄`), truncation.
fn local_dampings(cfg: &ModelConfig) -> [(SubsystemKind, f64, f64, usize); 2] {
    use SubsystemKind::{Oscillator, Spin};
    match cfg {
        ModelConfig::TwoSpins(c) => [(Spin, c.gamma_a, c.s_a, 2), (Spin, c.gamma_b, c.s_b, 2)],
        ModelConfig::SpinOscillator(c) => [(Spin, c.gamma_a, c.s, 2), (Oscillator, c.gamma_b, c.nbar, c.n_trunc)],
        ModelConfig::Optomechanical(c) => {
            [(Oscillator, c.kappa, c.nbar, c.n_trunc_a), (Oscillator, c.gamma, c.mbar, c.n_trunc_b)]
        }
    }
}

/// Levels of the closed-form oscillator table.
pub const SPECTRUM_N_MAX: usize = 3;
pub const SPECTRUM_K_RANGE: usize = 2;

/// Closed-form eigenvalues of each factor's local dissipator, labelled `(n, k)`,
/// with the max-norm residuals of the right and left eigen-equations.
/// Spin modes map to `(0,0)`, `(1,0)`, `(0,±1)` for `ρ₀`, `σ_z`, `σ_±`.
pub fn spectrum_table(cfg: &ModelConfig) -> Result<FigureTable> {
    let header = ["factor", "n", "k", "eigenvalue", "right_residual", "left_residual"];
    let mut rows = Vec::new();
    for (f, (kind, gamma, bias, trunc)) in local_dampings(cfg).into_iter().enumerate() {
        match kind {
            SubsystemKind::Spin => {
                let es = spin_eigensystem::<f64>(gamma, bias)?;
                let l = es.generator()?;
                let labels = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.0, -1.0)];
                for (i, (n, k)) in labels.into_iter().enumerate() {
                    let lam = Complex::new(es.eigenvalues[i], 0.0);
                    let r = l.apply_matrix(es.right[i].matrix()).max_diff(&es.right[i].matrix().scale(lam));
                    let lf = l.adjoint_apply_matrix(es.left[i].matrix()).max_diff(&es.left[i].matrix().scale(lam));
                    rows.push(vec![f as f64, n, k, es.eigenvalues[i], r, lf]);
                }
            }
            SubsystemKind::Oscillator => {
                let dim = trunc.max(2 * (SPECTRUM_N_MAX + SPECTRUM_K_RANGE) + crate::spectral::TRUNCATION_MARGIN);
                let es = osc_eigensystem::<f64>(gamma, bias, SPECTRUM_N_MAX, SPECTRUM_K_RANGE, dim)?;
                for r in es.residuals()? {
                    rows.push(vec![f as f64, r.n as f64, r.k as f64, es.eigenvalue(r.n, r.k), r.right, r.left]);
                }
            }
        }
    }
    Ok(FigureTable { name: "spectrum".into(), header: header.map(String::from).to_vec(), rows })
}

/// Slowest decay rate of the A dissipator per excitation sector, closed form
/// against dense eigenvalues of the truncated block.
pub fn sector_table(cfg: &ModelConfig) -> Result<FigureTable> {
    let m = build_model::<f64>(cfg)?;
    let top = m.excitation.max_sector() as i64;
    let mut rows = Vec::new();
    for l in 1..=top {
        rows.push(vec![l as f64, sector_decay_rate(cfg, l)?, sector_decay_rate_numeric(&m, l)?]);
    }
    let header = ["sector", "eta_formula", "eta_numeric"].map(String::from).to_vec();
    Ok(FigureTable { name: "sectors".into(), header, rows })
}
