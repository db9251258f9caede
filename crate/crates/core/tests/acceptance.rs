//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each, and
//! exits nonzero if any criterion fails outside its documented blocking mode.

use std::time::Instant;

use lindblad_core::evolve::{check_decay_bound, product_pure_state, trotter_compare};
use lindblad_core::figures::{figure1, figure4, fig1_config, fig2_config, fig3_config, fig4_config, linspace};
use lindblad_core::hilbert::partial_trace;
use lindblad_core::models::{ModelConfig, OptomechanicalConfig, SpinOscillatorConfig};
use lindblad_core::moments::{steady_optomech, steady_spin_osc_excitation};
use lindblad_core::spectral::{osc_eigensystem, spin_eigensystem};
use lindblad_core::steady::{
    occupations, off_diagonal_witness, pure_damping_generator, solve_steady, stirling_lower_bound, DampingRecurrence,
};
use lindblad_core::{build_model, Matrix64, C64};

enum Verdict {
    Pass(String),
    Fail(String),
    /// Fails as stated; the detail names the blocking analysis, which was itself confirmed.
    Blocked(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn identity_gap(g: &Matrix64) -> f64 {
    g.max_diff(&Matrix64::identity(g.rows()))
}

fn c1_invariance() -> lindblad_core::Result<Verdict> {
    let grid = [0.0, 0.5, 1.0, 2.0, 5.0];
    let opto = |g: f64| {
        ModelConfig::Optomechanical(OptomechanicalConfig {
            omega: 10.0,
            nu: 1.5,
            kappa: 1.0,
            gamma: 0.9,
            nbar: 0.2,
            mbar: 0.1,
            g,
            n_trunc_a: 10,
            n_trunc_b: 18,
        })
    };
    let families: Vec<(&str, Vec<ModelConfig>)> = vec![
        ("two_spins", grid.iter().map(|&w| fig1_config(1.0, w)).collect()),
        ("spin_oscillator", grid.iter().map(|&w| fig2_config(1.0, w, 15)).collect()),
        ("optomechanical", [0.0, 0.3, 0.9].iter().map(|&g| opto(g)).collect()),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, cfgs) in families {
        let (mut worst_a, mut best_b) = (0.0f64, 0.0f64);
        for cfg in cfgs {
            let m = build_model::<f64>(&cfg)?;
            let rho = solve_steady(&m.liouvillian)?.rho_st;
            let da = partial_trace(&rho, &[0])?.sub(&m.a_steady)?.trace_norm()?;
            let db = partial_trace(&rho, &[1])?.sub(&m.b_steady)?.trace_norm()?;
            worst_a = worst_a.max(da);
            if cfg.coupling() != 0.0 {
                best_b = best_b.max(db);
            }
        }
        ok &= worst_a <= 1e-7 && best_b > 1e-3;
        parts.push(format!("{name}: max A {worst_a:.1e}, max B {best_b:.2e}"));
    }
    Ok(verdict(ok, parts.join("; ")))
}

fn c2_optomech_moments() -> lindblad_core::Result<Verdict> {
    let c = OptomechanicalConfig {
        omega: 10.0,
        nu: 1.5,
        kappa: 1.0,
        gamma: 0.9,
        nbar: 0.2,
        mbar: 0.1,
        g: 0.2,
        n_trunc_a: 10,
        n_trunc_b: 12,
    };
    let m = build_model::<f64>(&ModelConfig::Optomechanical(c.clone()))?;
    let occ = occupations(&solve_steady(&m.liouvillian)?.rho_st)?;
    let (na, nb) = steady_optomech::<f64>(&c)?;
    let (ea, eb) = ((occ[0] - na).abs(), (occ[1] - nb).abs());
    Ok(verdict(ea <= 1e-6 && eb <= 1e-5, format!("|Δ a†a| {ea:.1e}, |Δ b†b| {eb:.1e}")))
}

fn c3_excitation() -> lindblad_core::Result<Verdict> {
    let mut worst = 0.0f64;
    for s in [0.0, 0.5, 0.9] {
        for om in [0.5, 2.0] {
            for nbar in [0.0, 0.5] {
                let c = SpinOscillatorConfig {
                    omega_a: 1.0,
                    omega_b: 1.0,
                    gamma_a: 1.0,
                    gamma_b: 1.0,
                    s,
                    nbar,
                    coupling: om,
                    n_trunc: 40,
                };
                let m = build_model::<f64>(&ModelConfig::SpinOscillator(c.clone()))?;
                let num = occupations(&solve_steady(&m.liouvillian)?.rho_st)?[1];
                worst = worst.max((num - steady_spin_osc_excitation::<f64>(&c)?).abs());
            }
        }
    }
    // s = 0, n̄ = 0 special case, non-unit rates.
    let c = SpinOscillatorConfig {
        omega_a: 1.0,
        omega_b: 2.0,
        gamma_a: 1.3,
        gamma_b: 0.5,
        s: 0.0,
        nbar: 0.0,
        coupling: 0.7,
        n_trunc: 30,
    };
    let special = 4.0 * c.coupling * c.coupling / (c.gamma_b * c.gamma_b + 4.0 * c.omega_b * c.omega_b);
    let formula = steady_spin_osc_excitation::<f64>(&c)?;
    let m = build_model::<f64>(&ModelConfig::SpinOscillator(c))?;
    let sim = occupations(&solve_steady(&m.liouvillian)?.rho_st)?[1];
    let es = (sim - special).abs();
    Ok(verdict(
        worst <= 1e-5 && formula == special && es <= 1e-6,
        format!("grid max {worst:.1e}; special formula exact {}, simulation {es:.1e}", formula == special),
    ))
}

fn c4_decay_bound() -> lindblad_core::Result<Verdict> {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let grid = linspace(0.0, 10.0, 101);
    let mut ok = true;
    let mut parts = Vec::new();
    for om in [0.0, 5.0] {
        let m = build_model::<f64>(&fig3_config(om, 10))?;
        let rho0 = product_pure_state(m.space(), &[vec![h, h], vec![C64::new(1.0, 0.0)]])?;
        let rows = check_decay_bound(&m, &rho0, &grid)?;
        let row = rows.iter().find(|r| r.l == 1).expect("sector 1 tracked");
        ok &= row.holds;
        parts.push(format!("Ω={om}: max excess {:.1e}", row.max_excess));
        if om == 0.0 {
            let fit = row.fitted_rate.unwrap_or(f64::NAN);
            let rel = (fit + 0.5).abs() / 0.5;
            ok &= rel <= 0.01;
            parts.push(format!("fitted rate {fit:.6} (rel {rel:.1e})"));
        }
    }
    Ok(verdict(ok, parts.join(", ")))
}

fn c5_appendix_a() -> lindblad_core::Result<Verdict> {
    let (mut res, mut gram) = (0.0f64, 0.0f64);
    for nbar in [0.3, 1.0] {
        let es = osc_eigensystem::<f64>(1.0, nbar, 5, 5, 40)?;
        for r in es.residuals()? {
            res = res.max(r.right).max(r.left);
        }
        gram = gram.max(identity_gap(&es.gram()?));
    }
    let mut spin = 0.0f64;
    for (g, m) in [(1.0, 0.0), (0.7, 0.3), (2.0, 0.8), (1.0, 1.0)] {
        let es = spin_eigensystem::<f64>(g, m)?;
        spin = spin.max(es.max_residual()?).max(identity_gap(&es.gram()));
    }
    Ok(verdict(
        res <= 1e-8 && gram <= 1e-8 && spin <= 1e-12,
        format!("osc residual {res:.1e}, Gram {gram:.1e}, spin {spin:.1e}"),
    ))
}

fn c6_appendix_b() -> lindblad_core::Result<Verdict> {
    let dim = 70;
    let (mut diag, mut off) = (0.0f64, 0.0f64);
    for eps in [0.0, 0.3, 0.7] {
        let rho = solve_steady(&pure_damping_generator(1.0, eps, dim)?)?.rho_st;
        let m = rho.matrix();
        for i in 0..dim {
            for j in 0..dim {
                if i == j {
                    let p = (1.0 - eps) * f64::powi(eps, i as i32);
                    diag = diag.max((m[(i, i)].re - p).abs() + m[(i, i)].im.abs());
                } else {
                    off = off.max(m[(i, j)].norm());
                }
            }
        }
    }
    // r⁰_{1,n} as a direct log-product, independent of the witness code.
    let n_max = 10_000;
    let w = off_diagonal_witness::<f64>(0.0, 1, n_max)?;
    let mut log_r = 0.0f64;
    let mut stirling_ok = true;
    for n in 1..=n_max {
        let j = (n - 1) as f64;
        log_r += (j + 0.5).ln() - 0.5 * ((j + 1.0) * (j + 2.0)).ln();
        stirling_ok &= log_r.exp() > stirling_lower_bound(n);
    }
    let mut coeff_ok = true;
    for l in 1..=5 {
        let c = DampingRecurrence::new(1.0, 0.5, l, 25)?.check_coefficients();
        coeff_ok &= c.positive;
    }
    Ok(verdict(
        diag <= 1e-9 && off <= 1e-10 && stirling_ok && w.exceeds_lower_bound && coeff_ok,
        format!(
            "diag {diag:.1e}, off {off:.1e}, Stirling to n={n_max} {}, exact positivity l<=5 n<=25 {coeff_ok}",
            stirling_ok && w.exceeds_lower_bound
        ),
    ))
}

fn c7_trotter() -> lindblad_core::Result<Verdict> {
    let steps = [4, 8, 16, 32, 64];
    let commuting = trotter_compare(&build_model::<f64>(&fig2_config(1.0, 0.0, 10))?, 1, 1.0, &steps)?;
    let comm_err = commuting.errors.iter().cloned().fold(0.0, f64::max);
    let coupled = trotter_compare(&build_model::<f64>(&fig2_config(1.0, 2.0, 10))?, 1, 1.0, &steps)?;
    let first_order = coupled.ratios.iter().all(|r| (r - 0.5).abs() <= 0.1);
    let coupled_err = coupled.errors.iter().cloned().fold(0.0, f64::max);
    let detail = format!(
        "commuting max error {comm_err:.1e}; coupled errors {:?}, ratios {:?}",
        coupled.errors.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>(),
        coupled.ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>()
    );
    if comm_err <= 1e-10 && first_order {
        return Ok(Verdict::Pass(detail));
    }
    // For a spin A the split part is −γ^A/2 times the identity on sector 1, so it
    // commutes with the rest and the product formula is exact at any coupling.
    // Confirm that mode, and show first order where the split does not commute.
    let opto = trotter_compare(&build_model::<f64>(&fig4_config(0.9, 4, 4))?, 1, 0.5, &[16, 32, 64])?;
    let opto_first = opto.ratios.iter().all(|r| (r - 0.5).abs() <= 0.1);
    if comm_err <= 1e-10 && coupled_err <= 1e-10 && opto_first {
        Ok(Verdict::Blocked(format!(
            "{detail}; split exact on spin sector 1; optomechanical ratios {:?}",
            opto.ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>()
        )))
    } else {
        Ok(Verdict::Fail(detail))
    }
}

fn c8_figures() -> lindblad_core::Result<Verdict> {
    let f1 = figure1(&linspace(0.0, 20.0, 21))?;
    let mut ok = true;
    let mut parts = Vec::new();
    for w in ["1", "10"] {
        let a = f1.column(&format!("sz_a_w{w}")).expect("column");
        let b = f1.column(&format!("sz_b_w{w}")).expect("column");
        let flat = a.iter().map(|v| (v - 0.6).abs()).fold(0.0, f64::max);
        let decreasing = b.windows(2).all(|p| p[1] < p[0]);
        ok &= flat <= 1e-10 && decreasing && b[b.len() - 1] < b[0] * 0.25 && b[b.len() - 1] > 0.0;
        parts.push(format!("ω={w}: |σz^A−0.6| {flat:.1e}, σz^B {:.3}→{:.1e} decreasing {decreasing}", b[0], b[b.len() - 1]));
    }
    let f4 = figure4(&linspace(0.0, 20.0, 41), 8, 10)?;
    for g in ["0", "0.9"] {
        let d = f4.column(&format!("distance_g{g}")).expect("column");
        let last = d[d.len() - 1];
        ok &= last < 1e-4;
        parts.push(format!("fig4 g={g}: {last:.1e} at κt=20"));
    }
    Ok(verdict(ok, parts.join("; ")))
}

fn main() {
    let criteria: [(&str, fn() -> lindblad_core::Result<Verdict>); 8] = [
        ("C1 invariance theorem", c1_invariance),
        ("C2 optomechanical moments", c2_optomech_moments),
        ("C3 spin-oscillator excitation", c3_excitation),
        ("C4 decay bounds", c4_decay_bound),
        ("C5 oscillator and spin eigensystems", c5_appendix_a),
        ("C6 pure-damping steady state", c6_appendix_b),
        ("C7 Trotter convergence", c7_trotter),
        ("C8 figure data", c8_figures),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let line = match run() {
            Ok(Verdict::Pass(d)) => format!("PASS {name}: {d}"),
            Ok(Verdict::Blocked(d)) => format!("FAIL {name} (unattainable as stated, blocking mode confirmed): {d}"),
            Ok(Verdict::Fail(d)) => {
                failed += 1;
                format!("FAIL {name}: {d}")
            }
            Err(e) => {
                failed += 1;
                format!("FAIL {name}: error {e}")
            }
        };
        println!("{line} [{:.1}s]", t.elapsed().as_secs_f64());
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
