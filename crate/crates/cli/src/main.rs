use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use lindblad_core::evolve::{evolve_model, product_pure_state};
use lindblad_core::figures::{coherent_amplitudes, default_figure, linspace, sector_table, spectrum_table, FigureTable};
use lindblad_core::hilbert::{partial_trace, SubsystemKind};
use lindblad_core::steady::{model_steady, occupations};
use lindblad_core::verify::verify;
use lindblad_core::{build_model, Matrix64, Model64, ModelConfig, C64};
use serde_json::json;

#[derive(Parser)]
#[command(name = "lindblad", version, about = "Coupled open-system dynamics and invariant steady states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Model configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also certify the oscillator truncation by rerunning with 5 more levels.
    #[arg(long)]
    trunc_check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Initial {
    /// Every factor in its lowest level.
    Ground,
    /// A in (|0⟩+|1⟩)/√2, B in its lowest level.
    Superposition,
    /// Oscillators in a coherent state of amplitude `--alpha`, spins in level 0.
    Coherent,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the full density matrix and write trajectory.csv.
    Run {
        #[command(flatten)]
        common: Common,
        /// Final time in units of the reference rate.
        #[arg(long, default_value_t = 10.0)]
        t_final: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Initial::Superposition)]
        initial: Initial,
        #[arg(long, default_value_t = 0.15)]
        alpha: f64,
    },
    /// Solve for the steady state; writes steady.json and CSV matrices.
    Steady {
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form local eigenvalues and sector decay rates as CSV.
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Run the invariant suite; prints JSON, exits 1 on any failure.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Data for figure 1-4 with the captioned parameters.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        which: u8,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 41)]
        samples: usize,
    },
}

fn load(path: &Path) -> anyhow::Result<ModelConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ModelConfig::from_json(&text)?)
}

fn write(dir: &Path, name: &str, body: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let p = dir.join(name);
    fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
    Ok(p)
}

fn write_table(dir: &Path, t: &FigureTable) -> anyhow::Result<()> {
    let p = write(dir, &format!("{}.csv", t.name), &t.to_csv())?;
    eprintln!("wrote {}", p.display());
    Ok(())
}

/// One row per matrix row: `row,c0_re,c0_im,c1_re,...`.
fn matrix_csv(m: &Matrix64) -> String {
    let mut out = String::from("row");
    for j in 0..m.cols() {
        out.push_str(&format!(",c{j}_re,c{j}_im"));
    }
    out.push('\n');
    for i in 0..m.rows() {
        out.push_str(&i.to_string());
        for z in m.row(i) {
            out.push_str(&format!(",{:.15e},{:.15e}", z.re, z.im));
        }
        out.push('\n');
    }
    out
}

fn initial_state(model: &Model64, initial: Initial, alpha: f64) -> anyhow::Result<lindblad_core::Operator64> {
    let one = C64::new(1.0, 0.0);
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let amps: Vec<Vec<C64>> = model
        .space()
        .factors()
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let d = f.dim();
            let mut v = vec![C64::new(0.0, 0.0); d];
            match (initial, f.kind()) {
                (Initial::Coherent, SubsystemKind::Oscillator) => return coherent_amplitudes(C64::new(alpha, 0.0), d),
                (Initial::Superposition, _) if k == 0 => {
                    v[0] = h;
                    v[1] = h;
                }
                _ => v[0] = one,
            }
            v
        })
        .collect();
    Ok(product_pure_state(model.space(), &amps)?)
}

fn run(common: &Common, t_final: f64, samples: usize, initial: Initial, alpha: f64) -> anyhow::Result<()> {
    if !(t_final > 0.0) || samples < 2 {
        bail!("need t_final > 0 and at least 2 samples");
    }
    let cfg = load(&common.config)?;
    let model = build_model::<f64>(&cfg)?;
    let rho0 = initial_state(&model, initial, alpha)?;
    let rec = evolve_model(&model, &rho0, &linspace(0.0, t_final, samples))?;
    let mut header = vec![format!("{}_t", rec.time_unit)];
    for (name, _) in &rec.observables {
        header.push(format!("{name}_re"));
        header.push(format!("{name}_im"));
    }
    header.push("distance_a".into());
    for l in rec.q_norms.keys() {
        header.push(format!("q{l}_norm"));
    }
    let mut body = header.join(",");
    body.push('\n');
    for (k, t) in rec.times.iter().enumerate() {
        let mut cells = vec![format!("{t:.12e}")];
        for (_, v) in &rec.observables {
            cells.push(format!("{:.12e}", v[k].re));
            cells.push(format!("{:.12e}", v[k].im));
        }
        cells.push(format!("{:.12e}", rec.trace_norm_distance_to_a_steady[k]));
        for v in rec.q_norms.values() {
            cells.push(format!("{:.12e}", v[k]));
        }
        body.push_str(&cells.join(","));
        body.push('\n');
    }
    let p = write(&common.out, "trajectory.csv", &body)?;
    eprintln!("wrote {} (max trace drift {:.2e})", p.display(), rec.max_trace_drift);
    if common.trunc_check && cfg.has_oscillator() {
        // Same trajectory with 5 more levels per oscillator, compared on final occupations.
        let big = build_model::<f64>(&cfg.with_truncation_increase(5))?;
        let rho_big = initial_state(&big, initial, alpha)?;
        let end = evolve_model(&big, &rho_big, &[0.0, t_final])?;
        let a = occupations(&rec.final_state)?;
        let b = occupations(&end.final_state)?;
        let shift = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs() / x.abs().max(y.abs()).max(1e-12)));
        eprintln!("truncation shift {shift:.3e}");
    }
    Ok(())
}

fn steady(common: &Common) -> anyhow::Result<()> {
    let cfg = load(&common.config)?;
    let model = build_model::<f64>(&cfg)?;
    let rep = model_steady(&model, common.trunc_check)?;
    let rho_a = partial_trace(&rep.rho_st, &[0])?;
    let rho_b = partial_trace(&rep.rho_st, &[1])?;
    let summary = json!({
        "config": cfg,
        "method": rep.method,
        "residual": rep.residual,
        "clipped_weight": rep.clipped_weight,
        "min_eigenvalue": rep.min_eigenvalue,
        "truncation_shift": rep.truncation_shift,
        "occupations": occupations(&rep.rho_st)?,
        "reduced_a_distance": rho_a.sub(&model.a_steady)?.trace_norm()?,
        "reduced_b_distance": rho_b.sub(&model.b_steady)?.trace_norm()?,
    });
    write(&common.out, "steady.json", &serde_json::to_string_pretty(&summary)?)?;
    write(&common.out, "rho_st.csv", &matrix_csv(rep.rho_st.matrix()))?;
    write(&common.out, "rho_a.csv", &matrix_csv(rho_a.matrix()))?;
    write(&common.out, "rho_b.csv", &matrix_csv(rho_b.matrix()))?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run { common, t_final, samples, initial, alpha } => run(common, *t_final, *samples, *initial, *alpha),
        Command::Steady { common } => steady(common),
        Command::Spectrum { common } => load(&common.config).and_then(|cfg| {
            write_table(&common.out, &spectrum_table(&cfg)?)?;
            write_table(&common.out, &sector_table(&cfg)?)
        }),
        Command::Verify { common } => {
            let r = load(&common.config).and_then(|cfg| Ok(verify(&cfg, common.trunc_check)?));
            match r {
                Ok(report) => {
                    let text = report.to_json();
                    println!("{text}");
                    if let Err(e) = write(&common.out, "verify.json", &text) {
                        eprintln!("error: {e:#}");
                        return ExitCode::from(2);
                    }
                    return if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) };
                }
                Err(e) => Err(e),
            }
        }
        Command::Figure { which, out, samples } => {
            default_figure(*which, *samples).map_err(Into::into).and_then(|t| write_table(out, &t))
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
