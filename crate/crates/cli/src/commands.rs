use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};
use sn_core::asymptotics::{consistency_from_parts, window_select_with, Variant};
use sn_core::bounds::{inequality_margins, prop1_report};
use sn_core::exec::with_threads;
use sn_core::figures;
use sn_core::solver::{
    hartree_solve, hartree_sweep, solve_ground_state, GroundState, HartreeConfig,
};
use sn_core::{tail_fit, Execution, FunctionalReport, Quantity, RadialProfile, Sign, TailFit};

use crate::config::RunConfig;
use crate::error::CliError;

pub const GROUNDSTATE: &str = "groundstate.json";
pub const PROFILE_LNU: &str = "profile_lnu.csv";
pub const PROFILE_PSI: &str = "profile_psi.csv";

pub struct Context {
    pub cfg: RunConfig,
}

impl Context {
    fn exec(&self) -> Execution {
        if self.cfg.jobs > 1 {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }

    fn run<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        with_threads(self.cfg.jobs, f)
    }

    fn out_dir(&self) -> Result<&Path, CliError> {
        fs::create_dir_all(&self.cfg.out)?;
        Ok(&self.cfg.out)
    }
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn write_profile(path: &Path, p: &RadialProfile, comments: &[&str]) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    p.write_csv(&mut f, comments)?;
    f.flush()?;
    Ok(())
}

fn auto_fit(
    lnu: &RadialProfile,
    window: Option<(f64, f64)>,
    exec: Execution,
) -> sn_core::Result<TailFit> {
    let w = match window {
        Some(w) => w,
        None => window_select_with(lnu, exec)?,
    };
    tail_fit(lnu, w)
}

fn summary_line(gs: &GroundState) -> String {
    format!(
        "norm_sq = {:.6} ({:.4} pi)  E0_eq4 = {:.6}  lambda = {:.6}  w0* = {:.12}",
        gs.norm_sq,
        gs.norm_sq / std::f64::consts::PI,
        gs.e0_eq4,
        gs.lambda,
        gs.shoot_param
    )
}

/// Writes the ground state JSON and every profile of a solve into `dir`.
fn write_solution(
    dir: &Path,
    gs: &GroundState,
    command: &str,
    config: Value,
    fit_window: Option<(f64, f64)>,
    exec: Execution,
) -> Result<Option<TailFit>, CliError> {
    fs::create_dir_all(dir)?;
    let lnu = gs.ln_u()?;
    let fit = match auto_fit(&lnu, fit_window, exec) {
        Ok(f) => Some(f),
        Err(e) => {
            eprintln!("warning: no tail fit ({e}); the profile tail may be too short");
            None
        }
    };
    let mut doc = json!({
        "description": "ground state of -Δu + u = V u, -ΔV = u² (or its point-charge variant) in units with V(∞) = 0, E = -1",
        "command": command,
        "config": config,
    });
    let summary = gs.summary();
    for (k, v) in summary.as_object().expect("summary is an object") {
        doc[k] = v.clone();
    }
    doc["tail_fit"] = json!(fit);
    doc["consistency"] = json!(fit.as_ref().map(|f| sn_core::consistency_report(gs, f)));
    write_json(&dir.join(GROUNDSTATE), &doc)?;

    write_profile(
        &dir.join("profile_u.csv"),
        &gs.u,
        &["u(r) in units with E = -1, stored as ln u"],
    )?;
    write_profile(
        &dir.join(PROFILE_LNU),
        &lnu,
        &["ln u(r) in units with E = -1"],
    )?;
    write_profile(
        &dir.join("profile_W.csv"),
        &gs.w,
        &["W(r) = V(r) - 1, so W(inf) = -1"],
    )?;
    write_profile(
        &dir.join("profile_M.csv"),
        &gs.mass()?,
        &["mass function M(r) = 4 pi int_0^r u^2 s^2 ds"],
    )?;
    write_profile(
        &dir.join(PROFILE_PSI),
        &gs.psi,
        &["normalized psi_1(r) = u(r/b)/a, b = |u|^2/8pi, a = sqrt(8pi) b^2"],
    )?;
    if !gs.fixed_point.is_empty() {
        let mut w =
            csv::Writer::from_path(dir.join("fixedpoint.csv")).map_err(sn_core::Error::from)?;
        w.write_record(["iteration", "charge", "target", "relative_change"])
            .map_err(sn_core::Error::from)?;
        for it in &gs.fixed_point {
            w.write_record([
                it.iteration.to_string(),
                it.charge.to_string(),
                it.target.to_string(),
                it.relative_change.to_string(),
            ])
            .map_err(sn_core::Error::from)?;
        }
        w.flush()?;
    }
    Ok(fit)
}

pub fn solve(ctx: &Context) -> Result<(), CliError> {
    let out = ctx.out_dir()?.to_path_buf();
    let gs = solve_ground_state(&ctx.cfg.shooting)?;
    println!("{}", summary_line(&gs));
    let config = json!({ "shooting": ctx.cfg.shooting });
    if let Some(f) =
        ctx.run(|| write_solution(&out, &gs, "solve", config, ctx.cfg.fit_window, ctx.exec()))?
    {
        println!(
            "beta = {:.6}  A = {:.6}  window = [{:.3}, {:.3}]",
            f.beta, f.amplitude, f.window.0, f.window.1
        );
    }
    Ok(())
}

fn hartree_line(cfg: &HartreeConfig, gs: &GroundState, fit: Option<&TailFit>) -> String {
    let mut s = format!(
        "{} zeta = {}: {}  iterations = {}",
        cfg.sign,
        cfg.zeta,
        summary_line(gs),
        gs.fixed_point.len()
    );
    if let Some(f) = fit {
        let pred = sn_core::exponent_prediction(
            gs.norm_sq,
            Variant::Hartree {
                sign: cfg.sign,
                zeta: cfg.zeta,
            },
        );
        s += &format!("  beta = {:.6}  beta_pred = {pred:.6}", f.beta);
    }
    s
}

pub fn hartree(ctx: &Context) -> Result<(), CliError> {
    let out = ctx.out_dir()?.to_path_buf();
    let base = ctx.cfg.hartree_config();
    let zetas = if ctx.cfg.zetas.is_empty() {
        vec![base.zeta]
    } else {
        ctx.cfg.zetas.clone()
    };
    for &zeta in &zetas {
        HartreeConfig { zeta, ..base }.validate()?;
    }
    if zetas.len() == 1 {
        let cfg = HartreeConfig {
            zeta: zetas[0],
            ..base
        };
        let gs = hartree_solve(&cfg)?;
        let fit = ctx.run(|| {
            write_solution(
                &out,
                &gs,
                "hartree",
                json!({ "hartree": cfg }),
                ctx.cfg.fit_window,
                ctx.exec(),
            )
        })?;
        println!("{}", hartree_line(&cfg, &gs, fit.as_ref()));
        return Ok(());
    }
    let results = ctx.run(|| hartree_sweep(&base, &zetas, ctx.exec()));
    let mut first_err = None;
    for (&zeta, res) in zetas.iter().zip(results) {
        let cfg = HartreeConfig { zeta, ..base };
        match res {
            Ok(gs) => {
                let dir = out.join(format!("zeta_{zeta}"));
                let fit = ctx.run(|| {
                    write_solution(
                        &dir,
                        &gs,
                        "hartree",
                        json!({ "hartree": cfg }),
                        ctx.cfg.fit_window,
                        ctx.exec(),
                    )
                })?;
                println!("{}", hartree_line(&cfg, &gs, fit.as_ref()));
            }
            Err(e) => {
                eprintln!("{} zeta = {zeta}: {e}", cfg.sign);
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

/// The parts of `groundstate.json` later commands need.
#[derive(Debug, Deserialize)]
struct StoredSolve {
    norm_sq: f64,
    #[serde(rename = "E0_eq4")]
    e0: f64,
    sign: Sign,
    zeta: f64,
    coupling: f64,
    report: FunctionalReport,
    report_u: FunctionalReport,
}

impl StoredSolve {
    fn variant(&self) -> Variant {
        if self.sign == Sign::Plus && self.zeta == 0.0 && self.coupling == 0.0 {
            Variant::PlainEq1
        } else {
            Variant::Hartree {
                sign: self.sign,
                zeta: self.zeta,
            }
        }
    }
}

fn input_dir(ctx: &Context, input: &Option<PathBuf>) -> PathBuf {
    input.clone().unwrap_or_else(|| ctx.cfg.out.clone())
}

fn require(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Missing(format!("{}: {e}", path.display())))
}

fn load_solve(dir: &Path) -> Result<StoredSolve, CliError> {
    let f = require(&dir.join(GROUNDSTATE))?;
    serde_json::from_reader(std::io::BufReader::new(f)).map_err(|e| {
        CliError::Missing(format!(
            "{}: unreadable ground state ({e})",
            dir.join(GROUNDSTATE).display()
        ))
    })
}

fn load_profile(dir: &Path, name: &str, expect: Quantity) -> Result<RadialProfile, CliError> {
    let p = RadialProfile::read_csv(std::io::BufReader::new(require(&dir.join(name))?))?;
    if p.quantity() != expect {
        return Err(CliError::Usage(format!(
            "{} holds {}, expected {}",
            dir.join(name).display(),
            p.quantity().label(),
            expect.label()
        )));
    }
    Ok(p)
}

pub fn fit(ctx: &Context, input: &Option<PathBuf>) -> Result<(), CliError> {
    let dir = input_dir(ctx, input);
    let lnu = load_profile(&dir, PROFILE_LNU, Quantity::LnU)?;
    let f = ctx.run(|| auto_fit(&lnu, ctx.cfg.fit_window, ctx.exec()))?;
    let out = ctx.out_dir()?;
    write_json(
        &out.join("fit.json"),
        &json!({ "description": "least-squares tail law u ≈ A r^beta e^-r", "fit": f }),
    )?;
    println!(
        "beta = {:.6}  A = {:.6}  window = [{:.3}, {:.3}]  drift = {:.2e}  rms = {:.2e}",
        f.beta, f.amplitude, f.window.0, f.window.1, f.drift, f.rms_residual
    );
    Ok(())
}

pub fn bounds(ctx: &Context, from: &Option<PathBuf>) -> Result<(), CliError> {
    let measured = match from {
        Some(dir) => Some(load_solve(dir)?.norm_sq),
        None => ctx.cfg.measured_norm,
    };
    let r = prop1_report(measured)?;
    let mut doc = serde_json::to_value(r)?;
    doc["description"] = json!("closed-form bounds on the ground-state norm and energy");
    write_json(&ctx.out_dir()?.join("bounds.json"), &doc)?;
    print!("{}", r.to_text());
    Ok(())
}

pub fn report(ctx: &Context, input: &Option<PathBuf>) -> Result<(), CliError> {
    let dir = input_dir(ctx, input);
    let stored = load_solve(&dir)?;
    let lnu = load_profile(&dir, PROFILE_LNU, Quantity::LnU)?;
    let psi = load_profile(&dir, PROFILE_PSI, Quantity::Psi)?;
    let f = ctx.run(|| auto_fit(&lnu, ctx.cfg.fit_window, ctx.exec()))?;
    let consistency = consistency_from_parts(
        stored.norm_sq,
        stored.variant(),
        &f,
        &stored.report,
        &stored.report_u,
        stored.e0,
    );
    let bounds = prop1_report(Some(stored.norm_sq))?;
    let margins = inequality_margins(&psi)?;
    let doc = json!({
        "description": "tail-law consistency, prefactor classification and norm bounds of a stored solve",
        "variant": stored.variant(),
        "classification": consistency.classification,
        "consistency": consistency,
        "bounds": bounds,
        "margins_psi": margins,
    });
    write_json(&ctx.out_dir()?.join("report.json"), &doc)?;
    println!(
        "classification = {}  beta_fit = {:.6}  beta_pred = {:.6}  sandwich_ok = {}  upper/measured = {:.5}",
        consistency.classification,
        consistency.beta_fit,
        consistency.beta_pred,
        bounds.sandwich_ok.unwrap_or(false),
        bounds.upper_over_measured.unwrap_or(f64::NAN)
    );
    Ok(())
}

pub fn plotdata(ctx: &Context, input: &Option<PathBuf>) -> Result<(), CliError> {
    let dir = input_dir(ctx, input);
    let stored = load_solve(&dir)?;
    let lnu = load_profile(&dir, PROFILE_LNU, Quantity::LnU)?;
    let f = ctx.run(|| auto_fit(&lnu, ctx.cfg.fit_window, ctx.exec()))?;
    let out = ctx.out_dir()?;
    for fig in figures::all(&lnu, stored.norm_sq, &f, ctx.cfg.plot_r_max)? {
        let mut w = BufWriter::new(File::create(out.join(format!("{}.csv", fig.name)))?);
        fig.write_csv(&mut w)?;
        w.flush()?;
        if ctx.cfg.svg {
            fs::write(out.join(format!("{}.svg", fig.name)), fig.to_svg())?;
        }
        println!("{}: {} rows", fig.name, fig.rows.len());
    }
    Ok(())
}
