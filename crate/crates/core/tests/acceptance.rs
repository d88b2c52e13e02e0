//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criterion 9 cannot pass: the HLS constant of the lower-bound chain is
//! below the sharp constant, so the normalized Gaussian and ψ₁ both violate
//! the HLS inequality as stated. It is evaluated and printed like every
//! other criterion, and listed in `KNOWN_FAILING` so the target still
//! succeeds while that stays the only failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use sn_core::asymptotics::Classification;
use sn_core::bounds::{
    gaussian_f, gaussian_profile, gaussian_upper_bound, inequality_margins, prop1_report,
};
use sn_core::figures;
use sn_core::ode::{ck45_step, OdeState};
use sn_core::radial::{coulomb_self_energy, density, kinetic_energy, lp_norm};
use sn_core::solver::{
    hartree_solve, solve_ground_state, GroundState, HartreeConfig, ShootingConfig, Sign,
};
use sn_core::{consistency_report, exponent_prediction, tail_fit, window_select, TailFit};

const KNOWN_FAILING: &[usize] = &[9];

struct Outcome {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn fitted(gs: &GroundState) -> TailFit {
    let lnu = gs.ln_u().expect("log profile");
    tail_fit(&lnu, window_select(&lnu).expect("window")).expect("fit")
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Fixed-step order of the integrator on `y' = y` over `[0, 1]`.
fn exponential_order() -> f64 {
    let f = |_: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0];
    let err = |n: usize| {
        let h = 1.0 / n as f64;
        let mut s = OdeState::new(0.0, vec![1.0]).unwrap();
        for _ in 0..n {
            s = ck45_step(&f, &s, h).unwrap().0;
        }
        (s.y[0] - 1f64.exp()).abs()
    };
    let orders: Vec<f64> = [4usize, 8, 16]
        .iter()
        .map(|&n| (err(n) / err(2 * n)).log2())
        .collect();
    orders.into_iter().fold(f64::INFINITY, f64::min)
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut out: Vec<Outcome> = Vec::new();
    let mut push = |id, title, pass, detail: String| {
        out.push(Outcome {
            id,
            title,
            pass,
            detail,
        })
    };

    let t = Instant::now();
    let gs = solve_ground_state(&ShootingConfig::default()).expect("default solve");
    let solve_time = t.elapsed().as_secs_f64();
    gs.check_invariants().expect("invariants");
    let fit = fitted(&gs);
    let report = consistency_report(&gs, &fit);

    // 1
    push(
        1,
        "norm reproduction",
        (gs.norm_sq - 44.08).abs() <= 0.22,
        format!("norm_sq = {:.6} (= {:.4} pi)", gs.norm_sq, gs.norm_sq / PI),
    );

    // 2
    push(
        2,
        "eigenvalue cross-check",
        (gs.e0_eq4 + 0.3257).abs() <= 0.0015 && solve_time < 60.0,
        format!("E0 = {:.6}, solve time {solve_time:.2} s", gs.e0_eq4),
    );

    // 3
    push(
        3,
        "tail law",
        (fit.beta - 0.754).abs() <= 0.010 && (fit.amplitude - 3.37).abs() <= 0.15,
        format!(
            "beta = {:.5}, A = {:.4}, window [{:.2}, {:.2}]",
            fit.beta, fit.amplitude, fit.window.0, fit.window.1
        ),
    );

    // 4
    push(
        4,
        "exponent self-consistency",
        report.beta_abs_diff < 0.005,
        format!(
            "|beta_fit - beta_pred| = {:.5} (pred {:.5})",
            report.beta_abs_diff, report.beta_pred
        ),
    );

    // 5
    let b = prop1_report(Some(gs.norm_sq)).expect("bounds");
    let lower_exact = 2f64.cbrt() * 3.0 * PI * PI;
    let upper_exact = 8.0 * PI.powf(1.5);
    let ratio = b.upper_over_measured.unwrap();
    push(
        5,
        "norm sandwich",
        rel(b.norm_lower, lower_exact) < 1e-9
            && rel(b.norm_upper, upper_exact) < 1e-9
            && b.sandwich_ok == Some(true)
            && (ratio - 1.011).abs() <= 0.003,
        format!(
            "{:.6} <= {:.4} <= {:.6}, upper/measured = {ratio:.5}",
            b.norm_lower, gs.norm_sq, b.norm_upper
        ),
    );

    // 6
    push(
        6,
        "certificate decimals",
        (b.f_lower + 0.1513).abs() < 5e-5 && (b.e0_lower + 0.4539).abs() < 5e-5,
        format!("F_lower = {:.7}, E0_lower = {:.7}", b.f_lower, b.e0_lower),
    );

    // 7
    let virial = report
        .virial_residual
        .unwrap()
        .abs()
        .max(report.virial_residual_u.unwrap().abs());
    let nehari = report.nehari_residual.unwrap().abs();
    let psi_norm = lp_norm(&gs.psi, 2.0).unwrap();
    push(
        7,
        "identity suite",
        virial < 1e-5
            && nehari < 1e-5
            && report.energy_closure < 1e-4
            && (psi_norm - 1.0).abs() < 1e-6,
        format!(
            "virial {virial:.2e}, nehari {nehari:.2e}, closure {:.2e}, |psi|_2 - 1 = {:.2e}",
            report.energy_closure,
            psi_norm - 1.0
        ),
    );

    // 8
    let gb = gaussian_upper_bound();
    let mut worst: f64 = 0.0;
    for radius in [1.0, 2.0, gb.r_star] {
        let psi = gaussian_profile(radius, 14.0 * radius, 40_001).unwrap();
        let k = kinetic_energy(&psi).unwrap();
        let d = coulomb_self_energy(&density(&psi).unwrap()).unwrap();
        worst = worst
            .max((k - 1.5 / (radius * radius)).abs())
            .max((d - (2.0 / PI).sqrt() / radius).abs());
    }
    let min_err = (gb.f_min + 1.0 / (3.0 * PI)).abs();
    let closed_min_err = (gaussian_f(3.0 * (PI / 2.0).sqrt()).unwrap() + 1.0 / (3.0 * PI)).abs();
    push(
        8,
        "Gaussian oracle",
        worst < 1e-8
            && min_err < 1e-10
            && closed_min_err < 1e-10
            && rel(gb.norm_upper, upper_exact) < 1e-12,
        format!(
            "quadrature err {worst:.2e}, min err {min_err:.2e}, norm_upper = {:.9}",
            gb.norm_upper
        ),
    );

    // 9
    let mg = inequality_margins(&gaussian_profile(1.0, 14.0, 40_001).unwrap()).unwrap();
    let m1 = inequality_margins(&gs.psi).unwrap();
    push(
        9,
        "inequality margins",
        mg.all_hold() && m1.all_hold(),
        format!(
            "Gaussian sobolev {:.4} hls {:.4} holder {:.4}; psi1 sobolev {:.4} hls {:.4} holder {:.4}; \
             hls with sharp constant {:.4} / {:.4}",
            mg.sobolev, mg.hls, mg.holder, m1.sobolev, m1.hls, m1.holder, mg.hls_sharp, m1.hls_sharp
        ),
    );

    // 10
    let fig4 = figures::prefactor(&gs.ln_u().unwrap(), 40.0).unwrap();
    let (min_first, max_second) = figures::shape_on(&fig4, 5.0, 40.0);
    push(
        10,
        "classification",
        report.classification == Classification::IncreasingConcave
            && min_first > 0.0
            && max_second <= 0.0,
        format!(
            "{}, min first difference {min_first:.3e}, max second difference {max_second:.3e}",
            report.classification
        ),
    );

    // 11
    let mut ok = true;
    let mut detail = Vec::new();
    for (sign, zeta) in [(Sign::Plus, 0.5), (Sign::Minus, 2.0)] {
        let cfg = HartreeConfig {
            sign,
            zeta,
            ..HartreeConfig::default()
        };
        match hartree_solve(&cfg) {
            Ok(h) => {
                let f = fitted(&h);
                let pred = exponent_prediction(h.norm_sq, sn_core::asymptotics::variant_of(&h));
                let e = rel(f.beta, pred);
                ok &= e < 0.05;
                detail.push(format!(
                    "{sign} {zeta}: beta {:.5} vs {pred:.5} ({:.2}%)",
                    f.beta,
                    100.0 * e
                ));
            }
            Err(e) => {
                ok = false;
                detail.push(format!("{sign} {zeta}: {e}"));
            }
        }
    }
    let small = HartreeConfig {
        sign: Sign::Plus,
        zeta: 1e-6,
        ..HartreeConfig::default()
    };
    match hartree_solve(&small) {
        Ok(h) => {
            let f = fitted(&h);
            ok &= (h.norm_sq - 44.08).abs() <= 0.22 && (h.norm_sq - gs.norm_sq).abs() <= 0.22;
            ok &= (f.beta - 0.754).abs() <= 0.010 && (f.amplitude - 3.37).abs() <= 0.15;
            detail.push(format!(
                "plus 1e-6: norm {:.5}, beta {:.5}",
                h.norm_sq, f.beta
            ));
        }
        Err(e) => {
            ok = false;
            detail.push(format!("plus 1e-6: {e}"));
        }
    }
    push(11, "Hartree exponent law", ok, detail.join("; "));

    // 12
    let g2 = solve_ground_state(&ShootingConfig {
        u0: 2.0,
        ..ShootingConfig::default()
    })
    .expect("u0 = 2");
    let mut cov: f64 = rel(g2.norm_sq, gs.norm_sq);
    for r in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0] {
        let a = gs.u.interpolate(r).unwrap();
        let c = g2.u.interpolate(r).unwrap();
        cov = cov.max((a - c).abs());
    }
    let base = ShootingConfig::default();
    let halved = ShootingConfig {
        step: base.step.scaled_tolerances(0.5),
        bisect_tol: base.bisect_tol * 0.5,
        match_tol: base.match_tol * 0.5,
        ..base
    };
    let gh = solve_ground_state(&halved).expect("halved tolerances");
    let tol_change = rel(gh.norm_sq, gs.norm_sq);
    let order = exponential_order();
    push(
        12,
        "numerics hygiene",
        cov < 1e-4 && tol_change < 5e-4 && order >= 4.5,
        format!("u0 covariance {cov:.2e}, halved tolerances {tol_change:.2e}, order {order:.3}"),
    );

    let mut unexpected = 0;
    for o in &out {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_FAILING.contains(&o.id) {
            " (known)"
        } else {
            ""
        };
        println!(
            "criterion {:>2} {:<26} {verdict}{note}  {}",
            o.id, o.title, o.detail
        );
        if !o.pass && !KNOWN_FAILING.contains(&o.id) {
            unexpected += 1;
        }
    }
    let passed = out.iter().filter(|o| o.pass).count();
    println!(
        "acceptance: {passed}/{} passed, {unexpected} unexpected failures, {:.1} s",
        out.len(),
        started.elapsed().as_secs_f64()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
