use std::f64::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;
use sn_core::ode::OdeState;
use sn_core::solver::{
    bisect_ground, bracket_scan, hartree_solve, shoot_once, sn_rhs, solve_ground_state,
    GroundState, HartreeConfig, ScaleFreeSystem, ShootingConfig, ShotClass, Sign,
};
use sn_core::{Error, Execution};

fn ground() -> &'static GroundState {
    static GS: OnceLock<GroundState> = OnceLock::new();
    GS.get_or_init(|| solve_ground_state(&ShootingConfig::default()).unwrap())
}

#[test]
fn ground_state_shape() {
    let gs = ground();
    gs.check_invariants().unwrap();
    let slopes = gs.u.slopes().unwrap();
    assert!(slopes[0].abs() < 1e-12);
    assert!(gs.u_second_center < 0.0);
    // W → −1 with the Coulomb correction ‖u‖₂²/(4πr)
    let r_end = gs.w.grid().last();
    let w_end = *gs.w.values().last().unwrap();
    assert!((w_end - (-1.0 + gs.norm_sq / (4.0 * PI * r_end))).abs() < 1e-6);
    assert!(gs.slope_mismatch.abs() < 1e-8);
    assert!((gs.e0_eq4 + (8.0 * PI / gs.norm_sq).powi(2)).abs() < 1e-14);
}

#[test]
fn solve_is_deterministic() {
    let again = solve_ground_state(&ShootingConfig::default()).unwrap();
    assert_eq!(again.norm_sq.to_bits(), ground().norm_sq.to_bits());
    assert_eq!(again.u, ground().u);
}

#[test]
fn shots_on_either_side_of_the_root() {
    let cfg = ShootingConfig::default();
    let out = bisect_ground(&cfg).unwrap();
    assert!(out.hi - out.lo <= 2e-15);
    assert_ne!(out.lo_class, out.hi_class);
    let below = shoot_once(out.lo - 1e-6, &cfg).unwrap().class();
    let above = shoot_once(out.hi + 1e-6, &cfg).unwrap().class();
    assert_eq!(below, out.lo_class);
    assert_eq!(above, out.hi_class);
}

#[test]
fn same_class_bracket_is_rejected() {
    let cfg = ShootingConfig {
        w_lo: 2.0,
        w_hi: 3.0,
        ..ShootingConfig::default()
    };
    match bisect_ground(&cfg) {
        Err(e @ Error::InvalidBracket { .. }) => assert_eq!(e.kind(), "invalid-bracket"),
        other => panic!("expected an invalid bracket, got {other:?}"),
    }
}

#[test]
fn bracket_scan_is_identical_in_both_modes() {
    let cfg = ShootingConfig::default();
    let ws: Vec<f64> = (0..24).map(|i| 0.5 + 0.1 * i as f64).collect();
    let seq = bracket_scan(ScaleFreeSystem::PLAIN, &ws, &cfg, Execution::Sequential).unwrap();
    let par = bracket_scan(ScaleFreeSystem::PLAIN, &ws, &cfg, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    // one class change, at the ground-state parameter
    let changes = seq.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(changes, 1);
    assert!(seq.iter().all(|c| *c != ShotClass::Decayed));
}

#[test]
fn zero_coupling_hartree_is_the_plain_state() {
    let h = hartree_solve(&HartreeConfig {
        sign: Sign::Plus,
        zeta: 0.0,
        ..HartreeConfig::default()
    })
    .unwrap();
    assert!((h.norm_sq - ground().norm_sq).abs() < 1e-9 * ground().norm_sq);
    assert_eq!(h.fixed_point.len(), 1);
}

#[test]
fn rhs_rejects_the_origin() {
    let s = OdeState::new(0.0, vec![0.0; 5]).unwrap();
    assert!(sn_rhs(0.0, &s).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn shots_are_scale_covariant(w in 0.6f64..2.5, k in 0.5f64..4.0) {
        let base = ShootingConfig::default();
        let a = shoot_once(w, &base).unwrap();
        let b = shoot_once(w, &ShootingConfig { u0: k, ..base }).unwrap();
        prop_assert_eq!(a.class(), b.class());
    }

    #[test]
    fn rhs_is_the_system_rhs(r in 0.01f64..20.0, y in prop::array::uniform5(-3.0f64..3.0)) {
        let s = OdeState::new(r, y.to_vec()).unwrap();
        let got = sn_rhs(r, &s).unwrap();
        let mut want = vec![0.0; 5];
        ScaleFreeSystem::PLAIN.rhs(r, &y, &mut want);
        prop_assert_eq!(got, want);
    }
}
