use std::sync::OnceLock;

use proptest::prelude::*;
use sn_core::asymptotics::{
    exponent_prediction, tail_fit, window_select_with, Classification, Variant,
};
use sn_core::radial::{Quantity, RadialGrid, RadialProfile};
use sn_core::solver::{solve_ground_state, GroundState, ShootingConfig, Sign};
use sn_core::{consistency_report, Error, Execution};

fn ground() -> &'static GroundState {
    static GS: OnceLock<GroundState> = OnceLock::new();
    GS.get_or_init(|| solve_ground_state(&ShootingConfig::default()).unwrap())
}

#[test]
fn short_window_matches_the_whittaker_oracle() {
    // OLS of ln u + r on ln r over [20, 40] for u ∝ W_{1+β,1/2}(2r), β = 0.7527
    let oracle = 0.7777;
    let fit = tail_fit(&ground().ln_u().unwrap(), (20.0, 40.0)).unwrap();
    assert!((fit.beta - oracle).abs() < 3e-3, "beta {}", fit.beta);
    assert!(fit.drift > 0.005);
}

#[test]
fn selected_window_is_stable_and_consistent() {
    let lnu = ground().ln_u().unwrap();
    let w_seq = window_select_with(&lnu, Execution::Sequential).unwrap();
    let w_par = window_select_with(&lnu, Execution::Parallel).unwrap();
    assert_eq!(w_seq, w_par);
    let fit = tail_fit(&lnu, w_seq).unwrap();
    assert!(fit.drift < 0.005 && fit.rms_residual < 1e-3);
    let rep = consistency_report(ground(), &fit);
    assert_eq!(rep.classification, Classification::IncreasingConcave);
    assert!(rep.beta_abs_diff < 0.005);
    let d = rep.derivative_beta.unwrap();
    assert!((d - fit.beta).abs() < 0.02);
}

#[test]
fn short_profiles_have_no_window() {
    let grid = RadialGrid::uniform(0.0, 20.0, 1001).unwrap();
    let p = RadialProfile::from_fn(grid, Quantity::LnU, |r| -r + 0.5 * r.ln().max(-50.0)).unwrap();
    assert!(matches!(
        window_select_with(&p, Execution::Sequential),
        Err(Error::InvalidWindow(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_power_laws_are_recovered(a in 0.5f64..5.0, beta in -1.5f64..2.5) {
        let grid = RadialGrid::uniform(0.0, 200.0, 10_001).unwrap();
        let p = RadialProfile::from_fn(grid, Quantity::LnU, |r| {
            if r > 0.0 { a.ln() + beta * r.ln() - r } else { 0.0 }
        }).unwrap();
        let fit = tail_fit(&p, (20.0, 190.0)).unwrap();
        prop_assert!((fit.beta - beta).abs() < 1e-9);
        prop_assert!((fit.amplitude / a - 1.0).abs() < 1e-8);
        prop_assert!(fit.drift < 1e-9);
    }

    #[test]
    fn prediction_is_affine_in_the_norm(n1 in 1.0f64..100.0, n2 in 1.0f64..100.0, zeta in 0.0f64..3.0) {
        for sign in [Sign::Plus, Sign::Minus] {
            let v = Variant::Hartree { sign, zeta };
            let (b1, b2) = (exponent_prediction(n1, v), exponent_prediction(n2, v));
            let mid = exponent_prediction(0.5 * (n1 + n2), v);
            prop_assert!((mid - 0.5 * (b1 + b2)).abs() < 1e-12);
            prop_assert!((exponent_prediction(0.0, v) + 1.0).abs() < 1e-15);
            // doubling the weight doubles β + 1
            let w = zeta + sign.factor();
            let doubled = exponent_prediction(2.0 * n1, v);
            prop_assert!(((doubled + 1.0) - 2.0 * (b1 + 1.0)).abs() < 1e-12 * (1.0 + w.abs() * n1));
        }
        prop_assert_eq!(
            exponent_prediction(n1, Variant::PlainEq1),
            exponent_prediction(n1, Variant::Hartree { sign: Sign::Plus, zeta: 0.0 })
        );
    }

    #[test]
    fn classification_follows_beta(beta in -3.0f64..3.0) {
        let c = Classification::of(beta);
        let expected = if beta.abs() <= 0.02 {
            Classification::PureExponential
        } else if beta < 0.0 {
            Classification::DecayingPrefactor
        } else if (beta - 1.0).abs() <= 0.02 {
            Classification::Linear
        } else if beta < 1.0 {
            Classification::IncreasingConcave
        } else {
            Classification::IncreasingConvex
        };
        prop_assert_eq!(c, expected);
    }
}
