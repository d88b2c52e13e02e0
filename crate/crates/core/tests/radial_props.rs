use std::f64::consts::PI;

use proptest::prelude::*;
use sn_core::radial::{
    coulomb_self_energy, density, functional_report, kinetic_energy, l2_norm_sq, lp_norm,
    mass_function, FunctionalMode, Quantity, RadialGrid, RadialProfile,
};

fn bump(a: f64, b: f64, r_max: f64, n: usize) -> RadialProfile {
    let grid = RadialGrid::uniform(0.0, r_max, n).unwrap();
    RadialProfile::from_fn(grid, Quantity::U, |r| (1.0 + b * r) * (-a * r * r).exp()).unwrap()
}

fn scaled(u: &RadialProfile, lambda: f64) -> RadialProfile {
    let grid = u.grid().scaled(1.0 / lambda).unwrap();
    let values = u.values().iter().map(|v| lambda * lambda * v).collect();
    RadialProfile::linear(grid, values, Quantity::U).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mass_function_is_nondecreasing(a in 0.2f64..3.0, b in 0.0f64..2.0) {
        let m = mass_function(&bump(a, b, 12.0, 601)).unwrap();
        prop_assert!(m.values()[0] == 0.0);
        prop_assert!(m.values().windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn l2_norm_is_the_last_mass_value(a in 0.2f64..3.0, b in 0.0f64..2.0) {
        let u = bump(a, b, 12.0, 601);
        let m = mass_function(&u).unwrap();
        let n = l2_norm_sq(&u, None).unwrap();
        prop_assert_eq!(n, *m.values().last().unwrap());
        let l2 = lp_norm(&u, 2.0).unwrap();
        prop_assert!((l2 * l2 - n).abs() <= 1e-12 * n);
    }

    #[test]
    fn coulomb_energy_is_quadratic_in_the_density(a in 0.2f64..3.0, c in 0.1f64..10.0) {
        let rho = density(&bump(a, 0.5, 12.0, 601)).unwrap();
        let scaled_rho = RadialProfile::linear(
            rho.grid().clone(),
            rho.values().iter().map(|v| c * v).collect(),
            Quantity::Rho,
        ).unwrap();
        let d = coulomb_self_energy(&rho).unwrap();
        let dc = coulomb_self_energy(&scaled_rho).unwrap();
        prop_assert!((dc - c * c * d).abs() <= 1e-12 * dc.abs());
    }

    #[test]
    fn functionals_follow_the_dilation_weights(a in 0.3f64..2.0, b in 0.0f64..1.0, lambda in 0.25f64..4.0) {
        let u = bump(a, b, 14.0, 701);
        let ul = scaled(&u, lambda);
        let k = kinetic_energy(&u).unwrap();
        let n = l2_norm_sq(&u, None).unwrap();
        let d = coulomb_self_energy(&density(&u).unwrap()).unwrap();
        prop_assert!((kinetic_energy(&ul).unwrap() / (lambda.powi(3) * k) - 1.0).abs() < 1e-10);
        prop_assert!((l2_norm_sq(&ul, None).unwrap() / (lambda * n) - 1.0).abs() < 1e-10);
        let dl = coulomb_self_energy(&density(&ul).unwrap()).unwrap();
        prop_assert!((dl / (lambda.powi(3) * d) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn efrak_report_of_a_gaussian() {
    // u = e^{-r²/2}, with exact slopes
    let u = bump(0.5, 0.0, 14.0, 7001);
    let slopes = u
        .nodes()
        .iter()
        .zip(u.values())
        .map(|(r, v)| -r * v)
        .collect();
    let u = u.with_slopes(slopes).unwrap();
    let rep = functional_report(&u, FunctionalMode::Efrak).unwrap();
    let n = PI.powf(1.5);
    let k = 1.5 * PI.powf(1.5);
    let d = n * n * (2.0 / PI).sqrt();
    assert!((rep.l2sq - n).abs() < 1e-8);
    assert!((rep.kinetic - k).abs() < 1e-6);
    assert!((rep.coulomb - d).abs() < 1e-8);
    assert!((rep.efrak - (k + n - d / (8.0 * PI))).abs() < 1e-6);
}
