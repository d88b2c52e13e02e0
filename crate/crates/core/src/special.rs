//! Upper incomplete gamma function for tail remainders.
//!
//! The remainders we need are `Γ(a, x)` with `x = 2 r_max` large and `a`
//! possibly zero or negative, a range `statrs` does not cover. For `x > a + 1`
//! the Legendre continued fraction converges quickly for any real `a`; the
//! remaining region (necessarily `a > 0`) is delegated to `statrs`.

use statrs::function::gamma::gamma_ui;

const MAX_ITER: usize = 500;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Non-regularized upper incomplete gamma `Γ(a, x) = ∫ₓ^∞ t^{a−1} e^{−t} dt`, `x > 0`.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> f64 {
    assert!(x > 0.0, "upper_incomplete_gamma requires x > 0");
    if x > a + 1.0 || a <= 0.0 {
        (a * x.ln() - x).exp() * continued_fraction(a, x)
    } else {
        gamma_ui(a, x)
    }
}

// Modified Lentz evaluation of
// Γ(a,x) e^x x^{-a} = 1/(x+1-a- 1(1-a)/(x+3-a- 2(2-a)/(x+5-a- ...)))
fn continued_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
