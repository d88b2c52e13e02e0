//! Closed-form certificates on the ground-state energy and norm.
//!
//! Lower side: Sobolev, Hardy–Littlewood–Sobolev and Hölder combine into
//! `𝔉(ψ) ≥ a x² − b x` with `x = ‖ψ‖₆` for normalized `ψ`. Upper side: the
//! normalized Gaussian trial function `ψ_G = e^{−r²/2R²}/(π^{3/4}R^{3/2})`.
//! Energies convert to norms through `‖u‖₂² = 8π/√|E₀|`, `E₀ = 3𝔉`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{coulomb_self_energy, density, kinetic_energy, lp_norm, RadialProfile};

/// Sobolev constant `3(π/2)^{4/3}`: `‖∇ψ‖² ≥ a ‖ψ‖₆²`.
pub fn sobolev_constant() -> f64 {
    3.0 * (PI / 2.0).powf(4.0 / 3.0)
}

/// HLS constant `(4/3)(8/π)^{1/3}`: `D(ρ,ρ) ≤ b ‖ρ‖_{6/5}²`.
pub fn hls_constant() -> f64 {
    4.0 / 3.0 * (8.0 / PI).cbrt()
}

/// Sharp HLS constant `(4/3)(16/π)^{1/3}` for the full double integral,
/// attained by `(1 + r²)^{−5/2}`. It exceeds [`hls_constant`] by `2^{1/3}`.
pub fn hls_sharp_constant() -> f64 {
    4.0 / 3.0 * (16.0 / PI).cbrt()
}

/// `a x² − b x`, the lower bound on `𝔉` as a function of `x = ‖ψ‖₆`.
pub fn chain_bound(x: f64) -> f64 {
    sobolev_constant() * x * x - hls_constant() * x
}

/// `(x*, chain_bound(x*))` with `x* = b/2a`.
pub fn chain_minimum() -> (f64, f64) {
    let (a, b) = (sobolev_constant(), hls_constant());
    (b / (2.0 * a), -b * b / (4.0 * a))
}

fn norm_from_energy(e0: f64) -> f64 {
    8.0 * PI / e0.abs().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBounds {
    pub f_lower: f64,
    pub e0_lower: f64,
    pub norm_lower: f64,
}

pub fn lower_bound_constants() -> LowerBounds {
    let f_lower = chain_minimum().1;
    let e0_lower = 3.0 * f_lower;
    LowerBounds {
        f_lower,
        e0_lower,
        norm_lower: norm_from_energy(e0_lower),
    }
}

/// `𝔉(ψ_G) = 3/(2R²) − √(2/π)/R`.
pub fn gaussian_f(radius: f64) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!(
            "Gaussian width must be positive, got {radius}"
        )));
    }
    Ok(1.5 / (radius * radius) - (2.0 / PI).sqrt() / radius)
}

/// Sampled `ψ_G` with exact slopes.
pub fn gaussian_profile(radius: f64, r_max: f64, n: usize) -> Result<RadialProfile> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!(
            "Gaussian width must be positive, got {radius}"
        )));
    }
    let grid = crate::radial::RadialGrid::uniform(0.0, r_max, n)?;
    let norm = PI.powf(0.75) * radius.powf(1.5);
    let values: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|r| (-r * r / (2.0 * radius * radius)).exp() / norm)
        .collect();
    let slopes = grid
        .nodes()
        .iter()
        .zip(&values)
        .map(|(r, v)| -r / (radius * radius) * v)
        .collect();
    RadialProfile::linear(grid, values, crate::radial::Quantity::Psi)?.with_slopes(slopes)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBound {
    pub r_star: f64,
    pub f_min: f64,
    pub e0_upper: f64,
    pub norm_upper: f64,
}

pub fn gaussian_upper_bound() -> GaussianBound {
    let r_star = 3.0 / (2.0 / PI).sqrt();
    let f_min = gaussian_f(r_star).expect("positive width");
    let e0_upper = 3.0 * f_min;
    GaussianBound {
        r_star,
        f_min,
        e0_upper,
        norm_upper: norm_from_energy(e0_upper),
    }
}

/// Slack ratios of the inequalities in the lower-bound chain. A ratio
/// below 1 means the inequality is violated by `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityMargins {
    pub sobolev: f64,
    /// With the chain's constant [`hls_constant`].
    pub hls: f64,
    /// With [`hls_sharp_constant`].
    pub hls_sharp: f64,
    pub holder: f64,
}

impl InequalityMargins {
    pub fn all_hold(&self) -> bool {
        self.sobolev >= 1.0 && self.hls >= 1.0 && self.holder >= 1.0
    }
}

pub fn inequality_margins(psi: &RadialProfile) -> Result<InequalityMargins> {
    let l2 = lp_norm(psi, 2.0)?;
    if (l2 - 1.0).abs() > 1e-6 {
        return Err(Error::Domain(format!("ψ must be normalized, ‖ψ‖₂ = {l2}")));
    }
    let kinetic = kinetic_energy(psi)?;
    let coulomb = coulomb_self_energy(&density(psi)?)?;
    let six = lp_norm(psi, 6.0)?.powi(6);
    let twelve_fifths = lp_norm(psi, 2.4)?.powf(2.4);
    let rho_norm = twelve_fifths.powf(5.0 / 3.0);
    Ok(InequalityMargins {
        sobolev: kinetic / (sobolev_constant() * six.cbrt()),
        hls: hls_constant() * rho_norm / coulomb,
        hls_sharp: hls_sharp_constant() * rho_norm / coulomb,
        holder: (l2 * l2).powf(0.9) * six.powf(0.1) / twelve_fifths,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct BoundsReport {
    #[serde(rename = "F_lower")]
    pub f_lower: f64,
    #[serde(rename = "E0_lower")]
    pub e0_lower: f64,
    pub norm_lower: f64,
    #[serde(rename = "gaussian_R_star")]
    pub gaussian_r_star: f64,
    #[serde(rename = "F_gaussian_min")]
    pub f_gaussian_min: f64,
    #[serde(rename = "E0_upper")]
    pub e0_upper: f64,
    pub norm_upper: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub measured_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sandwich_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub upper_over_measured: Option<f64>,
}

/// Certificates, optionally compared against a measured `‖u‖₂²`.
pub fn prop1_report(measured_norm: Option<f64>) -> Result<BoundsReport> {
    if let Some(m) = measured_norm {
        if !(m > 0.0) {
            return Err(Error::Domain(format!(
                "measured norm must be positive, got {m}"
            )));
        }
    }
    let lo = lower_bound_constants();
    let hi = gaussian_upper_bound();
    Ok(BoundsReport {
        f_lower: lo.f_lower,
        e0_lower: lo.e0_lower,
        norm_lower: lo.norm_lower,
        gaussian_r_star: hi.r_star,
        f_gaussian_min: hi.f_min,
        e0_upper: hi.e0_upper,
        norm_upper: hi.norm_upper,
        measured_norm,
        sandwich_ok: measured_norm.map(|m| lo.norm_lower <= m && m <= hi.norm_upper),
        upper_over_measured: measured_norm.map(|m| hi.norm_upper / m),
    })
}

impl BoundsReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "lower chain minimum        F_lower    = {:.10}",
            self.f_lower
        );
        let _ = writeln!(
            s,
            "energy lower bound         E0_lower   = {:.10}",
            self.e0_lower
        );
        let _ = writeln!(
            s,
            "norm lower bound           norm_lower = {:.10}",
            self.norm_lower
        );
        let _ = writeln!(
            s,
            "Gaussian optimal width     R*         = {:.10}",
            self.gaussian_r_star
        );
        let _ = writeln!(
            s,
            "Gaussian functional min    F_G(R*)    = {:.10}",
            self.f_gaussian_min
        );
        let _ = writeln!(
            s,
            "energy upper bound         E0_upper   = {:.10}",
            self.e0_upper
        );
        let _ = writeln!(
            s,
            "norm upper bound           norm_upper = {:.10}",
            self.norm_upper
        );
        if let (Some(m), Some(ok), Some(r)) = (
            self.measured_norm,
            self.sandwich_ok,
            self.upper_over_measured,
        ) {
            let _ = writeln!(s, "measured norm                         = {m:.10}");
            let _ = writeln!(s, "inside [norm_lower, norm_upper]       = {ok}");
            let _ = writeln!(s, "norm_upper / measured                 = {r:.6}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // `left_lower(c, d)` decides whether f(c) < f(d)
    fn golden_section(
        left_lower: impl Fn(f64, f64) -> bool,
        mut a: f64,
        mut b: f64,
        tol: f64,
    ) -> f64 {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        while (b - a).abs() > tol {
            if left_lower(c, d) {
                b = d;
            } else {
                a = c;
            }
            c = b - g * (b - a);
            d = a + g * (b - a);
        }
        0.5 * (a + b)
    }

    #[test]
    fn chain_values() {
        assert_eq!(chain_bound(0.0), 0.0);
        let (x, m) = chain_minimum();
        assert!((m - (-(32.0 / 27.0) * 2f64.cbrt() / (PI * PI))).abs() < 1e-15);
        assert!((m + 0.1513).abs() < 5e-5);
        assert!(chain_bound(x) <= chain_bound(x + 1e-3) && chain_bound(x) <= chain_bound(x - 1e-3));
        for i in 0..200 {
            assert!(chain_bound(i as f64 * 0.01) >= m);
        }
    }

    #[test]
    fn lower_constants() {
        let lo = lower_bound_constants();
        assert!((lo.e0_lower + 0.4539).abs() < 5e-5);
        assert!((lo.norm_lower - 37.305).abs() < 5e-4);
        let identity =
            8.0 * PI / (32.0 * 2f64.cbrt() / (9.0 * PI * PI)).sqrt() - 2f64.cbrt() * 3.0 * PI * PI;
        assert!(identity.abs() < 1e-12);
        assert!((lo.norm_lower - 2f64.cbrt() * 3.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn gaussian_values() {
        assert!((gaussian_f(1.0).unwrap() - (1.5 - (2.0 / PI).sqrt())).abs() < 1e-15);
        assert!((gaussian_f(1.0).unwrap() - 0.70212).abs() < 1e-5);
        assert!(gaussian_f(0.0).is_err());
        assert_eq!(gaussian_f(-1.0).unwrap_err().kind(), "domain-error");
        let far = gaussian_f(1e8).unwrap();
        assert!(far < 0.0 && far > -1e-8);
        let up = gaussian_upper_bound();
        assert!((up.r_star - 3.7599424).abs() < 1e-7);
        assert!((up.f_min + 1.0 / (3.0 * PI)).abs() < 1e-15);
        assert!((up.norm_upper - 8.0 * PI.powf(1.5)).abs() < 1e-12);
        // F(c) − F(d) in factored form: no cancellation near the flat minimum
        let k = (2.0 / PI).sqrt();
        let diff = |c: f64, d: f64| (d - c) / (c * d) * (1.5 * (c + d) / (c * d) - k);
        assert!(
            (diff(1.0, 2.0) - (gaussian_f(1.0).unwrap() - gaussian_f(2.0).unwrap())).abs() < 1e-15
        );
        let r = golden_section(|c, d| diff(c, d) < 0.0, 0.1, 100.0, 1e-11);
        assert!((r - up.r_star).abs() < 1e-8);
    }

    #[test]
    fn gaussian_convex_in_inverse_width() {
        let f = |s: f64| gaussian_f(1.0 / s).unwrap();
        let h = 1e-3;
        for i in 1..100 {
            let s = i as f64 * 0.05;
            assert!(f(s + h) - 2.0 * f(s) + f(s - h) > 0.0);
        }
    }

    #[test]
    fn report_fields() {
        let up = gaussian_upper_bound();
        let lo = lower_bound_constants();
        assert!(lo.e0_lower <= up.e0_upper && lo.norm_lower <= up.norm_upper);
        let r = prop1_report(Some(14.03 * PI)).unwrap();
        assert_eq!(r.sandwich_ok, Some(true));
        assert!((r.upper_over_measured.unwrap() - 1.011).abs() < 5e-4);
        assert_eq!(
            prop1_report(Some(8.0 * PI)).unwrap().sandwich_ok,
            Some(false)
        );
        assert_eq!(
            prop1_report(Some(lo.norm_lower)).unwrap().sandwich_ok,
            Some(true)
        );
        let bare = serde_json::to_value(prop1_report(None).unwrap()).unwrap();
        assert!(bare.get("measured_norm").is_none());
        assert!(bare.get("F_lower").is_some());
        assert!(prop1_report(Some(-1.0)).is_err());
        assert!(r.to_text().contains("norm_upper / measured"));
    }

    #[test]
    fn gaussian_margins() {
        let psi = gaussian_profile(1.0, 14.0, 14001).unwrap();
        let m = inequality_margins(&psi).unwrap();
        assert!(
            m.sobolev > 1.0 && m.holder > 1.0 && m.hls_sharp > 1.0,
            "{m:?}"
        );
        // closed forms: ∫ψ^{12/5} = π^{-9/5}(π/1.2)^{3/2}, D = √(2/π)
        let l125 = PI.powf(-1.8) * (PI / 1.2).powf(1.5);
        let hls = hls_constant() * l125.powf(5.0 / 3.0) / (2.0 / PI).sqrt();
        assert!((m.hls - hls).abs() < 1e-8, "{} vs {hls}", m.hls);
        // the chain's HLS constant is too small by 2^{1/3}: the Gaussian violates it
        assert!(hls < 0.82 && !m.all_hold());
        let fat = gaussian_profile(1.0, 14.0, 14001).unwrap();
        let scaled = RadialProfile::linear(
            fat.grid().clone(),
            fat.values().iter().map(|v| 2.0 * v).collect(),
            crate::radial::Quantity::Psi,
        )
        .unwrap();
        assert_eq!(
            inequality_margins(&scaled).unwrap_err().kind(),
            "domain-error"
        );
    }
}
