//! Tail law `u(r) ≈ A e^{−r} r^β`: least-squares fits, window selection and
//! comparison with the exponent predicted from the norm.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::radial::{FunctionalReport, RadialProfile};
use crate::solver::{GroundState, Sign};

/// Minimum number of samples a fit window must contain.
pub const MIN_WINDOW_POINTS: usize = 20;
/// Tolerance on the β = 0 and β = 1 thresholds of the classification.
pub const CLASSIFICATION_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub amplitude: f64,
    pub beta: f64,
    pub window: (f64, f64),
    pub rms_residual: f64,
    /// `|β(first half) − β(second half)|`.
    pub drift: f64,
    /// `r (ln u)' + r` at the window centre, a cross-check only.
    pub derivative_beta: Option<f64>,
    pub points: usize,
}

impl TailFit {
    /// A noiseless fit, for remainders of a known tail.
    pub fn exact(amplitude: f64, beta: f64, window: (f64, f64)) -> Self {
        Self {
            amplitude,
            beta,
            window,
            rms_residual: 0.0,
            drift: 0.0,
            derivative_beta: None,
            points: 0,
        }
    }

    /// `ln(A r^β e^{−r})`.
    pub fn model_ln(&self, r: f64) -> f64 {
        self.amplitude.ln() + self.beta * r.ln() - r
    }
}

struct Line {
    slope: f64,
    intercept: f64,
    rms: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - (intercept + slope * a);
            e * e
        })
        .sum();
    Line {
        slope,
        intercept,
        rms: (ss / n).sqrt(),
    }
}

/// Ordinary least squares of `ln u + r` against `ln r` over `window`.
pub fn tail_fit(lnu: &RadialProfile, window: (f64, f64)) -> Result<TailFit> {
    let (r1, r2) = window;
    let nodes = lnu.nodes();
    if !(r1 > 0.0 && r1 < r2) {
        return Err(Error::InvalidWindow(format!(
            "need 0 < r1 < r2, got [{r1}, {r2}]"
        )));
    }
    let slack = 1e-9 * r2.abs().max(1.0);
    if r1 < nodes[0] - slack || r2 > lnu.grid().last() + slack {
        return Err(Error::InvalidWindow(format!(
            "[{r1}, {r2}] is not inside the profile support [{}, {}]",
            nodes[0],
            lnu.grid().last()
        )));
    }
    let ln = lnu.ln_values()?;
    let (mut x, mut y, mut rs) = (Vec::new(), Vec::new(), Vec::new());
    for (&r, &v) in nodes.iter().zip(&ln) {
        if r >= r1 - slack && r <= r2 + slack {
            x.push(r.ln());
            y.push(v + r);
            rs.push(r);
        }
    }
    if x.len() < MIN_WINDOW_POINTS {
        return Err(Error::InvalidWindow(format!(
            "[{r1}, {r2}] holds {} samples, at least {MIN_WINDOW_POINTS} are needed",
            x.len()
        )));
    }
    let fit = least_squares(&x, &y);
    let mid = 0.5 * (r1 + r2);
    let split = rs.partition_point(|&r| r < mid);
    if split < 3 || x.len() - split < 3 {
        return Err(Error::InvalidWindow(
            "window halves are too sparse for the drift test".into(),
        ));
    }
    let a = least_squares(&x[..split], &y[..split]);
    let b = least_squares(&x[split..], &y[split..]);
    Ok(TailFit {
        amplitude: fit.intercept.exp(),
        beta: fit.slope,
        window,
        rms_residual: fit.rms,
        drift: (a.slope - b.slope).abs(),
        derivative_beta: derivative_beta(lnu, &ln, mid),
        points: x.len(),
    })
}

fn derivative_beta(lnu: &RadialProfile, ln: &[f64], r: f64) -> Option<f64> {
    let nodes = lnu.nodes();
    let i = nodes
        .partition_point(|&x| x < r)
        .clamp(1, nodes.len().checked_sub(2)?);
    let slope = match lnu.slopes() {
        Some(s) if lnu.representation() == crate::radial::Representation::Log => s[i],
        Some(s) if lnu.quantity() == crate::radial::Quantity::LnU => s[i],
        _ => (ln[i + 1] - ln[i - 1]) / (nodes[i + 1] - nodes[i - 1]),
    };
    Some(nodes[i] * (slope + 1.0))
}

/// Widest window `[r1, 0.95 r_max]`, `r1 = 10, 12.5, …`, whose drift is
/// below 0.005 and rms residual below 10⁻³.
pub fn window_select(lnu: &RadialProfile) -> Result<(f64, f64)> {
    window_select_with(lnu, Execution::default())
}

pub fn window_select_with(lnu: &RadialProfile, exec: Execution) -> Result<(f64, f64)> {
    let r_max = lnu.grid().last();
    if r_max <= 25.0 {
        return Err(Error::InvalidWindow(format!(
            "profile ends at r = {r_max}; window selection needs r_max > 25"
        )));
    }
    let r2 = 0.95 * r_max;
    let candidates: Vec<f64> = (0..)
        .map(|k| 10.0 + 2.5 * k as f64)
        .take_while(|&r1| r1 < r2)
        .collect();
    let ok = exec.map(&candidates, |&r1| {
        tail_fit(lnu, (r1, r2)).is_ok_and(|f| f.drift < 0.005 && f.rms_residual < 1e-3)
    });
    candidates
        .iter()
        .zip(ok)
        .find(|(_, ok)| *ok)
        .map(|(&r1, _)| (r1, r2))
        .ok_or(Error::NoStableWindow { r_max })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "variant")]
pub enum Variant {
    PlainEq1,
    Hartree { sign: Sign, zeta: f64 },
}

/// `β = norm_sq/8π − 1`, or `(𝔷 ± 1) norm_sq/8π − 1` with a point charge.
pub fn exponent_prediction(norm_sq: f64, variant: Variant) -> f64 {
    let weight = match variant {
        Variant::PlainEq1 => 1.0,
        Variant::Hartree { sign, zeta } => zeta + sign.factor(),
    };
    weight * norm_sq / (8.0 * PI) - 1.0
}

/// Shape of the prefactor `r^β` of the tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    DecayingPrefactor,
    PureExponential,
    IncreasingConcave,
    Linear,
    IncreasingConvex,
}

impl Classification {
    pub fn of(beta: f64) -> Self {
        if (beta - 0.0).abs() <= CLASSIFICATION_TOL {
            Classification::PureExponential
        } else if (beta - 1.0).abs() <= CLASSIFICATION_TOL {
            Classification::Linear
        } else if beta < 0.0 {
            Classification::DecayingPrefactor
        } else if beta < 1.0 {
            Classification::IncreasingConcave
        } else {
            Classification::IncreasingConvex
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Classification::DecayingPrefactor => "decaying-prefactor",
            Classification::PureExponential => "pure-exponential",
            Classification::IncreasingConcave => "increasing-concave",
            Classification::Linear => "linear",
            Classification::IncreasingConvex => "increasing-convex",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub beta_fit: f64,
    pub beta_pred: f64,
    pub beta_abs_diff: f64,
    pub classification: Classification,
    pub amplitude: f64,
    pub window: (f64, f64),
    pub drift: f64,
    pub rms_residual: f64,
    pub derivative_beta: Option<f64>,
    pub norm_sq: f64,
    pub virial_residual: Option<f64>,
    pub virial_residual_u: Option<f64>,
    pub nehari_residual: Option<f64>,
    /// `|E0 − 3 ffrak(ψ₁)| / |E0|`.
    pub energy_closure: f64,
}

pub fn variant_of(gs: &GroundState) -> Variant {
    if gs.is_plain() {
        Variant::PlainEq1
    } else {
        Variant::Hartree {
            sign: gs.sign,
            zeta: gs.zeta,
        }
    }
}

pub fn consistency_report(gs: &GroundState, fit: &TailFit) -> ConsistencyReport {
    consistency_from_parts(
        gs.norm_sq,
        variant_of(gs),
        fit,
        &gs.report,
        &gs.report_u,
        gs.e0_eq4,
    )
}

/// Same as [`consistency_report`] from stored pieces of a solve: the
/// functionals of `ψ₁` and of `u`, and `E0`.
pub fn consistency_from_parts(
    norm_sq: f64,
    variant: Variant,
    fit: &TailFit,
    report_psi: &FunctionalReport,
    report_u: &FunctionalReport,
    e0: f64,
) -> ConsistencyReport {
    let beta_pred = exponent_prediction(norm_sq, variant);
    ConsistencyReport {
        beta_fit: fit.beta,
        beta_pred,
        beta_abs_diff: (fit.beta - beta_pred).abs(),
        classification: Classification::of(fit.beta),
        amplitude: fit.amplitude,
        window: fit.window,
        drift: fit.drift,
        rms_residual: fit.rms_residual,
        derivative_beta: fit.derivative_beta,
        norm_sq,
        virial_residual: report_psi.virial_residual,
        virial_residual_u: report_u.virial_residual,
        nehari_residual: report_u.nehari_residual,
        energy_closure: ((e0 - 3.0 * report_psi.ffrak) / e0).abs(),
    }
}

/// `(r, −ln(u / (A r^β e^{−r})))` for every positive node.
pub fn fit_deviation(lnu: &RadialProfile, fit: &TailFit) -> Result<Vec<(f64, f64)>> {
    let ln = lnu.ln_values()?;
    Ok(lnu
        .nodes()
        .iter()
        .zip(ln)
        .filter(|(r, _)| **r > 0.0)
        .map(|(&r, v)| (r, fit.model_ln(r) - v))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{Quantity, RadialGrid};

    fn model(r_max: f64, n: usize, a: f64, beta: f64, c: f64) -> RadialProfile {
        let grid = RadialGrid::uniform(0.0, r_max, n).unwrap();
        let vals = grid
            .nodes()
            .iter()
            .map(|&r| {
                if r == 0.0 {
                    0.0
                } else {
                    a.ln() + beta * r.ln() - r + c / r
                }
            })
            .collect();
        RadialProfile::log(grid, vals, Quantity::U).unwrap()
    }

    #[test]
    fn exact_model_recovered() {
        let p = model(50.0, 2001, 3.37, 0.754, 0.0);
        let f = tail_fit(&p, (20.0, 40.0)).unwrap();
        assert!((f.beta - 0.754).abs() < 1e-10);
        assert!((f.amplitude - 3.37).abs() < 1e-10);
        assert!(f.rms_residual < 1e-12 && f.drift < 1e-10);
        assert!((f.derivative_beta.unwrap() - 0.754).abs() < 1e-4);
    }

    #[test]
    fn pure_exponential() {
        let p = model(50.0, 1001, 1.0, 0.0, 0.0);
        let f = tail_fit(&p, (10.0, 45.0)).unwrap();
        assert!(f.beta.abs() < 1e-12);
        assert!((f.amplitude - 1.0).abs() < 1e-12);
    }

    #[test]
    fn window_errors() {
        let p = model(50.0, 101, 1.0, 0.0, 0.0);
        assert_eq!(
            tail_fit(&p, (20.0, 25.0)).unwrap_err().kind(),
            "invalid-window"
        );
        assert_eq!(
            tail_fit(&p, (20.0, 60.0)).unwrap_err().kind(),
            "invalid-window"
        );
        assert_eq!(
            tail_fit(&p, (30.0, 20.0)).unwrap_err().kind(),
            "invalid-window"
        );
        let short = model(20.0, 401, 1.0, 0.0, 0.0);
        assert_eq!(window_select(&short).unwrap_err().kind(), "invalid-window");
    }

    #[test]
    fn window_selection_moves_out_with_correction() {
        let exact = model(50.0, 5001, 3.37, 0.754, 0.0);
        let (r1, r2) = window_select(&exact).unwrap();
        assert_eq!(r1, 10.0);
        assert!((r2 - 47.5).abs() < 1e-12);
        let corrected = model(50.0, 5001, 3.37, 0.754, 1.0);
        let (r1c, _) = window_select(&corrected).unwrap();
        assert!(r1c > r1, "{r1c}");
        let modes = [Execution::Sequential, Execution::Parallel];
        let picks: Vec<_> = modes
            .iter()
            .map(|&m| window_select_with(&corrected, m).unwrap())
            .collect();
        assert_eq!(picks[0], picks[1]);
    }

    #[test]
    fn no_stable_window_for_strong_correction() {
        let p = model(30.0, 3001, 1.0, 0.5, 40.0);
        assert_eq!(window_select(&p).unwrap_err().kind(), "no-stable-window");
    }

    #[test]
    fn exponent_thresholds() {
        assert_eq!(exponent_prediction(8.0 * PI, Variant::PlainEq1), 0.0);
        assert!((exponent_prediction(16.0 * PI, Variant::PlainEq1) - 1.0).abs() < 1e-15);
        assert!((exponent_prediction(14.03 * PI, Variant::PlainEq1) - 0.75375).abs() < 1e-12);
        let h = Variant::Hartree {
            sign: Sign::Minus,
            zeta: 2.0,
        };
        assert!((exponent_prediction(8.0 * PI, h)).abs() < 1e-15);
    }

    #[test]
    fn classification_bands() {
        assert_eq!(Classification::of(0.0), Classification::PureExponential);
        assert_eq!(Classification::of(-0.3), Classification::DecayingPrefactor);
        assert_eq!(Classification::of(0.754), Classification::IncreasingConcave);
        assert_eq!(Classification::of(1.01), Classification::Linear);
        assert_eq!(Classification::of(1.5), Classification::IncreasingConvex);
        assert_eq!(
            serde_json::to_string(&Classification::IncreasingConcave).unwrap(),
            "\"increasing-concave\""
        );
    }

    #[test]
    fn deviation_vanishes_on_model() {
        let p = model(50.0, 501, 2.0, 0.3, 0.0);
        let f = TailFit::exact(2.0, 0.3, (10.0, 40.0));
        assert!(fit_deviation(&p, &f)
            .unwrap()
            .iter()
            .all(|(_, d)| d.abs() < 1e-12));
    }
}
