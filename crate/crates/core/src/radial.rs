//! Radial grids, sampled radial profiles, and the integrals evaluated on them.
//!
//! All integrals are three-dimensional integrals of radially symmetric
//! functions, `∫ f d³x = 4π ∫ f(r) r² dr`. Quadrature is piecewise cubic:
//! each grid interval is integrated exactly against the cubic through the
//! four nearest nodes, which is fourth-order on smooth data and works on
//! nonuniform grids.

use std::f64::consts::PI;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::asymptotics::TailFit;
use crate::error::{invalid, Error, Result};
use crate::solver::Sign;
use crate::special::upper_incomplete_gamma;

/// Log-represented samples below this are treated as exact zeros.
pub const LOG_UNDERFLOW: f64 = -700.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return invalid("radial grid needs at least 2 nodes");
        }
        if nodes.iter().any(|r| !r.is_finite()) {
            return invalid("radial grid nodes must be finite");
        }
        if nodes[0] < 0.0 {
            return invalid("radial grid nodes must be nonnegative");
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("radial grid nodes must be strictly increasing");
        }
        Ok(Self { nodes })
    }

    /// `n` equally spaced nodes on `[r0, r1]`.
    pub fn uniform(r0: f64, r1: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return invalid("uniform grid needs at least 2 nodes");
        }
        let h = (r1 - r0) / (n - 1) as f64;
        Self::new((0..n).map(|i| r0 + h * i as f64).collect())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Same grid with every node multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.nodes.iter().map(|r| r * factor).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Linear,
    Log,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::Linear => "linear",
            Representation::Log => "log",
        })
    }
}

impl FromStr for Representation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Representation::Linear),
            "log" => Ok(Representation::Log),
            other => invalid(format!("unknown representation '{other}'")),
        }
    }
}

/// What a profile's samples stand for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "u")]
    U,
    #[serde(rename = "psi")]
    Psi,
    W,
    V,
    M,
    #[serde(rename = "lnu")]
    LnU,
    #[serde(rename = "rho")]
    Rho,
}

impl Quantity {
    pub fn label(self) -> &'static str {
        match self {
            Quantity::U => "u",
            Quantity::Psi => "psi",
            Quantity::W => "W",
            Quantity::V => "V",
            Quantity::M => "M",
            Quantity::LnU => "lnu",
            Quantity::Rho => "rho",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "u" => Quantity::U,
            "psi" => Quantity::Psi,
            "W" => Quantity::W,
            "V" => Quantity::V,
            "M" => Quantity::M,
            "lnu" => Quantity::LnU,
            "rho" => Quantity::Rho,
            other => return invalid(format!("unknown quantity '{other}'")),
        })
    }
}

/// A radial function sampled on a grid.
///
/// `slopes`, when present, holds `d(value)/dr` in the profile's own
/// representation (so `d ln f / dr` for `Log`). They come from ODE
/// trajectories and let [`kinetic_energy`] avoid numerical differentiation.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: RadialGrid,
    values: Vec<f64>,
    representation: Representation,
    quantity: Quantity,
    slopes: Option<Vec<f64>>,
}

impl RadialProfile {
    pub fn new(
        grid: RadialGrid,
        values: Vec<f64>,
        representation: Representation,
        quantity: Quantity,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "profile has {} values on a grid of {} nodes",
                values.len(),
                grid.len()
            ));
        }
        if representation == Representation::Log
            && values.iter().any(|v| v.is_nan() || *v == f64::INFINITY)
        {
            return invalid("log-represented values must be finite or -inf");
        }
        if representation == Representation::Linear && values.iter().any(|v| !v.is_finite()) {
            return invalid("profile values must be finite");
        }
        Ok(Self {
            grid,
            values,
            representation,
            quantity,
            slopes: None,
        })
    }

    pub fn linear(grid: RadialGrid, values: Vec<f64>, quantity: Quantity) -> Result<Self> {
        Self::new(grid, values, Representation::Linear, quantity)
    }

    pub fn log(grid: RadialGrid, ln_values: Vec<f64>, quantity: Quantity) -> Result<Self> {
        Self::new(grid, ln_values, Representation::Log, quantity)
    }

    /// Samples `f` on `grid` (linear representation).
    pub fn from_fn(grid: RadialGrid, quantity: Quantity, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::linear(grid, values, quantity)
    }

    pub fn with_slopes(mut self, slopes: Vec<f64>) -> Result<Self> {
        if slopes.len() != self.values.len() {
            return invalid("slope samples must match the grid length");
        }
        if slopes.iter().any(|s| !s.is_finite()) {
            return invalid("slope samples must be finite");
        }
        self.slopes = Some(slopes);
        Ok(self)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> Option<&[f64]> {
        self.slopes.as_deref()
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn quantity(&self) -> Quantity {
        self.quantity
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise linear values; log samples below `e^-700` become 0.
    pub fn linear_values(&self) -> Vec<f64> {
        match self.representation {
            Representation::Linear => self.values.clone(),
            Representation::Log => self.values.iter().map(|&v| exp_or_zero(v)).collect(),
        }
    }

    /// Pointwise natural logarithms. A linear profile labelled `lnu`
    /// already stores logarithms and is returned as is.
    pub fn ln_values(&self) -> Result<Vec<f64>> {
        match (self.representation, self.quantity) {
            (Representation::Log, _) | (Representation::Linear, Quantity::LnU) => {
                Ok(self.values.clone())
            }
            (Representation::Linear, _) => {
                if self.values.iter().any(|&v| v <= 0.0) {
                    return invalid("logarithm of a non-positive profile");
                }
                Ok(self.values.iter().map(|v| v.ln()).collect())
            }
        }
    }

    /// `df/dr` of the linear quantity: carried slopes when available,
    /// otherwise nonuniform three-point finite differences.
    pub fn linear_derivative(&self) -> Vec<f64> {
        match (&self.slopes, self.representation) {
            (Some(s), Representation::Linear) => s.clone(),
            (Some(s), Representation::Log) => self
                .values
                .iter()
                .zip(s)
                .map(|(&v, &d)| exp_or_zero(v) * d)
                .collect(),
            (None, _) => finite_difference(self.grid.nodes(), &self.linear_values()),
        }
    }

    /// Copy in linear representation; slopes are converted along.
    pub fn to_linear(&self) -> RadialProfile {
        let slopes = self.slopes.as_ref().map(|_| self.linear_derivative());
        RadialProfile {
            grid: self.grid.clone(),
            values: self.linear_values(),
            representation: Representation::Linear,
            quantity: self.quantity,
            slopes,
        }
    }

    /// Value at radius `r` by cubic Hermite interpolation when slopes are
    /// carried, linear interpolation otherwise. Returned in the profile's
    /// representation. `r` must lie inside the grid.
    pub fn interpolate(&self, r: f64) -> Result<f64> {
        let nodes = self.grid.nodes();
        if !(r >= nodes[0] && r <= self.grid.last()) {
            return invalid(format!("r = {r} outside profile support"));
        }
        let i = match nodes.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
            Ok(i) => return Ok(self.values[i]),
            Err(i) => i - 1,
        };
        let (x0, x1) = (nodes[i], nodes[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let h = x1 - x0;
        let t = (r - x0) / h;
        Ok(match &self.slopes {
            Some(s) => hermite(t, h, y0, y1, s[i], s[i + 1]),
            None => y0 + t * (y1 - y0),
        })
    }

    /// Writes `r,value,representation,quantity` CSV, preceded by `#` comment lines.
    pub fn write_csv<W: Write>(&self, out: W, comments: &[&str]) -> Result<()> {
        let mut out = out;
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "value", "representation", "quantity"])?;
        let rep = self.representation.to_string();
        let q = self.quantity.label();
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            w.write_record([r.to_string(), v.to_string(), rep.clone(), q.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses the format produced by [`write_csv`](Self::write_csv); `#` lines are skipped.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["r", "value", "representation", "quantity"] {
            return invalid("profile CSV header must be r,value,representation,quantity");
        }
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        let mut meta: Option<(Representation, Quantity)> = None;
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("bad number '{s}': {e}")))
            };
            nodes.push(parse(&rec[0])?);
            values.push(parse(&rec[1])?);
            let m = (rec[2].parse()?, rec[3].parse()?);
            match meta {
                None => meta = Some(m),
                Some(prev) if prev != m => {
                    return invalid("mixed representation/quantity in profile CSV")
                }
                _ => {}
            }
        }
        let (rep, q) = meta.ok_or_else(|| Error::InvalidInput("empty profile CSV".into()))?;
        Self::new(RadialGrid::new(nodes)?, values, rep, q)
    }
}

fn exp_or_zero(v: f64) -> f64 {
    if v < LOG_UNDERFLOW {
        0.0
    } else {
        v.exp()
    }
}

fn hermite(t: f64, h: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

/// Nonuniform three-point first derivative, one-sided at the ends.
pub fn finite_difference(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert_eq!(n, y.len());
    if n < 3 {
        let d = (y[n - 1] - y[0]) / (x[n - 1] - x[0]);
        return vec![d; n];
    }
    let three = |i0: usize, at: usize| -> f64 {
        // derivative at x[at] of the parabola through nodes i0..i0+2
        let (x0, x1, x2) = (x[i0], x[i0 + 1], x[i0 + 2]);
        let xa = x[at];
        let l0 = ((xa - x1) + (xa - x2)) / ((x0 - x1) * (x0 - x2));
        let l1 = ((xa - x0) + (xa - x2)) / ((x1 - x0) * (x1 - x2));
        let l2 = ((xa - x0) + (xa - x1)) / ((x2 - x0) * (x2 - x1));
        l0 * y[i0] + l1 * y[i0 + 1] + l2 * y[i0 + 2]
    };
    (0..n)
        .map(|i| {
            let i0 = i.saturating_sub(1).min(n - 3);
            three(i0, i)
        })
        .collect()
}

/// Exact integral over `[x[i], x[i+1]]` of the interpolant through the
/// (up to four) nodes around the interval.
fn interval_integral(x: &[f64], y: &[f64], i: usize) -> f64 {
    let n = x.len();
    let h = x[i + 1] - x[i];
    let (j0, m) = match n {
        2 => (0, 2),
        3 => (0, 3),
        _ => (i.saturating_sub(1).min(n - 4), 4),
    };
    // Lagrange basis in t = x - x[i], integrated over [0, h].
    let mut total = 0.0;
    for k in 0..m {
        let mut poly = [0.0f64; 4];
        poly[0] = 1.0;
        let mut deg = 0;
        let mut denom = 1.0;
        let xk = x[j0 + k] - x[i];
        for l in 0..m {
            if l == k {
                continue;
            }
            let xl = x[j0 + l] - x[i];
            // poly *= (t - xl)
            for d in (0..=deg).rev() {
                poly[d + 1] += poly[d];
                poly[d] *= -xl;
            }
            deg += 1;
            denom *= xk - xl;
        }
        let mut integral = 0.0;
        let mut hp = h;
        for (d, c) in poly.iter().enumerate().take(deg + 1) {
            integral += c * hp / (d + 1) as f64;
            hp *= h;
        }
        total += y[j0 + k] * integral / denom;
    }
    let nonneg = y[j0..j0 + m].iter().all(|&v| v >= 0.0);
    if nonneg && total < 0.0 {
        // Keep cumulative integrals of nonnegative data monotone.
        0.5 * h * (y[i] + y[i + 1])
    } else {
        total
    }
}

/// Running integral `∫_{x₀}^{x_i} y dx` at every node.
pub fn cumulative_integral(x: &[f64], y: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), y.len());
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 0..x.len() - 1 {
        acc += interval_integral(x, y, i);
        out.push(acc);
    }
    out
}

pub fn integrate(x: &[f64], y: &[f64]) -> f64 {
    *cumulative_integral(x, y).last().unwrap()
}

fn check_nonnegative(values: &[f64], what: &str) -> Result<()> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if values
        .iter()
        .any(|&v| v < -1e-12 * scale.max(f64::MIN_POSITIVE))
    {
        return invalid(format!("{what} must be nonnegative"));
    }
    Ok(())
}

/// `M(r) = 4π ∫₀^r u(s)² s² ds` on the profile's grid.
pub fn mass_function(u: &RadialProfile) -> Result<RadialProfile> {
    let lin = u.linear_values();
    check_nonnegative(&lin, "u")?;
    let x = u.nodes();
    let integrand: Vec<f64> = lin.iter().zip(x).map(|(v, r)| v * v * r * r).collect();
    let m: Vec<f64> = cumulative_integral(x, &integrand)
        .into_iter()
        .map(|c| 4.0 * PI * c)
        .collect();
    let slopes = integrand.iter().map(|g| 4.0 * PI * g).collect();
    RadialProfile::linear(u.grid().clone(), m, Quantity::M)?.with_slopes(slopes)
}

/// `‖u‖₂²`, optionally completed beyond the last node by the fitted tail
/// `A e^{-r} r^β`, whose remainder is `4πA² Γ(2β+3, 2r_max) / 2^{2β+3}`.
pub fn l2_norm_sq(u: &RadialProfile, tail: Option<&TailFit>) -> Result<f64> {
    let m = mass_function(u)?;
    let mut total = *m.values().last().unwrap();
    if let Some(t) = tail {
        total += tail_remainder(t.amplitude, t.beta, u.grid().last())?;
    }
    Ok(total)
}

/// `4π ∫_{r_max}^∞ A² s^{2β+2} e^{-2s} ds`.
pub fn tail_remainder(amplitude: f64, beta: f64, r_max: f64) -> Result<f64> {
    if amplitude < 0.0 || !amplitude.is_finite() {
        return invalid("tail amplitude must be nonnegative");
    }
    if r_max <= 0.0 {
        return invalid("tail remainder needs r_max > 0");
    }
    if amplitude == 0.0 {
        return Ok(0.0);
    }
    let a = 2.0 * beta + 3.0;
    Ok(4.0 * PI * amplitude * amplitude * upper_incomplete_gamma(a, 2.0 * r_max) / 2f64.powf(a))
}

/// `∫ |∇u|² d³x = 4π ∫ u'(r)² r² dr`.
pub fn kinetic_energy(u: &RadialProfile) -> Result<f64> {
    if u.len() < 3 {
        return invalid("kinetic energy needs at least 3 nodes");
    }
    let du = u.linear_derivative();
    let x = u.nodes();
    let integrand: Vec<f64> = du.iter().zip(x).map(|(d, r)| d * d * r * r).collect();
    Ok(4.0 * PI * integrate(x, &integrand))
}

/// Density profile `ρ = u²`, keeping the log representation when present.
pub fn density(u: &RadialProfile) -> Result<RadialProfile> {
    let (values, slopes) = match u.representation() {
        Representation::Log => (
            u.values().iter().map(|v| 2.0 * v).collect::<Vec<_>>(),
            u.slopes()
                .map(|s| s.iter().map(|d| 2.0 * d).collect::<Vec<_>>()),
        ),
        Representation::Linear => (
            u.values().iter().map(|v| v * v).collect(),
            u.slopes()
                .map(|s| s.iter().zip(u.values()).map(|(d, v)| 2.0 * v * d).collect()),
        ),
    };
    let rho = RadialProfile::new(u.grid().clone(), values, u.representation(), Quantity::Rho)?;
    match slopes {
        Some(s) => rho.with_slopes(s),
        None => Ok(rho),
    }
}

/// Coulomb self-energy `D(ρ,ρ) = ∫∫ ρ(x)ρ(x')/|x−x'|` via the shell theorem:
/// `D = 32π² ∫ ρ(r) r Q(r) dr` with `Q(r) = ∫₀^r ρ s² ds`.
pub fn coulomb_self_energy(rho: &RadialProfile) -> Result<f64> {
    let lin = rho.linear_values();
    check_nonnegative(&lin, "density")?;
    let x = rho.nodes();
    let shell: Vec<f64> = lin.iter().zip(x).map(|(p, r)| p * r * r).collect();
    let q = cumulative_integral(x, &shell);
    let integrand: Vec<f64> = lin
        .iter()
        .zip(x)
        .zip(&q)
        .map(|((p, r), qr)| p * r * qr)
        .collect();
    Ok(32.0 * PI * PI * integrate(x, &integrand))
}

/// `∫ ρ(x)/|x| d³x = 4π ∫ ρ r dr`: interaction with a unit point charge at the origin.
pub fn point_charge_energy(rho: &RadialProfile) -> Result<f64> {
    let lin = rho.linear_values();
    check_nonnegative(&lin, "density")?;
    let x = rho.nodes();
    let integrand: Vec<f64> = lin.iter().zip(x).map(|(p, r)| p * r).collect();
    Ok(4.0 * PI * integrate(x, &integrand))
}

/// `(4π ∫ |f|^p r² dr)^{1/p}`.
pub fn lp_norm(f: &RadialProfile, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return invalid(format!("L^p norm needs finite p >= 1, got {p}"));
    }
    let x = f.nodes();
    let integrand: Vec<f64> = match f.representation() {
        Representation::Log => f
            .values()
            .iter()
            .zip(x)
            .map(|(v, r)| exp_or_zero(p * v) * r * r)
            .collect(),
        Representation::Linear => f
            .values()
            .iter()
            .zip(x)
            .map(|(v, r)| v.abs().powf(p) * r * r)
            .collect(),
    };
    Ok((4.0 * PI * integrate(x, &integrand)).powf(1.0 / p))
}

/// Which equation's units the profile is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum FunctionalMode {
    /// `−Δu + u = V u` with `−ΔV = u²`; energy functional
    /// `K + N − D/8π`, Nehari `4π(K+N) = D`, virial `2K = D/8π`.
    Efrak,
    /// Normalized `ψ` of `−Δψ − 2Φψ = Eψ`; functional `K − D`, virial `2K = D`.
    Ffrak,
    /// Point-charge variant `−Δu + u = (𝔷‖u‖²/4πr ± V) u`.
    Hartree { sign: Sign, zeta: f64 },
}

impl FunctionalMode {
    fn label(self) -> &'static str {
        match self {
            FunctionalMode::Efrak => "efrak",
            FunctionalMode::Ffrak => "ffrak",
            FunctionalMode::Hartree { .. } => "hartree",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub mode: String,
    pub kinetic: f64,
    pub l2sq: f64,
    pub coulomb: f64,
    pub external: f64,
    pub efrak: f64,
    pub ffrak: f64,
    pub nehari_residual: Option<f64>,
    pub virial_residual: Option<f64>,
}

pub fn functional_report(f: &RadialProfile, mode: FunctionalMode) -> Result<FunctionalReport> {
    let kinetic = kinetic_energy(f)?;
    let l2sq = l2_norm_sq(f, None)?;
    let rho = density(f)?;
    let coulomb = coulomb_self_energy(&rho)?;
    let ffrak = kinetic - coulomb;
    let efrak_plain = kinetic + l2sq - coulomb / (8.0 * PI);
    let ratio = |num: f64, den: f64| if den > 0.0 { Some(num / den) } else { None };

    let (external, efrak, nehari, virial) = match mode {
        FunctionalMode::Efrak => (
            0.0,
            efrak_plain,
            ratio(
                4.0 * PI * (kinetic + l2sq) - coulomb,
                4.0 * PI * (kinetic + l2sq),
            ),
            ratio(2.0 * kinetic - coulomb / (8.0 * PI), coulomb / (8.0 * PI)),
        ),
        FunctionalMode::Ffrak => (
            0.0,
            efrak_plain,
            None,
            ratio(2.0 * kinetic - coulomb, coulomb),
        ),
        FunctionalMode::Hartree { sign, zeta } => {
            let s = sign.factor();
            let charge = zeta * l2sq;
            let x = point_charge_energy(&rho)?;
            // external = (𝔷‖u‖²/4π) ∫u²/|x|, entering the functional with a minus sign
            let external = charge / (4.0 * PI) * x;
            let efrak = kinetic + l2sq - s * coulomb / (8.0 * PI) - external;
            let attraction = charge * x + s * coulomb;
            let rhs = s * coulomb / (8.0 * PI) + external;
            let nehari = ratio(
                4.0 * PI * (kinetic + l2sq) - attraction,
                4.0 * PI * (kinetic + l2sq),
            );
            let virial = if rhs.abs() > 0.0 {
                Some((2.0 * kinetic - rhs) / rhs)
            } else {
                None
            };
            (external, efrak, nehari, virial)
        }
    };
    Ok(FunctionalReport {
        mode: mode.label().to_string(),
        kinetic,
        l2sq,
        coulomb,
        external,
        efrak,
        ffrak,
        nehari_residual: nehari,
        virial_residual: virial,
    })
}
