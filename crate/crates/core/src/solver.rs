//! Scale-free shooting for the ground state.
//!
//! With `W = V − 1` the equation reads `−Δu = (W + c/r) u`, `−ΔW = s u²`
//! (`c = 0`, `s = +1` for the plain equation). The system is covariant under
//! `u ↦ λ²u(λr)`, `W ↦ λ²W(λr)`, so the centre value is fixed to `u(0) = u0`,
//! the single parameter `W(0)` is found by bisection, and `λ` is chosen
//! afterwards so that `W(∞) = −1`.
//!
//! Double precision cannot follow the separatrix to large radii: every shot
//! eventually crosses zero or turns up. The core solution is kept only up to
//! the radius where the two final bracket ends still agree; beyond it the tail
//! is continued inward from `r_max` through a Riccati equation for
//! `g = (ln u)'`, which is stable in that direction.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::ode::{
    integrate, taylor_start, Event, IntegrateOptions, OdeState, StepControl, Termination,
    Trajectory,
};
use crate::radial::{
    cumulative_integral, functional_report, FunctionalMode, FunctionalReport, Quantity, RadialGrid,
    RadialProfile,
};

/// Sign of the self-interaction term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Sign::Plus),
            "minus" | "-" => Ok(Sign::Minus),
            _ => invalid(format!("unknown sign '{s}' (expected plus or minus)")),
        }
    }
}

/// `p = r u`, `q = r W` form of the scale-free system with point-charge
/// coupling `c`. State layout: `[p, p', q, q', m]` with `m = ∫₀^r u² s² ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFreeSystem {
    pub coupling: f64,
    pub sign: Sign,
}

impl ScaleFreeSystem {
    pub const PLAIN: Self = Self {
        coupling: 0.0,
        sign: Sign::Plus,
    };
    pub const DIM: usize = 5;
    const SERIES_ORDER: usize = 4;

    pub fn rhs(&self, r: f64, y: &[f64], dy: &mut [f64]) {
        let s = self.sign.factor();
        dy[0] = y[1];
        dy[1] = -(y[2] + self.coupling) / r * y[0];
        dy[2] = y[3];
        dy[3] = -s * y[0] * y[0] / r;
        dy[4] = y[0] * y[0];
    }

    /// Power-series coefficients of `u` and `W` about the origin.
    pub fn series(&self, u0: f64, w0: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
        let s = self.sign.factor();
        let mut a = vec![0.0; order + 1];
        let mut b = vec![0.0; order + 1];
        a[0] = u0;
        b[0] = w0;
        for n in 1..=order {
            let nn = (n * (n + 1)) as f64;
            let (mut ba, mut aa) = (0.0, 0.0);
            if n >= 2 {
                for i in 0..=n - 2 {
                    ba += b[i] * a[n - 2 - i];
                    aa += a[i] * a[n - 2 - i];
                }
            }
            a[n] = -(ba + self.coupling * a[n - 1]) / nn;
            b[n] = -s * aa / nn;
        }
        (a, b)
    }

    /// Regular state at `r = h0` from the origin expansion.
    pub fn start(&self, u0: f64, w0: f64, h0: f64) -> Result<OdeState> {
        let n = Self::SERIES_ORDER;
        let (a, b) = self.series(u0, w0, n);
        let shift = |c: &[f64]| {
            std::iter::once(0.0)
                .chain(c.iter().copied())
                .collect::<Vec<_>>()
        };
        let deriv_of_shift = |c: &[f64]| {
            c.iter()
                .enumerate()
                .map(|(k, v)| (k + 1) as f64 * v)
                .collect::<Vec<_>>()
        };
        let mut m = vec![0.0; n + 4];
        for k in 0..=n {
            let sq: f64 = (0..=k).map(|i| a[i] * a[k - i]).sum();
            m[k + 3] = sq / (k + 3) as f64;
        }
        taylor_start(
            &[
                shift(&a),
                deriv_of_shift(&a),
                shift(&b),
                deriv_of_shift(&b),
                m,
            ],
            h0,
        )
    }
}

/// Right-hand side of the plain system at `r > 0`: `(p', −(q/r)p, q', −p²/r, p²)`.
pub fn sn_rhs(r: f64, state: &OdeState) -> Result<Vec<f64>> {
    if !(r > 0.0) {
        return invalid("the radial system is singular at r = 0; use the Taylor start");
    }
    if state.y.len() != ScaleFreeSystem::DIM {
        return invalid(format!(
            "state must have {} components",
            ScaleFreeSystem::DIM
        ));
    }
    let mut dy = vec![0.0; ScaleFreeSystem::DIM];
    ScaleFreeSystem::PLAIN.rhs(r, &state.y, &mut dy);
    Ok(dy)
}

/// Shooting and grid controls. `w_lo`, `w_hi`, `bisect_tol` are in units of
/// `u0` (the shot uses `W(0) = w·u0`); `switch_threshold` is relative to `u0`;
/// `r_max_scalefree` is the shooting horizon in units of `u0^{-1/2}`;
/// `r_max` and `grid_step` describe the output grid in final units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShootingConfig {
    pub u0: f64,
    pub w_lo: f64,
    pub w_hi: f64,
    pub bisect_tol: f64,
    pub r_max_scalefree: f64,
    pub switch_threshold: f64,
    pub match_tol: f64,
    pub r_max: f64,
    pub grid_step: f64,
    pub tail_passes: usize,
    pub h0: f64,
    pub step: StepControl,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            u0: 1.0,
            w_lo: 0.5,
            w_hi: 3.0,
            bisect_tol: 1e-16,
            r_max_scalefree: 60.0,
            switch_threshold: 1e-3,
            match_tol: 1e-9,
            r_max: 1000.0,
            grid_step: 0.02,
            tail_passes: 4,
            h0: 1e-3,
            step: StepControl::default(),
        }
    }
}

impl ShootingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.u0 > 0.0 && self.u0.is_finite()) {
            return invalid("u0 must be positive");
        }
        if !(self.w_lo < self.w_hi) {
            return invalid(format!(
                "bracket needs w_lo < w_hi (got {} and {})",
                self.w_lo, self.w_hi
            ));
        }
        if !(self.bisect_tol > 0.0) || !(self.match_tol > 0.0) {
            return invalid("bisection and matching tolerances must be positive");
        }
        if !(self.switch_threshold > 0.0 && self.switch_threshold < 1.0) {
            return invalid("switch_threshold must lie in (0, 1) relative to u0");
        }
        if !(self.r_max_scalefree > 1.0) {
            return invalid("shooting horizon must exceed 1");
        }
        if !(self.grid_step > 0.0 && self.r_max > 4.0 * self.grid_step) {
            return invalid("output grid needs 0 < grid_step and r_max > 4 grid steps");
        }
        if self.r_max / self.grid_step > 2.0e7 {
            return invalid("output grid too large");
        }
        if !(self.h0 > 0.0 && self.h0 < 0.5 * self.grid_step) {
            return invalid("Taylor start h0 must be positive and below half a grid step");
        }
        self.step.validate()
    }
}

/// Outcome class of a single shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShotClass {
    Crossed,
    Diverged,
    Decayed,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shot {
    Crossed(f64),
    Diverged(f64),
    Decayed(Trajectory),
}

impl Shot {
    pub fn class(&self) -> ShotClass {
        match self {
            Shot::Crossed(_) => ShotClass::Crossed,
            Shot::Diverged(_) => ShotClass::Diverged,
            Shot::Decayed(_) => ShotClass::Decayed,
        }
    }
}

const CROSSED: &str = "crossed";
const TURNED: &str = "turned-up";
const GREW: &str = "growth-guard";

fn run_shot(
    sys: ScaleFreeSystem,
    w: f64,
    cfg: &ShootingConfig,
    stops: Vec<f64>,
) -> Result<(ShotClass, Trajectory)> {
    let u0 = cfg.u0;
    let s0 = sys.start(u0, w * u0, cfg.h0)?;
    let horizon = cfg.r_max_scalefree / u0.sqrt();
    let events = vec![
        Event::new(CROSSED, |_, y: &[f64]| y[0]),
        // −r u' = p/r − p'; fires once u stops decreasing
        Event::new(TURNED, |r, y: &[f64]| y[0] / r - y[1]),
        Event::new(GREW, move |r, y: &[f64]| 10.0 * u0 - y[0] / r),
    ];
    let f = |r: f64, y: &[f64], dy: &mut [f64]| sys.rhs(r, y, dy);
    let traj = integrate(
        &f,
        &s0,
        horizon,
        &cfg.step,
        IntegrateOptions { events, stops },
    )?;
    let class = match &traj.termination {
        Termination::Event { label, .. } if label == CROSSED => ShotClass::Crossed,
        Termination::Event { .. } => ShotClass::Diverged,
        Termination::ReachedEnd => ShotClass::Decayed,
        Termination::StepUnderflow => {
            let last = traj.last();
            return Err(Error::SolverFailure {
                r: last.r,
                state: last.y.clone(),
                message: format!("step size underflow while shooting with W(0) = {}", w * u0),
            });
        }
    };
    Ok((class, traj))
}

fn shoot_with(sys: ScaleFreeSystem, w: f64, cfg: &ShootingConfig) -> Result<Shot> {
    let (class, traj) = run_shot(sys, w, cfg, Vec::new())?;
    let r_end = traj.last().r;
    Ok(match class {
        ShotClass::Crossed => Shot::Crossed(r_end),
        ShotClass::Diverged => Shot::Diverged(r_end),
        ShotClass::Decayed => Shot::Decayed(traj),
    })
}

/// Integrates the plain scale-free system from `W(0) = w·u0` and classifies the shot.
pub fn shoot_once(w: f64, cfg: &ShootingConfig) -> Result<Shot> {
    cfg.validate()?;
    shoot_with(ScaleFreeSystem::PLAIN, w, cfg)
}

/// Classifies every `w` of a sweep; used for bracket scans.
pub fn bracket_scan(
    sys: ScaleFreeSystem,
    ws: &[f64],
    cfg: &ShootingConfig,
    exec: Execution,
) -> Result<Vec<ShotClass>> {
    cfg.validate()?;
    exec.map(ws, |&w| shoot_with(sys, w, cfg).map(|s| s.class()))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectOutcome<C> {
    pub lo: f64,
    pub hi: f64,
    pub lo_class: C,
    pub hi_class: C,
    pub iterations: usize,
    /// Midpoint whose class matched neither end.
    pub stopped_at: Option<f64>,
}

impl<C> BisectOutcome<C> {
    pub fn midpoint(&self) -> f64 {
        self.stopped_at.unwrap_or(0.5 * (self.lo + self.hi))
    }
}

/// Bisection on a two-class boundary. Stops when the bracket is narrower
/// than `tol`, when the midpoint is no longer representable between the
/// ends, or when a midpoint falls in a third class.
pub fn bisect_boundary<C, F>(
    lo: f64,
    hi: f64,
    tol: f64,
    mut classify: F,
) -> Result<BisectOutcome<C>>
where
    C: PartialEq + fmt::Debug,
    F: FnMut(f64) -> Result<C>,
{
    let lo_class = classify(lo)?;
    let hi_class = classify(hi)?;
    if lo_class == hi_class {
        return Err(Error::InvalidBracket {
            w_lo: lo,
            w_hi: hi,
            class: format!("{lo_class:?}").to_lowercase(),
        });
    }
    let mut out = BisectOutcome {
        lo,
        hi,
        lo_class,
        hi_class,
        iterations: 0,
        stopped_at: None,
    };
    while out.hi - out.lo > tol && out.iterations < 2000 {
        let mid = out.lo + 0.5 * (out.hi - out.lo);
        if mid <= out.lo || mid >= out.hi {
            break;
        }
        out.iterations += 1;
        let c = classify(mid)?;
        if c == out.lo_class {
            out.lo = mid;
        } else if c == out.hi_class {
            out.hi = mid;
        } else {
            out.stopped_at = Some(mid);
            break;
        }
    }
    Ok(out)
}

/// Bisects the plain system on `[w_lo, w_hi]`.
pub fn bisect_ground(cfg: &ShootingConfig) -> Result<BisectOutcome<ShotClass>> {
    cfg.validate()?;
    let sys = ScaleFreeSystem::PLAIN;
    bisect_boundary(cfg.w_lo, cfg.w_hi, cfg.bisect_tol, |w| {
        shoot_with(sys, w, cfg).map(|s| s.class())
    })
}

/// Widens `[lo, hi]` until its ends classify differently.
fn expand_bracket(
    sys: ScaleFreeSystem,
    cfg: &ShootingConfig,
    mut lo: f64,
    mut hi: f64,
) -> Result<(f64, f64)> {
    let class = |w: f64| shoot_with(sys, w, cfg).map(|s| s.class());
    let (mut c_lo, mut c_hi) = (class(lo)?, class(hi)?);
    let mut span = hi - lo;
    for _ in 0..60 {
        if c_lo != c_hi {
            return Ok((lo, hi));
        }
        span *= 2.0;
        if c_lo == ShotClass::Crossed {
            hi = lo;
            c_hi = c_lo;
            lo -= span;
            c_lo = class(lo)?;
        } else {
            lo = hi;
            c_lo = c_hi;
            hi += span;
            c_hi = class(hi)?;
        }
    }
    Err(Error::InvalidBracket {
        w_lo: lo,
        w_hi: hi,
        class: format!("{c_lo:?}").to_lowercase(),
    })
}

/// Matched scale-free solution on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleFreeSolution {
    pub system: ScaleFreeSystem,
    pub u0: f64,
    /// `W(0)` of the accepted shot.
    pub w0: f64,
    pub iterations: usize,
    pub nodes: Vec<f64>,
    pub ln_u: Vec<f64>,
    pub dln_u: Vec<f64>,
    pub w: Vec<f64>,
    pub dw: Vec<f64>,
    /// `∫₀^r u² s² ds`.
    pub m: Vec<f64>,
    pub w_inf: f64,
    /// Index of the node joining core and tail.
    pub i_match: usize,
    /// `(ln u)'` jump between core and tail at the joining node.
    pub slope_mismatch: f64,
}

fn sample(traj: &Trajectory, r: f64) -> Option<Vec<f64>> {
    (0..ScaleFreeSystem::DIM)
        .map(|k| traj.dense(k, r))
        .collect()
}

/// Bisection, core/tail matching and tail continuation in scale-free units.
pub fn solve_scale_free(
    sys: ScaleFreeSystem,
    cfg: &ShootingConfig,
    auto_bracket: bool,
) -> Result<ScaleFreeSolution> {
    cfg.validate()?;
    let (w_lo, w_hi) = if auto_bracket {
        expand_bracket(sys, cfg, cfg.w_lo, cfg.w_hi)?
    } else {
        (cfg.w_lo, cfg.w_hi)
    };
    let bis = bisect_boundary(w_lo, w_hi, cfg.bisect_tol, |w| {
        shoot_with(sys, w, cfg).map(|s| s.class())
    })?;
    let (wa, wb) = match bis.stopped_at {
        Some(w) => (w, w),
        None => (bis.lo, bis.hi),
    };
    let u0 = cfg.u0;

    // First pass without stops: locate the joining radius and estimate λ.
    let (_, ta) = run_shot(sys, wa, cfg, Vec::new())?;
    let (_, tb) = run_shot(sys, wb, cfg, Vec::new())?;
    let r_end = ta.last().r.min(tb.last().r);
    let probe = 0.05 / u0.sqrt();
    let mut r_join = ta.states[0].r;
    let mut r = r_join + probe;
    while r < r_end {
        let (ya, yb) = match (sample(&ta, r), sample(&tb, r)) {
            (Some(a), Some(b)) => (a, b),
            _ => break,
        };
        let p = 0.5 * (ya[0] + yb[0]);
        if (ya[0] - yb[0]).abs() > cfg.match_tol * p.abs()
            || p / r < cfg.switch_threshold * u0
            || p <= 0.0
        {
            break;
        }
        r_join = r;
        r += probe;
    }
    let q_slope = sample(&tb, r_join).map(|y| y[3]).unwrap_or(tb.last().y[3]);
    if !(q_slope < 0.0) {
        return Err(Error::NoBoundState(format!(
            "q'(r) = {q_slope} is not negative at the matching radius"
        )));
    }
    let lambda_est = (-q_slope).powf(-0.5);

    // Output grid in scale-free units.
    let h = cfg.grid_step * lambda_est;
    if h <= cfg.h0 {
        return invalid("grid step falls below the Taylor start radius");
    }
    let n_nodes = (cfg.r_max / cfg.grid_step).round() as usize + 1;
    let nodes: Vec<f64> = (0..n_nodes).map(|i| i as f64 * h).collect();
    let stops: Vec<f64> = nodes
        .iter()
        .copied()
        .filter(|&x| x > cfg.h0 && x <= r_join + h)
        .collect();
    let (_, ta) = run_shot(sys, wa, cfg, stops.clone())?;
    let (_, tb) = run_shot(sys, wb, cfg, stops)?;

    // Core values on nodes up to the joining radius.
    let (a_ser, b_ser) = sys.series(u0, wb * u0, 1);
    let mut ln_u = vec![u0.ln()];
    let mut dln_u = vec![a_ser[1] / a_ser[0]];
    let mut w = vec![b_ser[0]];
    let mut dw = vec![0.0];
    let mut m = vec![0.0];
    let mut q_slope_at = vec![f64::NAN];
    let mut i_match = 0;
    for (i, &x) in nodes.iter().enumerate().skip(1) {
        if x > r_join {
            break;
        }
        let (Some(ia), Some(ib)) = (ta.index_of(x), tb.index_of(x)) else {
            break;
        };
        let y: Vec<f64> = ta.states[ia]
            .y
            .iter()
            .zip(&tb.states[ib].y)
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        if !(y[0] > 0.0) {
            break;
        }
        let u = y[0] / x;
        ln_u.push(u.ln());
        dln_u.push((y[1] - u) / (x * u));
        w.push(y[2] / x);
        dw.push(-sys.sign.factor() * y[4] / (x * x));
        m.push(y[4]);
        q_slope_at.push(y[3]);
        i_match = i;
    }
    if i_match < 2 {
        return Err(Error::SolverFailure {
            r: nodes[i_match],
            state: vec![],
            message: "shooting bracket too wide to resolve the core solution".into(),
        });
    }
    let q_slope_match = q_slope_at[i_match];
    let mut w_inf = q_slope_match;

    let tail_nodes = &nodes[i_match..];
    if tail_nodes.len() >= 2 {
        let tail = continue_tail(
            sys,
            cfg,
            tail_nodes,
            ln_u[i_match],
            m[i_match],
            q_slope_match,
        )?;
        w_inf = tail.w_inf;
        let s = sys.sign.factor();
        let slope_mismatch = tail.dln_u[0] - dln_u[i_match];
        for (j, &x) in tail_nodes.iter().enumerate().skip(1) {
            ln_u.push(tail.ln_u[j]);
            dln_u.push(tail.dln_u[j]);
            w.push(w_inf + s * (tail.m[j] / x + tail.t1[j]));
            dw.push(-s * tail.m[j] / (x * x));
            m.push(tail.m[j]);
        }
        return Ok(ScaleFreeSolution {
            system: sys,
            u0,
            w0: wb * u0,
            iterations: bis.iterations,
            nodes,
            ln_u,
            dln_u,
            w,
            dw,
            m,
            w_inf,
            i_match,
            slope_mismatch,
        });
    }
    let n = ln_u.len();
    Ok(ScaleFreeSolution {
        system: sys,
        u0,
        w0: wb * u0,
        iterations: bis.iterations,
        nodes: nodes[..n].to_vec(),
        ln_u,
        dln_u,
        w,
        dw,
        m,
        w_inf,
        i_match,
        slope_mismatch: 0.0,
    })
}

struct Tail {
    ln_u: Vec<f64>,
    dln_u: Vec<f64>,
    m: Vec<f64>,
    t1: Vec<f64>,
    w_inf: f64,
}

/// Inward Riccati continuation of `g = (ln u)'` over the uniform `nodes`,
/// iterated so that the tail's own charge feeds back into `W` and `W∞`.
fn continue_tail(
    sys: ScaleFreeSystem,
    cfg: &ShootingConfig,
    nodes: &[f64],
    ln_u_match: f64,
    m_match: f64,
    q_slope_match: f64,
) -> Result<Tail> {
    let s = sys.sign.factor();
    let c = sys.coupling;
    let n = nodes.len();
    let r0 = nodes[0];
    let r_far = nodes[n - 1];
    let h = nodes[1] - nodes[0];
    let mut m = vec![m_match; n];
    let mut t1 = vec![0.0; n];
    let mut w_inf = q_slope_match;
    let mut ln_u = vec![0.0; n];
    let mut g = vec![0.0; n];

    for _ in 0..cfg.tail_passes.max(1) {
        if !(w_inf < 0.0) {
            return Err(Error::NoBoundState(format!(
                "W(∞) = {w_inf} is not negative"
            )));
        }
        let k = (-w_inf).sqrt();
        let beta = (s * m[n - 1] + c) / (2.0 * k) - 1.0;
        let interp = |v: &[f64], r: f64| {
            let t = ((r - r0) / h).clamp(0.0, (n - 1) as f64);
            let j = (t.floor() as usize).min(n - 2);
            let f = t - j as f64;
            v[j] + f * (v[j + 1] - v[j])
        };
        let (m_ref, t1_ref) = (&m, &t1);
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            let r = -t;
            let wr = w_inf + s * (interp(m_ref, r) / r + interp(t1_ref, r));
            dy[0] = wr + c / r + y[0] * y[0] + 2.0 * y[0] / r;
            dy[1] = y[0];
        };
        let start = OdeState::new(-r_far, vec![-k + beta / r_far, 0.0])?;
        let stops: Vec<f64> = nodes[..n - 1].iter().rev().map(|&x| -x).collect();
        let traj = integrate(
            &rhs,
            &start,
            -r0,
            &cfg.step,
            IntegrateOptions {
                events: vec![],
                stops,
            },
        )?;
        if traj.termination != Termination::ReachedEnd {
            let last = traj.last();
            return Err(Error::SolverFailure {
                r: -last.r,
                state: last.y.clone(),
                message: "tail continuation failed".into(),
            });
        }
        let mut lam = vec![0.0; n];
        for (j, &x) in nodes.iter().enumerate() {
            let i = traj.index_of(-x).ok_or_else(|| Error::SolverFailure {
                r: x,
                state: vec![],
                message: "tail continuation skipped a grid node".into(),
            })?;
            g[j] = traj.states[i].y[0];
            lam[j] = traj.states[i].y[1];
        }
        for j in 0..n {
            ln_u[j] = ln_u_match + lam[0] - lam[j];
        }
        let rho: Vec<f64> = ln_u.iter().map(|&l| (2.0 * l).exp()).collect();
        let shell: Vec<f64> = rho.iter().zip(nodes).map(|(p, x)| p * x * x).collect();
        let first: Vec<f64> = rho.iter().zip(nodes).map(|(p, x)| p * x).collect();
        let cm = cumulative_integral(nodes, &shell);
        let ct = cumulative_integral(nodes, &first);
        let total = ct[n - 1];
        for j in 0..n {
            m[j] = m_match + cm[j];
            t1[j] = total - ct[j];
        }
        w_inf = q_slope_match - s * t1[0];
    }
    Ok(Tail {
        ln_u,
        dln_u: g,
        m,
        t1,
        w_inf,
    })
}

/// One step of the Hartree fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointIterate {
    pub iteration: usize,
    /// Scale-free point charge `Ẑ` used by this solve.
    pub charge: f64,
    /// `𝔷‖û‖₂²` produced by it.
    pub target: f64,
    pub relative_change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    /// `u` in final units, log representation with `(ln u)'` slopes.
    pub u: RadialProfile,
    /// `W = V − 1` in final units.
    pub w: RadialProfile,
    /// `ψ₁(r) = u(r/b)/a`, `b = ‖u‖₂²/8π`, `a = √(8π) b²`.
    pub psi: RadialProfile,
    pub lambda: f64,
    pub norm_sq: f64,
    pub e0_eq4: f64,
    /// Accepted `W(0)` in scale-free units.
    pub shoot_param: f64,
    pub iterations: usize,
    pub u_center: f64,
    pub u_second_center: f64,
    pub w_inf_scalefree: f64,
    /// Core/tail joining radius in final units.
    pub r_match: f64,
    pub slope_mismatch: f64,
    pub sign: Sign,
    pub zeta: f64,
    /// Point-charge coefficient `c` of `c/r` in final units.
    pub coupling: f64,
    /// Functionals of `ψ₁` in the normalized units.
    pub report: FunctionalReport,
    /// Functionals of `u` in final units.
    pub report_u: FunctionalReport,
    pub fixed_point: Vec<FixedPointIterate>,
}

/// Fixes units so that `W(∞) = −1` and evaluates all functionals.
pub fn rescale_to_unit_energy(sol: &ScaleFreeSolution) -> Result<GroundState> {
    rescale(sol, 0.0)
}

fn rescale(sol: &ScaleFreeSolution, zeta: f64) -> Result<GroundState> {
    if !(sol.w_inf < 0.0) {
        return Err(Error::NoBoundState(format!(
            "W(∞) = {} is not negative",
            sol.w_inf
        )));
    }
    let lambda = (-sol.w_inf).powf(-0.5);
    let grid = RadialGrid::new(sol.nodes.iter().map(|x| x / lambda).collect())?;
    let shift = 2.0 * lambda.ln();
    let ln_u: Vec<f64> = sol.ln_u.iter().map(|v| v + shift).collect();
    let slopes: Vec<f64> = sol.dln_u.iter().map(|d| d * lambda).collect();
    let u =
        RadialProfile::log(grid.clone(), ln_u.clone(), Quantity::U)?.with_slopes(slopes.clone())?;
    let l2 = lambda * lambda;
    let w = RadialProfile::linear(
        grid.clone(),
        sol.w.iter().map(|v| v * l2).collect(),
        Quantity::W,
    )?
    .with_slopes(sol.dw.iter().map(|d| d * l2 * lambda).collect())?;

    let norm_sq = 4.0 * PI * lambda * sol.m.last().copied().unwrap_or(0.0);
    let e0_eq4 = -(8.0 * PI / norm_sq).powi(2);
    let b = norm_sq / (8.0 * PI);
    let a = (8.0 * PI).sqrt() * b * b;
    let psi = RadialProfile::log(
        grid.scaled(b)?,
        ln_u.iter().map(|v| v - a.ln()).collect(),
        Quantity::Psi,
    )?
    .with_slopes(slopes.iter().map(|d| d / b).collect())?;

    let sys = sol.system;
    let plain = sys.coupling == 0.0 && sys.sign == Sign::Plus && zeta == 0.0;
    let mode_u = if plain {
        FunctionalMode::Efrak
    } else {
        FunctionalMode::Hartree {
            sign: sys.sign,
            zeta,
        }
    };
    let report_u = functional_report(&u, mode_u)?;
    let report = functional_report(&psi, FunctionalMode::Ffrak)?;
    let (a_ser, _) = sys.series(sol.u0, sol.w0, 2);
    Ok(GroundState {
        u,
        w,
        psi,
        lambda,
        norm_sq,
        e0_eq4,
        shoot_param: sol.w0,
        iterations: sol.iterations,
        u_center: l2 * sol.u0,
        u_second_center: l2 * l2 * 2.0 * a_ser[2],
        w_inf_scalefree: sol.w_inf,
        r_match: sol.nodes[sol.i_match] / lambda,
        slope_mismatch: sol.slope_mismatch * lambda,
        sign: sys.sign,
        zeta,
        coupling: lambda * sys.coupling,
        report,
        report_u,
        fixed_point: Vec::new(),
    })
}

impl GroundState {
    /// `M(r) = 4π ∫₀^r u² s² ds` on the solution grid.
    pub fn mass(&self) -> Result<RadialProfile> {
        crate::radial::mass_function(&self.u)
    }

    /// `ln u` as a linear profile.
    pub fn ln_u(&self) -> Result<RadialProfile> {
        let p = RadialProfile::linear(
            self.u.grid().clone(),
            self.u.values().to_vec(),
            Quantity::LnU,
        )?;
        match self.u.slopes() {
            Some(s) => p.with_slopes(s.to_vec()),
            None => Ok(p),
        }
    }

    pub fn is_plain(&self) -> bool {
        self.sign == Sign::Plus && self.zeta == 0.0 && self.coupling == 0.0
    }

    /// Structural checks on the solution; a failure points at a solver bug.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |r: f64, message: String| {
            Err(Error::SolverFailure {
                r,
                state: vec![],
                message,
            })
        };
        let x = self.u.nodes();
        let lnu = self.u.values();
        if lnu.iter().any(|v| !v.is_finite()) {
            return fail(0.0, "u is not strictly positive".into());
        }
        for i in 1..lnu.len() - 1 {
            if lnu[i + 1] >= lnu[i] {
                return fail(x[i], "u is not decreasing".into());
            }
        }
        if self.is_plain() {
            let w = self.w.values();
            for i in 1..w.len() - 1 {
                if w[i + 1] >= w[i] {
                    return fail(x[i], "W is not decreasing".into());
                }
            }
            if !(w[w.len() - 1] < 0.0) {
                return fail(x[x.len() - 1], "W(r_max) is not negative".into());
            }
            let (lo, hi) = (
                bounds::lower_bound_constants().norm_lower,
                bounds::gaussian_upper_bound().norm_upper,
            );
            if !(self.norm_sq >= lo && self.norm_sq <= hi) {
                return fail(
                    0.0,
                    format!(
                        "norm {} outside the certified range [{lo}, {hi}]",
                        self.norm_sq
                    ),
                );
            }
        }
        Ok(())
    }

    /// Flat JSON summary.
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "norm_sq": self.norm_sq,
            "E0_eq4": self.e0_eq4,
            "lambda": self.lambda,
            "shoot_param": self.shoot_param,
            "iterations": self.iterations,
            "u_center": self.u_center,
            "u_second_center": self.u_second_center,
            "u_prime_center": if self.is_plain() { 0.0 } else { -self.coupling * self.u_center / 2.0 },
            "w_inf_scalefree": self.w_inf_scalefree,
            "r_match": self.r_match,
            "slope_mismatch": self.slope_mismatch,
            "r_max": self.u.grid().last(),
            "grid_points": self.u.len(),
            "sign": self.sign,
            "zeta": self.zeta,
            "coupling": self.coupling,
            "report": self.report,
            "report_u": self.report_u,
            "fixed_point": self.fixed_point,
        })
    }
}

/// Ground state of the plain equation in units where `W(∞) = −1`.
pub fn solve_ground_state(cfg: &ShootingConfig) -> Result<GroundState> {
    let sol = solve_scale_free(ScaleFreeSystem::PLAIN, cfg, false)?;
    let gs = rescale_to_unit_energy(&sol)?;
    gs.check_invariants()?;
    Ok(gs)
}

/// Only a point charge at the origin is supported as external measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    #[default]
    Delta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HartreeConfig {
    pub sign: Sign,
    pub zeta: f64,
    pub exploratory: bool,
    pub measure: Measure,
    pub damping: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub shooting: ShootingConfig,
}

impl Default for HartreeConfig {
    fn default() -> Self {
        Self {
            sign: Sign::Plus,
            zeta: 0.5,
            exploratory: false,
            measure: Measure::Delta,
            damping: 0.5,
            max_iter: 200,
            tol: 1e-10,
            shooting: ShootingConfig::default(),
        }
    }
}

/// Below this coupling the repulsive variant is not expected to bind.
pub const EXPLORATORY_ZETA_MIN: f64 = 0.825;

impl HartreeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.zeta >= 0.0 && self.zeta.is_finite()) {
            return Err(Error::Domain(format!(
                "zeta must be nonnegative, got {}",
                self.zeta
            )));
        }
        if self.sign == Sign::Minus {
            let floor_ok = if self.exploratory {
                self.zeta >= EXPLORATORY_ZETA_MIN
            } else {
                self.zeta > 1.0
            };
            if !floor_ok {
                return Err(Error::Domain(if self.exploratory {
                    format!(
                        "minus sign needs zeta >= {EXPLORATORY_ZETA_MIN}, got {}",
                        self.zeta
                    )
                } else {
                    format!("minus sign needs zeta > 1 (got {}); pass the exploratory flag for [0.825, 1]", self.zeta)
                }));
            }
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return invalid("damping must lie in (0, 1]");
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return invalid("fixed point needs tol > 0 and max_iter >= 1");
        }
        self.shooting.validate()
    }
}

/// Damped fixed point on the scale-free point charge `Ẑ = 𝔷‖û‖₂²`.
///
/// The configured damping is an upper bound: from the second iterate on,
/// the step is `Ẑ ← Ẑ + θ (𝔷‖û‖₂² − Ẑ)` with `θ = 1/(1 − σ)` clamped to
/// `[0.01, damping]`, `σ` being the secant slope of the map. An iterate
/// that admits no bound state is replaced by the midpoint towards the
/// previous accepted one.
pub fn hartree_solve(cfg: &HartreeConfig) -> Result<GroundState> {
    cfg.validate()?;
    let mut shooting = cfg.shooting;
    let plain = solve_scale_free(ScaleFreeSystem::PLAIN, &shooting, false)
        .or_else(|_| solve_scale_free(ScaleFreeSystem::PLAIN, &shooting, true))?;
    let norm_of = |sol: &ScaleFreeSolution| 4.0 * PI * sol.m.last().copied().unwrap_or(0.0);
    let mut charge = cfg.zeta * norm_of(&plain);
    let mut history = Vec::new();
    let mut last_w = plain.w0 / shooting.u0;
    // last accepted (charge, residual)
    let mut prev: Option<(f64, f64)> = None;

    for iteration in 1..=cfg.max_iter {
        let sys = ScaleFreeSystem {
            coupling: charge / (4.0 * PI),
            sign: cfg.sign,
        };
        shooting.w_lo = last_w - 0.05;
        shooting.w_hi = last_w + 0.05;
        let sol = match solve_scale_free(sys, &shooting, true) {
            Ok(sol) => sol,
            Err(
                Error::NoBoundState(_) | Error::InvalidBracket { .. } | Error::SolverFailure { .. },
            ) if prev.is_some() => {
                let (z_ok, _) = prev.unwrap();
                history.push(FixedPointIterate {
                    iteration,
                    charge,
                    target: f64::NAN,
                    relative_change: f64::NAN,
                });
                charge = z_ok + 0.5 * (charge - z_ok);
                continue;
            }
            Err(e) => return Err(e),
        };
        last_w = sol.w0 / shooting.u0;
        let target = cfg.zeta * norm_of(&sol);
        let residual = target - charge;
        let theta = match prev {
            Some((z0, r0)) if charge != z0 => {
                let sigma = 1.0 + (residual - r0) / (charge - z0);
                if sigma < 1.0 {
                    (1.0 / (1.0 - sigma)).clamp(0.01, cfg.damping)
                } else {
                    cfg.damping
                }
            }
            _ => cfg.damping,
        };
        let next = charge + theta * residual;
        let change = (next - charge).abs();
        let relative_change = if charge != 0.0 {
            change / charge.abs()
        } else {
            change
        };
        history.push(FixedPointIterate {
            iteration,
            charge,
            target,
            relative_change,
        });
        if relative_change < cfg.tol || change == 0.0 {
            let mut gs = rescale(&sol, cfg.zeta)?;
            gs.fixed_point = history;
            gs.check_invariants()?;
            return Ok(gs);
        }
        prev = Some((charge, residual));
        charge = next;
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iter,
        history: history.iter().map(|h| h.charge).collect(),
    })
}

/// Independent Hartree solves over a list of couplings.
pub fn hartree_sweep(
    base: &HartreeConfig,
    zetas: &[f64],
    exec: Execution,
) -> Vec<Result<GroundState>> {
    exec.map(zetas, |&zeta| {
        hartree_solve(&HartreeConfig { zeta, ..*base })
    })
}
