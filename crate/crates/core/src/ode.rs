//! Adaptive Cash–Karp 4(5) integration of first-order systems.
//!
//! The fifth-order solution is propagated (local extrapolation) and the
//! embedded fourth-order difference drives a PI step-size controller.
//! Integrations can be forced to land exactly on a list of stop radii,
//! which is how solvers obtain samples on a prescribed output grid, and can
//! terminate on sign-change events localized by re-stepping from the last
//! accepted state.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Butcher tableau of the Cash–Karp pair.
mod tableau {
    pub const C: [f64; 6] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 3.0 / 5.0, 1.0, 7.0 / 8.0];
    pub const A: [[f64; 5]; 6] = [
        [0.0; 5],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
        [3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0, 0.0, 0.0],
        [-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0, 0.0],
        [
            1631.0 / 55296.0,
            175.0 / 512.0,
            575.0 / 13824.0,
            44275.0 / 110592.0,
            253.0 / 4096.0,
        ],
    ];
    /// fifth order weights
    pub const B5: [f64; 6] = [
        37.0 / 378.0,
        0.0,
        250.0 / 621.0,
        125.0 / 594.0,
        0.0,
        512.0 / 1771.0,
    ];
    /// embedded fourth order weights
    pub const B4: [f64; 6] = [
        2825.0 / 27648.0,
        0.0,
        18575.0 / 48384.0,
        13525.0 / 55296.0,
        277.0 / 14336.0,
        1.0 / 4.0,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeState {
    pub r: f64,
    pub y: Vec<f64>,
}

impl OdeState {
    pub fn new(r: f64, y: Vec<f64>) -> Result<Self> {
        if !r.is_finite() || y.iter().any(|v| !v.is_finite()) {
            return invalid("ODE state must be finite");
        }
        Ok(Self { r, y })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub safety: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            h_init: 1e-3,
            h_min: 1e-14,
            h_max: 1.0,
            safety: 0.9,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return invalid("tolerances must be positive");
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_init && self.h_init <= self.h_max) {
            return invalid("step bounds must satisfy 0 < h_min <= h_init <= h_max");
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return invalid("safety factor must lie in (0, 1)");
        }
        Ok(())
    }

    /// Both tolerances multiplied by `factor`.
    pub fn scaled_tolerances(self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..self
        }
    }

    fn error_norm(&self, y0: &[f64], y1: &[f64], err: &[f64]) -> f64 {
        err.iter()
            .zip(y0.iter().zip(y1))
            .map(|(e, (a, b))| e.abs() / (self.abs_tol + self.rel_tol * a.abs().max(b.abs())))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedEnd,
    Event { label: String, r: f64 },
    StepUnderflow,
}

pub type EventFn<'a> = Box<dyn Fn(f64, &[f64]) -> f64 + Sync + 'a>;

/// Sign-change event: fires when `func` goes from positive to `<= 0`.
pub struct Event<'a> {
    pub label: String,
    pub func: EventFn<'a>,
}

impl<'a> Event<'a> {
    pub fn new(label: impl Into<String>, func: impl Fn(f64, &[f64]) -> f64 + Sync + 'a) -> Self {
        Self {
            label: label.into(),
            func: Box::new(func),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<OdeState>,
    /// Right-hand side evaluated at each state.
    pub derivs: Vec<Vec<f64>>,
    /// Scaled error norm of each accepted step (`<= 1`); one fewer than `states`.
    pub step_errors: Vec<f64>,
    pub termination: Termination,
    pub rhs_evals: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn last(&self) -> &OdeState {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.r)
    }

    /// Index of the state sitting exactly at `r`, if any.
    pub fn index_of(&self, r: f64) -> Option<usize> {
        self.states
            .binary_search_by(|s| s.r.partial_cmp(&r).unwrap())
            .ok()
    }

    /// Cubic Hermite dense output for component `k` at `r` within the trajectory.
    pub fn dense(&self, k: usize, r: f64) -> Option<f64> {
        let i = match self
            .states
            .binary_search_by(|s| s.r.partial_cmp(&r).unwrap())
        {
            Ok(i) => return Some(self.states[i].y[k]),
            Err(0) => return None,
            Err(i) if i >= self.states.len() => return None,
            Err(i) => i - 1,
        };
        let (a, b) = (&self.states[i], &self.states[i + 1]);
        let h = b.r - a.r;
        let t = (r - a.r) / h;
        let (t2, t3) = (t * t, t * t * t);
        Some(
            (2.0 * t3 - 3.0 * t2 + 1.0) * a.y[k]
                + (t3 - 2.0 * t2 + t) * h * self.derivs[i][k]
                + (-2.0 * t3 + 3.0 * t2) * b.y[k]
                + (t3 - t2) * h * self.derivs[i + 1][k],
        )
    }

    /// `r,y0,y1,...` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = self.states[0].y.len();
        let mut header = vec!["r".to_string()];
        header.extend((0..dim).map(|k| format!("y{k}")));
        w.write_record(&header)?;
        for s in &self.states {
            let mut rec = vec![s.r.to_string()];
            rec.extend(s.y.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Marker for a step whose stages produced non-finite values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepFailure;

/// One Cash–Karp step of size `h`: fifth-order advance plus the embedded
/// fourth/fifth-order difference as error estimate.
pub fn ck45_step<F>(
    f: &F,
    s: &OdeState,
    h: f64,
) -> std::result::Result<(OdeState, Vec<f64>), StepFailure>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let mut k1 = vec![0.0; s.y.len()];
    f(s.r, &s.y, &mut k1);
    if k1.iter().any(|v| !v.is_finite()) {
        return Err(StepFailure);
    }
    step_with_k1(f, s, &k1, h)
}

fn step_with_k1<F>(
    f: &F,
    s: &OdeState,
    k1: &[f64],
    h: f64,
) -> std::result::Result<(OdeState, Vec<f64>), StepFailure>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = s.y.len();
    let mut k: [Vec<f64>; 6] = Default::default();
    k[0] = k1.to_vec();
    let mut tmp = vec![0.0; n];
    for stage in 1..6 {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(stage) {
                acc += tableau::A[stage][j] * kj[i];
            }
            tmp[i] = s.y[i] + h * acc;
        }
        let mut out = vec![0.0; n];
        f(s.r + tableau::C[stage] * h, &tmp, &mut out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(StepFailure);
        }
        k[stage] = out;
    }
    let mut y = vec![0.0; n];
    let mut err = vec![0.0; n];
    for i in 0..n {
        let mut hi = 0.0;
        let mut lo = 0.0;
        for (j, kj) in k.iter().enumerate() {
            hi += tableau::B5[j] * kj[i];
            lo += tableau::B4[j] * kj[i];
        }
        y[i] = s.y[i] + h * hi;
        err[i] = h * (hi - lo);
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(StepFailure);
    }
    Ok((OdeState { r: s.r + h, y }, err))
}

/// Extra controls for [`integrate`].
#[derive(Default)]
pub struct IntegrateOptions<'a> {
    pub events: Vec<Event<'a>>,
    /// Radii the integrator must land on exactly (ascending).
    pub stops: Vec<f64>,
}

/// Integrates from `s0` to `r_end`, stopping early at the first event.
pub fn integrate_adaptive<F>(
    f: &F,
    s0: &OdeState,
    r_end: f64,
    ctl: &StepControl,
    events: Vec<Event<'_>>,
) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    integrate(
        f,
        s0,
        r_end,
        ctl,
        IntegrateOptions {
            events,
            stops: Vec::new(),
        },
    )
}

pub fn integrate<F>(
    f: &F,
    s0: &OdeState,
    r_end: f64,
    ctl: &StepControl,
    opts: IntegrateOptions<'_>,
) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    ctl.validate()?;
    if !(s0.r < r_end) {
        return invalid(format!(
            "integration needs r0 < r_end (got {} and {r_end})",
            s0.r
        ));
    }
    if opts.stops.windows(2).any(|w| w[1] < w[0]) {
        return invalid("stop radii must be ascending");
    }
    let dim = s0.y.len();
    let mut d0 = vec![0.0; dim];
    f(s0.r, &s0.y, &mut d0);
    let mut traj = Trajectory {
        states: vec![s0.clone()],
        derivs: vec![d0],
        step_errors: Vec::new(),
        termination: Termination::ReachedEnd,
        rhs_evals: 1,
        rejected: 0,
    };
    if traj.derivs[0].iter().any(|v| !v.is_finite()) {
        traj.termination = Termination::StepUnderflow;
        return Ok(traj);
    }
    let mut event_prev: Vec<f64> = opts.events.iter().map(|e| (e.func)(s0.r, &s0.y)).collect();
    if let Some(i) = event_prev.iter().position(|&g| g <= 0.0) {
        traj.termination = Termination::Event {
            label: opts.events[i].label.clone(),
            r: s0.r,
        };
        return Ok(traj);
    }

    let mut stop_idx = opts.stops.partition_point(|&r| r <= s0.r);
    let end_slack = 4.0 * f64::EPSILON * r_end.abs().max(1.0);
    let mut h = ctl.h_init.min(ctl.h_max);
    let mut prev_err: f64 = 1e-4;

    loop {
        let cur = traj.states.last().unwrap().clone();
        if cur.r >= r_end - end_slack {
            traj.termination = Termination::ReachedEnd;
            return Ok(traj);
        }
        while stop_idx < opts.stops.len() && opts.stops[stop_idx] <= cur.r {
            stop_idx += 1;
        }
        let target = if stop_idx < opts.stops.len() {
            opts.stops[stop_idx].min(r_end)
        } else {
            r_end
        };
        let gap = target - cur.r;
        let clipped = h >= gap;
        let h_try = if clipped { gap } else { h };

        let k1 = traj.derivs.last().unwrap().clone();
        let attempt = step_with_k1(f, &cur, &k1, h_try);
        traj.rhs_evals += 5;
        let (mut next, err_norm) = match attempt {
            Ok((next, err)) => {
                let e = ctl.error_norm(&cur.y, &next.y, &err);
                (next, e)
            }
            Err(StepFailure) => (cur.clone(), f64::INFINITY),
        };
        if !(err_norm <= 1.0) {
            traj.rejected += 1;
            let factor = if err_norm.is_finite() {
                (ctl.safety * err_norm.powf(-0.25)).max(0.2)
            } else {
                0.25
            };
            h = h_try * factor;
            if h < ctl.h_min {
                traj.termination = Termination::StepUnderflow;
                return Ok(traj);
            }
            continue;
        }
        if clipped {
            // land exactly on the stop / end radius
            next.r = target;
        }
        let mut dnext = vec![0.0; dim];
        f(next.r, &next.y, &mut dnext);
        traj.rhs_evals += 1;

        // events
        let mut fired: Option<(usize, f64, OdeState)> = None;
        let mut event_now = Vec::with_capacity(opts.events.len());
        for (i, ev) in opts.events.iter().enumerate() {
            let g = (ev.func)(next.r, &next.y);
            event_now.push(g);
            if event_prev[i] > 0.0 && g <= 0.0 {
                let (r_ev, s_ev) = localize(f, &cur, &k1, next.r - cur.r, &ev.func, ctl);
                traj.rhs_evals += 0;
                if fired.as_ref().is_none_or(|(_, r, _)| r_ev < *r) {
                    fired = Some((i, r_ev, s_ev));
                }
            }
        }
        if let Some((i, r_ev, s_ev)) = fired {
            let mut d = vec![0.0; dim];
            f(s_ev.r, &s_ev.y, &mut d);
            traj.states.push(s_ev);
            traj.derivs.push(d);
            traj.step_errors.push(err_norm);
            traj.termination = Termination::Event {
                label: opts.events[i].label.clone(),
                r: r_ev,
            };
            return Ok(traj);
        }
        event_prev = event_now;

        traj.states.push(next);
        traj.derivs.push(dnext);
        traj.step_errors.push(err_norm);

        // PI controller
        let factor = if err_norm == 0.0 {
            5.0
        } else {
            (ctl.safety * err_norm.powf(-0.7 / 5.0) * prev_err.powf(0.4 / 5.0)).clamp(0.2, 5.0)
        };
        prev_err = err_norm.max(1e-10);
        if !clipped {
            h = h_try * factor;
        }
        h = h.min(ctl.h_max);
    }
}

/// Bisects the step size from `cur` until the sign change of `g` is
/// bracketed within `abs_tol`; returns the radius and the state just past it.
fn localize<F>(
    f: &F,
    cur: &OdeState,
    k1: &[f64],
    h_full: f64,
    g: &(dyn Fn(f64, &[f64]) -> f64 + Sync),
    ctl: &StepControl,
) -> (f64, OdeState)
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let mut lo = 0.0;
    let mut hi = h_full;
    let mut best = step_with_k1(f, cur, k1, hi)
        .map(|(s, _)| s)
        .unwrap_or_else(|_| cur.clone());
    best.r = cur.r + hi;
    let floor = ctl.abs_tol.max(4.0 * f64::EPSILON * cur.r.abs().max(1.0));
    for _ in 0..200 {
        if hi - lo <= floor {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match step_with_k1(f, cur, k1, mid) {
            Ok((s, _)) if g(s.r, &s.y) <= 0.0 => {
                hi = mid;
                best = s;
            }
            Ok(_) => lo = mid,
            Err(_) => hi = mid,
        }
    }
    (cur.r + hi, best)
}

/// State at `r = h0` from truncated Taylor series about `r = 0`
/// (`series[k][n]` is the coefficient of `r^n` in component `k`).
pub fn taylor_start(series: &[Vec<f64>], h0: f64) -> Result<OdeState> {
    if series.is_empty() || series.iter().any(|c| c.is_empty()) {
        return invalid("Taylor series must have at least one coefficient per component");
    }
    if !(h0 > 0.0) {
        return invalid("Taylor start step must be positive");
    }
    let y = series
        .iter()
        .map(|c| c.iter().rev().fold(0.0, |acc, a| acc * h0 + a))
        .collect();
    OdeState::new(h0, y)
}
