//! Explicit Runge–Kutta integration with dense output and level-crossing
//! events.

mod dense;

use serde::Serialize;
use thiserror::Error;

use crate::flow::{in_box, FlowSpec};
use dense::{scan_step, HermiteSeg, Hit};

/// Box-membership slack for integrated states.
pub const BOX_TOL: f64 = 1e-6;
/// Events closer than this (in time) are flagged as near-simultaneous.
pub const SIMULTANEITY_BAND: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("initial state has dimension {actual}, flow has {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("initial state x{} = {value} lies outside the invariant box", index + 1)]
    InitialOutsideBox { index: usize, value: f64 },
    #[error("state left the invariant box at t = {time}: x{} = {value}", index + 1)]
    LeftBox { time: f64, index: usize, value: f64 },
    #[error("step size underflow at t = {time} (h = {step})")]
    StepUnderflow { time: f64, step: f64 },
    #[error("step budget of {steps} exhausted at t = {time}")]
    TooManySteps { time: f64, steps: usize },
    #[error("invalid integration options: {0}")]
    BadOptions(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with a fixed step.
    Rk4 { step: f64 },
    /// Dormand–Prince 5(4) with local error control.
    Dopri5,
}

/// A component and level to monitor for crossings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Watch {
    pub index: usize,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrationOptions {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub initial_step: Option<f64>,
    /// Time tolerance for event localization.
    pub event_tol: f64,
    /// Extrema closer than this to a level, without crossing it, are grazes.
    pub graze_tol: f64,
    pub t_end: f64,
    /// Monitored crossings; `None` watches the signature variables at 0.
    pub watch: Option<Vec<Watch>>,
    /// Stop `event_tail` time units after this many events.
    pub max_events: Option<usize>,
    pub event_tail: f64,
    /// Keep every k-th accepted step, plus every step with an event or with
    /// a watched component within `guard` of its level.
    pub store_every: usize,
    pub guard: f64,
    pub max_steps: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            method: Method::Dopri5,
            rtol: 1e-8,
            atol: 1e-10,
            max_step: 1.0,
            initial_step: None,
            event_tol: 1e-9,
            graze_tol: 1e-9,
            t_end: 50.0,
            watch: None,
            max_events: None,
            event_tail: 1.0,
            store_every: 1,
            guard: 1.0,
            max_steps: 50_000_000,
        }
    }
}

impl IntegrationOptions {
    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn rk4(step: f64, t_end: f64) -> Self {
        IntegrationOptions { method: Method::Rk4 { step }, t_end, ..Default::default() }
    }

    fn validate(&self) -> Result<(), IntegrationError> {
        let bad = |m: &str| Err(IntegrationError::BadOptions(m.to_string()));
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.t_end) {
            return bad("t_end must be positive");
        }
        if !pos(self.rtol) || !pos(self.atol) || !pos(self.event_tol) || !pos(self.max_step) {
            return bad("tolerances and max_step must be positive");
        }
        if let Method::Rk4 { step } = self.method {
            if !pos(step) {
                return bad("fixed step must be positive");
            }
        }
        if self.store_every == 0 {
            return bad("store_every must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    /// 0-based component index.
    pub index: usize,
    pub level: f64,
    /// +1 upward, -1 downward.
    pub direction: i8,
}

/// A tangential contact: an extremum within tolerance of a level with no
/// sign change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Graze {
    pub time: f64,
    pub index: usize,
    pub level: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    TEnd,
    MaxEvents,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// A numerical solution with dense output and events.
///
/// Stored samples `k-1, k` that bound a single accepted step are marked
/// contiguous and interpolated with the step's cubic Hermite polynomial;
/// gaps left by decimation are interpolated linearly. Decimation never skips
/// a step in which a watched component crosses its level, so the sign of
/// every watched component is preserved across gaps.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dim: usize,
    n: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    derivs: Vec<f64>,
    contiguous: Vec<bool>,
    events: Vec<Event>,
    grazes: Vec<Graze>,
    watch: Vec<Watch>,
    stop: StopReason,
    stats: Stats,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Boolean dimension of the flow that produced it.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn deriv(&self, k: usize) -> &[f64] {
        &self.derivs[k * self.dim..(k + 1) * self.dim]
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_final(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn final_deriv(&self) -> &[f64] {
        self.deriv(self.len() - 1)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn grazes(&self) -> &[Graze] {
        &self.grazes
    }

    pub fn watched(&self) -> &[Watch] {
        &self.watch
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    fn segment_index(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s < t).clamp(1, self.len() - 1)
    }

    /// State at time `t`, clamped to the integrated interval.
    pub fn interpolate(&self, t: f64) -> Vec<f64> {
        (0..self.dim).map(|i| self.interpolate_component(t, i)).collect()
    }

    pub fn interpolate_component(&self, t: f64, i: usize) -> f64 {
        if self.len() == 1 || t <= self.t_start() {
            return self.state(0)[i];
        }
        if t >= self.t_final() {
            return self.final_state()[i];
        }
        let k = self.segment_index(t);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (y0, y1) = (self.state(k - 1)[i], self.state(k)[i]);
        if self.contiguous[k] {
            let seg = HermiteSeg::new(t0, t1, y0, y1, self.deriv(k - 1)[i], self.deriv(k)[i]);
            seg.at_theta((t - t0) / (t1 - t0))
        } else {
            y0 + (y1 - y0) * (t - t0) / (t1 - t0)
        }
    }

    /// All crossings of `level` by the given components, scanned over the
    /// stored samples, with tangential contacts reported separately.
    pub fn crossings(&self, indices: &[usize], level: f64, event_tol: f64) -> CrossingReport {
        let mut events = Vec::new();
        let mut grazes = Vec::new();
        for k in 1..self.len() {
            let (t0, t1) = (self.times[k - 1], self.times[k]);
            for &i in indices {
                let (y0, y1) = (self.state(k - 1)[i], self.state(k)[i]);
                if self.contiguous[k] {
                    let seg = HermiteSeg::new(t0, t1, y0, y1, self.deriv(k - 1)[i], self.deriv(k)[i]);
                    for hit in scan_step(&seg, level, event_tol, event_tol, event_tol) {
                        push_hit(hit, i, level, &mut events, &mut grazes);
                    }
                } else if (y0 > level) != (y1 > level) {
                    let time = t0 + (t1 - t0) * (level - y0) / (y1 - y0);
                    events.push(Event { time, index: i, level, direction: if y1 > level { 1 } else { -1 } });
                }
            }
        }
        sort_by_time(&mut events);
        let grazes = suppress_grazes(grazes, &events);
        CrossingReport { events, grazes }
    }

    /// CSV with header `t,x1,..,xN`: stored samples plus one row per event,
    /// in time order. `preamble` lines are written first, each prefixed `# `.
    pub fn to_csv(&self, preamble: &[String]) -> String {
        use std::fmt::Write;
        let mut rows: Vec<(f64, Vec<f64>)> = (0..self.len()).map(|k| (self.times[k], self.state(k).to_vec())).collect();
        rows.extend(self.events.iter().map(|e| (e.time, self.interpolate(e.time))));
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = String::new();
        for line in preamble {
            let _ = writeln!(out, "# {line}");
        }
        out.push('t');
        for i in 1..=self.dim {
            let _ = write!(out, ",x{i}");
        }
        out.push('\n');
        for (t, x) in rows {
            let _ = write!(out, "{t}");
            for v in x {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CrossingReport {
    pub events: Vec<Event>,
    pub grazes: Vec<Graze>,
}

fn push_hit(hit: Hit, index: usize, level: f64, events: &mut Vec<Event>, grazes: &mut Vec<Graze>) {
    match hit {
        Hit::Crossing { time, direction } => events.push(Event { time, index, level, direction }),
        Hit::Graze { time, distance } => grazes.push(Graze { time, index, level, distance }),
    }
}

fn sort_by_time(events: &mut [Event]) {
    events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.index.cmp(&b.index)));
}

/// True when the step's cubic provably stays more than `graze_tol` away from
/// `level`. The cubic deviates from the chord by
/// `hθ(1−θ)[(f0 − s)(1−θ) + (s − f1)θ]` with `s` the chord slope, which is
/// at most `(h·max|f| + |Δy|)/4`.
fn far_from_level(h: f64, (y0, y1): (f64, f64), (f0, f1): (f64, f64), level: f64, graze_tol: f64) -> bool {
    let (d0, d1) = (y0 - level, y1 - level);
    if d0.signum() != d1.signum() || d0 == 0.0 || d1 == 0.0 {
        return false;
    }
    let bound = 0.25 * (h.abs() * f0.abs().max(f1.abs()) + (y1 - y0).abs());
    d0.abs().min(d1.abs()) > 1.01 * bound + graze_tol
}

/// Drops grazes that sit next to a genuine crossing of the same component
/// and level (a crossing split across a step boundary can leave an
/// extremum of the neighbouring step's cubic near the level).
fn suppress_grazes(grazes: Vec<Graze>, events: &[Event]) -> Vec<Graze> {
    grazes
        .into_iter()
        .filter(|g| !events.iter().any(|e| e.index == g.index && e.level == g.level && (e.time - g.time).abs() < SIMULTANEITY_BAND))
        .collect()
}

struct Recorder<'a> {
    opts: &'a IntegrationOptions,
    traj: Trajectory,
    accepted_since_store: usize,
}

impl Recorder<'_> {
    fn push(&mut self, t: f64, y: &[f64], f: &[f64], contiguous: bool) {
        self.traj.times.push(t);
        self.traj.states.extend_from_slice(y);
        self.traj.derivs.extend_from_slice(f);
        self.traj.contiguous.push(contiguous);
    }

    /// Processes one accepted step; returns the number of new events.
    fn accept(&mut self, (t0, y0, f0): (f64, &[f64], &[f64]), (t1, y1, f1): (f64, &[f64], &[f64])) -> Result<usize, IntegrationError> {
        if let Some(index) = y1.iter().position(|v| !in_box(std::slice::from_ref(v), BOX_TOL)) {
            return Err(IntegrationError::LeftBox { time: t1, index, value: y1[index] });
        }
        let mut new_events = Vec::new();
        let mut near = false;
        for w in &self.traj.watch {
            let i = w.index;
            near |= (y0[i] - w.level).abs() <= self.opts.guard || (y1[i] - w.level).abs() <= self.opts.guard;
            if far_from_level(t1 - t0, (y0[i], y1[i]), (f0[i], f1[i]), w.level, self.opts.graze_tol) {
                continue;
            }
            let seg = HermiteSeg::new(t0, t1, y0[i], y1[i], f0[i], f1[i]);
            for hit in scan_step(&seg, w.level, self.opts.event_tol, self.opts.event_tol, self.opts.graze_tol) {
                push_hit(hit, i, w.level, &mut new_events, &mut self.traj.grazes);
                near = true;
            }
        }
        sort_by_time(&mut new_events);
        let count = new_events.len();
        self.traj.events.extend(new_events);
        self.traj.stats.accepted += 1;
        self.accepted_since_store += 1;
        if near || self.accepted_since_store >= self.opts.store_every {
            if *self.traj.times.last().expect("initial sample") != t0 {
                self.push(t0, y0, f0, false);
            }
            self.push(t1, y1, f1, true);
            self.accepted_since_store = 0;
        }
        Ok(count)
    }

    fn finish(mut self, t: f64, y: &[f64], f: &[f64], stop: StopReason) -> Trajectory {
        if *self.traj.times.last().expect("initial sample") != t {
            self.push(t, y, f, false);
        }
        let grazes = std::mem::take(&mut self.traj.grazes);
        self.traj.grazes = suppress_grazes(grazes, &self.traj.events);
        self.traj.stop = stop;
        self.traj
    }
}

// Dormand–Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] = [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

struct Work {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl Work {
    fn new(m: usize) -> Self {
        Work { k: std::array::from_fn(|_| vec![0.0; m]), tmp: vec![0.0; m] }
    }
}

fn combine(y: &[f64], h: f64, ks: &[&Vec<f64>], coeffs: &[f64], out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, c) in ks.iter().zip(coeffs) {
            acc += c * k[j];
        }
        *o = y[j] + h * acc;
    }
}

/// One Dormand–Prince attempt from `(y, k[0] = f(y))`; fills `y_new`, sets
/// `k[6] = f(y_new)` and returns the scaled error norm.
fn dopri_attempt(spec: &FlowSpec, opts: &IntegrationOptions, y: &[f64], h: f64, w: &mut Work, y_new: &mut [f64]) -> f64 {
    let Work { k, tmp } = w;
    let [k1, k2, k3, k4, k5, k6, k7] = k;
    combine(y, h, &[k1], &A2, tmp);
    spec.rhs_into(tmp, k2);
    combine(y, h, &[k1, k2], &A3, tmp);
    spec.rhs_into(tmp, k3);
    combine(y, h, &[k1, k2, k3], &A4, tmp);
    spec.rhs_into(tmp, k4);
    combine(y, h, &[k1, k2, k3, k4], &A5, tmp);
    spec.rhs_into(tmp, k5);
    combine(y, h, &[k1, k2, k3, k4, k5], &A6, tmp);
    spec.rhs_into(tmp, k6);
    combine(y, h, &[k1, k2, k3, k4, k5, k6], &B, y_new);
    spec.rhs_into(y_new, k7);
    let ks = [&*k1, &*k2, &*k3, &*k4, &*k5, &*k6, &*k7];
    let mut sum = 0.0;
    for j in 0..y.len() {
        let err: f64 = h * ks.iter().zip(&E).map(|(k, e)| e * k[j]).sum::<f64>();
        let sc = opts.atol + opts.rtol * y[j].abs().max(y_new[j].abs());
        sum += (err / sc).powi(2);
    }
    (sum / y.len() as f64).sqrt()
}

fn rk4_step(spec: &FlowSpec, y: &[f64], f0: &[f64], h: f64, w: &mut Work, y_new: &mut [f64]) {
    let Work { k, tmp } = w;
    let [_, k2, k3, k4, ..] = k;
    for j in 0..y.len() {
        tmp[j] = y[j] + 0.5 * h * f0[j];
    }
    spec.rhs_into(tmp, k2);
    for j in 0..y.len() {
        tmp[j] = y[j] + 0.5 * h * k2[j];
    }
    spec.rhs_into(tmp, k3);
    for j in 0..y.len() {
        tmp[j] = y[j] + h * k3[j];
    }
    spec.rhs_into(tmp, k4);
    for j in 0..y.len() {
        y_new[j] = y[j] + h / 6.0 * (f0[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
}

fn initial_step(spec: &FlowSpec, opts: &IntegrationOptions, y: &[f64], f0: &[f64]) -> f64 {
    let m = y.len() as f64;
    let scale = |j: usize| opts.atol + opts.rtol * y[j].abs();
    let norm = |v: &dyn Fn(usize) -> f64| ((0..y.len()).map(|j| (v(j) / scale(j)).powi(2)).sum::<f64>() / m).sqrt();
    let d0 = norm(&|j| y[j]);
    let d1 = norm(&|j| f0[j]);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; y.len()];
    spec.rhs_into(&y1, &mut f1);
    let d2 = norm(&|j| f1[j] - f0[j]) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(opts.max_step)
}

/// Integrates `spec` from `x0` at `t = 0`.
pub fn integrate(spec: &FlowSpec, x0: &[f64], opts: &IntegrationOptions) -> Result<Trajectory, IntegrationError> {
    opts.validate()?;
    let m = spec.dim();
    if x0.len() != m {
        return Err(IntegrationError::DimensionMismatch { expected: m, actual: x0.len() });
    }
    if let Some(index) = x0.iter().position(|v| !in_box(std::slice::from_ref(v), BOX_TOL)) {
        return Err(IntegrationError::InitialOutsideBox { index, value: x0[index] });
    }
    let watch = opts.watch.clone().unwrap_or_else(|| (0..spec.n()).map(|index| Watch { index, level: 0.0 }).collect());
    if let Some(w) = watch.iter().find(|w| w.index >= m) {
        return Err(IntegrationError::BadOptions(format!("watched index {} outside dimension {m}", w.index + 1)));
    }

    let mut work = Work::new(m);
    let mut y = x0.to_vec();
    let mut y_new = vec![0.0; m];
    let mut f = vec![0.0; m];
    spec.rhs_into(&y, &mut f);
    let mut stats = Stats { rhs_evals: 1, ..Default::default() };

    let mut rec = Recorder {
        opts,
        traj: Trajectory {
            dim: m,
            n: spec.n(),
            times: Vec::new(),
            states: Vec::new(),
            derivs: Vec::new(),
            contiguous: Vec::new(),
            events: Vec::new(),
            grazes: Vec::new(),
            watch,
            stop: StopReason::TEnd,
            stats: Stats::default(),
        },
        accepted_since_store: 0,
    };
    rec.push(0.0, &y, &f, false);

    let mut t = 0.0;
    let mut stop_time = opts.t_end;
    let mut stop = StopReason::TEnd;
    let mut h = match opts.method {
        Method::Rk4 { step } => step,
        Method::Dopri5 => opts.initial_step.unwrap_or_else(|| {
            stats.rhs_evals += 1;
            initial_step(spec, opts, &y, &f)
        }),
    };
    let mut steps = 0usize;
    while stop_time - t > 1e-12 * stop_time.max(1.0) {
        steps += 1;
        if steps > opts.max_steps {
            return Err(IntegrationError::TooManySteps { time: t, steps: opts.max_steps });
        }
        let remaining = stop_time - t;
        let (h_try, last) = if h >= remaining { (remaining, true) } else { (h.min(opts.max_step), false) };
        let accepted_h = match opts.method {
            Method::Rk4 { step } => {
                rk4_step(spec, &y, &f, h_try, &mut work, &mut y_new);
                spec.rhs_into(&y_new, &mut work.k[6]);
                stats.rhs_evals += 4;
                h = step;
                h_try
            }
            Method::Dopri5 => {
                let mut h_cur = h_try;
                loop {
                    work.k[0].copy_from_slice(&f);
                    let err = dopri_attempt(spec, opts, &y, h_cur, &mut work, &mut y_new);
                    stats.rhs_evals += 6;
                    if err <= 1.0 && y_new.iter().all(|v| v.is_finite()) {
                        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                        // keep the controller's proposal when this step was clipped to hit stop_time
                        h = if last && h_cur < h { h } else { (h_cur * fac).min(opts.max_step) };
                        break;
                    }
                    stats.rejected += 1;
                    let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.2, 1.0) } else { 0.2 };
                    h_cur *= fac;
                    if h_cur < 1e-14 * t.abs().max(1.0) {
                        return Err(IntegrationError::StepUnderflow { time: t, step: h_cur });
                    }
                }
                h_cur
            }
        };
        let t_new = if accepted_h == remaining { stop_time } else { t + accepted_h };
        let new_events = rec.accept((t, &y, &f), (t_new, &y_new, &work.k[6]))?;
        t = t_new;
        std::mem::swap(&mut y, &mut y_new);
        f.copy_from_slice(&work.k[6]);
        if new_events > 0 && stop == StopReason::TEnd {
            if let Some(max) = opts.max_events {
                if rec.traj.events.len() >= max {
                    stop = StopReason::MaxEvents;
                    let t_ev = rec.traj.events[max - 1].time;
                    stop_time = (t_ev + opts.event_tail).min(opts.t_end).max(t);
                }
            }
        }
    }
    stats.accepted = rec.traj.stats.accepted;
    let mut traj = rec.finish(t, &y, &f, stop);
    traj.stats = stats;
    Ok(traj)
}
