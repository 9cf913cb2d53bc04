//! Boolean traces of trajectories and their consistency with a network.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::boolean::{hamming, BooleanFunction, BooleanState};
use crate::integrator::{Event, Graze, Trajectory, SIMULTANEITY_BAND};

/// A trajectory whose right-hand side has max-norm below this at the final
/// time counts as settled.
pub const SETTLE_TOL: f64 = 1e-6;

/// `S_i(x) = 1` iff `x_i > 0`, over the first `n` coordinates.
pub fn discretize(x: &[f64], n: usize) -> BooleanState {
    discretize_on(x, &(0..n).collect::<Vec<_>>())
}

/// Discretization over an arbitrary coordinate subset, in the given order.
pub fn discretize_on(x: &[f64], indices: &[usize]) -> BooleanState {
    BooleanState::from_bits(&indices.iter().map(|&i| x[i] > 0.0).collect::<Vec<_>>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Terminal {
    /// The flow came to rest: the last state holds forever.
    Settled,
    /// The horizon ended with the flow still moving.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    Graze,
    NearSimultaneous,
    SampleMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Error, Serialize)]
#[error("transversality failure ({kind:?}) at t = {time} on x{}", index + 1)]
pub struct TransversalityFailure {
    pub kind: FailureKind,
    pub time: f64,
    pub index: usize,
}

/// Switching times `t_0 = 0 < t_1 < ...` and the Boolean state on each
/// interval `(t_k, t_{k+1})`, the last one ending at the horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchingSequence {
    /// Tracked coordinates (0-based), in bit order.
    pub indices: Vec<usize>,
    pub times: Vec<f64>,
    pub states: Vec<BooleanState>,
    /// Coordinate position (within `indices`) that flipped at `times[k]`, `k ≥ 1`.
    pub flips: Vec<usize>,
    pub t_end: f64,
    pub terminal: Terminal,
}

impl SwitchingSequence {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn num_switches(&self) -> usize {
        self.times.len() - 1
    }

    pub fn final_state(&self) -> BooleanState {
        *self.states.last().expect("at least one interval")
    }

    /// Bounds of interval `k`.
    pub fn interval(&self, k: usize) -> (f64, f64) {
        (self.times[k], self.times.get(k + 1).copied().unwrap_or(self.t_end))
    }

    /// Shortest inter-switch gap, if there are at least two switches.
    pub fn min_gap(&self) -> Option<f64> {
        self.times[1..].windows(2).map(|w| w[1] - w[0]).min_by(f64::total_cmp)
    }

    /// Shortest gap between successive switches of the same coordinate.
    pub fn min_gap_same_coordinate(&self) -> Option<f64> {
        let mut last: Vec<Option<f64>> = vec![None; self.indices.len()];
        let mut best: Option<f64> = None;
        for (&pos, &t) in self.flips.iter().zip(&self.times[1..]) {
            if let Some(prev) = last[pos] {
                best = Some(best.map_or(t - prev, |b| b.min(t - prev)));
            }
            last[pos] = Some(t);
        }
        best
    }

    pub fn trace_strings(&self) -> Vec<String> {
        self.states.iter().map(|s| s.to_string()).collect()
    }

    /// Resamples every interval at `per_interval` random interior points and
    /// reports the first interval whose discretization differs.
    pub fn check_interior_sampling(&self, traj: &Trajectory, per_interval: usize, rng: &mut impl Rng) -> Option<usize> {
        for k in 0..self.len() {
            let (a, b) = self.interval(k);
            if b <= a {
                continue;
            }
            for _ in 0..per_interval {
                let t = a + (b - a) * rng.random_range(0.01..0.99);
                if discretize_on(&traj.interpolate(t), &self.indices) != self.states[k] {
                    return Some(k);
                }
            }
        }
        None
    }
}

/// Switching sequence over the signature coordinates `0..n`.
pub fn switching_sequence(traj: &Trajectory, n: usize) -> Result<SwitchingSequence, TransversalityFailure> {
    switching_sequence_on(traj, &(0..n).collect::<Vec<_>>())
}

/// Switching sequence over a coordinate subset (a block of a product system,
/// say). Uses the integrator's level-0 events when those coordinates were
/// watched, and rescans the dense output otherwise.
pub fn switching_sequence_on(traj: &Trajectory, indices: &[usize]) -> Result<SwitchingSequence, TransversalityFailure> {
    let watched = indices.iter().all(|i| traj.watched().iter().any(|w| w.index == *i && w.level == 0.0));
    let (events, grazes): (Vec<Event>, Vec<Graze>) = if watched {
        (
            traj.events().iter().filter(|e| e.level == 0.0 && indices.contains(&e.index)).copied().collect(),
            traj.grazes().iter().filter(|g| g.level == 0.0 && indices.contains(&g.index)).copied().collect(),
        )
    } else {
        let report = traj.crossings(indices, 0.0, 1e-9);
        (report.events, report.grazes)
    };
    if let Some(g) = grazes.first() {
        return Err(TransversalityFailure { kind: FailureKind::Graze, time: g.time, index: g.index });
    }
    if let Some(w) = events.windows(2).find(|w| w[1].time - w[0].time < SIMULTANEITY_BAND) {
        return Err(TransversalityFailure { kind: FailureKind::NearSimultaneous, time: w[1].time, index: w[1].index });
    }
    let t_end = traj.t_final();
    let mut times = vec![0.0];
    times.extend(events.iter().map(|e| e.time));
    let mut flips = Vec::with_capacity(events.len());
    let mut states: Vec<BooleanState> = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        let (a, b) = (times[k], times.get(k + 1).copied().unwrap_or(t_end));
        // property (c) makes S constant on the open interval; sample its midpoint
        let sampled = discretize_on(&traj.interpolate(0.5 * (a + b)), indices);
        if k > 0 {
            let e = &events[k - 1];
            let pos = indices.iter().position(|&i| i == e.index).expect("filtered above");
            flips.push(pos);
            let implied = states[k - 1].flip(pos);
            if sampled != implied && b > a {
                return Err(TransversalityFailure { kind: FailureKind::SampleMismatch, time: e.time, index: e.index });
            }
            states.push(implied);
        } else {
            states.push(sampled);
        }
    }
    let speed = traj.final_deriv().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let terminal = if speed < SETTLE_TOL { Terminal::Settled } else { Terminal::Truncated };
    Ok(SwitchingSequence { indices: indices.to_vec(), times, states, flips, t_end, terminal })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ConsistencyLevel {
    TransversalityFailure,
    Inconsistent,
    Consistent,
    StronglyConsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// Step `τ`: the violation is between `s(τ)` and `s(τ+1)`, or at `s(τ)`.
    pub step: usize,
    /// 1-based coordinate, when a single coordinate is at fault.
    pub coordinate: Option<usize>,
    pub expected: String,
    pub observed: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyVerdict {
    pub level: ConsistencyLevel,
    pub witness: Option<Witness>,
    pub warnings: Vec<String>,
}

impl ConsistencyVerdict {
    fn pass(level: ConsistencyLevel) -> Self {
        ConsistencyVerdict { level, witness: None, warnings: Vec::new() }
    }

    fn fail(witness: Witness) -> Self {
        ConsistencyVerdict { level: ConsistencyLevel::Inconsistent, witness: Some(witness), warnings: Vec::new() }
    }

    pub fn is_strong(&self) -> bool {
        self.level == ConsistencyLevel::StronglyConsistent
    }

    /// Consistent or better.
    pub fn is_consistent(&self) -> bool {
        self.level >= ConsistencyLevel::Consistent
    }
}

fn check_dims(seq: &SwitchingSequence, f: &BooleanFunction) {
    assert_eq!(seq.indices.len(), f.dim(), "trace and network dimensions differ");
}

fn settled_witness(seq: &SwitchingSequence, fs: BooleanState) -> Witness {
    Witness {
        step: seq.len() - 1,
        coordinate: None,
        expected: fs.to_string(),
        observed: seq.final_state().to_string(),
        reason: "trace came to rest in a state that is not a fixed point".into(),
    }
}

/// `s(τ+1) = f(s(τ))` at every recorded step; a settled trace must end at a
/// fixed point.
pub fn check_strong_consistency(seq: &SwitchingSequence, f: &BooleanFunction) -> ConsistencyVerdict {
    check_dims(seq, f);
    for (tau, w) in seq.states.windows(2).enumerate() {
        let fs = f.step(&w[0]).expect("dimension checked");
        if fs != w[1] {
            let coord = (0..f.dim()).find(|&i| fs.get(i) != w[1].get(i)).map(|i| i + 1);
            return ConsistencyVerdict::fail(Witness {
                step: tau,
                coordinate: coord,
                expected: fs.to_string(),
                observed: w[1].to_string(),
                reason: "successor differs from f(s)".into(),
            });
        }
    }
    let last = seq.final_state();
    let fs = f.step(&last).expect("dimension checked");
    if seq.terminal == Terminal::Settled && fs != last {
        return ConsistencyVerdict::fail(settled_witness(seq, fs));
    }
    ConsistencyVerdict::pass(ConsistencyLevel::StronglyConsistent)
}

/// Each coordinate either follows `f_i` or holds, the trace never leaves a
/// fixed point, and a settled trace ends at one.
pub fn check_consistency(seq: &SwitchingSequence, f: &BooleanFunction) -> ConsistencyVerdict {
    check_dims(seq, f);
    for (tau, w) in seq.states.windows(2).enumerate() {
        let fs = f.step(&w[0]).expect("dimension checked");
        if fs == w[0] {
            return ConsistencyVerdict::fail(Witness {
                step: tau,
                coordinate: None,
                expected: w[0].to_string(),
                observed: w[1].to_string(),
                reason: "trace left a fixed point of f".into(),
            });
        }
        for i in 0..f.dim() {
            let next = w[1].get(i);
            if next != fs.get(i) && next != w[0].get(i) {
                return ConsistencyVerdict::fail(Witness {
                    step: tau,
                    coordinate: Some(i + 1),
                    expected: format!("{} or {}", fs.get(i) as u8, w[0].get(i) as u8),
                    observed: (next as u8).to_string(),
                    reason: "coordinate neither follows f nor holds".into(),
                });
            }
        }
    }
    let last = seq.final_state();
    let fs = f.step(&last).expect("dimension checked");
    if seq.terminal == Terminal::Settled && fs != last {
        return ConsistencyVerdict::fail(settled_witness(seq, fs));
    }
    ConsistencyVerdict::pass(ConsistencyLevel::Consistent)
}

/// The strongest level the trace attains.
pub fn assess(seq: &SwitchingSequence, f: &BooleanFunction) -> ConsistencyVerdict {
    let strong = check_strong_consistency(seq, f);
    if strong.is_strong() {
        return strong;
    }
    check_consistency(seq, f)
}

/// Extracts the switching sequence over `indices` and assesses it; a
/// transversality failure becomes the verdict.
pub fn judge(traj: &Trajectory, indices: &[usize], f: &BooleanFunction) -> (ConsistencyVerdict, Option<SwitchingSequence>) {
    match switching_sequence_on(traj, indices) {
        Ok(seq) => {
            let mut v = assess(&seq, f);
            if seq.terminal == Terminal::Truncated && seq.num_switches() == 0 {
                v.warnings.push("no switches before the horizon".into());
            }
            (v, Some(seq))
        }
        Err(fail) => (
            ConsistencyVerdict {
                level: ConsistencyLevel::TransversalityFailure,
                witness: Some(Witness {
                    step: 0,
                    coordinate: Some(fail.index + 1),
                    expected: "transversal crossings".into(),
                    observed: format!("{:?} at t = {}", fail.kind, fail.time),
                    reason: fail.to_string(),
                }),
                warnings: Vec::new(),
            },
            None,
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Anomaly {
    pub step: usize,
    pub reason: String,
}

/// Cross-check: a strongly consistent trace must induce a one-stepping
/// Boolean trajectory. `None` means no anomaly.
pub fn strong_implies_onestep_audit(seq: &SwitchingSequence, f: &BooleanFunction) -> Option<Anomaly> {
    for (tau, w) in seq.states.windows(2).enumerate() {
        let d = hamming(&w[0], &w[1]).expect("same dimension");
        if d > 1 {
            return Some(Anomaly { step: tau, reason: format!("trace jumps {} -> {} ({d} bits)", w[0], w[1]) });
        }
    }
    let report = f.stepping(Some(&seq.states[0])).expect("dimension checked");
    if !report.is_one_stepping() {
        let step = report.witness.map(|w| w.step).unwrap_or(0);
        return Some(Anomaly { step, reason: format!("Boolean trajectory of {} is not one-stepping", seq.states[0]) });
    }
    None
}

/// JSON report for one trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub level: ConsistencyLevel,
    pub strong: ConsistencyVerdict,
    pub consistency: ConsistencyVerdict,
    pub switching_times: Vec<f64>,
    pub trace: Vec<String>,
    pub terminal: Option<Terminal>,
    pub warnings: Vec<String>,
}

impl VerdictReport {
    pub fn build(traj: &Trajectory, indices: &[usize], f: &BooleanFunction) -> Self {
        match switching_sequence_on(traj, indices) {
            Ok(seq) => {
                let strong = check_strong_consistency(&seq, f);
                let consistency = check_consistency(&seq, f);
                let level = if strong.is_strong() { strong.level } else { consistency.level };
                let mut warnings = Vec::new();
                if let Some(gap) = seq.min_gap() {
                    if gap < 1e-3 {
                        warnings.push(format!("shortest inter-switch gap is {gap:e}"));
                    }
                }
                VerdictReport {
                    level,
                    strong,
                    consistency,
                    switching_times: seq.times.clone(),
                    trace: seq.trace_strings(),
                    terminal: Some(seq.terminal),
                    warnings,
                }
            }
            Err(_) => {
                let (v, _) = judge(traj, indices, f);
                VerdictReport {
                    level: v.level,
                    strong: v.clone(),
                    consistency: v,
                    switching_times: Vec::new(),
                    trace: Vec::new(),
                    terminal: None,
                    warnings: Vec::new(),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(states: &[&str], terminal: Terminal) -> SwitchingSequence {
        let states: Vec<BooleanState> = states.iter().map(|s| s.parse().unwrap()).collect();
        let n = states[0].dim();
        SwitchingSequence {
            indices: (0..n).collect(),
            times: (0..states.len()).map(|k| k as f64).collect(),
            flips: vec![0; states.len() - 1],
            states,
            t_end: 100.0,
            terminal,
        }
    }

    fn copy_negation() -> BooleanFunction {
        BooleanFunction::from_pairs(2, &[("00", "10"), ("10", "11"), ("11", "01"), ("01", "00")]).unwrap()
    }

    #[test]
    fn gap_statistics() {
        let mut t = seq(&["00", "10", "11", "01", "00"], Terminal::Truncated);
        t.times = vec![0.0, 1.0, 1.25, 3.0, 3.5];
        t.flips = vec![0, 1, 0, 1];
        assert_eq!(t.min_gap(), Some(0.25));
        assert_eq!(t.min_gap_same_coordinate(), Some(2.0));
    }

    #[test]
    fn discretize_examples() {
        assert_eq!(discretize(&[-2.0, 2.0], 2).to_string(), "01");
        assert_eq!(discretize(&[0.0, 0.1], 2).to_string(), "01");
        assert_eq!(discretize(&[1.0, -1.0, 5.0, 5.0], 2).to_string(), "10");
    }

    #[test]
    fn strong_and_plain_checks() {
        let f = copy_negation();
        let cyc = seq(&["00", "10", "11", "01", "00"], Terminal::Truncated);
        assert!(check_strong_consistency(&cyc, &f).is_strong());
        assert!(check_consistency(&cyc, &f).is_consistent());
        assert!(strong_implies_onestep_audit(&cyc, &f).is_none());

        // 00 -> 01 moves s2 against f_2(00) = 0 and against holding
        let bad = seq(&["00", "01"], Terminal::Truncated);
        let v = check_consistency(&bad, &f);
        assert_eq!(v.level, ConsistencyLevel::Inconsistent);
        let w = v.witness.unwrap();
        assert_eq!((w.step, w.coordinate), (0, Some(2)));
    }

    #[test]
    fn fixed_point_clauses() {
        let zero = BooleanFunction::constant(1, BooleanState::zeros(1)).unwrap();
        let rest = seq(&["0"], Terminal::Settled);
        assert!(check_strong_consistency(&rest, &zero).is_strong());
        let stuck = seq(&["1"], Terminal::Settled);
        assert_eq!(check_strong_consistency(&stuck, &zero).level, ConsistencyLevel::Inconsistent);
        assert_eq!(check_consistency(&stuck, &zero).level, ConsistencyLevel::Inconsistent);
        let left = seq(&["0", "1"], Terminal::Truncated);
        assert_eq!(check_consistency(&left, &zero).witness.unwrap().reason, "trace left a fixed point of f");
        // a truncated trace is not yet required to stop
        assert!(check_consistency(&seq(&["1"], Terminal::Truncated), &zero).is_consistent());
    }

    #[test]
    fn product_trace_is_consistent_only() {
        let f = copy_negation().product(&copy_negation()).unwrap();
        let t = seq(&["0000", "1000", "1010", "1110"], Terminal::Truncated);
        let v = assess(&t, &f);
        assert_eq!(v.level, ConsistencyLevel::Consistent);
    }

    #[test]
    fn audit_flags_two_bit_jumps() {
        let f = BooleanFunction::from_pairs(2, &[("00", "11"), ("11", "11"), ("01", "01"), ("10", "10")]).unwrap();
        let t = seq(&["00", "11"], Terminal::Settled);
        assert!(check_strong_consistency(&t, &f).is_strong());
        let a = strong_implies_onestep_audit(&t, &f).unwrap();
        assert_eq!(a.step, 0);
        assert!(strong_implies_onestep_audit(&seq(&["11"], Terminal::Settled), &f).is_none());
    }
}
