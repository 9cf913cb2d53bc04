use rand::Rng;
use serde::Serialize;

use super::HarnessError;
use crate::boolean::{BooleanFunction, BooleanState};
use crate::flow::state_box;

const MAX_DRAWS: usize = 10_000;

/// The starting region `U^s` for one Boolean state, with the margins used to
/// carve it out. Coordinates `0..n` are signature variables and `n..2n` the
/// signaling variables of a D2 flow.
#[derive(Debug, Clone, Serialize)]
pub struct RegionSpec {
    pub s: BooleanState,
    /// `f(s)`.
    pub target: BooleanState,
    pub delta: f64,
    pub alpha: f64,
    /// `α·|Γ(s)|/n`.
    pub alpha_s: f64,
    /// Coordinates `f` wants to flip (0-based).
    pub delta_set: Vec<usize>,
    /// Coordinates `f` leaves alone (0-based).
    pub gamma_set: Vec<usize>,
}

/// Region data for state `s` of `f`.
pub fn build_region(f: &BooleanFunction, s: BooleanState, delta: f64, alpha: f64) -> Result<RegionSpec, HarnessError> {
    let n = f.dim();
    if delta.is_nan() || delta <= 0.0 {
        return Err(HarnessError::BadInput(format!("delta must be positive, got {delta}")));
    }
    if !(alpha > 0.0 && alpha < delta.min(2.0 / 15.0)) {
        return Err(HarnessError::BadAlpha { alpha, delta });
    }
    let target = f.step(&s)?;
    let (delta_set, gamma_set): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| target.get(i) != s.get(i));
    let alpha_s = (n - delta_set.len()) as f64 / n as f64 * alpha;
    Ok(RegionSpec { s, target, delta, alpha, alpha_s, delta_set, gamma_set })
}

impl RegionSpec {
    pub fn n(&self) -> usize {
        self.s.dim()
    }

    /// `x ∈ W^s_i(δ)`: signature coordinate `i` past `∓(1 − δ)` on the side of `s_i`.
    pub fn in_w_delta(&self, x: &[f64], i: usize, delta: f64) -> bool {
        side(x[i], self.s.get(i), 1.0 - delta)
    }

    /// `x ∈ W^s_i`.
    pub fn in_w(&self, x: &[f64], i: usize) -> bool {
        self.in_w_delta(x, i, 0.0)
    }

    /// `x ∈ V^t_i(ε)`: signaling coordinate `n + i` past `∓(2/3 − ε)` on the side of `t_i`.
    pub fn in_v(&self, x: &[f64], t: &BooleanState, i: usize, eps: f64) -> bool {
        side(x[self.n() + i], t.get(i), 2.0 / 3.0 - eps)
    }

    /// `x ∈ W^s_i(δ) \ W^s_i` implies `x ∈ V^{f(s)}_i(α_s)`, for every `i`.
    pub fn pre_release(&self, x: &[f64]) -> bool {
        (0..self.n()).all(|i| !(self.in_w_delta(x, i, self.delta) && !self.in_w(x, i)) || self.in_v(x, &self.target, i, self.alpha_s))
    }

    /// `R^s`: the product set `PR^s` cut down by the pre-release condition.
    pub fn in_r(&self, x: &[f64]) -> bool {
        self.delta_set.iter().all(|&i| self.in_w_delta(x, i, self.delta))
            && self.gamma_set.iter().all(|&i| self.in_w(x, i) && self.in_v(x, &self.s, i, self.alpha_s))
            && self.pre_release(x)
    }

    /// `U^s = R^s ∩ W^s ∩ ∏_{i∈Γ(s)} V^s_i`.
    pub fn in_us(&self, x: &[f64]) -> bool {
        let (lo, hi) = state_box();
        x.len() == 2 * self.n()
            && x.iter().all(|&v| (lo..=hi).contains(&v))
            && self.in_r(x)
            && (0..self.n()).all(|i| self.in_w(x, i))
            && self.gamma_set.iter().all(|&i| self.in_v(x, &self.s, i, 0.0))
    }

    /// Per-coordinate bounding box of `U^s` inside the state box.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let (lo, hi) = state_box();
        let n = self.n();
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            out.push(if self.s.get(i) { (1.0, hi) } else { (lo, -1.0) });
        }
        for i in 0..n {
            out.push(if self.delta_set.contains(&i) {
                (lo, hi)
            } else if self.s.get(i) {
                (2.0 / 3.0, hi)
            } else {
                (lo, -2.0 / 3.0)
            });
        }
        out
    }

    /// A uniform point of `U^s` by rejection from the bounding box.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<Vec<f64>, HarnessError> {
        let bbox = self.bounding_box();
        for _ in 0..MAX_DRAWS {
            let x: Vec<f64> = bbox.iter().map(|&(a, b)| rng.random_range(a..=b)).collect();
            if self.in_us(&x) {
                return Ok(x);
            }
        }
        Err(HarnessError::EmptyRegion { state: self.s.to_string(), attempts: MAX_DRAWS })
    }
}

fn side(v: f64, high: bool, threshold: f64) -> bool {
    if high {
        v > threshold
    } else {
        v < -threshold
    }
}
