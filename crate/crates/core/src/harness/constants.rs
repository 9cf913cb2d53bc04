use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::HarnessError;
use crate::boolean::BooleanFunction;
use crate::conversion::{ramp, ContinuousConversion};
use crate::flow::{equilibria_1d, g, state_box};

/// Safety margin applied to the grid minimum of the speed.
const BETA_MARGIN: f64 = 0.9;
const ALPHA_GRID: usize = 400;
const BETA_GRID_COARSE: usize = 100;
const BETA_GRID: usize = 1000;
const DELTA_RANDOM: usize = 256;

/// Constants of the time-scale separation argument for one `(f, Q, γ⁻, δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremConstants {
    pub n: usize,
    pub delta: f64,
    pub alpha: f64,
    /// Speed floor for unit rates, after the safety margin.
    pub beta: f64,
    pub gamma_min: f64,
    pub mu_bound: f64,
    /// Unstable root of `g + 5 − 3α`; admissibility needs it below `−1 + δ`.
    pub x_circ_low: f64,
    /// Unstable root of `g + 1 + 3α`; admissibility needs it above `1 − δ`.
    pub x_circ_high: f64,
    /// Bound on the number of overlapping release episodes, `n/(β min γ⁻)`.
    pub k_bound: f64,
}

/// `β·min γ⁻·α/(5n)`.
pub fn mu_bound(beta: f64, gamma_min: f64, alpha: f64, n: usize) -> f64 {
    beta * gamma_min * alpha / (5.0 * n as f64)
}

/// Verifies that `Q` is regime-constant on every `W^s(δ)`: `Q_i < 1/6` where
/// `f_i(s) = 0` and `Q_i > 5/6` where `f_i(s) = 1`. Checks a grid over each
/// corner cube of the ramp coordinates plus seeded random points.
pub fn check_delta(conv: &ContinuousConversion, f: &BooleanFunction, delta: f64) -> Result<(), HarnessError> {
    let n = f.dim();
    if conv.dim() != n {
        return Err(HarnessError::BadInput(format!("conversion has dimension {}, network {n}", conv.dim())));
    }
    let half = 0.5 * delta;
    let per_dim = if n <= 12 { ((4096f64).powf(1.0 / n as f64).floor() as usize).clamp(2, 9) } else { 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut y = vec![0.0; n];
    let mut q = vec![0.0; n];
    for s in f.states() {
        let fs = f.step(&s)?;
        let range = |j: usize| if s.get(j) { (1.0 - half, 1.0) } else { (0.0, half) };
        let check = |y: &[f64], q: &mut [f64]| -> Result<(), HarnessError> {
            conv.p_into(y, q);
            for (i, &qi) in q.iter().enumerate() {
                let ok = if fs.get(i) { qi > 5.0 / 6.0 } else { qi < 1.0 / 6.0 };
                if !ok {
                    return Err(HarnessError::DeltaInadmissible { delta, state: s.to_string(), coord: i + 1, q: qi });
                }
            }
            Ok(())
        };
        if per_dim > 0 {
            let total = per_dim.pow(n as u32);
            for mut k in 0..total {
                for (j, yj) in y.iter_mut().enumerate() {
                    let (a, b) = range(j);
                    *yj = a + (b - a) * (k % per_dim) as f64 / (per_dim - 1) as f64;
                    k /= per_dim;
                }
                check(&y, &mut q)?;
            }
        }
        for _ in 0..DELTA_RANDOM {
            for (j, yj) in y.iter_mut().enumerate() {
                let (a, b) = range(j);
                *yj = rng.random_range(a..=b);
            }
            check(&y, &mut q)?;
        }
    }
    Ok(())
}

/// Largest `δ` on the ladder `start, start − 0.01, …` that passes
/// [`check_delta`].
pub fn admissible_delta(conv: &ContinuousConversion, f: &BooleanFunction, start: f64) -> Option<f64> {
    (0..).map(|k| start - 0.01 * k as f64).take_while(|&d| d > 0.005).find(|&d| check_delta(conv, f, d).is_ok())
}

fn unstable_root(h: f64) -> Option<f64> {
    equilibria_1d(h, 1.0).ok().and_then(|r| r.unstable_mid)
}

/// Grid minimum of `|g(x) + 6L(y)|` over the two compact sets where a
/// signature coordinate has passed `∓(1 − δ)` and its signaling partner sits
/// past `±(2/3 − α)`.
fn speed_grid_min(delta: f64, alpha: f64, m: usize) -> f64 {
    let (lo, hi) = state_box();
    let lin = |a: f64, b: f64, k: usize| a + (b - a) * k as f64 / (m - 1) as f64;
    let mut best = f64::INFINITY;
    for kx in 0..m {
        let x1 = lin(-1.0 + delta, 1.0, kx);
        let x2 = lin(-1.0, 1.0 - delta, kx);
        let (g1, g2) = (g(x1), g(x2));
        for ky in 0..m {
            let y1 = lin(2.0 / 3.0 - alpha, hi, ky);
            let y2 = lin(lo, -2.0 / 3.0 + alpha, ky);
            best = best.min((g1 + 6.0 * ramp(y1)).abs()).min((g2 + 6.0 * ramp(y2)).abs());
        }
    }
    best
}

/// Estimates `α`, `β` and the rate bound for the signaling variables.
///
/// `α` ranges over a grid below `min(δ, 2/15)`, restricted to values whose
/// unstable roots clear `±(1 − δ)`, and the admissible value with the largest
/// `α·β` (hence the largest rate bound) is kept.
pub fn estimate_constants(
    f: &BooleanFunction,
    conv: &ContinuousConversion,
    gamma_minus: &[f64],
    delta: f64,
) -> Result<TheoremConstants, HarnessError> {
    let n = f.dim();
    if gamma_minus.len() != n {
        return Err(HarnessError::BadInput(format!("expected {n} signature rates, got {}", gamma_minus.len())));
    }
    if let Some(bad) = gamma_minus.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(HarnessError::BadInput(format!("signature rate {bad} is not positive")));
    }
    check_delta(conv, f, delta)?;
    let gamma_min = gamma_minus.iter().copied().fold(f64::INFINITY, f64::min);
    let cap = delta.min(2.0 / 15.0);
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for k in 1..ALPHA_GRID {
        let alpha = cap * k as f64 / ALPHA_GRID as f64;
        let (Some(low), Some(high)) = (unstable_root(5.0 - 3.0 * alpha), unstable_root(1.0 + 3.0 * alpha)) else {
            continue;
        };
        if !(low < -1.0 + delta && high > 1.0 - delta) {
            continue;
        }
        let score = alpha * speed_grid_min(delta, alpha, BETA_GRID_COARSE);
        if best.is_none_or(|b| score > b.0) {
            best = Some((score, alpha, low, high));
        }
    }
    let (_, alpha, x_circ_low, x_circ_high) = best.ok_or(HarnessError::NoAdmissibleAlpha(delta))?;
    let beta = BETA_MARGIN * speed_grid_min(delta, alpha, BETA_GRID);
    if beta.is_nan() || beta <= 0.0 {
        return Err(HarnessError::NonPositiveBeta(beta));
    }
    Ok(TheoremConstants {
        n,
        delta,
        alpha,
        beta,
        gamma_min,
        mu_bound: mu_bound(beta, gamma_min, alpha, n),
        x_circ_low,
        x_circ_high,
        k_bound: n as f64 / (beta * gamma_min),
    })
}

/// Samples the two compact sets behind `β` and returns the first point
/// `(x_i, x_{i+n}, |g + 6L|)` whose unit-rate speed is not above `β`.
pub fn speed_floor_violation(c: &TheoremConstants, samples: usize, rng: &mut impl Rng) -> Option<(f64, f64, f64)> {
    let (lo, hi) = state_box();
    for k in 0..samples {
        let (x, y) = if k % 2 == 0 {
            (rng.random_range(-1.0 + c.delta..=1.0), rng.random_range(2.0 / 3.0 - c.alpha..=hi))
        } else {
            (rng.random_range(-1.0..=1.0 - c.delta), rng.random_range(lo..=-2.0 / 3.0 + c.alpha))
        };
        let v = (g(x) + 6.0 * ramp(y)).abs();
        if v <= c.beta {
            return Some((x, y, v));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::ring_negation_family;
    use crate::conversion::Scheme;

    fn copy_negation() -> BooleanFunction {
        BooleanFunction::from_pairs(2, &[("00", "10"), ("10", "11"), ("11", "01"), ("01", "00")]).unwrap()
    }

    #[test]
    fn formula_instance() {
        assert!((mu_bound(0.1, 1.0, 0.1, 2) - 0.001).abs() < 1e-15);
    }

    #[test]
    fn copy_negation_has_positive_bound() {
        let f = copy_negation();
        let conv = ContinuousConversion::from_function(&f, Scheme::W).unwrap();
        let c = estimate_constants(&f, &conv, &[1.0, 1.0], 0.3).unwrap();
        assert!(c.mu_bound > 0.0);
        assert!(c.alpha > 0.0 && c.alpha < 2.0 / 15.0 && c.alpha < c.delta);
        assert!(c.x_circ_low < -1.0 + c.delta && c.x_circ_high > 1.0 - c.delta);
        // x° of g + 5 − 3α by direct evaluation
        assert!((g(c.x_circ_low) + 5.0 - 3.0 * c.alpha).abs() < 1e-9);
    }

    #[test]
    fn speed_floor_holds_on_samples() {
        let f = ring_negation_family(3, &[0]).unwrap();
        let conv = ContinuousConversion::from_function(&f, Scheme::W).unwrap();
        let c = estimate_constants(&f, &conv, &[1.0; 3], 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(speed_floor_violation(&c, 100_000, &mut rng), None);
    }

    #[test]
    fn delta_admissibility_depends_on_f() {
        let ring = ring_negation_family(3, &[0]).unwrap();
        let conv = ContinuousConversion::from_function(&ring, Scheme::W).unwrap();
        assert!(check_delta(&conv, &ring, 0.3).is_ok());
        assert!(check_delta(&conv, &ring, 0.34).is_err());
        // ¬s3 ∨ s2 mixes two ramps, so the multilinear form needs a tighter δ
        let mixed =
            BooleanFunction::from_fn(3, |s| crate::boolean::BooleanState::from_bits(&[!s.get(2) || s.get(1), s.get(0), s.get(1)])).unwrap();
        let conv = ContinuousConversion::from_function(&mixed, Scheme::W).unwrap();
        assert!(check_delta(&conv, &mixed, 0.3).is_err());
        let d = admissible_delta(&conv, &mixed, 0.3).unwrap();
        assert!((d - 0.17).abs() < 1e-9, "{d}");
    }

    #[test]
    fn small_delta_forces_small_alpha() {
        let f = copy_negation();
        let conv = ContinuousConversion::from_function(&f, Scheme::W).unwrap();
        // the root clearance g(−1 + δ) + 5 is about 3δ², and α must stay below a third of it
        let c = estimate_constants(&f, &conv, &[1.0, 1.0], 0.02).unwrap();
        assert!(c.alpha < 0.02 * 0.02);
        assert!(matches!(estimate_constants(&f, &conv, &[1.0, 1.0], 5e-4), Err(HarnessError::NoAdmissibleAlpha(_))));
    }
}
