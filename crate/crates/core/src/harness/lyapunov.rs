use serde::Serialize;

use super::HarnessError;
use crate::flow::{in_box, FlowSpec};
use crate::integrator::BOX_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovOptions {
    /// Averaging window after the transient.
    pub horizon: f64,
    pub renorm_interval: f64,
    /// Time integrated and discarded before the twin is launched.
    pub transient: f64,
    /// Fixed RK4 step.
    pub step: f64,
    /// Twin separation restored at each renormalization.
    pub separation: f64,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        LyapunovOptions { horizon: 2000.0, renorm_interval: 1.0, transient: 200.0, step: 0.01, separation: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub exponent: f64,
    pub transient: f64,
    pub horizon: f64,
    pub renormalizations: usize,
}

/// Largest Lyapunov exponent with a discarded transient of a tenth of the
/// horizon.
pub fn lyapunov_max(spec: &FlowSpec, x0: &[f64], horizon: f64, renorm_interval: f64) -> Result<LyapunovEstimate, HarnessError> {
    let opts = LyapunovOptions { horizon, renorm_interval, transient: 0.1 * horizon, ..Default::default() };
    lyapunov_with(spec, x0, &opts)
}

struct Rk4<'a> {
    spec: &'a FlowSpec,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl<'a> Rk4<'a> {
    fn new(spec: &'a FlowSpec) -> Self {
        let m = spec.dim();
        Rk4 { spec, k: std::array::from_fn(|_| vec![0.0; m]), tmp: vec![0.0; m] }
    }

    fn step(&mut self, y: &mut [f64], h: f64) {
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        self.spec.rhs_into(y, k1);
        for j in 0..y.len() {
            tmp[j] = y[j] + 0.5 * h * k1[j];
        }
        self.spec.rhs_into(tmp, k2);
        for j in 0..y.len() {
            tmp[j] = y[j] + 0.5 * h * k2[j];
        }
        self.spec.rhs_into(tmp, k3);
        for j in 0..y.len() {
            tmp[j] = y[j] + h * k3[j];
        }
        self.spec.rhs_into(tmp, k4);
        for j in 0..y.len() {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }

    fn advance(&mut self, y: &mut [f64], duration: f64, h: f64) {
        let steps = (duration / h).ceil().max(1.0) as usize;
        let h = duration / steps as f64;
        for _ in 0..steps {
            self.step(y, h);
        }
    }
}

/// Twin-trajectory estimate: a copy displaced by `separation` is advanced
/// alongside the base orbit and pulled back to that distance after every
/// `renorm_interval`; the exponent is the mean log growth per unit time.
pub fn lyapunov_with(spec: &FlowSpec, x0: &[f64], opts: &LyapunovOptions) -> Result<LyapunovEstimate, HarnessError> {
    let m = spec.dim();
    if x0.len() != m {
        return Err(HarnessError::BadInput(format!("x0 has {} entries, flow dimension is {m}", x0.len())));
    }
    if !in_box(x0, BOX_TOL) {
        return Err(HarnessError::BadInput("x0 outside the state box".into()));
    }
    let positive = |v: f64| v > 0.0 && v.is_finite();
    if !(positive(opts.horizon) && positive(opts.renorm_interval) && positive(opts.step) && positive(opts.separation))
        || opts.transient.is_nan()
        || opts.transient < 0.0
    {
        return Err(HarnessError::BadInput(format!("invalid Lyapunov options {opts:?}")));
    }
    let mut rk = Rk4::new(spec);
    let mut base = x0.to_vec();
    if opts.transient > 0.0 {
        rk.advance(&mut base, opts.transient, opts.step);
    }
    // displace toward the interior so the twin starts inside the box
    let unit = opts.separation / (m as f64).sqrt();
    let mut twin: Vec<f64> = base.iter().map(|&v| if v > 0.0 { v - unit } else { v + unit }).collect();
    let rounds = (opts.horizon / opts.renorm_interval).round().max(1.0) as usize;
    let interval = opts.horizon / rounds as f64;
    let mut log_sum = 0.0;
    for _ in 0..rounds {
        rk.advance(&mut base, interval, opts.step);
        rk.advance(&mut twin, interval, opts.step);
        let d = base.iter().zip(&twin).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if !d.is_finite() || d > 1e-2 {
            return Err(HarnessError::Lyapunov(format!("twin separation grew to {d:e}; shorten the renormalization interval")));
        }
        if d == 0.0 {
            return Err(HarnessError::Lyapunov("twin collapsed onto the base orbit; lengthen the separation".into()));
        }
        log_sum += (d / opts.separation).ln();
        let scale = opts.separation / d;
        for (t, b) in twin.iter_mut().zip(&base) {
            *t = b + (*t - b) * scale;
        }
    }
    Ok(LyapunovEstimate {
        exponent: log_sum / (rounds as f64 * interval),
        transient: opts.transient,
        horizon: opts.horizon,
        renormalizations: rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conversion::Scheme;
    use crate::flow::FlowKind;
    use crate::formula::NetworkSpec;

    fn flow(formulas: &[&str], gamma: Vec<f64>) -> FlowSpec {
        let spec = NetworkSpec::from_formulas(formulas.len(), formulas).unwrap();
        FlowSpec::from_network(&spec, Scheme::W, FlowKind::D1, Some(gamma)).unwrap()
    }

    #[test]
    fn limit_cycle_has_zero_exponent() {
        let est = lyapunov_max(&flow(&["!s2", "s1"], vec![1.0, 1.0]), &[1.5, -0.3], 2000.0, 1.0).unwrap();
        assert!(est.exponent.abs() < 0.02, "{est:?}");
        assert_eq!(est.transient, 200.0);
    }

    #[test]
    fn attracting_equilibrium_is_negative() {
        let est = lyapunov_max(&flow(&["0"], vec![1.0]), &[1.0], 200.0, 0.5).unwrap();
        assert!(est.exponent < -1.0, "{est:?}");
    }

    #[test]
    fn torus_is_not_chaotic() {
        let r = std::f64::consts::SQRT_2;
        let spec = flow(&["!s2", "s1", "!s4", "s3"], vec![1.0, 1.0, r, r]);
        let est = lyapunov_max(&spec, &[1.5, -0.3, -0.7, 1.9], 2000.0, 1.0).unwrap();
        assert!(est.exponent.abs() < 0.02, "{est:?}");
    }

    #[test]
    fn rejects_bad_input() {
        let spec = flow(&["0"], vec![1.0]);
        assert!(lyapunov_max(&spec, &[3.0], 10.0, 1.0).is_err());
        assert!(lyapunov_max(&spec, &[0.0], -1.0, 1.0).is_err());
    }
}
