//! Right-hand sides of the `D1` and `D2` flows and their one-dimensional
//! equilibrium structure.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::boolean::{BooleanFunction, MAX_TABLE_DIM};
use crate::conversion::{ramp, ContinuousConversion, ConversionError, Scheme};
use crate::formula::{NetworkError, NetworkSpec};

/// The cubic `g(x) = 3x - x^3 - 3`.
#[inline]
pub fn g(x: f64) -> f64 {
    3.0 * x - x * x * x - 3.0
}

#[inline]
pub fn g_prime(x: f64) -> f64 {
    3.0 - 3.0 * x * x
}

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("gamma must have {expected} entries, got {actual}")]
    GammaLength { expected: usize, actual: usize },
    #[error("gamma[{index}] = {value} is not a positive finite rate")]
    BadGamma { index: usize, value: f64 },
    #[error("state has dimension {actual}, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("conversion has dimension {conversion}, network has {network}")]
    ConversionMismatch { conversion: usize, network: usize },
    #[error("network dimension {0} exceeds the supported maximum")]
    TooLarge(usize),
    #[error("expected a one-dimensional conversion, got dimension {0}")]
    NotScalar(usize),
    #[error("unknown flow kind `{0}` (expected D1 or D2)")]
    UnknownKind(String),
    #[error(transparent)]
    Conversion(#[from] ConversionError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FlowKind {
    D1,
    D2,
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlowKind::D1 => "D1",
            FlowKind::D2 => "D2",
        })
    }
}

impl FromStr for FlowKind {
    type Err = FlowError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "D1" => Ok(FlowKind::D1),
            "D2" => Ok(FlowKind::D2),
            _ => Err(FlowError::UnknownKind(s.to_string())),
        }
    }
}

/// `D1`: `x_i' = γ_i (g(x_i) + 6 Q_i(x))`.
///
/// `D2`: `x_i' = γ_i (g(x_i) + 6 L(x_{n+i}))` for the signature variables and
/// `x_{n+i}' = γ_{n+i} (g(x_{n+i}) + 6 Q_i(x_1..x_n))` for the signaling ones.
#[derive(Debug, Clone)]
pub struct FlowSpec {
    kind: FlowKind,
    n: usize,
    gamma: Vec<f64>,
    conversion: ContinuousConversion,
    f: BooleanFunction,
    network: Option<String>,
}

impl FlowSpec {
    pub fn new(kind: FlowKind, f: BooleanFunction, conversion: ContinuousConversion, gamma: Vec<f64>) -> Result<Self, FlowError> {
        let n = f.dim();
        if conversion.dim() != n {
            return Err(FlowError::ConversionMismatch { conversion: conversion.dim(), network: n });
        }
        if n > MAX_TABLE_DIM {
            return Err(FlowError::TooLarge(n));
        }
        let big_n = match kind {
            FlowKind::D1 => n,
            FlowKind::D2 => 2 * n,
        };
        if gamma.len() != big_n {
            return Err(FlowError::GammaLength { expected: big_n, actual: gamma.len() });
        }
        if let Some((index, &value)) = gamma.iter().enumerate().find(|(_, &v)| !(v > 0.0 && v.is_finite())) {
            return Err(FlowError::BadGamma { index, value });
        }
        Ok(FlowSpec { kind, n, gamma, conversion, f, network: None })
    }

    /// Builds from a network description. Without `gamma`, the network's own
    /// default is used, falling back to all ones.
    pub fn from_network(spec: &NetworkSpec, scheme: Scheme, kind: FlowKind, gamma: Option<Vec<f64>>) -> Result<Self, FlowError> {
        let f = spec.lower_to_table()?;
        let conversion = ContinuousConversion::build(spec, scheme)?;
        let big_n = if kind == FlowKind::D1 { spec.n } else { 2 * spec.n };
        let gamma = gamma.or_else(|| spec.gamma.clone()).unwrap_or_else(|| vec![1.0; big_n]);
        Self::new(kind, f, conversion, gamma)
    }

    pub fn with_network_ref(mut self, path: impl Into<String>) -> Self {
        self.network = Some(path.into());
        self
    }

    pub fn kind(&self) -> FlowKind {
        self.kind
    }

    /// Boolean dimension `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// ODE dimension `N`.
    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn conversion(&self) -> &ContinuousConversion {
        &self.conversion
    }

    pub fn function(&self) -> &BooleanFunction {
        &self.f
    }

    /// Same network and conversion with different rates.
    pub fn with_gamma(&self, gamma: Vec<f64>) -> Result<Self, FlowError> {
        let mut out = Self::new(self.kind, self.f.clone(), self.conversion.clone(), gamma)?;
        out.network = self.network.clone();
        Ok(out)
    }

    pub fn rhs(&self, x: &[f64]) -> Result<Vec<f64>, FlowError> {
        if x.len() != self.dim() {
            return Err(FlowError::DimensionMismatch { expected: self.dim(), actual: x.len() });
        }
        let mut out = vec![0.0; self.dim()];
        self.rhs_into(x, &mut out);
        Ok(out)
    }

    /// Allocation-free right-hand side; lengths must equal `N`.
    #[inline]
    pub fn rhs_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut q = [0.0f64; MAX_TABLE_DIM];
        self.conversion.q_into(x, &mut q[..n]);
        match self.kind {
            FlowKind::D1 => {
                for i in 0..n {
                    out[i] = self.gamma[i] * (g(x[i]) + 6.0 * q[i]);
                }
            }
            FlowKind::D2 => {
                for i in 0..n {
                    out[i] = self.gamma[i] * (g(x[i]) + 6.0 * ramp(x[n + i]));
                    out[n + i] = self.gamma[n + i] * (g(x[n + i]) + 6.0 * q[i]);
                }
            }
        }
    }

    pub fn state_box(&self) -> (f64, f64) {
        state_box()
    }

    /// Central-difference Jacobian.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let m = self.dim();
        let mut jac = DMatrix::zeros(m, m);
        let mut xp = x.to_vec();
        let (mut fp, mut fm) = (vec![0.0; m], vec![0.0; m]);
        for j in 0..m {
            let h = 1e-6 * x[j].abs().max(1.0);
            xp[j] = x[j] + h;
            self.rhs_into(&xp, &mut fp);
            xp[j] = x[j] - h;
            self.rhs_into(&xp, &mut fm);
            xp[j] = x[j];
            for i in 0..m {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        jac
    }

    /// Equilibria in the state box, found by damped Newton iteration from a
    /// `per_dim^N` grid of starts.
    pub fn find_equilibria(&self, per_dim: usize) -> Vec<Equilibrium> {
        let m = self.dim();
        let (lo, hi) = state_box();
        let per_dim = per_dim.max(2);
        let mut found: Vec<Equilibrium> = Vec::new();
        let total = per_dim.pow(m as u32);
        for k in 0..total {
            let mut rest = k;
            let start: Vec<f64> = (0..m)
                .map(|_| {
                    let c = rest % per_dim;
                    rest /= per_dim;
                    lo + (hi - lo) * (c as f64 + 0.5) / per_dim as f64
                })
                .collect();
            if let Some(x) = self.newton(&start) {
                if found.iter().all(|e| max_dist(&e.x, &x) > 1e-6) {
                    found.push(self.equilibrium_at(x));
                }
            }
        }
        found.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap_or(std::cmp::Ordering::Equal));
        found
    }

    pub fn equilibrium_at(&self, x: Vec<f64>) -> Equilibrium {
        let r = self.rhs(&x).expect("dimension");
        let residual = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let eig = self.jacobian(&x).complex_eigenvalues();
        let mut eigenvalues: Vec<(f64, f64)> = eig.iter().map(|c| (c.re, c.im)).collect();
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        Equilibrium { x, residual, eigenvalues }
    }

    fn newton(&self, start: &[f64]) -> Option<Vec<f64>> {
        let m = self.dim();
        let (lo, hi) = state_box();
        let mut x = start.to_vec();
        let mut fx = self.rhs(&x).ok()?;
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        for _ in 0..100 {
            if fx.iter().all(|v| v.abs() < 1e-12) {
                return Some(x);
            }
            let jac = self.jacobian(&x);
            let rhs = DVector::from_iterator(m, fx.iter().map(|v| -v));
            let step = jac.svd(true, true).solve(&rhs, 1e-12).ok()?;
            let f0 = norm(&fx);
            let mut lambda = 1.0;
            loop {
                let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| (a + lambda * d).clamp(lo, hi)).collect();
                let ft = self.rhs(&trial).ok()?;
                if norm(&ft) < f0 * (1.0 - 1e-4 * lambda) {
                    x = trial;
                    fx = ft;
                    break;
                }
                lambda *= 0.5;
                if lambda < 1e-10 {
                    return None;
                }
            }
        }
        fx.iter().all(|v| v.abs() < 1e-12).then_some(x)
    }

    pub fn describe(&self) -> FlowDescription {
        FlowDescription {
            kind: self.kind,
            n: self.n,
            dim: self.dim(),
            gamma: self.gamma.clone(),
            scheme: self.conversion.scheme(),
            network: self.network.clone(),
        }
    }
}

fn max_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// JSON form of a [`FlowSpec`].
#[derive(Debug, Clone, Serialize)]
pub struct FlowDescription {
    pub kind: FlowKind,
    pub n: usize,
    #[serde(rename = "N")]
    pub dim: usize,
    pub gamma: Vec<f64>,
    pub scheme: Scheme,
    pub network: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Equilibrium {
    pub x: Vec<f64>,
    /// Max-norm of the right-hand side at `x`.
    pub residual: f64,
    /// Jacobian eigenvalues as `(re, im)`.
    pub eigenvalues: Vec<(f64, f64)>,
}

/// Bisection for a sign change of `h` on `[a, b]`, to absolute width `tol`.
pub fn bisect(h: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = h(a);
    debug_assert!(fa * h(b) <= 0.0, "no sign change on [{a}, {b}]");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            break;
        }
        let fm = h(m);
        if fm == 0.0 {
            return m;
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `(x⁻, x⁺)`: the real roots of `g` and of `g + 6`, bounding the
/// forward-invariant box.
pub fn state_box() -> (f64, f64) {
    static BOX: OnceLock<(f64, f64)> = OnceLock::new();
    *BOX.get_or_init(|| {
        let lo = bisect(g, -3.0, -1.0, 1e-15);
        let hi = bisect(|x| g(x) + 6.0, 1.0, 3.0, 1e-15);
        (lo, hi)
    })
}

/// Whether every entry lies in `[x⁻ - tol, x⁺ + tol]`.
pub fn in_box(x: &[f64], tol: f64) -> bool {
    let (lo, hi) = state_box();
    x.iter().all(|&v| v >= lo - tol && v <= hi + tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    MonoLow,
    Bistable,
    MonoHigh,
}

/// Equilibria of `x' = γ (g(x) + h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub h: f64,
    pub stable_low: Option<f64>,
    pub stable_high: Option<f64>,
    pub unstable_mid: Option<f64>,
    pub regime: Regime,
    /// The double root at a saddle-node tangency (`h = 1` or `h = 5`).
    pub tangent: Option<f64>,
}

/// Real roots of `g(x) + h`, i.e. of the depressed cubic `x^3 - 3x + (3 - h)`.
///
/// Three real roots iff `(h - 1)(5 - h) > 0`; the sign is taken from that
/// product directly so the regime boundaries are exact.
pub fn equilibria_1d(h: f64, gamma: f64) -> Result<EquilibriumReport, FlowError> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(FlowError::BadGamma { index: 0, value: gamma });
    }
    let q = 3.0 - h;
    let disc = (h - 1.0) * (5.0 - h);
    let polish = |x0: f64| -> f64 {
        let f = |x: f64| g(x) + h;
        let w = 1e-6 * x0.abs().max(1.0);
        let (a, b) = (x0 - w, x0 + w);
        if f(a) * f(b) <= 0.0 {
            bisect(f, a, b, 1e-14)
        } else {
            x0
        }
    };
    let mut report =
        EquilibriumReport { h, stable_low: None, stable_high: None, unstable_mid: None, regime: Regime::MonoLow, tangent: None };
    if disc > 0.0 {
        let theta = (-q / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
        let mut roots: Vec<f64> = (0..3).map(|k| polish(2.0 * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())).collect();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        report.stable_low = Some(roots[0]);
        report.unstable_mid = Some(roots[1]);
        report.stable_high = Some(roots[2]);
        report.regime = Regime::Bistable;
    } else if disc == 0.0 {
        // x^3 - 3x ± 2 = (x ∓ 1)^2 (x ± 2)
        if h == 1.0 {
            report.stable_low = Some(-2.0);
            report.tangent = Some(1.0);
            report.regime = Regime::MonoLow;
        } else {
            report.stable_high = Some(2.0);
            report.tangent = Some(-1.0);
            report.regime = Regime::MonoHigh;
        }
    } else {
        let r = (q * q / 4.0 - 1.0).sqrt();
        let x = polish((-q / 2.0 + r).cbrt() + (-q / 2.0 - r).cbrt());
        if h < 1.0 {
            report.stable_low = Some(x);
        } else {
            report.stable_high = Some(x);
            report.regime = Regime::MonoHigh;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root1d {
    pub x: f64,
    pub stable: bool,
    /// Derivative of the right-hand side at the root.
    pub slope: f64,
}

/// All roots of `g(x) + 6 Q(x)` on `[x⁻, x⁺]` for a scalar conversion,
/// found by a fine sign scan followed by bisection.
pub fn fixed_points_1d_nonconst(conv: &ContinuousConversion, gamma: f64) -> Result<Vec<Root1d>, FlowError> {
    if conv.dim() != 1 {
        return Err(FlowError::NotScalar(conv.dim()));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(FlowError::BadGamma { index: 0, value: gamma });
    }
    let rhs = |x: f64| {
        let mut q = [0.0];
        conv.q_into(&[x], &mut q);
        gamma * (g(x) + 6.0 * q[0])
    };
    let (lo, hi) = state_box();
    // the box edges are roots themselves when Q saturates to 0 or 1 there
    let (a, b) = (lo - 0.01, hi + 0.01);
    let steps = 40_000;
    let mut roots = Vec::new();
    let mut prev_x = a;
    let mut prev = rhs(a);
    for k in 1..=steps {
        let x = a + (b - a) * k as f64 / steps as f64;
        let v = rhs(x);
        if prev == 0.0 {
            roots.push(prev_x);
        } else if prev * v < 0.0 {
            roots.push(bisect(rhs, prev_x, x, 1e-14));
        }
        prev_x = x;
        prev = v;
    }
    Ok(roots
        .into_iter()
        .filter(|&r| r >= lo - 1e-9 && r <= hi + 1e-9)
        .map(|r| {
            let h = 1e-7;
            let slope = (rhs(r + h) - rhs(r - h)) / (2.0 * h);
            Root1d { x: r, stable: slope < 0.0, slope }
        })
        .collect())
}
