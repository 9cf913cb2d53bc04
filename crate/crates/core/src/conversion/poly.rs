use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("integer coefficient overflow while expanding a polynomial")]
    Overflow,
    #[error("polynomial dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Sparse real polynomial in `x_1..x_n` with exact integer coefficients.
///
/// Keys are dense exponent vectors. Floating-point evaluation goes through a
/// compiled term list; polynomials whose coefficient mass is large enough for
/// cancellation to matter are evaluated in double-double arithmetic.
#[derive(Clone, PartialEq, Eq)]
pub struct RealPolynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, i128>,
    compiled: Compiled,
}

/// Above this sum of absolute coefficients plain `f64` evaluation can lose
/// more than ~1e-13 to cancellation on `[0,1]^n`.
const PRECISE_MASS: f64 = 1.0e3;

#[derive(Clone, PartialEq, Eq, Debug, Default)]
struct Compiled {
    /// (coefficient index, factor range)
    terms: Vec<(usize, usize, usize)>,
    coeffs: Vec<i128>,
    factors: Vec<(usize, u32)>,
    precise: bool,
}

impl RealPolynomial {
    fn from_map(n: usize, mut terms: BTreeMap<Vec<u32>, i128>) -> Self {
        terms.retain(|_, c| *c != 0);
        let compiled = compile(&terms);
        RealPolynomial { n, terms, compiled }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_map(n, BTreeMap::new())
    }

    pub fn constant(n: usize, c: i128) -> Self {
        let mut m = BTreeMap::new();
        m.insert(vec![0; n], c);
        Self::from_map(n, m)
    }

    /// The coordinate polynomial `x_j` (0-based `j`).
    pub fn var(n: usize, j: usize) -> Self {
        assert!(j < n, "variable index out of range");
        let mut e = vec![0; n];
        e[j] = 1;
        let mut m = BTreeMap::new();
        m.insert(e, 1);
        Self::from_map(n, m)
    }

    /// Builds from `(exponents, coefficient)` pairs, merging duplicates.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Vec<u32>, i128)>) -> Result<Self, PolyError> {
        let mut m: BTreeMap<Vec<u32>, i128> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != n {
                return Err(PolyError::DimensionMismatch(n, e.len()));
            }
            let slot = m.entry(e).or_insert(0);
            *slot = slot.checked_add(c).ok_or(PolyError::Overflow)?;
        }
        Ok(Self::from_map(n, m))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], i128)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn coefficient(&self, exponents: &[u32]) -> i128 {
        self.terms.get(exponents).copied().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Highest power of each variable.
    pub fn degree_per_var(&self) -> Vec<u32> {
        let mut d = vec![0; self.n];
        for e in self.terms.keys() {
            for (dj, ej) in d.iter_mut().zip(e) {
                *dj = (*dj).max(*ej);
            }
        }
        d
    }

    pub fn is_multilinear(&self) -> bool {
        self.degree_per_var().iter().all(|&d| d <= 1)
    }

    /// Sum of absolute coefficients.
    pub fn coefficient_mass(&self) -> f64 {
        self.terms.values().map(|c| c.unsigned_abs() as f64).sum()
    }

    fn check(&self, other: &Self) -> Result<(), PolyError> {
        if self.n != other.n {
            Err(PolyError::DimensionMismatch(self.n, other.n))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check(other)?;
        let mut m = self.terms.clone();
        for (e, c) in &other.terms {
            let slot = m.entry(e.clone()).or_insert(0);
            *slot = slot.checked_add(*c).ok_or(PolyError::Overflow)?;
        }
        Ok(Self::from_map(self.n, m))
    }

    pub fn scale(&self, k: i128) -> Result<Self, PolyError> {
        let m = self
            .terms
            .iter()
            .map(|(e, c)| c.checked_mul(k).map(|v| (e.clone(), v)).ok_or(PolyError::Overflow))
            .collect::<Result<BTreeMap<_, _>, _>>()?;
        Ok(Self::from_map(self.n, m))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.add(&other.scale(-1)?)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check(other)?;
        let mut m: BTreeMap<Vec<u32>, i128> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let c = ca.checked_mul(*cb).ok_or(PolyError::Overflow)?;
                let slot = m.entry(e).or_insert(0);
                *slot = slot.checked_add(c).ok_or(PolyError::Overflow)?;
            }
        }
        Ok(Self::from_map(self.n, m))
    }

    /// `1 - self`.
    pub fn complement(&self) -> Result<Self, PolyError> {
        Self::constant(self.n, 1).sub(self)
    }

    /// Exact value at a corner of the unit cube.
    pub fn eval_corner(&self, corner: &[bool]) -> i128 {
        assert_eq!(corner.len(), self.n);
        self.terms.iter().filter(|(e, _)| e.iter().zip(corner).all(|(&ej, &bj)| ej == 0 || bj)).map(|(_, c)| *c).sum()
    }

    /// Floating-point value at `x` (length `n`).
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        let c = &self.compiled;
        if c.precise {
            return eval_double_double(c, x);
        }
        let mut acc = 0.0;
        for &(ci, a, b) in &c.terms {
            let mut v = c.coeffs[ci] as f64;
            for &(j, e) in &c.factors[a..b] {
                v *= pow(x[j], e);
            }
            acc += v;
        }
        acc
    }
}

fn pow(x: f64, e: u32) -> f64 {
    match e {
        1 => x,
        2 => x * x,
        _ => x.powi(e as i32),
    }
}

fn compile(terms: &BTreeMap<Vec<u32>, i128>) -> Compiled {
    let mut out = Compiled::default();
    let mut mass = 0.0;
    for (e, c) in terms {
        let start = out.factors.len();
        out.factors.extend(e.iter().enumerate().filter(|(_, &ej)| ej > 0).map(|(j, &ej)| (j, ej)));
        out.terms.push((out.coeffs.len(), start, out.factors.len()));
        out.coeffs.push(*c);
        mass += c.unsigned_abs() as f64;
    }
    out.precise = mass > PRECISE_MASS;
    out
}

// Double-double helpers (error-free transformations).
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn dd_mul_f(a: (f64, f64), b: f64) -> (f64, f64) {
    let p = a.0 * b;
    let e = a.0.mul_add(b, -p) + a.1 * b;
    quick_two_sum(p, e)
}

fn dd_mul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let p = a.0 * b.0;
    let e = a.0.mul_add(b.0, -p) + (a.0 * b.1 + a.1 * b.0);
    quick_two_sum(p, e)
}

fn dd_add(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let (s, e) = two_sum(a.0, b.0);
    quick_two_sum(s, e + a.1 + b.1)
}

fn dd_from_i128(c: i128) -> (f64, f64) {
    let hi = c as f64;
    let lo = (c - hi as i128) as f64;
    quick_two_sum(hi, lo)
}

fn eval_double_double(c: &Compiled, x: &[f64]) -> f64 {
    let mut acc = (0.0, 0.0);
    for &(ci, a, b) in &c.terms {
        let mut v = dd_from_i128(c.coeffs[ci]);
        for &(j, e) in &c.factors[a..b] {
            let mut p = (x[j], 0.0);
            for _ in 1..e {
                p = dd_mul_f(p, x[j]);
            }
            v = dd_mul(v, p);
        }
        acc = dd_add(acc, v);
    }
    acc.0 + acc.1
}

impl fmt::Debug for RealPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealPolynomial({self})")
    }
}

/// Canonical text: constant first, then monomials ordered lexicographically by
/// their `(variable, exponent)` factor lists, e.g. `x1 - 2*x1*x2 + x2`.
impl fmt::Display for RealPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut entries: Vec<(Vec<(usize, u32)>, i128)> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let factors = e.iter().enumerate().filter(|(_, &ej)| ej > 0).map(|(j, &ej)| (j, ej)).collect();
                (factors, *c)
            })
            .collect();
        entries.sort();
        for (k, (factors, c)) in entries.iter().enumerate() {
            let sign = if *c < 0 { "-" } else { "+" };
            let mag = c.unsigned_abs();
            if k == 0 {
                if *c < 0 {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if mag != 1 || factors.is_empty() {
                parts.push(mag.to_string());
            }
            for (j, e) in factors {
                if *e == 1 {
                    parts.push(format!("x{}", j + 1));
                } else {
                    parts.push(format!("x{}^{}", j + 1, e));
                }
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, j: usize) -> RealPolynomial {
        RealPolynomial::var(n, j)
    }

    #[test]
    fn arithmetic_and_display() {
        let (a, b) = (x(2, 0), x(2, 1));
        let xor = a.add(&b).unwrap().sub(&a.mul(&b).unwrap().scale(2).unwrap()).unwrap();
        assert_eq!(xor.to_string(), "x1 - 2*x1*x2 + x2");
        assert_eq!(a.mul(&b).unwrap().to_string(), "x1*x2");
        let contra = x(1, 0).mul(&x(1, 0).complement().unwrap()).unwrap();
        assert_eq!(contra.to_string(), "x1 - x1^2");
        assert_eq!(RealPolynomial::zero(3).to_string(), "0");
        assert_eq!(RealPolynomial::constant(2, -3).to_string(), "-3");
        assert_eq!(x(2, 0).complement().unwrap().to_string(), "1 - x1");
    }

    #[test]
    fn degree_queries() {
        let p = x(2, 0).mul(&x(2, 0)).unwrap().mul(&x(2, 1)).unwrap();
        assert_eq!(p.total_degree(), 3);
        assert_eq!(p.degree_per_var(), vec![2, 1]);
        assert!(!p.is_multilinear());
        assert_eq!(p.eval_corner(&[true, true]), 1);
        assert_eq!(p.eval_corner(&[true, false]), 0);
    }

    #[test]
    fn overflow_is_reported() {
        let big = RealPolynomial::constant(1, i128::MAX / 2);
        assert_eq!(big.scale(4), Err(PolyError::Overflow));
        assert_eq!(x(1, 0).add(&x(2, 0)), Err(PolyError::DimensionMismatch(1, 2)));
    }

    #[test]
    fn double_double_path_beats_cancellation() {
        // (1 - x)^40 expanded has coefficients up to C(40,20) ~ 1.4e11
        let one_minus = x(1, 0).complement().unwrap();
        let mut p = RealPolynomial::constant(1, 1);
        for _ in 0..40 {
            p = p.mul(&one_minus).unwrap();
        }
        assert!(p.coefficient_mass() > PRECISE_MASS);
        for &t in &[0.1, 0.37, 0.5, 0.9] {
            let exact = (1.0f64 - t).powi(40);
            let got = p.eval(&[t]);
            assert!((got - exact).abs() < 1e-15, "t={t}: {got} vs {exact}");
        }
    }
}
