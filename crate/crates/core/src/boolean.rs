//! Finite Boolean dynamical systems `s(τ+1) = f(s(τ))` over `{0,1}^n`.
//!
//! States are packed into a `u64` with coordinate `s_1` as the most significant
//! of the `n` bits, so the numeric order of states is the lexicographic order of
//! their bit strings (`00 < 01 < 10 < 11`). Functions are stored as full truth
//! tables; every predicate in this module is an exhaustive check over them.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest dimension for which a full truth table is materialized.
pub const MAX_TABLE_DIM: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BooleanError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("dimension {0} is outside 1..={max}", max = MAX_TABLE_DIM)]
    BadDimension(usize),
    #[error("invalid bit string {0:?}")]
    BadBits(String),
    #[error("coordinate index {index} out of range for dimension {n}")]
    BadIndex { index: usize, n: usize },
    #[error("truth table line {line}: {msg}")]
    Table { line: usize, msg: String },
}

fn check_dim(n: usize) -> Result<(), BooleanError> {
    if n == 0 || n > MAX_TABLE_DIM {
        Err(BooleanError::BadDimension(n))
    } else {
        Ok(())
    }
}

/// A point of `{0,1}^n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BooleanState {
    n: usize,
    bits: u64,
}

impl BooleanState {
    /// Builds a state from its packed index (`s_1` is the most significant bit).
    pub fn from_index(n: usize, index: u64) -> Self {
        debug_assert!(n <= 64);
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        BooleanState { n, bits: index & mask }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let index = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        BooleanState { n: bits.len(), bits: index }
    }

    pub fn zeros(n: usize) -> Self {
        BooleanState { n, bits: 0 }
    }

    pub fn ones(n: usize) -> Self {
        Self::from_index(n, u64::MAX)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn index(&self) -> u64 {
        self.bits
    }

    /// Value of coordinate `i` (0-based, so `get(0)` is `s_1`).
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        (self.bits >> (self.n - 1 - i)) & 1 == 1
    }

    pub fn with(&self, i: usize, value: bool) -> Self {
        let mask = 1u64 << (self.n - 1 - i);
        let bits = if value { self.bits | mask } else { self.bits & !mask };
        BooleanState { n: self.n, bits }
    }

    pub fn flip(&self, i: usize) -> Self {
        BooleanState { n: self.n, bits: self.bits ^ (1u64 << (self.n - 1 - i)) }
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.n).map(|i| self.get(i)).collect()
    }

    /// Concatenation `(self, other)`.
    pub fn concat(&self, other: &BooleanState) -> Self {
        BooleanState { n: self.n + other.n, bits: (self.bits << other.n) | other.bits }
    }

    /// Sub-state made of coordinates `start..start+len`.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        let shift = self.n - start - len;
        Self::from_index(len, self.bits >> shift)
    }

    /// Coordinates in which `self` and `other` differ, as a packed mask.
    fn diff_mask(&self, other: &BooleanState) -> u64 {
        self.bits ^ other.bits
    }
}

impl fmt::Display for BooleanState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BooleanState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanState({self})")
    }
}

impl FromStr for BooleanState {
    type Err = BooleanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s.len() > 64 {
            return Err(BooleanError::BadBits(s.to_string()));
        }
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(BooleanError::BadBits(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BooleanState::from_bits(&bits))
    }
}

impl Serialize for BooleanState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BooleanState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Number of coordinates in which `s` and `t` differ.
pub fn hamming(s: &BooleanState, t: &BooleanState) -> Result<usize, BooleanError> {
    if s.n != t.n {
        return Err(BooleanError::DimensionMismatch { expected: s.n, actual: t.n });
    }
    Ok(s.diff_mask(t).count_ones() as usize)
}

/// A total map `{0,1}^n -> {0,1}^n` stored as a truth table.
#[derive(Clone, PartialEq, Eq)]
pub struct BooleanFunction {
    n: usize,
    table: Vec<u64>,
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanFunction(n={}", self.n)?;
        for (i, out) in self.table.iter().enumerate() {
            write!(f, ", {}->{}", BooleanState::from_index(self.n, i as u64), BooleanState::from_index(self.n, *out))?;
        }
        f.write_str(")")
    }
}

impl BooleanFunction {
    /// Builds `f` from its table of packed outputs, indexed by packed input.
    pub fn from_table(n: usize, table: Vec<u64>) -> Result<Self, BooleanError> {
        check_dim(n)?;
        if table.len() != 1usize << n {
            return Err(BooleanError::DimensionMismatch { expected: 1 << n, actual: table.len() });
        }
        let mask = (1u64 << n) - 1;
        if table.iter().any(|&v| v & !mask != 0) {
            return Err(BooleanError::BadBits("table entry wider than n bits".into()));
        }
        Ok(BooleanFunction { n, table })
    }

    pub fn from_fn(n: usize, f: impl Fn(&BooleanState) -> BooleanState) -> Result<Self, BooleanError> {
        check_dim(n)?;
        let table = (0..1u64 << n)
            .map(|i| {
                let out = f(&BooleanState::from_index(n, i));
                assert_eq!(out.dim(), n, "output dimension");
                out.index()
            })
            .collect();
        Ok(BooleanFunction { n, table })
    }

    /// Assembles `f` from one output column per coordinate; `columns[i][s]` is `f_i(s)`.
    pub fn from_columns(columns: &[Vec<bool>]) -> Result<Self, BooleanError> {
        let n = columns.len();
        check_dim(n)?;
        let size = 1usize << n;
        for c in columns {
            if c.len() != size {
                return Err(BooleanError::DimensionMismatch { expected: size, actual: c.len() });
            }
        }
        let table = (0..size).map(|s| columns.iter().fold(0u64, |acc, col| (acc << 1) | col[s] as u64)).collect();
        Ok(BooleanFunction { n, table })
    }

    /// Builds `f` from `(input, output)` string pairs; every input must appear exactly once.
    pub fn from_pairs(n: usize, pairs: &[(&str, &str)]) -> Result<Self, BooleanError> {
        check_dim(n)?;
        let mut table = vec![None; 1 << n];
        for (line, (a, b)) in pairs.iter().enumerate() {
            let a: BooleanState = a.parse()?;
            let b: BooleanState = b.parse()?;
            if a.dim() != n || b.dim() != n {
                return Err(BooleanError::Table { line: line + 1, msg: "wrong width".into() });
            }
            if table[a.index() as usize].replace(b.index()).is_some() {
                return Err(BooleanError::Table { line: line + 1, msg: format!("duplicate input {a}") });
            }
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| BooleanError::Table { line: 0, msg: format!("missing input {}", BooleanState::from_index(n, i as u64)) })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BooleanFunction { n, table })
    }

    pub fn identity(n: usize) -> Result<Self, BooleanError> {
        Self::from_fn(n, |s| *s)
    }

    pub fn constant(n: usize, value: BooleanState) -> Result<Self, BooleanError> {
        if value.dim() != n {
            return Err(BooleanError::DimensionMismatch { expected: n, actual: value.dim() });
        }
        Self::from_fn(n, |_| value)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_states(&self) -> u64 {
        1u64 << self.n
    }

    pub fn states(&self) -> impl Iterator<Item = BooleanState> + '_ {
        (0..self.num_states()).map(move |i| BooleanState::from_index(self.n, i))
    }

    fn check(&self, s: &BooleanState) -> Result<(), BooleanError> {
        if s.dim() != self.n {
            Err(BooleanError::DimensionMismatch { expected: self.n, actual: s.dim() })
        } else {
            Ok(())
        }
    }

    fn apply(&self, s: &BooleanState) -> BooleanState {
        BooleanState::from_index(self.n, self.table[s.index() as usize])
    }

    /// One synchronous update `f(s)`.
    pub fn step(&self, s: &BooleanState) -> Result<BooleanState, BooleanError> {
        self.check(s)?;
        Ok(self.apply(s))
    }

    /// Value of the coordinate function `f_i` at `s`.
    pub fn coord(&self, i: usize, s: &BooleanState) -> bool {
        self.apply(s).get(i)
    }

    /// Output column of `f_i` over all inputs in lexicographic order.
    pub fn column(&self, i: usize) -> Vec<bool> {
        self.states().map(|s| self.coord(i, &s)).collect()
    }

    pub fn is_fixed_point(&self, s: &BooleanState) -> Result<bool, BooleanError> {
        self.check(s)?;
        Ok(self.apply(s) == *s)
    }

    pub fn fixed_points(&self) -> Vec<BooleanState> {
        self.states().filter(|s| self.apply(s) == *s).collect()
    }

    /// Tail/cycle decomposition of the trajectory of `s`.
    pub fn orbit(&self, s: &BooleanState) -> Result<OrbitReport, BooleanError> {
        self.check(s)?;
        let mut seen: HashMap<u64, usize> = HashMap::new();
        let mut states = Vec::new();
        let mut cur = *s;
        let start = loop {
            if let Some(&pos) = seen.get(&cur.index()) {
                break pos;
            }
            seen.insert(cur.index(), states.len());
            states.push(cur);
            cur = self.apply(&cur);
        };
        let cycle = states.split_off(start);
        let tail = states;
        let distances = tail.iter().chain(cycle.iter()).map(|s| s.diff_mask(&self.apply(s)).count_ones() as usize).collect();
        Ok(OrbitReport { tail, cycle, distances })
    }

    /// All distinct periodic orbits (attractors), each listed from its smallest state.
    pub fn attractors(&self) -> Vec<Vec<BooleanState>> {
        let mut on_cycle = vec![false; self.table.len()];
        let mut cycles = Vec::new();
        for s in self.states() {
            let report = self.orbit(&s).expect("dimension matches");
            let first = report.cycle.iter().min().copied().expect("cycle is non-empty");
            if on_cycle[first.index() as usize] {
                continue;
            }
            let mut cycle = vec![first];
            let mut cur = self.apply(&first);
            while cur != first {
                cycle.push(cur);
                cur = self.apply(&cur);
            }
            for c in &cycle {
                on_cycle[c.index() as usize] = true;
            }
            cycles.push(cycle);
        }
        cycles
    }

    /// Classifies the trajectory of `s`, or every trajectory when `s` is `None`.
    pub fn stepping(&self, s: Option<&BooleanState>) -> Result<SteppingReport, BooleanError> {
        let pairs: Vec<(usize, BooleanState)> = match s {
            Some(s) => {
                let orbit = self.orbit(s)?;
                orbit.tail.into_iter().chain(orbit.cycle).enumerate().collect()
            }
            None => self.states().map(|s| (0, s)).collect(),
        };
        let mut one_witness = None;
        let mut mono_witness = None;
        let mut all_fixed = true;
        for (tau, st) in pairs {
            let next = self.apply(&st);
            let h = st.diff_mask(&next).count_ones();
            if h != 0 {
                all_fixed = false;
            }
            if h > 1 && one_witness.is_none() {
                one_witness = Some(SteppingWitness { step: tau, state: st });
            }
            if h > 1 && mono_witness.is_none() && !self.is_monotone_at(&st) {
                mono_witness = Some(SteppingWitness { step: tau, state: st });
            }
        }
        let (classification, witness) = match (all_fixed, one_witness, mono_witness) {
            (true, _, _) => (SteppingClass::FixedPointOnly, None),
            (false, None, _) => (SteppingClass::OneStepping, None),
            (false, Some(w), None) => (SteppingClass::MonotoneStepping, Some(w)),
            (false, Some(_), Some(w)) => (SteppingClass::Neither, Some(w)),
        };
        Ok(SteppingReport { classification, witness })
    }

    pub fn is_one_stepping(&self, s: Option<&BooleanState>) -> Result<SteppingReport, BooleanError> {
        self.stepping(s)
    }

    pub fn is_monotone_stepping(&self, s: Option<&BooleanState>) -> Result<SteppingReport, BooleanError> {
        self.stepping(s)
    }

    /// True when every `s*` strictly between `s` and `f(s)` maps to `f(s)`.
    fn is_monotone_at(&self, s: &BooleanState) -> bool {
        let fs = self.apply(s);
        let delta = s.diff_mask(&fs);
        // Enumerate proper subsets of the changing coordinates.
        let mut sub = 0u64;
        loop {
            if sub != delta {
                let sst = BooleanState::from_index(self.n, s.index() ^ sub);
                if self.apply(&sst) != fs {
                    return false;
                }
            }
            if sub == delta {
                return true;
            }
            sub = (sub.wrapping_sub(delta)) & delta;
        }
    }

    /// `f⁺ = (c, f)` on `2n` coordinates: the first block copies the second,
    /// the second block applies `f` to the first.
    pub fn extend_fplus(&self) -> Result<BooleanFunction, BooleanError> {
        let n = self.n;
        BooleanFunction::from_fn(2 * n, |x| {
            let head = x.slice(0, n);
            let tail = x.slice(n, n);
            tail.concat(&self.apply(&head))
        })
    }

    /// `f°`: only the lowest-indexed coordinate that `f` would change is updated.
    pub fn one_stepping_transform(&self) -> BooleanFunction {
        let n = self.n;
        let table = self
            .states()
            .map(|s| {
                let delta = s.diff_mask(&self.apply(&s));
                if delta == 0 {
                    s.index()
                } else {
                    // s_1 is the most significant bit, so the lowest index is the highest set bit.
                    let top = 63 - delta.leading_zeros();
                    s.index() ^ (1u64 << top)
                }
            })
            .collect();
        BooleanFunction { n, table }
    }

    /// Direct product: `self` acts on the first block, `other` on the second.
    pub fn product(&self, other: &BooleanFunction) -> Result<BooleanFunction, BooleanError> {
        let (n, m) = (self.n, other.n);
        BooleanFunction::from_fn(n + m, |x| self.apply(&x.slice(0, n)).concat(&other.apply(&x.slice(n, m))))
    }

    /// Average image distance over all unordered pairs at Hamming distance 1.
    pub fn derrida_slope(&self) -> Ratio<u64> {
        let n = self.n;
        let mut total = 0u64;
        for s in self.states() {
            let fs = self.apply(&s);
            for i in 0..n {
                let t = s.flip(i);
                // each unordered pair once
                if t.index() > s.index() {
                    total += fs.diff_mask(&self.apply(&t)).count_ones() as u64;
                }
            }
        }
        let pairs = (n as u64) << (n - 1);
        Ratio::new(total, pairs)
    }

    /// Line-oriented truth-table text: `n=<dim>` then `<in> -> <out>` per input.
    pub fn to_table_text(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for s in self.states() {
            out.push_str(&format!("{} -> {}\n", s, self.apply(&s)));
        }
        out
    }

    pub fn from_table_text(text: &str) -> Result<Self, BooleanError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        let (lno, header) = lines.next().ok_or(BooleanError::Table { line: 0, msg: "empty input".into() })?;
        let n: usize = header
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| BooleanError::Table { line: lno, msg: "expected header n=<dim>".into() })?;
        let mut pairs = Vec::new();
        for (lno, line) in lines {
            let (a, b) =
                line.split_once("->").ok_or_else(|| BooleanError::Table { line: lno, msg: "expected `<bits> -> <bits>`".into() })?;
            pairs.push((a.trim(), b.trim()));
        }
        let expected: Vec<String> = (0..1u64 << n).map(|i| BooleanState::from_index(n, i).to_string()).collect();
        for (k, (a, _)) in pairs.iter().enumerate() {
            if expected.get(k).map(String::as_str) != Some(*a) {
                return Err(BooleanError::Table { line: k + 2, msg: "inputs must be in lexicographic order".into() });
            }
        }
        Self::from_pairs(n, &pairs)
    }
}

/// `f_i(s) = s_{i-1}` for `i ∉ negated`, `¬s_{i-1}` otherwise, with `s_0 := s_n`.
///
/// Indices in `negated` are 0-based.
pub fn ring_negation_family(n: usize, negated: &[usize]) -> Result<BooleanFunction, BooleanError> {
    check_dim(n)?;
    if let Some(&bad) = negated.iter().find(|&&i| i >= n) {
        return Err(BooleanError::BadIndex { index: bad, n });
    }
    BooleanFunction::from_fn(n, |s| {
        let bits: Vec<bool> = (0..n)
            .map(|i| {
                let prev = s.get((i + n - 1) % n);
                prev ^ negated.contains(&i)
            })
            .collect();
        BooleanState::from_bits(&bits)
    })
}

/// Whether `sst` is strictly between `s` and `fs`: it agrees with `s` wherever
/// `s` and `fs` agree, and differs from `fs`.
pub fn strictly_between(s: &BooleanState, sst: &BooleanState, fs: &BooleanState) -> Result<bool, BooleanError> {
    hamming(s, sst)?;
    hamming(s, fs)?;
    let frozen = !(s.diff_mask(fs));
    Ok((s.diff_mask(sst) & frozen) == 0 && sst != fs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitReport {
    pub tail: Vec<BooleanState>,
    pub cycle: Vec<BooleanState>,
    /// `H(s(τ), s(τ+1))` for every listed state in order (tail, then cycle).
    pub distances: Vec<usize>,
}

impl OrbitReport {
    pub fn period(&self) -> usize {
        self.cycle.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SteppingClass {
    FixedPointOnly,
    OneStepping,
    MonotoneStepping,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SteppingWitness {
    pub step: usize,
    pub state: BooleanState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SteppingReport {
    pub classification: SteppingClass,
    /// First offending `(τ, state)` for the strongest property that fails.
    pub witness: Option<SteppingWitness>,
}

impl SteppingReport {
    pub fn is_one_stepping(&self) -> bool {
        matches!(self.classification, SteppingClass::FixedPointOnly | SteppingClass::OneStepping)
    }

    pub fn is_monotone_stepping(&self) -> bool {
        self.classification != SteppingClass::Neither
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(s: &str) -> BooleanState {
        s.parse().unwrap()
    }

    pub(crate) fn mono_example() -> BooleanFunction {
        BooleanFunction::from_pairs(
            3,
            &[
                ("000", "110"),
                ("010", "110"),
                ("100", "110"),
                ("110", "111"),
                ("111", "101"),
                ("101", "001"),
                ("001", "011"),
                ("011", "111"),
            ],
        )
        .unwrap()
    }

    fn copy_negation() -> BooleanFunction {
        BooleanFunction::from_fn(2, |s| BooleanState::from_bits(&[!s.get(1), s.get(0)])).unwrap()
    }

    #[test]
    fn step_examples() {
        assert_eq!(mono_example().step(&st("000")).unwrap(), st("110"));
        assert_eq!(copy_negation().step(&st("00")).unwrap(), st("10"));
        let id = BooleanFunction::identity(3).unwrap();
        assert_eq!(id.step(&st("101")).unwrap(), st("101"));
        assert!(matches!(id.step(&st("10")), Err(BooleanError::DimensionMismatch { .. })));
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming(&st("000"), &st("101")).unwrap(), 2);
        assert_eq!(hamming(&st("0110"), &st("0110")).unwrap(), 0);
        assert_eq!(hamming(&st("0000"), &st("1111")).unwrap(), 4);
        assert!(hamming(&st("0"), &st("01")).is_err());
    }

    #[test]
    fn orbit_examples() {
        let o = copy_negation().orbit(&st("00")).unwrap();
        assert!(o.tail.is_empty());
        assert_eq!(o.cycle, vec![st("00"), st("10"), st("11"), st("01")]);

        let zero = BooleanFunction::constant(3, st("000")).unwrap();
        let o = zero.orbit(&st("111")).unwrap();
        assert_eq!(o.tail, vec![st("111")]);
        assert_eq!(o.cycle, vec![st("000")]);

        let ring = ring_negation_family(3, &[0]).unwrap();
        let o = ring.orbit(&st("000")).unwrap();
        assert!(o.tail.is_empty());
        let expected: Vec<_> = ["000", "100", "110", "111", "011", "001"].iter().map(|s| st(s)).collect();
        assert_eq!(o.cycle, expected);
    }

    #[test]
    fn fixed_point_examples() {
        let zero = BooleanFunction::constant(2, st("00")).unwrap();
        assert!(zero.is_fixed_point(&st("00")).unwrap());
        assert!(!mono_example().is_fixed_point(&st("111")).unwrap());
        let id = BooleanFunction::identity(3).unwrap();
        assert!(id.states().all(|s| id.is_fixed_point(&s).unwrap()));
    }

    #[test]
    fn stepping_classification() {
        assert_eq!(copy_negation().stepping(None).unwrap().classification, SteppingClass::OneStepping);
        let r = mono_example().stepping(None).unwrap();
        assert_eq!(r.classification, SteppingClass::MonotoneStepping);
        assert!(!r.is_one_stepping());
        assert_eq!(r.witness.unwrap().state, st("000"));
        assert_eq!(BooleanFunction::identity(2).unwrap().stepping(None).unwrap().classification, SteppingClass::FixedPointOnly);
        let two_neg = BooleanFunction::from_fn(2, |s| BooleanState::from_bits(&[!s.get(0), !s.get(1)])).unwrap();
        assert_eq!(two_neg.stepping(None).unwrap().classification, SteppingClass::Neither);
        // The trajectory of 110 in the monotone example is one-stepping.
        assert!(mono_example().stepping(Some(&st("110"))).unwrap().is_one_stepping());
    }

    #[test]
    fn strictly_between_examples() {
        assert!(strictly_between(&st("000"), &st("100"), &st("110")).unwrap());
        assert!(!strictly_between(&st("000"), &st("110"), &st("110")).unwrap());
        assert!(!strictly_between(&st("000"), &st("001"), &st("110")).unwrap());
        assert!(strictly_between(&st("000"), &st("1"), &st("110")).is_err());
    }

    #[test]
    fn fplus_examples() {
        let neg = BooleanFunction::from_fn(1, |s| s.flip(0)).unwrap();
        let fp = neg.extend_fplus().unwrap();
        for s in fp.states() {
            let out = fp.step(&s).unwrap();
            assert_eq!(out, BooleanState::from_bits(&[s.get(1), !s.get(0)]));
        }
        let id = BooleanFunction::identity(2).unwrap().extend_fplus().unwrap();
        assert_eq!(id.step(&st("1001")).unwrap(), st("0110"));
        let zero = BooleanFunction::constant(2, st("00")).unwrap().extend_fplus().unwrap();
        assert_eq!(zero.step(&st("1101")).unwrap(), st("0100"));
    }

    #[test]
    fn one_stepping_transform_examples() {
        let f = mono_example();
        let fo = f.one_stepping_transform();
        assert_eq!(fo.step(&st("000")).unwrap(), st("100"));
        assert!(fo.stepping(None).unwrap().is_one_stepping());
        let cn = copy_negation();
        assert_eq!(cn.one_stepping_transform(), cn);
    }

    #[test]
    fn ring_family_examples() {
        let neg = ring_negation_family(1, &[0]).unwrap();
        assert_eq!(neg.orbit(&st("0")).unwrap().cycle, vec![st("0"), st("1")]);
        let rot = ring_negation_family(2, &[]).unwrap();
        let mut attractors = rot.attractors();
        attractors.sort();
        assert_eq!(attractors, vec![vec![st("00")], vec![st("01"), st("10")], vec![st("11")]]);
        assert!(ring_negation_family(2, &[2]).is_err());
    }

    #[test]
    fn product_examples() {
        let cn = copy_negation();
        let p = cn.product(&cn).unwrap();
        let mut cycles = p.attractors();
        cycles.sort();
        assert_eq!(cycles.len(), 4);
        assert!(cycles.iter().all(|c| c.len() == 4));
        let o = p.orbit(&st("0000")).unwrap();
        assert_eq!(o.cycle, vec![st("0000"), st("1010"), st("1111"), st("0101")]);
        let frozen = cn.product(&BooleanFunction::identity(2).unwrap()).unwrap();
        assert_eq!(frozen.step(&st("0011")).unwrap(), st("1011"));
    }

    #[test]
    fn derrida_examples() {
        let chaotic = BooleanFunction::from_pairs(2, &[("00", "00"), ("01", "11"), ("10", "01"), ("11", "10")]).unwrap();
        assert_eq!(chaotic.derrida_slope(), Ratio::new(3, 2));
        assert_eq!(BooleanFunction::identity(4).unwrap().derrida_slope(), Ratio::from_integer(1));
        assert_eq!(BooleanFunction::constant(3, st("101")).unwrap().derrida_slope(), Ratio::from_integer(0));
    }

    #[test]
    fn table_text_round_trip() {
        let f = mono_example();
        let text = f.to_table_text();
        assert!(text.starts_with("n=3\n000 -> 110\n001 -> 011\n"));
        assert_eq!(BooleanFunction::from_table_text(&text).unwrap(), f);
        assert!(BooleanFunction::from_table_text("n=1\n1 -> 0\n0 -> 1\n").is_err());
    }
}
