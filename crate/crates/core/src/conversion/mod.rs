//! Continuous conversions `Q = P ∘ L` of Boolean networks.

mod poly;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::boolean::{BooleanFunction, BooleanState, MAX_TABLE_DIM};
use crate::formula::{to_anf, AnfPolynomial, CoordinateDef, FormulaAst, NetworkSpec};

pub use poly::{PolyError, RealPolynomial};

/// Saturating ramp: 0 below -1, 1 above 1, linear in between.
#[inline]
pub fn ramp(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        0.5 * (x + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Scheme {
    W,
    Rc,
    Rd,
    RF,
    A,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::W, Scheme::Rc, Scheme::Rd, Scheme::RF, Scheme::A];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::W => "W",
            Scheme::Rc => "Rc",
            Scheme::Rd => "Rd",
            Scheme::RF => "RF",
            Scheme::A => "A",
        }
    }

    /// Whether the recursive rule set of this scheme covers `node`'s connective.
    fn accepts(self, node: &FormulaAst) -> bool {
        matches!(
            (self, node),
            (_, FormulaAst::Var(_) | FormulaAst::Const(_))
                | (Scheme::Rc | Scheme::Rd, FormulaAst::Not(_) | FormulaAst::And(_) | FormulaAst::Or(_))
                | (Scheme::RF, FormulaAst::And(_) | FormulaAst::Xor(_))
                | (Scheme::W | Scheme::A, _)
        )
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = ConversionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s)).ok_or_else(|| ConversionError::UnknownScheme(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum ConversionError {
    #[error("unknown conversion scheme `{0}` (expected W, Rc, Rd, RF or A)")]
    UnknownScheme(String),
    #[error("scheme {scheme} cannot convert f{coord}: unsupported connective in `{node}`")]
    Incompatible { scheme: Scheme, coord: usize, node: String },
    #[error("expected a state of dimension at least {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `P_i` for one coordinate.
#[derive(Debug, Clone, PartialEq)]
pub enum CoordForm {
    Poly(RealPolynomial),
    /// `P(y) = 0.5 - 0.5 cos(pi u(y))`
    Cosine(RealPolynomial),
}

#[derive(Debug, Clone)]
pub struct CoordConversion {
    form: CoordForm,
    /// For the recursive schemes, the formula the polynomial was built from.
    /// Evaluating the rules on the tree gives the same function as the
    /// expanded polynomial at a fraction of the cost and without cancellation.
    recipe: Option<FormulaAst>,
}

impl CoordConversion {
    pub fn form(&self) -> &CoordForm {
        &self.form
    }

    /// The polynomial `P_i` (or `u_i` for the cosine form).
    pub fn polynomial(&self) -> &RealPolynomial {
        match &self.form {
            CoordForm::Poly(p) | CoordForm::Cosine(p) => p,
        }
    }

    /// `P_i(y)` for `y ∈ [0,1]^n`.
    #[inline]
    pub fn eval(&self, y: &[f64]) -> f64 {
        if let Some(ast) = &self.recipe {
            return eval_rules(ast, y);
        }
        match &self.form {
            CoordForm::Poly(p) => p.eval(y),
            CoordForm::Cosine(u) => cosine(u.eval(y)),
        }
    }

    /// Value of `P_i` at a cube corner; exact for polynomial forms.
    pub fn eval_corner(&self, corner: &[bool]) -> f64 {
        match &self.form {
            CoordForm::Poly(p) => p.eval_corner(corner) as f64,
            CoordForm::Cosine(u) => cosine(u.eval_corner(corner) as f64),
        }
    }

    pub fn degree(&self) -> u32 {
        self.polynomial().total_degree()
    }
}

impl fmt::Display for CoordConversion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            CoordForm::Poly(p) => write!(f, "{p}"),
            CoordForm::Cosine(u) => write!(f, "0.5 - 0.5*cos(pi*({u}))"),
        }
    }
}

#[inline]
fn cosine(u: f64) -> f64 {
    0.5 - 0.5 * (std::f64::consts::PI * u).cos()
}

fn eval_rules(ast: &FormulaAst, y: &[f64]) -> f64 {
    match ast {
        FormulaAst::Var(j) => y[*j],
        FormulaAst::Const(c) => *c as u8 as f64,
        FormulaAst::Not(c) => 1.0 - eval_rules(c, y),
        FormulaAst::And(cs) => cs.iter().map(|c| eval_rules(c, y)).product(),
        FormulaAst::Or(cs) => {
            // x + y - xy, written as 1 - (1-x)(1-y) for stability
            1.0 - cs.iter().map(|c| 1.0 - eval_rules(c, y)).product::<f64>()
        }
        FormulaAst::Xor(cs) => cs.iter().map(|c| eval_rules(c, y)).fold(0.0, |a, b| a + b - 2.0 * a * b),
    }
}

/// Multilinear interpolant of a coordinate column: the coefficient of
/// `∏_{j∈J} x_j` is `Σ_{T⊆J} (-1)^{|J|-|T|} f(T)`.
pub fn convert_w(n: usize, column: &[bool]) -> RealPolynomial {
    assert_eq!(column.len(), 1usize << n, "column length must be 2^n");
    let mut c: Vec<i128> = column.iter().map(|&b| b as i128).collect();
    for bit in 0..n {
        let step = 1usize << bit;
        for s in 0..c.len() {
            if s & step != 0 {
                c[s] -= c[s ^ step];
            }
        }
    }
    let terms = c.into_iter().enumerate().filter(|(_, v)| *v != 0).map(|(mask, v)| {
        let e: Vec<u32> = (0..n).map(|j| (mask >> (n - 1 - j) & 1) as u32).collect();
        (e, v)
    });
    RealPolynomial::from_terms(n, terms).expect("exponent vectors have length n")
}

/// Structural recursion with AND → product, NOT → `1 - x`, OR → `x + y - xy`
/// and XOR → `x + y - 2xy`. `mode` restricts the connectives accepted.
pub fn convert_recursive(n: usize, ast: &FormulaAst, mode: Scheme) -> Result<RealPolynomial, ConversionError> {
    if let Some(bad) = ast.find_node(&|node| !mode.accepts(node)) {
        return Err(ConversionError::Incompatible { scheme: mode, coord: 0, node: bad.to_string() });
    }
    expand(n, ast)
}

fn expand(n: usize, ast: &FormulaAst) -> Result<RealPolynomial, ConversionError> {
    Ok(match ast {
        FormulaAst::Var(j) => RealPolynomial::var(n, *j),
        FormulaAst::Const(c) => RealPolynomial::constant(n, *c as i128),
        FormulaAst::Not(c) => expand(n, c)?.complement()?,
        FormulaAst::And(cs) => {
            let mut acc = RealPolynomial::constant(n, 1);
            for c in cs {
                acc = acc.mul(&expand(n, c)?)?;
            }
            acc
        }
        FormulaAst::Or(cs) => {
            let mut acc = RealPolynomial::zero(n);
            for c in cs {
                let p = expand(n, c)?;
                acc = acc.add(&p)?.sub(&acc.mul(&p)?)?;
            }
            acc
        }
        FormulaAst::Xor(cs) => {
            let mut acc = RealPolynomial::zero(n);
            for c in cs {
                let p = expand(n, c)?;
                acc = acc.add(&p)?.sub(&acc.mul(&p)?.scale(2)?)?;
            }
            acc
        }
    })
}

/// `u(x) = Σ_ℓ ∏_{j∈J_ℓ} x_j` for the cosine form of the arithmetic scheme.
pub fn convert_arithmetic(anf: &AnfPolynomial) -> RealPolynomial {
    let n = anf.dim();
    let terms = anf.monomials().into_iter().map(|vars| {
        let mut e = vec![0u32; n];
        for j in vars {
            e[j] = 1;
        }
        (e, 1i128)
    });
    RealPolynomial::from_terms(n, terms).expect("exponent vectors have length n")
}

/// A conversion `Q = P ∘ L` for every coordinate of a network.
#[derive(Debug, Clone)]
pub struct ContinuousConversion {
    n: usize,
    scheme: Scheme,
    coords: Vec<CoordConversion>,
}

impl ContinuousConversion {
    /// Converts each coordinate definition with `scheme`.
    ///
    /// Table-defined coordinates go through a normal form that fits the
    /// scheme: CNF for `Rc`, DNF for `Rd`, the ANF as an XOR of ANDs for `RF`.
    pub fn build(spec: &NetworkSpec, scheme: Scheme) -> Result<Self, ConversionError> {
        let n = spec.n;
        let mut coords = Vec::with_capacity(n);
        for (i, def) in spec.coords.iter().enumerate() {
            let conv = match scheme {
                Scheme::W => CoordConversion { form: CoordForm::Poly(convert_w(n, &def.column(n))), recipe: None },
                Scheme::A => {
                    let u = convert_arithmetic(&to_anf(n, &def.column(n)));
                    CoordConversion { form: CoordForm::Cosine(u), recipe: None }
                }
                Scheme::Rc | Scheme::Rd | Scheme::RF => {
                    let ast = match def {
                        CoordinateDef::Formula(ast) => ast.clone(),
                        CoordinateDef::Table(col) => match scheme {
                            Scheme::Rc => FormulaAst::cnf(n, col),
                            Scheme::Rd => FormulaAst::dnf(n, col),
                            _ => to_anf(n, col).to_ast(),
                        },
                    };
                    let p = convert_recursive(n, &ast, scheme).map_err(|e| match e {
                        ConversionError::Incompatible { scheme, node, .. } => ConversionError::Incompatible { scheme, coord: i + 1, node },
                        other => other,
                    })?;
                    CoordConversion { form: CoordForm::Poly(p), recipe: Some(ast) }
                }
            };
            coords.push(conv);
        }
        Ok(ContinuousConversion { n, scheme, coords })
    }

    pub fn from_function(f: &BooleanFunction, scheme: Scheme) -> Result<Self, ConversionError> {
        Self::build(&NetworkSpec::from_function(f), scheme)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn coords(&self) -> &[CoordConversion] {
        &self.coords
    }

    /// `Q(x)` using the first `n` entries of `x`.
    pub fn evaluate_q(&self, x: &[f64]) -> Result<Vec<f64>, ConversionError> {
        if x.len() < self.n {
            return Err(ConversionError::DimensionMismatch { expected: self.n, actual: x.len() });
        }
        let mut out = vec![0.0; self.n];
        self.q_into(x, &mut out);
        Ok(out)
    }

    /// Allocation-free `Q(x)`; `x` must have at least `n` entries.
    #[inline]
    pub fn q_into(&self, x: &[f64], out: &mut [f64]) {
        let mut y = [0.0f64; MAX_TABLE_DIM];
        for (yj, &xj) in y.iter_mut().zip(&x[..self.n]) {
            *yj = ramp(xj);
        }
        self.p_into(&y[..self.n], out);
    }

    /// `P(y)` for `y ∈ [0,1]^n`.
    #[inline]
    pub fn p_into(&self, y: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.coords) {
            *o = c.eval(y);
        }
    }

    /// Compares `P` with `f` on every corner of the cube.
    pub fn corner_check(&self, f: &BooleanFunction) -> CornerCheck {
        let mut max_error: f64 = 0.0;
        let mut mismatches = Vec::new();
        for s in f.states() {
            let corner: Vec<bool> = (0..self.n).map(|j| s.get(j)).collect();
            let fs = f.step(&s).expect("dimension checked");
            for (i, c) in self.coords.iter().enumerate() {
                let want = fs.get(i) as u8 as f64;
                let err = (c.eval_corner(&corner) - want).abs();
                max_error = max_error.max(err);
                let tol = if matches!(c.form, CoordForm::Cosine(_)) { CORNER_TOL } else { 0.0 };
                if err > tol {
                    mismatches.push(CornerMismatch { state: s, coord: i + 1, error: err });
                }
            }
        }
        CornerCheck { passed: mismatches.is_empty(), max_error, mismatches }
    }

    pub fn report(&self, f: &BooleanFunction) -> ConversionReport {
        ConversionReport {
            scheme: self.scheme,
            n: self.n,
            coords: self
                .coords
                .iter()
                .enumerate()
                .map(|(i, c)| CoordReport {
                    index: i + 1,
                    form: match c.form {
                        CoordForm::Poly(_) => "polynomial",
                        CoordForm::Cosine(_) => "cosine",
                    },
                    degree: c.degree(),
                    degree_per_var: c.polynomial().degree_per_var(),
                    terms: c.polynomial().num_terms(),
                    text: c.to_string(),
                })
                .collect(),
            corner_check: self.corner_check(f),
        }
    }
}

/// Corner tolerance for the cosine form.
pub const CORNER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct CornerMismatch {
    pub state: BooleanState,
    pub coord: usize,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CornerCheck {
    pub passed: bool,
    pub max_error: f64,
    pub mismatches: Vec<CornerMismatch>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoordReport {
    pub index: usize,
    pub form: &'static str,
    pub degree: u32,
    pub degree_per_var: Vec<u32>,
    pub terms: usize,
    pub text: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConversionReport {
    pub scheme: Scheme,
    pub n: usize,
    pub coords: Vec<CoordReport>,
    pub corner_check: CornerCheck,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn conv(n: usize, formulas: &[&str], scheme: Scheme) -> ContinuousConversion {
        ContinuousConversion::build(&NetworkSpec::from_formulas(n, formulas).unwrap(), scheme).unwrap()
    }

    #[test]
    fn ramp_branches() {
        assert_eq!(ramp(-1.0), 0.0);
        assert_eq!(ramp(1.0), 1.0);
        assert_eq!(ramp(0.0), 0.5);
        assert_eq!(ramp(-3.0), 0.0);
        assert_eq!(ramp(2.5), 1.0);
    }

    #[test]
    fn w_examples() {
        let and = parse_formula("s1 & s2", 2).unwrap().column(2);
        assert_eq!(convert_w(2, &and).to_string(), "x1*x2");
        assert!(convert_w(2, &[false; 4]).is_zero());
        let xor = parse_formula("s1 ^ s2", 2).unwrap().column(2);
        assert_eq!(convert_w(2, &xor).to_string(), "x1 - 2*x1*x2 + x2");
    }

    #[test]
    fn w_matches_explicit_corner_expansion() {
        // Σ_s f(s) ∏ x^s (1-x)^(1-s), expanded term by term
        let n = 3;
        let col: Vec<bool> = (0..8).map(|r| [1, 0, 0, 1, 1, 1, 0, 1][r] == 1).collect();
        let mut expected = RealPolynomial::zero(n);
        for (row, &v) in col.iter().enumerate() {
            if !v {
                continue;
            }
            let s = BooleanState::from_index(n, row as u64);
            let mut term = RealPolynomial::constant(n, 1);
            for j in 0..n {
                let x = RealPolynomial::var(n, j);
                term = term.mul(&if s.get(j) { x } else { x.complement().unwrap() }).unwrap();
            }
            expected = expected.add(&term).unwrap();
        }
        assert_eq!(convert_w(n, &col), expected);
    }

    #[test]
    fn recursive_examples() {
        let contra = parse_formula("s1 & !s1", 1).unwrap();
        assert_eq!(convert_recursive(1, &contra, Scheme::Rc).unwrap().to_string(), "x1 - x1^2");
        let quartic = parse_formula("(s1&s1&s1&s1) & !(s1&s1&s1&s1)", 1).unwrap();
        assert_eq!(convert_recursive(1, &quartic, Scheme::Rd).unwrap().to_string(), "x1^4 - x1^8");
        let xor = parse_formula("s1 ^ s2", 2).unwrap();
        assert_eq!(convert_recursive(2, &xor, Scheme::RF).unwrap().to_string(), "x1 - 2*x1*x2 + x2");
        let or = parse_formula("s1 | s2", 2).unwrap();
        assert_eq!(convert_recursive(2, &or, Scheme::Rc).unwrap().to_string(), "x1 - x1*x2 + x2");
    }

    #[test]
    fn recursive_schemes_reject_foreign_connectives() {
        let xor = parse_formula("s1 ^ s2", 2).unwrap();
        assert!(matches!(convert_recursive(2, &xor, Scheme::Rc), Err(ConversionError::Incompatible { .. })));
        let not = parse_formula("!s1 & s2", 2).unwrap();
        assert!(matches!(convert_recursive(2, &not, Scheme::RF), Err(ConversionError::Incompatible { .. })));
        let spec = NetworkSpec::from_formulas(2, &["s1", "s1 | s2"]).unwrap();
        match ContinuousConversion::build(&spec, Scheme::RF) {
            Err(ConversionError::Incompatible { coord, .. }) => assert_eq!(coord, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn arithmetic_cosine_form() {
        let c = conv(2, &["s1 ^ s2", "s1"], Scheme::A);
        let q = &c.coords()[0];
        assert_eq!(q.to_string(), "0.5 - 0.5*cos(pi*(x1 + x2))");
        assert!(q.eval(&[1.0, 1.0]).abs() < 1e-15);
        assert!((q.eval(&[1.0, 0.0]) - 1.0).abs() < 1e-15);
        // interior extremum with no Boolean counterpart
        assert!((q.eval(&[0.5, 0.5]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn evaluate_q_examples() {
        let cn = conv(2, &["!s2", "s1"], Scheme::W);
        assert_eq!(cn.evaluate_q(&[2.0, 2.0]).unwrap(), vec![0.0, 1.0]);
        let and = conv(2, &["s1 & s2", "s1"], Scheme::W);
        assert_eq!(and.evaluate_q(&[0.0, 3.0]).unwrap()[0], 0.5);
        assert!(matches!(cn.evaluate_q(&[1.0]), Err(ConversionError::DimensionMismatch { .. })));
    }

    #[test]
    fn tree_and_expanded_forms_agree() {
        let spec = NetworkSpec::from_formulas(3, &["(s1 | !s2) & (s3 | s1 | !s1)", "!(s1 & s2) | s3", "s2"]).unwrap();
        let c = ContinuousConversion::build(&spec, Scheme::Rc).unwrap();
        for k in 0..50 {
            let y = [(k as f64 * 0.137) % 1.0, (k as f64 * 0.311) % 1.0, (k as f64 * 0.071) % 1.0];
            for coord in c.coords() {
                assert!((coord.eval(&y) - coord.polynomial().eval(&y)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn table_inputs_use_normal_forms() {
        let f = BooleanFunction::from_pairs(2, &[("00", "10"), ("01", "00"), ("10", "11"), ("11", "01")]).unwrap();
        for scheme in Scheme::ALL {
            let c = ContinuousConversion::from_function(&f, scheme).unwrap();
            let check = c.corner_check(&f);
            assert!(check.passed, "{scheme}: {check:?}");
        }
        assert_eq!("rf".parse::<Scheme>().unwrap(), Scheme::RF);
        assert!("Q".parse::<Scheme>().is_err());
    }
}
