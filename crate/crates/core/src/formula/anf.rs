use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use super::FormulaAst;
use crate::boolean::BooleanState;

/// A polynomial over F2: the XOR of monomials `∏_{j∈J} s_j`.
///
/// Each monomial is stored as a packed variable mask in the same bit layout
/// as [`BooleanState`] (variable 0 is the most significant of `n` bits); the
/// empty mask is the constant `1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnfPolynomial {
    n: usize,
    terms: Vec<u64>,
}

impl AnfPolynomial {
    pub fn new(n: usize, mut terms: Vec<u64>) -> Self {
        terms.sort_unstable_by(|a, b| monomial_order(*a, *b));
        // duplicates cancel in F2
        let mut out: Vec<u64> = Vec::with_capacity(terms.len());
        for t in terms {
            if out.last() == Some(&t) {
                out.pop();
            } else {
                out.push(t);
            }
        }
        AnfPolynomial { n, terms: out }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Monomials as packed masks, in canonical order.
    pub fn terms(&self) -> &[u64] {
        &self.terms
    }

    /// Monomials as 0-based variable lists, in canonical order.
    pub fn monomials(&self) -> Vec<Vec<usize>> {
        self.terms.iter().map(|&m| vars_of(self.n, m)).collect()
    }

    pub fn eval(&self, s: &BooleanState) -> bool {
        self.terms.iter().filter(|&&m| s.index() & m == m).count() % 2 == 1
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|m| m.count_ones() as usize).max().unwrap_or(0)
    }

    /// The same polynomial as an XOR-of-ANDs formula.
    pub fn to_ast(&self) -> FormulaAst {
        FormulaAst::xor_of(
            self.monomials().into_iter().map(|vars| FormulaAst::and_of(vars.into_iter().map(FormulaAst::Var).collect())).collect(),
        )
    }
}

impl fmt::Display for AnfPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_ast())
    }
}

impl Serialize for AnfPolynomial {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let vars: Vec<Vec<usize>> = self.monomials().into_iter().map(|v| v.into_iter().map(|j| j + 1).collect()).collect();
        vars.serialize(serializer)
    }
}

fn vars_of(n: usize, mask: u64) -> Vec<usize> {
    (0..n).filter(|&j| mask >> (n - 1 - j) & 1 == 1).collect()
}

/// Constant first, then lexicographic on the sorted variable lists.
///
/// Both lists agree up to the lowest-index variable `j` in exactly one of
/// them. The list holding `j` is smaller unless the other has nothing past
/// `j`, in which case the other is a proper prefix.
fn monomial_order(a: u64, b: u64) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let p = 63 - (a ^ b).leading_zeros();
    let below = (1u64 << p) - 1;
    let (holder_first, other) = if a >> p & 1 == 1 { (Ordering::Less, b) } else { (Ordering::Greater, a) };
    if other & below != 0 {
        holder_first
    } else {
        holder_first.reverse()
    }
}

/// Algebraic normal form of one coordinate column via the subset-lattice
/// Möbius transform: the coefficient of `J` is `⊕_{T⊆J} f(T)`.
pub fn to_anf(n: usize, column: &[bool]) -> AnfPolynomial {
    assert_eq!(column.len(), 1usize << n, "column length must be 2^n");
    let mut coeffs: Vec<bool> = column.to_vec();
    for bit in 0..n {
        let step = 1usize << bit;
        for s in 0..coeffs.len() {
            if s & step != 0 {
                coeffs[s] ^= coeffs[s ^ step];
            }
        }
    }
    let terms = coeffs.iter().enumerate().filter(|(_, &c)| c).map(|(m, _)| m as u64).collect();
    AnfPolynomial::new(n, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn anf_of(text: &str, n: usize) -> Vec<Vec<usize>> {
        let col = parse_formula(text, n).unwrap().column(n);
        to_anf(n, &col).monomials()
    }

    #[test]
    fn bit_order_matches_list_order() {
        let n = 5;
        for a in 0..1u64 << n {
            for b in 0..1u64 << n {
                assert_eq!(monomial_order(a, b), vars_of(n, a).cmp(&vars_of(n, b)), "{a:05b} vs {b:05b}");
            }
        }
    }

    #[test]
    fn anf_examples() {
        assert_eq!(anf_of("s1 & s3", 3), vec![vec![0, 2]]);
        assert_eq!(anf_of("!s2", 2), vec![vec![], vec![1]]);
        assert_eq!(anf_of("s1 | s2", 2), vec![vec![0], vec![0, 1], vec![1]]);
        assert!(anf_of("s1 & !s1", 1).is_empty());
    }

    #[test]
    fn or_oracle_on_corners() {
        // s1 ∨ s2 = s1 ⊕ s2 ⊕ s1 s2, checked corner by corner
        let p = AnfPolynomial::new(2, vec![0b10, 0b01, 0b11]);
        for i in 0..4u64 {
            let s = BooleanState::from_index(2, i);
            assert_eq!(p.eval(&s), s.get(0) || s.get(1));
        }
    }

    #[test]
    fn duplicate_monomials_cancel() {
        let p = AnfPolynomial::new(2, vec![0b01, 0b01, 0b10]);
        assert_eq!(p.terms(), &[0b10]);
        assert_eq!(p.to_string(), "s1");
    }
}
