//! Boolean formulas over the variables `s1..sn`, the network description
//! format built on them, and their algebraic normal form over F2.

mod anf;
mod network;
mod parser;

use std::fmt;

use crate::boolean::BooleanState;

pub use anf::{to_anf, AnfPolynomial};
pub use network::{CoordinateDef, NetworkError, NetworkSpec};
pub use parser::{parse_formula, ParseError};

/// Formula syntax tree. Variable indices are 0-based (`Var(0)` prints as `s1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormulaAst {
    Var(usize),
    Const(bool),
    Not(Box<FormulaAst>),
    And(Vec<FormulaAst>),
    Or(Vec<FormulaAst>),
    Xor(Vec<FormulaAst>),
}

impl FormulaAst {
    pub fn var(i: usize) -> Self {
        FormulaAst::Var(i)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(child: FormulaAst) -> Self {
        FormulaAst::Not(Box::new(child))
    }

    /// Conjunction that collapses to the child or `1` for fewer than two operands.
    pub fn and_of(mut children: Vec<FormulaAst>) -> Self {
        match children.len() {
            0 => FormulaAst::Const(true),
            1 => children.pop().unwrap(),
            _ => FormulaAst::And(children),
        }
    }

    pub fn or_of(mut children: Vec<FormulaAst>) -> Self {
        match children.len() {
            0 => FormulaAst::Const(false),
            1 => children.pop().unwrap(),
            _ => FormulaAst::Or(children),
        }
    }

    pub fn xor_of(mut children: Vec<FormulaAst>) -> Self {
        match children.len() {
            0 => FormulaAst::Const(false),
            1 => children.pop().unwrap(),
            _ => FormulaAst::Xor(children),
        }
    }

    pub fn eval(&self, s: &BooleanState) -> bool {
        match self {
            FormulaAst::Var(i) => s.get(*i),
            FormulaAst::Const(c) => *c,
            FormulaAst::Not(c) => !c.eval(s),
            FormulaAst::And(cs) => cs.iter().all(|c| c.eval(s)),
            FormulaAst::Or(cs) => cs.iter().any(|c| c.eval(s)),
            FormulaAst::Xor(cs) => cs.iter().fold(false, |acc, c| acc ^ c.eval(s)),
        }
    }

    /// Output column over all `2^n` inputs in lexicographic order.
    pub fn column(&self, n: usize) -> Vec<bool> {
        (0..1u64 << n).map(|i| self.eval(&BooleanState::from_index(n, i))).collect()
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            FormulaAst::Var(i) => Some(*i),
            FormulaAst::Const(_) => None,
            FormulaAst::Not(c) => c.max_var(),
            FormulaAst::And(cs) | FormulaAst::Or(cs) | FormulaAst::Xor(cs) => cs.iter().filter_map(FormulaAst::max_var).max(),
        }
    }

    /// First node in pre-order satisfying `pred`; used to vet formulas against
    /// the connective set a conversion scheme supports.
    pub fn find_node(&self, pred: &dyn Fn(&FormulaAst) -> bool) -> Option<&FormulaAst> {
        if pred(self) {
            return Some(self);
        }
        match self {
            FormulaAst::Not(c) => c.find_node(pred),
            FormulaAst::And(cs) | FormulaAst::Or(cs) | FormulaAst::Xor(cs) => cs.iter().find_map(|c| c.find_node(pred)),
            _ => None,
        }
    }

    /// Disjunction of minterms for a coordinate column.
    pub fn dnf(n: usize, column: &[bool]) -> FormulaAst {
        let terms = column
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(|(row, _)| {
                let s = BooleanState::from_index(n, row as u64);
                FormulaAst::and_of(
                    (0..n).map(|j| if s.get(j) { FormulaAst::Var(j) } else { FormulaAst::not(FormulaAst::Var(j)) }).collect(),
                )
            })
            .collect();
        FormulaAst::or_of(terms)
    }

    /// Conjunction of maxterm clauses for a coordinate column.
    pub fn cnf(n: usize, column: &[bool]) -> FormulaAst {
        let clauses = column
            .iter()
            .enumerate()
            .filter(|(_, &v)| !v)
            .map(|(row, _)| {
                let s = BooleanState::from_index(n, row as u64);
                FormulaAst::or_of((0..n).map(|j| if s.get(j) { FormulaAst::not(FormulaAst::Var(j)) } else { FormulaAst::Var(j) }).collect())
            })
            .collect();
        FormulaAst::and_of(clauses)
    }

    fn is_atomic(&self) -> bool {
        matches!(self, FormulaAst::Var(_) | FormulaAst::Const(_) | FormulaAst::Not(_))
    }
}

impl fmt::Display for FormulaAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, cs: &[FormulaAst], op: &str| -> fmt::Result {
            for (k, c) in cs.iter().enumerate() {
                if k > 0 {
                    write!(f, " {op} ")?;
                }
                if c.is_atomic() {
                    write!(f, "{c}")?;
                } else {
                    write!(f, "({c})")?;
                }
            }
            Ok(())
        };
        match self {
            FormulaAst::Var(i) => write!(f, "s{}", i + 1),
            FormulaAst::Const(c) => write!(f, "{}", *c as u8),
            FormulaAst::Not(c) if c.is_atomic() => write!(f, "!{c}"),
            FormulaAst::Not(c) => write!(f, "!({c})"),
            FormulaAst::And(cs) => join(f, cs, "&"),
            FormulaAst::Or(cs) => join(f, cs, "|"),
            FormulaAst::Xor(cs) => join(f, cs, "^"),
        }
    }
}
