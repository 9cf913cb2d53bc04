//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! or    := xor ('|' xor)*
//! xor   := and ('^' and)*
//! and   := unary ('&' unary)*
//! unary := '!' unary | atom
//! atom  := 's' digits | '0' | '1' | '(' or ')'
//! ```
//!
//! Chains of one operator become a single n-ary node; parentheses always
//! start a new node, so `(a & b) & c` and `a & b & c` parse differently.

use thiserror::Error;

use super::FormulaAst;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("undefined variable s{index} at byte {pos} (dimension is {n})")]
    UndefinedVariable { pos: usize, index: usize, n: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. } | ParseError::UndefinedVariable { pos, .. } => *pos,
        }
    }
}

/// Parses `text` as a formula over `s1..sn`.
pub fn parse_formula(text: &str, n: usize) -> Result<FormulaAst, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, n };
    let ast = p.or_expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(ast)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ParseError {
        ParseError::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn chain(
        &mut self,
        op: u8,
        next: fn(&mut Self) -> Result<FormulaAst, ParseError>,
        build: fn(Vec<FormulaAst>) -> FormulaAst,
    ) -> Result<FormulaAst, ParseError> {
        let first = next(self)?;
        if self.peek() != Some(op) {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat(op) {
            items.push(next(self)?);
        }
        Ok(build(items))
    }

    fn or_expr(&mut self) -> Result<FormulaAst, ParseError> {
        self.chain(b'|', Self::xor_expr, FormulaAst::Or)
    }

    fn xor_expr(&mut self) -> Result<FormulaAst, ParseError> {
        self.chain(b'^', Self::and_expr, FormulaAst::Xor)
    }

    fn and_expr(&mut self) -> Result<FormulaAst, ParseError> {
        self.chain(b'&', Self::unary, FormulaAst::And)
    }

    fn unary(&mut self) -> Result<FormulaAst, ParseError> {
        if self.eat(b'!') {
            return Ok(FormulaAst::Not(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<FormulaAst, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.or_expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(b'0') => {
                self.pos += 1;
                Ok(FormulaAst::Const(false))
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(FormulaAst::Const(true))
            }
            Some(b's') => {
                let start = self.pos;
                self.pos += 1;
                let digits_start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if self.pos == digits_start {
                    return Err(self.error("expected digits after 's'"));
                }
                let digits = std::str::from_utf8(&self.src[digits_start..self.pos]).expect("ascii digits");
                let index: usize = digits.parse().map_err(|_| ParseError::Syntax { pos: start, msg: "variable index too large".into() })?;
                if index == 0 || index > self.n {
                    return Err(ParseError::UndefinedVariable { pos: start, index, n: self.n });
                }
                Ok(FormulaAst::Var(index - 1))
            }
            Some(_) => Err(self.error("expected a variable, constant or '('")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use FormulaAst::*;

    #[test]
    fn grammar_examples() {
        assert_eq!(parse_formula("s1 & s3", 3).unwrap(), And(vec![Var(0), Var(2)]));
        assert_eq!(parse_formula("!s2", 2).unwrap(), Not(Box::new(Var(1))));
        assert_eq!(parse_formula("s1 ^ s2 ^ (s1 & s3)", 3).unwrap(), Xor(vec![Var(0), Var(1), And(vec![Var(0), Var(2)])]));
    }

    #[test]
    fn precedence_and_associativity() {
        // ! > & > ^ > |
        assert_eq!(
            parse_formula("s1 | s2 ^ s3 & !s1", 3).unwrap(),
            Or(vec![Var(0), Xor(vec![Var(1), And(vec![Var(2), Not(Box::new(Var(0)))])])])
        );
        assert_eq!(parse_formula("!!s1", 1).unwrap(), Not(Box::new(Not(Box::new(Var(0))))));
        assert_eq!(parse_formula(" 1 & 0 ", 1).unwrap(), And(vec![Const(true), Const(false)]));
        assert_eq!(parse_formula("(s1 & s1) & s1", 1).unwrap(), And(vec![And(vec![Var(0), Var(0)]), Var(0)]));
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse_formula("s1 & ", 1).unwrap_err().position(), 5);
        assert!(matches!(parse_formula("s1 & s4", 3), Err(ParseError::UndefinedVariable { index: 4, pos: 5, .. })));
        assert!(matches!(parse_formula("s0", 3), Err(ParseError::UndefinedVariable { index: 0, .. })));
        assert!(matches!(parse_formula("(s1", 1), Err(ParseError::Syntax { pos: 3, .. })));
        assert!(matches!(parse_formula("s1 s1", 1), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_formula("s", 1), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_formula("s1 + s1", 1), Err(ParseError::Syntax { pos: 3, .. })));
    }
}
