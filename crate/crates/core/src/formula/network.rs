//! Network description files.
//!
//! ```text
//! # copy-negation
//! n=2
//! f1 = !s2
//! f2 = table:0011
//! gamma = 1, 1
//! ```

use std::fmt;

use thiserror::Error;

use super::{parse_formula, FormulaAst, ParseError};
use crate::boolean::{BooleanError, BooleanFunction};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Formula {
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("coordinate f{0} is not defined")]
    Missing(usize),
    #[error(transparent)]
    Boolean(#[from] BooleanError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoordinateDef {
    Formula(FormulaAst),
    /// Output column over all inputs in lexicographic order.
    Table(Vec<bool>),
}

impl CoordinateDef {
    pub fn column(&self, n: usize) -> Vec<bool> {
        match self {
            CoordinateDef::Formula(ast) => ast.column(n),
            CoordinateDef::Table(col) => col.clone(),
        }
    }
}

/// One definition per coordinate plus optional default rates.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub n: usize,
    pub coords: Vec<CoordinateDef>,
    pub gamma: Option<Vec<f64>>,
}

impl NetworkSpec {
    /// Builds a spec from formula strings `f_1..f_n`.
    pub fn from_formulas(n: usize, formulas: &[&str]) -> Result<Self, NetworkError> {
        if formulas.len() != n {
            return Err(NetworkError::Missing(formulas.len().min(n) + 1));
        }
        let coords = formulas
            .iter()
            .enumerate()
            .map(|(i, text)| {
                parse_formula(text, n).map(CoordinateDef::Formula).map_err(|source| NetworkError::Formula { line: i + 1, source })
            })
            .collect::<Result<_, _>>()?;
        Ok(NetworkSpec { n, coords, gamma: None })
    }

    /// Wraps an existing truth table, one column per coordinate.
    pub fn from_function(f: &BooleanFunction) -> Self {
        let n = f.dim();
        NetworkSpec { n, coords: (0..n).map(|i| CoordinateDef::Table(f.column(i))).collect(), gamma: None }
    }

    /// Evaluates every coordinate on all `2^n` inputs.
    pub fn lower_to_table(&self) -> Result<BooleanFunction, NetworkError> {
        let columns: Vec<Vec<bool>> = self.coords.iter().map(|c| c.column(self.n)).collect();
        Ok(BooleanFunction::from_columns(&columns)?)
    }

    pub fn parse(text: &str) -> Result<Self, NetworkError> {
        let mut n: Option<usize> = None;
        let mut raw: Vec<(usize, usize, String)> = Vec::new();
        let mut gamma = None;
        for (k, line) in text.lines().enumerate() {
            let lno = k + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |msg: &str| NetworkError::Syntax { line: lno, msg: msg.to_string() };
            let (key, value) = line.split_once('=').ok_or_else(|| syntax("expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "n" {
                if n.is_some() {
                    return Err(syntax("dimension given twice"));
                }
                let dim: usize = value.parse().map_err(|_| syntax("bad dimension"))?;
                if dim == 0 || dim > crate::boolean::MAX_TABLE_DIM {
                    return Err(syntax("dimension out of range"));
                }
                n = Some(dim);
            } else if key == "gamma" {
                let values = value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| syntax("bad gamma list"))?;
                if values.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
                    return Err(syntax("gamma entries must be positive"));
                }
                gamma = Some(values);
            } else if let Some(idx) = key.strip_prefix('f') {
                let i: usize = idx.parse().map_err(|_| syntax("bad coordinate name"))?;
                raw.push((lno, i, value.to_string()));
            } else {
                return Err(syntax(&format!("unknown key `{key}`")));
            }
        }
        let n = n.ok_or(NetworkError::Syntax { line: 0, msg: "missing `n=<dim>` line".into() })?;
        let mut coords: Vec<Option<CoordinateDef>> = vec![None; n];
        for (lno, i, value) in raw {
            if i == 0 || i > n {
                return Err(NetworkError::Syntax { line: lno, msg: format!("coordinate f{i} outside 1..={n}") });
            }
            let def = if let Some(bits) = value.strip_prefix("table:") {
                let bits = bits.trim();
                if bits.len() != 1 << n {
                    return Err(NetworkError::Syntax { line: lno, msg: format!("table needs {} bits, got {}", 1 << n, bits.len()) });
                }
                let col = bits
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        _ => Err(NetworkError::Syntax { line: lno, msg: "table bits must be 0/1".into() }),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                CoordinateDef::Table(col)
            } else {
                CoordinateDef::Formula(parse_formula(&value, n).map_err(|source| NetworkError::Formula { line: lno, source })?)
            };
            if coords[i - 1].replace(def).is_some() {
                return Err(NetworkError::Syntax { line: lno, msg: format!("f{i} defined twice") });
            }
        }
        let coords = coords.into_iter().enumerate().map(|(i, c)| c.ok_or(NetworkError::Missing(i + 1))).collect::<Result<_, _>>()?;
        Ok(NetworkSpec { n, coords, gamma })
    }
}

impl fmt::Display for NetworkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={}", self.n)?;
        for (i, c) in self.coords.iter().enumerate() {
            match c {
                CoordinateDef::Formula(ast) => writeln!(f, "f{} = {}", i + 1, ast)?,
                CoordinateDef::Table(col) => {
                    let bits: String = col.iter().map(|&b| if b { '1' } else { '0' }).collect();
                    writeln!(f, "f{} = table:{}", i + 1, bits)?
                }
            }
        }
        if let Some(g) = &self.gamma {
            let list: Vec<String> = g.iter().map(|v| v.to_string()).collect();
            writeln!(f, "gamma = {}", list.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::BooleanState;

    fn copy_negation_table() -> BooleanFunction {
        BooleanFunction::from_fn(2, |s| BooleanState::from_bits(&[!s.get(1), s.get(0)])).unwrap()
    }

    #[test]
    fn lower_examples() {
        let spec = NetworkSpec::from_formulas(2, &["!s2", "s1"]).unwrap();
        assert_eq!(spec.lower_to_table().unwrap(), copy_negation_table());

        let contra = NetworkSpec::from_formulas(1, &["s1 & !s1"]).unwrap();
        assert_eq!(contra.lower_to_table().unwrap(), BooleanFunction::constant(1, BooleanState::zeros(1)).unwrap());

        let prod = NetworkSpec::from_formulas(4, &["!s2", "s1", "!s4", "s3"]).unwrap();
        let cn = copy_negation_table();
        assert_eq!(prod.lower_to_table().unwrap(), cn.product(&cn).unwrap());
    }

    #[test]
    fn parses_file_format() {
        let text = "# copy-negation\nn=2\nf1 = !s2   # negate\nf2 = table:0011\ngamma = 1, 2.5\n";
        let spec = NetworkSpec::parse(text).unwrap();
        assert_eq!(spec.gamma, Some(vec![1.0, 2.5]));
        assert_eq!(spec.lower_to_table().unwrap(), copy_negation_table());
        let again = NetworkSpec::parse(&spec.to_string()).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(NetworkSpec::parse("n=2\nf1 = s1\n"), Err(NetworkError::Missing(2))));
        assert!(matches!(NetworkSpec::parse("n=1\nf1 = s1\nf1 = s1\n"), Err(NetworkError::Syntax { line: 3, .. })));
        assert!(matches!(NetworkSpec::parse("n=1\nf1 = table:011\n"), Err(NetworkError::Syntax { line: 2, .. })));
        assert!(matches!(
            NetworkSpec::parse("n=1\nf1 = s2\n"),
            Err(NetworkError::Formula { line: 2, source: ParseError::UndefinedVariable { .. } })
        ));
        assert!(matches!(NetworkSpec::parse("n=1\nf1 = s1\ngamma = 1, -1\n"), Err(NetworkError::Syntax { .. })));
        assert!(NetworkSpec::parse("f1 = s1\n").is_err());
    }
}
