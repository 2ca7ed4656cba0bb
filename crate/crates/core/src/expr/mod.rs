//! Function formulas: parsing, evaluation, series expansion, and the shipped
//! corpus of test functions.
//!
//! Grammar (whitespace-insensitive, left-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | factor            // parsed as 0 - operand
//! factor := base ('^' '-'? integer)?
//! base   := number | 'x' | name '(' expr ')' | '(' expr ')'
//! number := integer | integer '.' digits | integer '/' integer
//! name   := exp | sin | cos | tan | atan | log1p | sqrt | expm1 | flatbump
//! ```
//!
//! A rational literal such as `3/4` is a single token only when written
//! without whitespace; `3 / 4` is a division.

mod corpus;
mod eval;
mod expand;
mod function;
mod parser;

pub use corpus::{corpus, corpus_lookup, CorpusEntry, UnknownEntry, EXACT_SERIES_ORDER};
pub use eval::{eval_expression, EvalError};
pub use expand::{series_expand, ExpandError, Expansion};
pub use function::SmoothFunction;
pub use parser::{parse_expression, ParseError};

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Functions callable from formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Function {
    Exp,
    Sin,
    Cos,
    Tan,
    Atan,
    Log1p,
    Sqrt,
    Expm1,
    /// `exp(-1/x^2)`, extended by 0 at the origin.
    Flatbump,
}

impl Function {
    pub const ALL: [Function; 9] = [
        Function::Exp,
        Function::Sin,
        Function::Cos,
        Function::Tan,
        Function::Atan,
        Function::Log1p,
        Function::Sqrt,
        Function::Expm1,
        Function::Flatbump,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::Exp => "exp",
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Tan => "tan",
            Function::Atan => "atan",
            Function::Log1p => "log1p",
            Function::Sqrt => "sqrt",
            Function::Expm1 => "expm1",
            Function::Flatbump => "flatbump",
        }
    }

    pub fn from_name(name: &str) -> Option<Function> {
        Function::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Parsed formula in the single variable `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExpressionNode {
    Constant(BigRational),
    Variable,
    Add(Box<ExpressionNode>, Box<ExpressionNode>),
    Sub(Box<ExpressionNode>, Box<ExpressionNode>),
    Mul(Box<ExpressionNode>, Box<ExpressionNode>),
    Div(Box<ExpressionNode>, Box<ExpressionNode>),
    /// Integer power; the exponent is always an integer constant.
    Pow(Box<ExpressionNode>, i64),
    Call(Function, Box<ExpressionNode>),
}

#[allow(clippy::should_implement_trait)]
impl ExpressionNode {
    pub fn constant(n: i64) -> Self {
        ExpressionNode::Constant(BigRational::from_integer(n.into()))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        ExpressionNode::Constant(BigRational::new(n.into(), d.into()))
    }

    pub fn add(a: Self, b: Self) -> Self {
        ExpressionNode::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Self, b: Self) -> Self {
        ExpressionNode::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Self, b: Self) -> Self {
        ExpressionNode::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Self, b: Self) -> Self {
        ExpressionNode::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Self, n: i64) -> Self {
        ExpressionNode::Pow(Box::new(a), n)
    }

    pub fn call(f: Function, a: Self) -> Self {
        ExpressionNode::Call(f, Box::new(a))
    }

    /// Polynomial `sum c_k x^k` with exact coefficients. Negative coefficients
    /// after the first term become subtractions.
    pub fn polynomial(coeffs: &[BigRational]) -> Self {
        let term = |k: usize, c: &BigRational| {
            let monomial = match k {
                0 => return ExpressionNode::Constant(c.clone()),
                1 => ExpressionNode::Variable,
                _ => ExpressionNode::pow(ExpressionNode::Variable, k as i64),
            };
            if c.is_one() {
                monomial
            } else {
                ExpressionNode::mul(ExpressionNode::Constant(c.clone()), monomial)
            }
        };
        let mut acc: Option<ExpressionNode> = None;
        for (k, c) in coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            acc = Some(match acc {
                None => term(k, c),
                Some(a) if c.is_negative() => ExpressionNode::sub(a, term(k, &-c)),
                Some(a) => ExpressionNode::add(a, term(k, c)),
            });
        }
        acc.unwrap_or_else(|| ExpressionNode::constant(0))
    }

    /// Whether the formula uses the flat primitive anywhere.
    pub fn uses_flatbump(&self) -> bool {
        match self {
            ExpressionNode::Constant(_) | ExpressionNode::Variable => false,
            ExpressionNode::Add(a, b)
            | ExpressionNode::Sub(a, b)
            | ExpressionNode::Mul(a, b)
            | ExpressionNode::Div(a, b) => a.uses_flatbump() || b.uses_flatbump(),
            ExpressionNode::Pow(a, _) => a.uses_flatbump(),
            ExpressionNode::Call(f, a) => *f == Function::Flatbump || a.uses_flatbump(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            ExpressionNode::Add(..) | ExpressionNode::Sub(..) => 1,
            ExpressionNode::Mul(..) | ExpressionNode::Div(..) => 2,
            ExpressionNode::Pow(..) => 3,
            // `3/4` reads as a literal only where a quotient would bind the same.
            ExpressionNode::Constant(c) if !c.is_integer() => 2,
            _ => 4,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let prec = self.precedence();
        let paren = prec < min_prec;
        if paren {
            f.write_str("(")?;
        }
        match self {
            ExpressionNode::Constant(c) => write!(f, "{c}")?,
            ExpressionNode::Variable => f.write_str("x")?,
            ExpressionNode::Add(a, b) => binary(f, a, " + ", b, 1)?,
            ExpressionNode::Sub(a, b) => binary(f, a, " - ", b, 1)?,
            ExpressionNode::Mul(a, b) => binary(f, a, " * ", b, 2)?,
            ExpressionNode::Div(a, b) => binary(f, a, " / ", b, 2)?,
            ExpressionNode::Pow(a, n) => {
                a.write_prec(f, 4)?;
                write!(f, "^{n}")?;
            }
            ExpressionNode::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_prec(f, 0)?;
                f.write_str(")")?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

fn binary(
    f: &mut fmt::Formatter<'_>,
    a: &ExpressionNode,
    op: &str,
    b: &ExpressionNode,
    prec: u8,
) -> fmt::Result {
    a.write_prec(f, prec)?;
    f.write_str(op)?;
    b.write_prec(f, prec + 1)
}

/// Canonical text: reparsing it yields the same tree.
impl fmt::Display for ExpressionNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}
