use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use super::{ExpressionNode, Function};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    SyntaxError {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::SyntaxError { offset, .. } | ParseError::UnknownFunction { offset, .. } => {
                *offset
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    /// Literal value and whether it was written as a bare integer.
    Number(BigRational, bool),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Invalid(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Number(v, _) => write!(f, "number `{v}`"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Invalid(c) => write!(f, "`{c}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn digits_value(s: &str) -> BigInt {
    s.parse().expect("ascii digits")
}

fn lex(text: &str) -> Vec<(Tok, usize)> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let scan_digits = |mut j: usize| {
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        j
    };
    while i < text.len() {
        let c = text[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let start = i;
        let tok = match c {
            '0'..='9' => {
                let int_end = scan_digits(i);
                let int_part = digits_value(&text[i..int_end]);
                i = int_end;
                let next_is_digit = |j: usize| j < bytes.len() && bytes[j].is_ascii_digit();
                if i < bytes.len() && bytes[i] == b'.' && next_is_digit(i + 1) {
                    let frac_end = scan_digits(i + 1);
                    let frac = &text[i + 1..frac_end];
                    let scale = num_traits::pow(BigInt::from(10), frac.len());
                    let value = BigRational::new(int_part * &scale + digits_value(frac), scale);
                    i = frac_end;
                    Tok::Number(value, false)
                } else if i < bytes.len() && bytes[i] == b'/' && next_is_digit(i + 1) {
                    let den_end = scan_digits(i + 1);
                    let den = digits_value(&text[i + 1..den_end]);
                    // A literal must mean the same as the division it spells:
                    // not in `x/2/3`, `x^3/4`, `3/4^2` or `1/2.5`.
                    let prev = out.last().map(|(t, _)| t);
                    let after = text[den_end..].trim_start().chars().next();
                    let bound = matches!(prev, Some(Tok::Slash | Tok::Caret))
                        || matches!(after, Some('^' | '.'));
                    if den.is_zero() || bound {
                        // `1/0` is left for the parser as a division by zero.
                        Tok::Number(BigRational::from_integer(int_part), true)
                    } else {
                        i = den_end;
                        Tok::Number(BigRational::new(int_part, den), false)
                    }
                } else {
                    Tok::Number(BigRational::from_integer(int_part), true)
                }
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let name = text[i..j].to_string();
                i = j;
                Tok::Ident(name)
            }
            _ => {
                i += c.len_utf8();
                match c {
                    '+' => Tok::Plus,
                    '-' | '\u{2212}' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    other => Tok::Invalid(other),
                }
            }
        };
        out.push((tok, start));
    }
    out.push((Tok::End, text.len()));
    out
}

const OPERAND: &[&str] = &["number", "`x`", "function name", "`(`", "`-`"];

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    depth: usize,
    /// The last factor already carried an exponent.
    pow_closed: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError::SyntaxError {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    /// Tokens that may follow a complete operand at the current nesting.
    fn follow_set(&self, after_factor: bool) -> Vec<&'static str> {
        let mut v = Vec::new();
        if after_factor {
            v.push("`^`");
        }
        v.extend(["`*`", "`/`", "`+`", "`-`"]);
        v.push(if self.depth > 0 {
            "`)`"
        } else {
            "end of input"
        });
        v
    }

    fn expr(&mut self) -> Result<ExpressionNode, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = ExpressionNode::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = ExpressionNode::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ExpressionNode, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = ExpressionNode::mul(lhs, self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = ExpressionNode::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<ExpressionNode, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let operand = self.unary()?;
            return Ok(ExpressionNode::sub(ExpressionNode::constant(0), operand));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<ExpressionNode, ParseError> {
        let base = self.base()?;
        self.pow_closed = false;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let exponent = match self.peek() {
            Tok::Number(v, true) => v.to_integer().to_i64(),
            _ => None,
        };
        let expected: &[&str] = if negative {
            &["integer"]
        } else {
            &["integer", "`-`"]
        };
        let Some(n) = exponent else {
            return Err(self.error(expected));
        };
        self.bump();
        self.pow_closed = true;
        Ok(ExpressionNode::pow(base, if negative { -n } else { n }))
    }

    fn base(&mut self) -> Result<ExpressionNode, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Number(v, _) => {
                self.bump();
                Ok(ExpressionNode::Constant(v))
            }
            Tok::Ident(name) if name == "x" => {
                self.bump();
                Ok(ExpressionNode::Variable)
            }
            Tok::Ident(name) => {
                self.bump();
                let Some(func) = Function::from_name(&name) else {
                    return Err(ParseError::UnknownFunction { offset, name });
                };
                if *self.peek() != Tok::LParen {
                    return Err(self.error(&["`(`"]));
                }
                self.bump();
                let arg = self.parenthesized()?;
                Ok(ExpressionNode::call(func, arg))
            }
            Tok::LParen => {
                self.bump();
                self.parenthesized()
            }
            _ => Err(self.error(OPERAND)),
        }
    }

    fn parenthesized(&mut self) -> Result<ExpressionNode, ParseError> {
        self.depth += 1;
        let inner = self.expr()?;
        if *self.peek() != Tok::RParen {
            let follow = self.follow_set(!self.pow_closed);
            return Err(self.error(&follow));
        }
        self.depth -= 1;
        self.bump();
        Ok(inner)
    }
}

/// Parses a formula in `x`; see the module docs for the grammar.
pub fn parse_expression(text: &str) -> Result<ExpressionNode, ParseError> {
    let mut p = Parser {
        toks: lex(text),
        pos: 0,
        depth: 0,
        pow_closed: false,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        let follow = p.follow_set(!p.pow_closed);
        return Err(p.error(&follow));
    }
    Ok(e)
}
