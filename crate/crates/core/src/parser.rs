//! Text form of polynomials.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | factor
//! factor := base ('^' uint)?
//! base   := 'z' | 'zbar' | 'conj' '(' 'z' ')' | number | '(' expr ')'
//! number := real | '(' ['-'] real ('+' | '-') real 'i' ')'
//! ```
//!
//! Multiplication is always explicit: `2z` is rejected. The imaginary unit
//! only appears inside parenthesized complex literals such as `(0.5-2i)`.
//!
//! [`format`] prints terms ordered by total degree, then by the exponent of
//! `zbar`, and its output parses back to the identical coefficient matrix.

use std::fmt;

use thiserror::Error;

use crate::linalg::Complex;
use crate::poly::{Poly, MAX_DEGREE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    ExponentOverflow(String),
    NonIntegerExponent(String),
    DegreeOverflow(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: Pos,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseErrorKind::ExponentOverflow(text) => {
                write!(f, "exponent {text} exceeds the maximum degree {MAX_DEGREE}")
            }
            ParseErrorKind::NonIntegerExponent(text) => {
                write!(f, "exponent must be a nonnegative integer, found {text}")
            }
            ParseErrorKind::DegreeOverflow(d) => {
                write!(f, "expression reaches degree {d}, above the maximum {MAX_DEGREE}")
            }
        }
    }
}

fn syntax<T>(pos: Pos, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { kind: ParseErrorKind::Syntax(msg.into()), pos })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(s) | Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Caret => f.write_str("'^'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let pos = Pos { line, column };
        let start = i;
        let tok = match ch {
            '\n' => {
                line += 1;
                column = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                column += 1;
                continue;
            }
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                i = j - 1;
                Tok::Num(chars[start..j].iter().collect())
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                i = j - 1;
                Tok::Ident(chars[start..j].iter().collect())
            }
            other => return syntax(pos, format!("unexpected character '{other}'")),
        };
        i += 1;
        column += i - start;
        out.push((tok, pos));
    }
    out.push((Tok::End, Pos { line, column }));
    Ok(out)
}

/// Parsed expression tree, prior to expansion.
#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Sum(Box<Expr>, Box<Expr>),
    Difference(Box<Expr>, Box<Expr>),
    Product(Box<Expr>, Box<Expr>),
    Power(Box<Expr>, u32),
    Negation(Box<Expr>),
    Literal(Complex),
    Z,
    Zbar,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

impl Expr {
    /// Expands the tree into a coefficient matrix.
    pub fn eval(&self) -> Result<Poly, ParseError> {
        let overflow = |e: crate::error::Error| {
            let degree = match e {
                crate::error::Error::DegreeOverflow { degree, .. } => degree,
                _ => MAX_DEGREE + 1,
            };
            ParseError { kind: ParseErrorKind::DegreeOverflow(degree), pos: self.pos }
        };
        Ok(match &self.kind {
            ExprKind::Sum(a, b) => &a.eval()? + &b.eval()?,
            ExprKind::Difference(a, b) => &a.eval()? - &b.eval()?,
            ExprKind::Product(a, b) => a.eval()?.mul(&b.eval()?).map_err(overflow)?,
            ExprKind::Power(a, e) => a.eval()?.pow(*e).map_err(overflow)?,
            ExprKind::Negation(a) => -&a.eval()?,
            ExprKind::Literal(c) => Poly::constant(*c),
            ExprKind::Z => Poly::z(),
            ExprKind::Zbar => Poly::zbar(),
        })
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.at + offset).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        let (tok, pos) = self.bump();
        if tok == want {
            Ok(())
        } else {
            syntax(pos, format!("expected {want}, found {tok}"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = if *self.peek() == Tok::Minus {
            let pos = self.bump().1;
            let t = self.term()?;
            Expr { kind: ExprKind::Negation(Box::new(t)), pos }
        } else {
            self.term()?
        };
        loop {
            let pos = self.pos();
            let kind = match self.peek() {
                Tok::Plus => ExprKind::Sum as fn(Box<Expr>, Box<Expr>) -> ExprKind,
                Tok::Minus => ExprKind::Difference,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr { kind: kind(Box::new(lhs), Box::new(rhs)), pos };
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    let pos = self.bump().1;
                    let rhs = self.unary()?;
                    lhs = Expr { kind: ExprKind::Product(Box::new(lhs), Box::new(rhs)), pos };
                }
                Tok::Num(_) | Tok::Ident(_) | Tok::LParen => {
                    return syntax(self.pos(), format!("expected '*' before {}", self.peek()));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            let pos = self.bump().1;
            let inner = self.unary()?;
            return Ok(Expr { kind: ExprKind::Negation(Box::new(inner)), pos });
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let pos = self.bump().1;
        let (tok, epos) = self.bump();
        let exponent = match tok {
            Tok::Num(text) => {
                if !text.chars().all(|c| c.is_ascii_digit()) {
                    return Err(ParseError { kind: ParseErrorKind::NonIntegerExponent(text), pos: epos });
                }
                match text.parse::<u32>() {
                    Ok(e) if e as usize <= MAX_DEGREE => e,
                    _ => return Err(ParseError { kind: ParseErrorKind::ExponentOverflow(text), pos: epos }),
                }
            }
            Tok::Minus => return Err(ParseError { kind: ParseErrorKind::NonIntegerExponent("a negative value".into()), pos: epos }),
            other => return syntax(epos, format!("expected an exponent after '^', found {other}")),
        };
        if *self.peek() == Tok::Caret {
            return syntax(self.pos(), "chained exponents need parentheses");
        }
        Ok(Expr { kind: ExprKind::Power(Box::new(base), exponent), pos })
    }

    fn real(&mut self) -> Result<f64, ParseError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(text) => match text.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => syntax(pos, format!("invalid number '{text}'")),
            },
            other => syntax(pos, format!("expected a number, found {other}")),
        }
    }

    /// `'(' ['-'] real ('+'|'-') real 'i' ')'`, detected by lookahead.
    fn looks_like_complex_literal(&self) -> bool {
        let off = usize::from(*self.peek_at(1) == Tok::Minus);
        matches!(self.peek_at(1 + off), Tok::Num(_))
            && matches!(self.peek_at(2 + off), Tok::Plus | Tok::Minus)
            && matches!(self.peek_at(3 + off), Tok::Num(_))
            && *self.peek_at(4 + off) == Tok::Ident("i".into())
            && *self.peek_at(5 + off) == Tok::RParen
    }

    fn complex_literal(&mut self) -> Result<Complex, ParseError> {
        self.expect(Tok::LParen)?;
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let re = self.real()?;
        let minus = self.bump().0 == Tok::Minus;
        let im = self.real()?;
        self.bump();
        self.expect(Tok::RParen)?;
        Ok(Complex::new(if negative { -re } else { re }, if minus { -im } else { im }))
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Ident(name) => match name.as_str() {
                "z" => {
                    self.bump();
                    ExprKind::Z
                }
                "zbar" => {
                    self.bump();
                    ExprKind::Zbar
                }
                "conj" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let (tok, p) = self.bump();
                    if tok != Tok::Ident("z".into()) {
                        return syntax(p, format!("conj() only applies to z, found {tok}"));
                    }
                    self.expect(Tok::RParen)?;
                    ExprKind::Zbar
                }
                "i" => return syntax(pos, "the imaginary unit is only allowed inside a literal like (0+1i)"),
                other => return syntax(pos, format!("unknown identifier '{other}'")),
            },
            Tok::Num(_) => ExprKind::Literal(Complex::new(self.real()?, 0.0)),
            Tok::LParen if self.looks_like_complex_literal() => ExprKind::Literal(self.complex_literal()?),
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                return Ok(inner);
            }
            other => return syntax(pos, format!("unexpected {other}")),
        };
        Ok(Expr { kind, pos })
    }
}

/// Parses an expression without expanding it.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    if *p.peek() == Tok::End {
        return syntax(p.pos(), "empty expression");
    }
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        Tok::RParen => syntax(p.pos(), "unmatched ')'"),
        other => syntax(p.pos(), format!("unexpected {other}")),
    }
}

/// Parses and expands an expression into its coefficient matrix.
pub fn parse(text: &str) -> Result<Poly, ParseError> {
    parse_expr(text)?.eval()
}

fn monomial_text(conj_exp: usize, holo_exp: usize) -> String {
    let part = |name: &str, e: usize| match e {
        0 => None,
        1 => Some(name.to_string()),
        _ => Some(format!("{name}^{e}")),
    };
    [part("z", holo_exp), part("zbar", conj_exp)].into_iter().flatten().collect::<Vec<_>>().join("*")
}

/// Canonical text of a polynomial.
pub fn format(f: &Poly) -> String {
    let d = f.deg();
    let mut keys: Vec<(usize, usize)> = Vec::new();
    for j in 0..=d {
        for k in 0..=d {
            if f.coeff(j, k) != Complex::new(0.0, 0.0) {
                keys.push((j, k));
            }
        }
    }
    if keys.is_empty() {
        return "0".into();
    }
    keys.sort_by_key(|&(j, k)| (j + k, j));

    let mut out = String::new();
    for (idx, &(j, k)) in keys.iter().enumerate() {
        let c = f.coeff(j, k);
        let mono = monomial_text(j, k);
        let (negative, coeff) = if c.im == 0.0 {
            let mag = c.re.abs();
            let text = if mono.is_empty() || mag != 1.0 { mag.to_string() } else { String::new() };
            (c.re < 0.0, text)
        } else {
            let sign = if c.im < 0.0 { '-' } else { '+' };
            (false, format!("({}{}{}i)", c.re, sign, c.im.abs()))
        };
        match (idx, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&coeff);
        if !coeff.is_empty() && !mono.is_empty() {
            out.push('*');
        }
        out.push_str(&mono);
    }
    out
}
