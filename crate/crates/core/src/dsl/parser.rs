//! Recursive-descent parser for the Lagrangian expression language.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' INT)?
//! atom    := NUMBER | 'i' | 't' | COORD | MOMENTUM | PARAM
//!          | FUNC '(' expr ')' | 'd' '(' NUMBER ')' | 'rd' '(' NUMBER ',' expr ')'
//!          | '(' expr ')'
//! COORD   := 'q' DIGITS | 'q_half'
//! MOMENTUM:= 'p' DIGITS
//! FUNC    := 'sin' | 'cos' | 'exp'
//! ```

use num_complex::Complex64;

use super::ast::{Expr, Func, OrderKey, Var};
use crate::error::{Error, Result};

/// Optional context that turns unknown names and out-of-range indices into errors.
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Orders of the ladder; `q<l>` must satisfy `l < ladder.len()`.
    pub ladder: Option<Vec<f64>>,
    /// Known parameter names; any other identifier is rejected.
    pub params: Option<Vec<String>>,
}

impl ParseOptions {
    pub fn with_ladder(ladder: &[f64]) -> Self {
        Self { ladder: Some(ladder.to_vec()), params: None }
    }

    pub fn params(mut self, names: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.params = Some(names.into_iter().map(Into::into).collect());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            c if c.is_ascii_digit() || c == '.' => {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v: f64 = s
                    .parse()
                    .map_err(|_| Error::Syntax { pos: start, message: format!("malformed number `{s}`") })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), start));
                continue;
            }
            other => {
                return Err(Error::Syntax { pos: start, message: format!("unexpected character `{other}`") });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    opts: &'a ParseOptions,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax { pos: self.pos(), message: format!("expected {what}, found {:?}", self.peek()) })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::mul(lhs, self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    let pos = self.pos();
                    let rhs = self.unary()?;
                    if rhs.is_zero() {
                        return Err(Error::Syntax { pos, message: "division by the literal 0".into() });
                    }
                    lhs = Expr::div(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => Ok(Expr::pow(base, v as u32)),
            _ => Err(Error::Syntax { pos, message: "exponent must be a non-negative integer literal".into() }),
        }
    }

    fn number(&mut self, what: &str) -> Result<f64> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(v),
            _ => Err(Error::Syntax { pos, message: format!("expected {what}") }),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(name, pos),
            other => Err(Error::Syntax { pos, message: format!("unexpected token {other:?}") }),
        }
    }

    fn ident(&mut self, name: String, pos: usize) -> Result<Expr> {
        let func = match name.as_str() {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        };
        if let Some(func) = func {
            self.expect(Tok::LParen, "`(` after function name")?;
            let arg = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::Func(func, Box::new(arg)));
        }
        match name.as_str() {
            "i" => return Ok(Expr::Num(Complex64::new(0.0, 1.0))),
            "t" => return Ok(Expr::Var(Var::Time)),
            "d" => {
                self.expect(Tok::LParen, "`(` after `d`")?;
                let order = self.number("derivative order")?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(Expr::Var(Var::Composite(OrderKey(order))));
            }
            "rd" => {
                self.expect(Tok::LParen, "`(` after `rd`")?;
                let order = self.number("derivative order")?;
                self.expect(Tok::Comma, "`,`")?;
                let arg = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(Expr::right_deriv(order, arg));
            }
            "q_half" => {
                let Some(ladder) = &self.opts.ladder else {
                    return Err(Error::UnknownIdentifier { name, pos });
                };
                return match ladder.iter().position(|&o| (o - 0.5).abs() < 1e-12) {
                    Some(l) => Ok(Expr::q(l)),
                    None => Err(Error::IndexOutOfRange(format!("`q_half` at {pos}: ladder has no order 1/2"))),
                };
            }
            _ => {}
        }
        if let Some(l) = indexed(&name, 'q') {
            if let Some(ladder) = &self.opts.ladder {
                if l >= ladder.len() {
                    return Err(Error::IndexOutOfRange(format!(
                        "`{name}` at {pos}: ladder has {} coordinates",
                        ladder.len()
                    )));
                }
            }
            return Ok(Expr::q(l));
        }
        if let Some(l) = indexed(&name, 'p') {
            if let Some(ladder) = &self.opts.ladder {
                if l + 1 >= ladder.len() {
                    return Err(Error::IndexOutOfRange(format!(
                        "`{name}` at {pos}: ladder has {} momenta",
                        ladder.len().saturating_sub(1)
                    )));
                }
            }
            return Ok(Expr::p(l));
        }
        if let Some(params) = &self.opts.params {
            if !params.iter().any(|p| *p == name) {
                return Err(Error::UnknownIdentifier { name, pos });
            }
        }
        Ok(Expr::Param(name))
    }
}

/// `q12` -> Some(12) for prefix 'q'.
fn indexed(name: &str, prefix: char) -> Option<usize> {
    let rest = name.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

pub fn parse(text: &str) -> Result<Expr> {
    parse_with(text, &ParseOptions::default())
}

pub fn parse_with(text: &str, opts: &ParseOptions) -> Result<Expr> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, opts };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(Error::Syntax { pos: p.pos(), message: format!("trailing input {:?}", p.peek()) });
    }
    Ok(e)
}
