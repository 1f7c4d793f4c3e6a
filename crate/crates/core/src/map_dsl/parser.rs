//! Recursive-descent parser for the map DSL.
//!
//! ```text
//! map    := expr (';' expr)*
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' '-'? integer)?
//! atom   := number 'i'? | 'i' | 'z' integer | name | ('exp' | 'log') '(' expr ')' | '(' expr ')'
//! number := digits ('.' digits)? (('e' | 'E') ('+' | '-')? digits)?
//! ```

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::expr::{CRational, Expr};
use crate::error::{Error, Result};

/// Named constants available to the parser.
pub type Constants = BTreeMap<String, CRational>;

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    /// Number of coordinates; `0` forbids coordinates entirely.
    n: usize,
    constants: &'a Constants,
}

fn is_ident_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

impl<'a> Parser<'a> {
    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { offset, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.eat(b) {
            Ok(())
        } else {
            let found = self.describe_here();
            self.err(self.pos, format!("expected `{}`, found {found}", b as char))
        }
    }

    fn describe_here(&mut self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(_) => {
                let rest = &self.src[self.pos..];
                let c = rest.chars().next().unwrap();
                format!("`{c}`")
            }
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(Expr::neg(self.term()?));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::sum(terms) })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                acc = Expr::product([acc, rhs]);
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                acc = Expr::div(acc, rhs);
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let negative = self.eat(b'-');
            self.skip_ws();
            let start = self.pos;
            let digits = self.digits();
            if digits.is_empty() {
                return self.err(start, "expected an integer exponent");
            }
            let k: i32 = digits.parse().map_err(|_| Error::Syntax { offset: start, message: "exponent too large".into() })?;
            return Ok(Expr::pow(base, if negative { -k } else { k }));
        }
        Ok(base)
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn number(&mut self) -> Result<BigRational> {
        let start = self.pos;
        let int_part = self.digits();
        let mut frac_part = "";
        if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            frac_part = self.digits();
        }
        if int_part.is_empty() && frac_part.is_empty() {
            return self.err(start, "malformed number");
        }
        let mut exponent: i64 = 0;
        if matches!(self.bytes.get(self.pos), Some(b'e') | Some(b'E'))
            && self.bytes.get(self.pos + 1).is_some_and(|b| b.is_ascii_digit() || *b == b'+' || *b == b'-')
        {
            self.pos += 1;
            let sign = match self.bytes.get(self.pos) {
                Some(b'-') => {
                    self.pos += 1;
                    -1
                }
                Some(b'+') => {
                    self.pos += 1;
                    1
                }
                _ => 1,
            };
            let ds = self.digits();
            let e: i64 = ds.parse().map_err(|_| Error::Syntax { offset: start, message: "malformed exponent".into() })?;
            exponent = sign * e;
        }
        let mantissa: BigInt = format!("{int_part}{frac_part}").parse().unwrap_or_else(|_| BigInt::zero());
        exponent -= frac_part.len() as i64;
        let ten = BigInt::from(10);
        let scale = num_traits::pow(ten, exponent.unsigned_abs() as usize);
        Ok(if exponent >= 0 { BigRational::from_integer(mantissa * scale) } else { BigRational::new(mantissa, scale) })
    }

    fn atom(&mut self) -> Result<Expr> {
        let Some(b) = self.peek() else {
            return self.err(self.pos, "unexpected end of input");
        };
        let start = self.pos;
        if b.is_ascii_digit() || b == b'.' {
            let value = self.number()?;
            if self.bytes.get(self.pos) == Some(&b'i') && !self.bytes.get(self.pos + 1).is_some_and(|&c| is_ident_char(c)) {
                self.pos += 1;
                return Ok(Expr::constant(CRational::new(BigRational::zero(), value)));
            }
            return Ok(Expr::constant(CRational::real(value)));
        }
        if b == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect(b')')?;
            return Ok(inner);
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            while self.pos < self.bytes.len() && is_ident_char(self.bytes[self.pos]) {
                self.pos += 1;
            }
            let name = &self.src[start..self.pos];
            return self.named(name, start);
        }
        let found = self.describe_here();
        self.err(start, format!("unexpected {found}"))
    }

    fn named(&mut self, name: &str, start: usize) -> Result<Expr> {
        match name {
            "i" => return Ok(Expr::constant(CRational::imag_unit())),
            "exp" | "log" => {
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                return Ok(if name == "exp" { Expr::exp(arg) } else { Expr::log(arg) });
            }
            _ => {}
        }
        if let Some(c) = self.constants.get(name) {
            return Ok(Expr::constant(c.clone()));
        }
        if let Some(idx) = name.strip_prefix('z').filter(|s| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())) {
            let i: usize = idx.parse().map_err(|_| Error::Syntax { offset: start, message: "bad coordinate".into() })?;
            if i == 0 || i > self.n {
                return self.err(start, format!("coordinate {name} out of range 1..={}", self.n));
            }
            return Ok(Expr::var(i - 1));
        }
        Err(Error::Syntax { offset: start, message: format!("undefined symbol `{name}`") })
    }
}

/// Parses a single expression in `n` coordinates.
pub fn parse_expr(text: &str, n: usize, constants: &Constants) -> Result<Expr> {
    let mut p = Parser { src: text, bytes: text.as_bytes(), pos: 0, n, constants };
    let e = p.expr()?;
    if p.peek().is_some() {
        let found = p.describe_here();
        return p.err(p.pos, format!("unexpected {found} after expression"));
    }
    Ok(e)
}

/// Parses `;`-separated component expressions, reporting byte offsets into the whole text.
pub fn parse_components(text: &str, n: usize, constants: &Constants) -> Result<Vec<Expr>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for piece in text.split(';') {
        let e = parse_expr(piece, n, constants).map_err(|e| match e {
            Error::Syntax { offset: o, message } => Error::Syntax { offset: offset + o, message },
            other => other,
        })?;
        out.push(e);
        offset += piece.len() + 1;
    }
    if out.len() != n {
        return Err(Error::validation(format!("expected {n} component expressions, found {}", out.len())));
    }
    Ok(out)
}
