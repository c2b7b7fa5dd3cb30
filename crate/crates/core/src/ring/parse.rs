//! Recursive-descent parser for polynomial text such as `x*y + 3/2*y^5 - (x+1)^2`.
//!
//! Grammar: sums of products of powers; `^` takes a non-negative integer,
//! `/` divides by a non-zero constant. Errors carry byte offsets.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::rational::Rational;

use super::poly::Polynomial;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [String],
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax { offset, message: message.into() }
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    if !d.is_constant() || d.is_zero() {
                        return Err(syntax(at, "division only by a non-zero constant"));
                    }
                    acc = acc.scale(&d.constant_term().recip());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let at = {
                self.skip_ws();
                self.pos
            };
            if self.peek() == Some(b'-') {
                return Err(Error::NegativeExponent { offset: at });
            }
            let e = self.integer()?;
            let e: u32 = e
                .try_into()
                .map_err(|_| syntax(at, "exponent too large"))?;
            if e > u16::MAX as u32 {
                return Err(syntax(at, "exponent too large"));
            }
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(syntax(start, "expected an integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn atom(&mut self) -> Result<Polynomial> {
        let n = self.vars.len();
        match self.peek() {
            Some(b'(') => {
                let open = self.pos;
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(syntax(open, "unbalanced parenthesis"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let v = self.integer()?;
                Ok(Polynomial::constant(n, Rational::from_bigint(v)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match self.vars.iter().position(|v| v == name) {
                    Some(i) => Ok(Polynomial::var(n, i)),
                    None => Err(Error::UnknownVariable { name: name.to_string(), offset: start }),
                }
            }
            Some(_) => Err(syntax(self.pos, "unexpected character")),
            None => Err(syntax(self.pos, "unexpected end of input")),
        }
    }
}

/// Parses one polynomial in the ring with the given variable names.
pub fn parse_polynomial(text: &str, vars: &[String]) -> Result<Polynomial> {
    parse_at(text, 0, vars)
}

fn parse_at(text: &str, base: usize, vars: &[String]) -> Result<Polynomial> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, vars };
    let shift = |e: Error| match e {
        Error::Syntax { offset, message } => Error::Syntax { offset: offset + base, message },
        Error::UnknownVariable { name, offset } => Error::UnknownVariable { name, offset: offset + base },
        Error::NegativeExponent { offset } => Error::NegativeExponent { offset: offset + base },
        e => e,
    };
    let r = p.expr().map_err(shift)?;
    if p.peek().is_some() {
        return Err(shift(syntax(p.pos, "trailing input")));
    }
    Ok(r)
}

/// Splits on top-level commas, returning each piece with its byte offset.
fn split_top_level(text: &str, sep: u8) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, &b) in text.as_bytes().iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            _ if b == sep && depth == 0 => {
                out.push((start, &text[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push((start, &text[start..]));
    out
}

/// Parses a comma-separated list of components, e.g. `"x, x*y + y^5"`.
pub fn parse_components(text: &str, vars: &[String]) -> Result<Vec<Polynomial>> {
    split_top_level(text, b',')
        .into_iter()
        .map(|(off, piece)| parse_at(piece, off, vars))
        .collect()
}

/// Parses a `;`-separated list of component lists.
pub fn parse_component_lists(text: &str, vars: &[String]) -> Result<Vec<Vec<Polynomial>>> {
    split_top_level(text, b';')
        .into_iter()
        .filter(|(_, piece)| !piece.trim().is_empty())
        .map(|(off, piece)| {
            split_top_level(piece, b',')
                .into_iter()
                .map(|(o, p)| parse_at(p, off + o, vars))
                .collect()
        })
        .collect()
}

/// Identifiers in order of first appearance.
pub fn infer_variables(text: &str) -> Vec<String> {
    let b = text.as_bytes();
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < b.len() {
        if b[i].is_ascii_alphabetic() || b[i] == b'_' {
            let s = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            let name = &text[s..i];
            if !out.iter().any(|v| v == name) {
                out.push(name.to_string());
            }
        } else if b[i].is_ascii_digit() {
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
        } else {
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Vec<String> {
        vec!["x".into(), "y".into()]
    }

    #[test]
    fn roundtrip_simple() {
        let p = parse_polynomial("y^5 + x*y", &xy()).unwrap();
        assert_eq!(p.format(&xy()), "x*y + y^5");
        let q = parse_polynomial("3/2*x^2 - (x - y)^2 + 2*x*y", &xy()).unwrap();
        assert_eq!(q.format(&xy()), "1/2*x^2 + 4*x*y - y^2");
    }

    #[test]
    fn errors_carry_offsets() {
        match parse_polynomial("x + zz", &xy()) {
            Err(Error::UnknownVariable { name, offset }) => {
                assert_eq!(name, "zz");
                assert_eq!(offset, 4);
            }
            e => panic!("{e:?}"),
        }
        assert!(matches!(parse_polynomial("x^-2", &xy()), Err(Error::NegativeExponent { offset: 2 })));
        assert!(matches!(parse_polynomial("(x + y", &xy()), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse_polynomial("x / y", &xy()), Err(Error::Syntax { .. })));
        match parse_components("x, y + q", &xy()) {
            Err(Error::UnknownVariable { offset, .. }) => assert_eq!(offset, 7),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn components_and_inference() {
        let v = infer_variables("x, x*y + y^5 + y^7*z");
        assert_eq!(v, vec!["x", "y", "z"]);
        let c = parse_components("x, (x+y)*y", &xy()).unwrap();
        assert_eq!(c.len(), 2);
        let l = parse_component_lists("x, 0; 0, y", &xy()).unwrap();
        assert_eq!(l.len(), 2);
    }
}
