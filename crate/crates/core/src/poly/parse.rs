//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := ('-' | '+') factor | power
//! power  := atom ('^' integer)?
//! atom   := number | number 'i' | 'i' | identifier | '(' expr ')'
//! ```
//!
//! Unary minus binds looser than `^`, so `-z^2` is `-(z^2)`. A bare `i` is
//! the imaginary unit unless `i` is one of the declared variables.

use num_complex::Complex64;

use super::MultiPoly;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax {
        pos,
        msg: msg.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        if ch.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let simple = match ch {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = simple {
            out.push((t, start));
            i += 1;
            continue;
        }
        if ch.is_ascii_digit() || ch == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // optional exponent, only when digits follow
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let value: f64 = text[start..i]
                .parse()
                .map_err(|_| syntax(start, format!("malformed number '{}'", &text[start..i])))?;
            let imaginary = i < bytes.len()
                && bytes[i] == b'i'
                && !(i + 1 < bytes.len() && is_ident_char(bytes[i + 1]));
            if imaginary {
                i += 1;
                out.push((Tok::Imag(value), start));
            } else if i < bytes.len() && is_ident_start(bytes[i]) {
                return Err(syntax(i, "expected operator between number and identifier"));
            } else {
                out.push((Tok::Num(value), start));
            }
            continue;
        }
        if is_ident_start(ch) {
            while i < bytes.len() && is_ident_char(bytes[i]) {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        }
        let c = text[start..].chars().next().unwrap_or('?');
        return Err(syntax(start, format!("unexpected character '{c}'")));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_'
}

fn is_ident_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn constant(&self, c: Complex64) -> MultiPoly {
        MultiPoly::constant(self.vars.to_vec(), c)
    }

    fn expr(&mut self) -> Result<MultiPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?)?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly> {
        let mut acc = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = acc.mul(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<MultiPoly> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(self.factor()?.neg())
            }
            Tok::Plus => {
                self.bump();
                self.factor()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<MultiPoly> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let (tok, pos) = self.bump();
        let k = match tok {
            Tok::Minus => return Err(Error::NegativeExponent { pos }),
            Tok::Num(v) if v.fract() == 0.0 && v >= 0.0 && v <= u32::MAX as f64 => v as u32,
            _ => return Err(syntax(pos, "exponent must be a non-negative integer")),
        };
        if *self.peek() == Tok::Caret {
            return Err(syntax(self.pos(), "chained exponents need parentheses"));
        }
        Ok(base.pow(k))
    }

    fn atom(&mut self) -> Result<MultiPoly> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(v) => Ok(self.constant(Complex64::new(v, 0.0))),
            Tok::Imag(v) => Ok(self.constant(Complex64::new(0.0, v))),
            Tok::Ident(name) => match self.vars.iter().position(|v| *v == name) {
                Some(k) => Ok(MultiPoly::var(self.vars.to_vec(), k)),
                None if name == "i" => Ok(self.constant(Complex64::new(0.0, 1.0))),
                None => Err(Error::UnknownVariable { name, pos }),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                match self.bump() {
                    (Tok::RParen, _) => Ok(inner),
                    (_, p) => Err(syntax(p, "expected ')'")),
                }
            }
            Tok::End => Err(syntax(pos, "unexpected end of input")),
            other => Err(syntax(pos, format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses `text` over the given variables.
pub fn parse(text: &str, vars: &[String]) -> Result<MultiPoly> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        vars,
    };
    let out = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.pos(), "unexpected trailing input"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::default_var_names;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn precedence() {
        let v = default_var_names(1);
        let f = parse("-z1^2", &v).unwrap();
        assert_eq!(f.coefficient(&[2]), c(-1.0, 0.0));
        let f = parse("2*z1^2 + 3*z1 - 1", &v).unwrap();
        assert_eq!(f.coefficient(&[2]), c(2.0, 0.0));
        assert_eq!(f.coefficient(&[1]), c(3.0, 0.0));
        assert_eq!(f.coefficient(&[0]), c(-1.0, 0.0));
        let f = parse("(z1 - 1)^2", &v).unwrap();
        assert_eq!(f.coefficient(&[1]), c(-2.0, 0.0));
    }

    #[test]
    fn complex_literals() {
        let v = default_var_names(2);
        let f = parse("z1 + 2i*z2 - i", &v).unwrap();
        assert_eq!(f.coefficient(&[0, 1]), c(0.0, 2.0));
        assert_eq!(f.coefficient(&[0, 0]), c(0.0, -1.0));
        let f = parse("(1.5-0.25i)*z1 + 1e-1", &v).unwrap();
        assert_eq!(f.coefficient(&[1, 0]), c(1.5, -0.25));
        assert_eq!(f.coefficient(&[0, 0]), c(0.1, 0.0));
    }

    #[test]
    fn variable_named_i_shadows_the_unit() {
        let v: Vec<String> = vec!["i".into()];
        let f = parse("i^2", &v).unwrap();
        assert_eq!(f.coefficient(&[2]), c(1.0, 0.0));
    }

    #[test]
    fn errors_carry_positions() {
        let v = default_var_names(2);
        assert!(matches!(parse("z1 +* z2", &v), Err(Error::Syntax { pos: 4, .. })));
        assert!(matches!(
            parse("z1 + w", &v),
            Err(Error::UnknownVariable { pos: 5, .. })
        ));
        assert!(matches!(parse("z1^-1", &v), Err(Error::NegativeExponent { pos: 3 })));
        assert!(matches!(parse("z1^1.5", &v), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse("(z1", &v), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse("z1 z2", &v), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse("2z1", &v), Err(Error::Syntax { pos: 1, .. })));
        assert!(matches!(parse("z1 $", &v), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse("", &v), Err(Error::Syntax { pos: 0, .. })));
        assert!(matches!(parse("z1^2^2", &v), Err(Error::Syntax { pos: 4, .. })));
    }
}
