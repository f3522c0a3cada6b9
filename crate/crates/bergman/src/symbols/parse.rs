//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := ["-"] term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := atom ("^" ["-"] number)?
//! atom   := "z" | "i" | number | "(" expr ")" | func "(" expr ")"
//! number := digits ["." digits] [("e"|"E") ["+"|"-"] digits]
//! ```
//!
//! Operators associate left; the leading minus negates the first term only.
//! Exponents are numeric literals: integer-shaped ones become exact repeated
//! multiplication, anything with a point or exponent marker becomes a real
//! power on the principal branch. All error positions are byte offsets into
//! the source.

use super::expr::{Expr, Func};
use crate::real::{of, Real};
use num_complex::Complex;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected end of input at byte {offset}")]
    UnexpectedEnd { offset: usize },
    #[error("unexpected character {found:?} at byte {offset}")]
    UnexpectedChar { found: char, offset: usize },
    #[error("unknown function {name:?} at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("function {name:?} is not holomorphic and cannot be used in a symbol (byte {offset})")]
    FunctionNotAllowed { name: String, offset: usize },
    #[error("malformed number at byte {offset}")]
    MalformedNumber { offset: usize },
    #[error("integer exponent out of range at byte {offset}")]
    ExponentOutOfRange { offset: usize },
    #[error("trailing input at byte {offset}")]
    TrailingInput { offset: usize },
}

pub(crate) fn parse<T: Real>(src: &str, allow_funcs: bool) -> Result<Expr<T>, ParseError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, allow_funcs };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(ParseError::TrailingInput { offset: p.pos });
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    allow_funcs: bool,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, byte: u8) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b) if b == byte => {
                self.pos += 1;
                Ok(())
            }
            Some(b) => Err(ParseError::UnexpectedChar { found: b as char, offset: self.pos }),
            None => Err(ParseError::UnexpectedEnd { offset: self.pos }),
        }
    }

    fn expr<T: Real>(&mut self) -> Result<Expr<T>, ParseError> {
        self.skip_ws();
        let negated = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut acc = self.term()?;
        if negated {
            acc = Expr::Neg(Box::new(acc));
        }
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = Expr::Add(Box::new(acc), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = Expr::Sub(Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term<T: Real>(&mut self) -> Result<Expr<T>, ParseError> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = Expr::Mul(Box::new(acc), Box::new(rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = Expr::Div(Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor<T: Real>(&mut self) -> Result<Expr<T>, ParseError> {
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let negative = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let start = self.pos;
        let (value, integral) = self.number()?;
        if integral {
            let magnitude = value as i64;
            let signed = if negative { -magnitude } else { magnitude };
            let k = i32::try_from(signed)
                .map_err(|_| ParseError::ExponentOutOfRange { offset: start })?;
            Ok(Expr::PowInt(Box::new(base), k))
        } else {
            let p = if negative { -value } else { value };
            Ok(Expr::PowReal(Box::new(base), of::<T>(p)))
        }
    }

    fn atom<T: Real>(&mut self) -> Result<Expr<T>, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(ParseError::UnexpectedEnd { offset: self.pos }),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(b) if b.is_ascii_digit() => {
                let (value, _) = self.number()?;
                Ok(Expr::Literal(Complex::new(of::<T>(value), T::zero())))
            }
            Some(b) if b.is_ascii_lowercase() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit())
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match name {
                    "z" => Ok(Expr::Z),
                    "i" => Ok(Expr::Literal(Complex::new(T::zero(), T::one()))),
                    _ => match Func::from_name(name) {
                        Some(func) => {
                            if !self.allow_funcs {
                                return Err(ParseError::FunctionNotAllowed {
                                    name: name.to_owned(),
                                    offset: start,
                                });
                            }
                            self.expect(b'(')?;
                            let arg = self.expr()?;
                            self.expect(b')')?;
                            Ok(Expr::Call(func, Box::new(arg)))
                        }
                        None => Err(ParseError::UnknownFunction {
                            name: name.to_owned(),
                            offset: start,
                        }),
                    },
                }
            }
            Some(other) => {
                Err(ParseError::UnexpectedChar { found: other as char, offset: self.pos })
            }
        }
    }

    /// Lex one unsigned numeric literal. Returns the value and whether the
    /// literal was integer-shaped (no point, no exponent marker).
    fn number(&mut self) -> Result<(f64, bool), ParseError> {
        let start = self.pos;
        if !matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            return match self.peek() {
                None => Err(ParseError::UnexpectedEnd { offset: self.pos }),
                Some(b) => Err(ParseError::UnexpectedChar { found: b as char, offset: self.pos }),
            };
        }
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        let mut integral = true;
        if self.peek() == Some(b'.') {
            integral = false;
            self.pos += 1;
            if !matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
                return Err(ParseError::MalformedNumber { offset: start });
            }
            while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            integral = false;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if !matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
                return Err(ParseError::MalformedNumber { offset: start });
            }
            while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: f64 =
            text.parse().map_err(|_| ParseError::MalformedNumber { offset: start })?;
        if integral && value >= 9.1e18 {
            // Too big to classify as an exact integer exponent or literal.
            return Err(ParseError::ExponentOutOfRange { offset: start });
        }
        Ok((value, integral))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(src: &str) -> Result<Expr<f64>, ParseError> {
        parse(src, false)
    }

    fn wt(src: &str) -> Result<Expr<f64>, ParseError> {
        parse(src, true)
    }

    #[test]
    fn precedence_and_associativity() {
        let z = Complex::new(3.0, 0.0);
        assert_eq!(sym("1+2*z").unwrap().eval(z).re, 7.0);
        assert_eq!(sym("(1+2)*z").unwrap().eval(z).re, 9.0);
        assert_eq!(sym("1-2-3").unwrap().eval(z).re, -4.0);
        assert_eq!(sym("2/4/2").unwrap().eval(z).re, 0.25);
        assert_eq!(sym("-z^2").unwrap().eval(z).re, -9.0);
        assert_eq!(sym("-z+1").unwrap().eval(z).re, -2.0);
    }

    #[test]
    fn powers_classify_as_integer_or_real() {
        assert!(matches!(sym("z^3").unwrap(), Expr::PowInt(_, 3)));
        assert!(matches!(sym("z^-2").unwrap(), Expr::PowInt(_, -2)));
        assert!(matches!(sym("z^1.5").unwrap(), Expr::PowReal(_, p) if p == 1.5));
        assert!(matches!(sym("z^-0.5").unwrap(), Expr::PowReal(_, p) if p == -0.5));
        assert!(matches!(sym("z^1e2").unwrap(), Expr::PowReal(_, p) if p == 100.0));
    }

    #[test]
    fn weight_functions_parse_only_in_weight_mode() {
        assert!(wt("indisk(z)/abs(z)").is_ok());
        assert!(wt("exp(im(z))").is_ok());
        let err = sym("abs(z)").unwrap_err();
        assert_eq!(
            err,
            ParseError::FunctionNotAllowed { name: "abs".to_owned(), offset: 0 }
        );
        let err = sym("z + im(z)").unwrap_err();
        assert_eq!(err, ParseError::FunctionNotAllowed { name: "im".to_owned(), offset: 4 });
    }

    #[test]
    fn error_offsets_are_byte_accurate() {
        assert_eq!(sym("z+").unwrap_err(), ParseError::UnexpectedEnd { offset: 2 });
        assert_eq!(sym("z)").unwrap_err(), ParseError::TrailingInput { offset: 1 });
        assert_eq!(sym("2z").unwrap_err(), ParseError::TrailingInput { offset: 1 });
        assert_eq!(
            sym("foo(z)").unwrap_err(),
            ParseError::UnknownFunction { name: "foo".to_owned(), offset: 0 }
        );
        assert_eq!(sym("z^(2)").unwrap_err(), ParseError::UnexpectedChar { found: '(', offset: 2 });
        assert_eq!(sym("1.x").unwrap_err(), ParseError::MalformedNumber { offset: 0 });
        assert_eq!(sym("z ^ 99999999999999999999").unwrap_err(), ParseError::ExponentOutOfRange { offset: 4 });
        assert_eq!(wt("im z").unwrap_err(), ParseError::UnexpectedChar { found: 'z', offset: 3 });
    }

    #[test]
    fn whitespace_is_insignificant() {
        let a = sym(" z + i * 2 ").unwrap();
        let b = sym("z+i*2").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn catalog_evaluations() {
        let at = |src: &str, re: f64, im: f64| wt(src).unwrap().eval(Complex::new(re, im));
        let v = at("z+i", 2.0, 3.0);
        assert_eq!(v, Complex::new(2.0, 4.0));
        let v = at("indisk(z)/abs(z)", 0.3, 0.4);
        assert_eq!(v.re, 2.0);
        let v = at("indisk(z)/abs(z)", 0.0, 2.0);
        assert_eq!(v.re, 0.0);
        let v = at("exp(im(z))", 5.0, 1.0);
        assert_eq!(v.re, 1.0_f64.exp());
        let v = at("max0(re(z))", -1.0, 1.0);
        assert_eq!(v.re, 0.0);
        let v = at("(z+i)^2", 0.0, 1.0);
        assert_eq!(v, Complex::new(-4.0, 0.0));
    }
}
