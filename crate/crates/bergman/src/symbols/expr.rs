//! Expression tree, evaluation, and the canonical printer.

use crate::real::Real;
use num_complex::Complex;
use std::fmt;

/// Pointwise functions admitted in weight expressions only: none of them is
/// holomorphic, so they are rejected when parsing a symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Abs,
    Re,
    Im,
    Max0,
    InDisk,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Re => "re",
            Func::Im => "im",
            Func::Max0 => "max0",
            Func::InDisk => "indisk",
            Func::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "abs" => Func::Abs,
            "re" => Func::Re,
            "im" => Func::Im,
            "max0" => Func::Max0,
            "indisk" => Func::InDisk,
            "exp" => Func::Exp,
            _ => return None,
        })
    }
}

/// Parsed expression. No constant folding or simplification ever happens:
/// the tree mirrors the source, so printing and re-parsing reproduces the
/// structure exactly (for trees the parser itself can produce).
#[derive(Clone, Debug, PartialEq)]
pub enum Expr<T: Real> {
    Literal(Complex<T>),
    Z,
    Neg(Box<Expr<T>>),
    Add(Box<Expr<T>>, Box<Expr<T>>),
    Sub(Box<Expr<T>>, Box<Expr<T>>),
    Mul(Box<Expr<T>>, Box<Expr<T>>),
    Div(Box<Expr<T>>, Box<Expr<T>>),
    PowInt(Box<Expr<T>>, i32),
    PowReal(Box<Expr<T>>, T),
    Call(Func, Box<Expr<T>>),
}

/// Integer power by repeated multiplication; negative exponents invert at
/// the end. Exponents are scenario-sized, so no fast exponentiation.
fn pow_int<T: Real>(base: Complex<T>, k: i32) -> Complex<T> {
    let mut acc = Complex::new(T::one(), T::zero());
    for _ in 0..k.unsigned_abs() {
        acc *= base;
    }
    if k < 0 {
        acc.inv()
    } else {
        acc
    }
}

impl<T: Real> Expr<T> {
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        match self {
            Expr::Literal(c) => *c,
            Expr::Z => z,
            Expr::Neg(e) => -e.eval(z),
            Expr::Add(a, b) => a.eval(z) + b.eval(z),
            Expr::Sub(a, b) => a.eval(z) - b.eval(z),
            Expr::Mul(a, b) => a.eval(z) * b.eval(z),
            Expr::Div(a, b) => a.eval(z) / b.eval(z),
            Expr::PowInt(e, k) => pow_int(e.eval(z), *k),
            Expr::PowReal(e, p) => e.eval(z).powf(*p),
            Expr::Call(f, e) => {
                let v = e.eval(z);
                let real = |x: T| Complex::new(x, T::zero());
                match f {
                    Func::Abs => real(v.norm()),
                    Func::Re => real(v.re),
                    Func::Im => real(v.im),
                    Func::Max0 => real(v.re.max(T::zero())),
                    Func::InDisk => real(if v.norm_sqr() < T::one() { T::one() } else { T::zero() }),
                    Func::Exp => v.exp(),
                }
            }
        }
    }

    pub fn references_z(&self) -> bool {
        match self {
            Expr::Literal(_) => false,
            Expr::Z => true,
            Expr::Neg(e) | Expr::PowInt(e, _) | Expr::PowReal(e, _) | Expr::Call(_, e) => {
                e.references_z()
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.references_z() || b.references_z()
            }
        }
    }

    /// Decomposes the expression as `a·z + b` when it is affine in `z`,
    /// returning `(a, b)`. Subtrees that never mention `z` count as constant
    /// whatever their shape; a product needs one constant factor, a division
    /// a constant divisor. Anything else (powers of `z`, function calls on
    /// `z`) returns `None`, even when algebraically affine.
    pub fn affine_in_z(&self) -> Option<(Complex<T>, Complex<T>)> {
        let zero = Complex::new(T::zero(), T::zero());
        if !self.references_z() {
            // The argument is irrelevant for a z-free tree.
            return Some((zero, self.eval(zero)));
        }
        match self {
            Expr::Z => Some((Complex::new(T::one(), T::zero()), zero)),
            Expr::Neg(e) => e.affine_in_z().map(|(a, b)| (-a, -b)),
            Expr::Add(l, r) => {
                let (a1, b1) = l.affine_in_z()?;
                let (a2, b2) = r.affine_in_z()?;
                Some((a1 + a2, b1 + b2))
            }
            Expr::Sub(l, r) => {
                let (a1, b1) = l.affine_in_z()?;
                let (a2, b2) = r.affine_in_z()?;
                Some((a1 - a2, b1 - b2))
            }
            Expr::Mul(l, r) => {
                let (a1, b1) = l.affine_in_z()?;
                let (a2, b2) = r.affine_in_z()?;
                if a1 == zero {
                    Some((b1 * a2, b1 * b2))
                } else if a2 == zero {
                    Some((a1 * b2, b1 * b2))
                } else {
                    None
                }
            }
            Expr::Div(l, r) => {
                let (a1, b1) = l.affine_in_z()?;
                let (a2, b2) = r.affine_in_z()?;
                if a2 == zero {
                    Some((a1 / b2, b1 / b2))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Precedence for printing: addition 1, multiplication 2, powers 3,
    /// atoms 4. Leading negation (and negative literals) print at level 1.
    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) | Expr::Neg(_) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::PowInt(..) | Expr::PowReal(..) => 3,
            Expr::Z => 4,
            Expr::Call(..) => 4,
            Expr::Literal(c) => {
                if c.im == T::zero() {
                    if c.re < T::zero() {
                        1
                    } else {
                        4
                    }
                } else if c.re == T::zero() {
                    if c.im == T::one() {
                        4
                    } else if c.im < T::zero() {
                        1
                    } else {
                        2
                    }
                } else {
                    4 // printed self-parenthesised
                }
            }
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, required: u8) -> fmt::Result {
        if self.prec() < required {
            write!(f, "(")?;
            self.write(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Literal(c) => write_literal(f, *c),
            Expr::Z => write!(f, "z"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.write(f, 2)
            }
            Expr::Add(a, b) => {
                a.write(f, 1)?;
                write!(f, " + ")?;
                b.write(f, 2)
            }
            Expr::Sub(a, b) => {
                a.write(f, 1)?;
                write!(f, " - ")?;
                b.write(f, 2)
            }
            Expr::Mul(a, b) => {
                a.write(f, 2)?;
                write!(f, "*")?;
                b.write(f, 3)
            }
            Expr::Div(a, b) => {
                a.write(f, 2)?;
                write!(f, "/")?;
                b.write(f, 3)
            }
            Expr::PowInt(e, k) => {
                e.write(f, 4)?;
                write!(f, "^{k}")
            }
            Expr::PowReal(e, p) => {
                e.write(f, 4)?;
                write!(f, "^{p:?}")
            }
            Expr::Call(func, e) => {
                write!(f, "{}(", func.name())?;
                e.write(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

fn write_literal<T: Real>(f: &mut fmt::Formatter<'_>, c: Complex<T>) -> fmt::Result {
    if c.im == T::zero() {
        if c.re < T::zero() {
            write!(f, "-{:?}", c.re.abs())
        } else {
            write!(f, "{:?}", c.re)
        }
    } else if c.re == T::zero() {
        if c.im == T::one() {
            write!(f, "i")
        } else if c.im < T::zero() {
            write!(f, "-{:?}*i", c.im.abs())
        } else {
            write!(f, "{:?}*i", c.im)
        }
    } else if c.im < T::zero() {
        write!(f, "({:?} - {:?}*i)", c.re, c.im.abs())
    } else {
        write!(f, "({:?} + {:?}*i)", c.re, c.im)
    }
}

impl<T: Real> fmt::Display for Expr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}
