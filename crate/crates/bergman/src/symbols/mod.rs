//! Expression language for the multiplier `u`, the self-map `φ`, and
//! weights `ω`.
//!
//! Symbols (`u`, `φ`) must be holomorphic on the upper half-plane, so their
//! grammar admits only `z`, `i`, numeric literals, arithmetic, and powers;
//! the pointwise functions (`abs`, `re`, `im`, `max0`, `indisk`, `exp`) are
//! weight-only and rejected at parse time in symbol position. On top of the
//! static restriction, [`SymbolExpression::verify_holomorphic`] probes a
//! Cauchy–Riemann finite-difference residual at lattice points, and
//! [`SymbolExpression::verify_self_map`] checks `Im φ > 0` there — numeric
//! smoke tests, not proofs, but they catch the usual scenario-file typos
//! (a `φ` that leaves the half-plane, a branch cut crossing the domain).
//!
//! Poles on or near the domain are handled by masks: small disks that
//! validation skips and integration excludes.

mod expr;
mod parse;

pub use expr::{Expr, Func};
pub use parse::ParseError;

use crate::real::{of, Real};
use num_complex::Complex;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SymbolError {
    #[error("symbol fails the Cauchy-Riemann probe at ({x}, {y}): relative residual {residual:e}")]
    NotHolomorphic { x: f64, y: f64, residual: f64 },
    #[error("map leaves the half-plane: Im φ({x} + {y}i) = {image_im}")]
    NotSelfMap { x: f64, y: f64, image_im: f64 },
    #[error("symbol is not finite at ({x}, {y}); add a pole mask if this point is a known pole")]
    NotFinite { x: f64, y: f64 },
}

/// Disk excluded from validation probes and integration domains, for symbols
/// with an isolated singularity at a known point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoleMask<T: Real> {
    pub center: Complex<T>,
    pub radius: T,
}

impl<T: Real> PoleMask<T> {
    pub fn covers(&self, z: Complex<T>) -> bool {
        (z - self.center).norm_sqr() < self.radius * self.radius
    }
}

pub fn masked<T: Real>(masks: &[PoleMask<T>], z: Complex<T>) -> bool {
    masks.iter().any(|m| m.covers(z))
}

/// Relative residual of the Cauchy–Riemann system for `f` at `z`, from
/// central differences with step `h`: `|∂f/∂x + i ∂f/∂y| / (|∂f/∂x| + |∂f/∂y|)`.
/// Holomorphic functions give values at discretisation-error level; genuinely
/// anti-holomorphic behaviour gives values near 1.
pub fn cauchy_riemann_residual<T: Real>(
    f: &dyn Fn(Complex<T>) -> Complex<T>,
    z: Complex<T>,
    h: T,
) -> T {
    let two_h = h + h;
    let dx = (f(z + Complex::new(h, T::zero())) - f(z - Complex::new(h, T::zero()))) / two_h;
    let dy = (f(z + Complex::new(T::zero(), h)) - f(z - Complex::new(T::zero(), h))) / two_h;
    let residual = (dx + Complex::new(T::zero(), T::one()) * dy).norm();
    let scale = dx.norm() + dy.norm();
    if scale > T::zero() {
        residual / scale
    } else {
        T::zero()
    }
}

/// Deterministic probe lattice used by the validation smoke tests.
fn probe_points<T: Real>() -> Vec<Complex<T>> {
    const XS: [f64; 7] = [-5.0, -2.0, -0.5, 0.0, 0.5, 2.0, 5.0];
    const YS: [f64; 5] = [0.05, 0.5, 1.0, 3.0, 20.0];
    let mut points = Vec::with_capacity(XS.len() * YS.len());
    for &x in &XS {
        for &y in &YS {
            points.push(Complex::new(of::<T>(x), of::<T>(y)));
        }
    }
    points
}

fn is_finite<T: Real>(v: Complex<T>) -> bool {
    v.re.is_finite() && v.im.is_finite()
}

/// A holomorphic symbol: `u` or `φ` in `f ↦ u · (f ∘ φ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolExpression<T: Real> {
    expr: Expr<T>,
    source: String,
}

impl<T: Real> SymbolExpression<T> {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        let expr = parse::parse(source, false)?;
        Ok(SymbolExpression { expr, source: source.to_owned() })
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        self.expr.eval(z)
    }

    /// The text this expression was parsed from.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Whitespace- and parenthesis-normalised form; parsing it back yields
    /// the same tree.
    pub fn canonical(&self) -> String {
        self.expr.to_string()
    }

    pub fn expr(&self) -> &Expr<T> {
        &self.expr
    }

    pub fn is_constant(&self) -> bool {
        !self.expr.references_z()
    }

    /// Cauchy–Riemann residual probe over the standard lattice. The grammar
    /// already guarantees holomorphy; this guards against evaluation hazards
    /// (branch cuts of real powers crossing the domain, overflow).
    pub fn verify_holomorphic(&self, tol: T) -> Result<(), SymbolError> {
        self.verify_holomorphic_masked(tol, &[])
    }

    /// [`verify_holomorphic`] with declared pole disks excluded from the
    /// probe, matching how integration treats them.
    pub fn verify_holomorphic_masked(
        &self,
        tol: T,
        masks: &[PoleMask<T>],
    ) -> Result<(), SymbolError> {
        let f = |z: Complex<T>| self.eval(z);
        for z in probe_points::<T>() {
            if masked(masks, z) {
                continue;
            }
            let v = self.eval(z);
            let (x, y) = (z.re.to_f64().unwrap(), z.im.to_f64().unwrap());
            if !is_finite(v) {
                return Err(SymbolError::NotFinite { x, y });
            }
            let h = of::<T>(1e-5) * (T::one() + z.norm());
            let residual = cauchy_riemann_residual(&f, z, h);
            if !(residual <= tol) {
                return Err(SymbolError::NotHolomorphic {
                    x,
                    y,
                    residual: residual.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }

    /// Checks `Im φ > 0` on the probe lattice (less any masked disks).
    pub fn verify_self_map(&self, masks: &[PoleMask<T>]) -> Result<(), SymbolError> {
        for z in probe_points::<T>() {
            if masked(masks, z) {
                continue;
            }
            let v = self.eval(z);
            let (x, y) = (z.re.to_f64().unwrap(), z.im.to_f64().unwrap());
            if !is_finite(v) {
                return Err(SymbolError::NotFinite { x, y });
            }
            if !(v.im > T::zero()) {
                return Err(SymbolError::NotSelfMap {
                    x,
                    y,
                    image_im: v.im.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }
}

/// A weight `ω ≥ 0` on the half-plane; evaluated by real part, with the
/// weight-only pointwise functions available.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightExpression<T: Real> {
    expr: Expr<T>,
    source: String,
}

impl<T: Real> WeightExpression<T> {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        let expr = parse::parse(source, true)?;
        Ok(WeightExpression { expr, source: source.to_owned() })
    }

    pub fn eval(&self, z: Complex<T>) -> T {
        self.expr.eval(z).re
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn canonical(&self) -> String {
        self.expr.to_string()
    }

    pub fn expr(&self) -> &Expr<T> {
        &self.expr
    }
}
