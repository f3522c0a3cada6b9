//! Integration against the weighted area measure `dA_α = c_α y^α dx dy` on
//! the upper half-plane, with `c_α = (α+1) 2^α / π`.
//!
//! Boxes, rectangles and tents have closed-form measure; everything else
//! goes through an adaptive engine built on an embedded Gauss–Legendre pair.
//! For `−1 < α < 0` the substitution `s = y^{α+1}` flattens the weight to a
//! constant, so integrands stay bounded down to the real axis instead of
//! inheriting the `y^α` blow-up. Results are bit-for-bit reproducible for a
//! fixed spec: cell bookkeeping is in creation order and reductions are
//! compensated, so the thread count affects speed only.
//!
//! Half-plane integrals are computed on a truncation window plus an optional
//! power-law tail bound: if `|f(z)| ≲ M |z|^{−d}` beyond the window, the
//! discarded mass is at most `M c_α B((α+1)/2, 1/2) R^{α+2−d} / (d−α−2)`
//! with `R` the largest origin-centred half-disk inside the window. The
//! bound requires `d > α + 2`; at or below that the integral is divergent
//! (borderline) and the tail model refuses.

mod engine;
mod rules;

use crate::geometry::{HalfPlanePoint, Interval, Rect};
use crate::real::{of, Real};
use crate::special::beta;
use num_complex::Complex;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("integrand sample near ({x}, {y}) is not finite")]
    NonFiniteSample { x: f64, y: f64 },
    #[error(
        "tail decay exponent {decay} must exceed alpha + 2 = {critical}: \
         the half-plane integral is divergent (borderline)"
    )]
    DivergentTail { decay: f64, critical: f64 },
}

/// The exponent `α > −1` of the weight, with its normalising constant
/// `c_α = (α+1) 2^α / π` precomputed. The constant makes the measure of the
/// box over `[0, 1)` equal `1/π` for every `α`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightParameter<T: Real> {
    alpha: T,
    constant: T,
}

impl<T: Real> WeightParameter<T> {
    pub fn new(alpha: T) -> Self {
        assert!(
            alpha.is_finite() && alpha > of::<T>(-1.0),
            "weight exponent must satisfy alpha > -1"
        );
        let constant = (alpha + T::one()) * of::<T>(2.0).powf(alpha) / T::pi();
        WeightParameter { alpha, constant }
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// `c_α` such that the density is `c_α y^α`.
    pub fn density_constant(&self) -> T {
        self.constant
    }

    pub fn density(&self, y: T) -> T {
        self.constant * y.powf(self.alpha)
    }

    /// Measure of a rectangle `xs × ys`: `|xs| (2^α/π) (y_1^{α+1} − y_0^{α+1})`.
    pub fn rect_measure(&self, rect: &Rect<T>) -> T {
        let a1 = self.alpha + T::one();
        let scale = of::<T>(2.0).powf(self.alpha) / T::pi();
        rect.xs.length() * scale * (rect.ys.right().powf(a1) - rect.ys.left().powf(a1))
    }

    /// Measure of the box over an interval of length `ℓ`: `(2^α/π) ℓ^{α+2}`.
    pub fn box_measure_of_side(&self, side: T) -> T {
        of::<T>(2.0).powf(self.alpha) / T::pi() * side.powf(self.alpha + of::<T>(2.0))
    }

    pub fn box_measure(&self, b: &crate::geometry::CarlesonBox<T>) -> T {
        self.box_measure_of_side(b.side())
    }

    /// Measure of the tent with apex `a`; tents are boxes of side `y_a`.
    pub fn tent_measure(&self, apex: HalfPlanePoint<T>) -> T {
        self.box_measure_of_side(apex.y)
    }
}

/// How mass outside the truncation window is accounted for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailModel<T> {
    /// Report the truncated integral as-is.
    Truncate,
    /// Assume `|f(z)| ≤ M |z|^{−decay}` beyond the window, with `M` estimated
    /// from boundary samples, and add the resulting bound to the error.
    PowerLaw { decay: T },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec<T: Real> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_cells: usize,
    /// Window for half-plane integrals. Must straddle `x = 0` and reach down
    /// to `y = 0` when a power-law tail is in effect.
    pub truncation: Rect<T>,
    pub tail: TailModel<T>,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: of::<T>(1e-6),
            abs_tol: of::<T>(1e-14),
            max_cells: 20_000,
            truncation: Rect::new(
                Interval::from_endpoints(of::<T>(-64.0), of::<T>(64.0)),
                Interval::new(T::zero(), of::<T>(64.0)),
            ),
            tail: TailModel::Truncate,
        }
    }
}

impl<T: Real> QuadratureSpec<T> {
    pub fn with_tols(mut self, rel: T, abs: T) -> Self {
        self.rel_tol = rel;
        self.abs_tol = abs;
        self
    }

    pub fn with_max_cells(mut self, max_cells: usize) -> Self {
        self.max_cells = max_cells;
        self
    }

    pub fn with_truncation(mut self, truncation: Rect<T>) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn with_tail(mut self, tail: TailModel<T>) -> Self {
        self.tail = tail;
        self
    }
}

/// Outcome of a quadrature. `value` is the integral over the requested
/// region (for half-plane integrals: over the truncation window only);
/// `tail_bound` is the power-law bound on what the window misses, and is
/// included in `error_bound` rather than in `value`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegralEstimate<T> {
    pub value: T,
    pub error_bound: T,
    pub tail_bound: T,
    pub cells: usize,
    pub evaluations: u64,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexIntegralEstimate<T> {
    pub value: Complex<T>,
    pub error_bound: T,
    pub tail_bound: T,
    pub cells: usize,
    pub evaluations: u64,
    pub converged: bool,
}

fn run_engine<T: Real>(
    f: &(dyn Fn(Complex<T>) -> T + Sync),
    inside: Option<&(dyn Fn(Complex<T>) -> bool + Sync)>,
    weight: WeightParameter<T>,
    rect: &Rect<T>,
    spec: &QuadratureSpec<T>,
) -> Result<IntegralEstimate<T>, QuadratureError> {
    let alpha = weight.alpha;
    let c = weight.constant;
    let xs = (rect.xs.left(), rect.xs.right());

    let outcome = if alpha < T::zero() {
        // s = y^{α+1}: dA_α pulls back to the constant density c_α/(α+1) ds dx.
        let a1 = alpha + T::one();
        let beta_exp = a1.recip();
        let scale = c * beta_exp;
        let ys = (rect.ys.left().powf(a1), rect.ys.right().powf(a1));
        let integrand = |x: T, s: T| f(Complex::new(x, s.powf(beta_exp))) * scale;
        let guard = inside.map(|ind| move |x: T, s: T| ind(Complex::new(x, s.powf(beta_exp))));
        engine::adapt(&engine::EngineRequest {
            integrand: &integrand,
            guard: guard.as_ref().map(|g| g as &(dyn Fn(T, T) -> bool + Sync)),
            x: xs,
            y: ys,
            rel_tol: spec.rel_tol,
            abs_tol: spec.abs_tol,
            max_cells: spec.max_cells,
        })?
    } else {
        let ys = (rect.ys.left(), rect.ys.right());
        let integrand = |x: T, y: T| f(Complex::new(x, y)) * c * y.powf(alpha);
        let guard = inside.map(|ind| move |x: T, y: T| ind(Complex::new(x, y)));
        engine::adapt(&engine::EngineRequest {
            integrand: &integrand,
            guard: guard.as_ref().map(|g| g as &(dyn Fn(T, T) -> bool + Sync)),
            x: xs,
            y: ys,
            rel_tol: spec.rel_tol,
            abs_tol: spec.abs_tol,
            max_cells: spec.max_cells,
        })?
    };

    Ok(IntegralEstimate {
        value: outcome.value,
        error_bound: outcome.error,
        tail_bound: T::zero(),
        cells: outcome.cells,
        evaluations: outcome.evaluations,
        converged: outcome.converged,
    })
}

/// `∫_rect f dA_α`, adaptively.
pub fn integrate_rect<T: Real>(
    f: &(dyn Fn(Complex<T>) -> T + Sync),
    weight: WeightParameter<T>,
    rect: &Rect<T>,
    spec: &QuadratureSpec<T>,
) -> Result<IntegralEstimate<T>, QuadratureError> {
    run_engine(f, None, weight, rect, spec)
}

/// `∫_{rect ∩ {inside}} f dA_α`. The integrand is zeroed outside the subset
/// and cells straddling its boundary carry a band error bound, so refinement
/// concentrates there; expect to need looser tolerances than for smooth
/// integrands.
pub fn integrate_over_subset<T: Real>(
    f: &(dyn Fn(Complex<T>) -> T + Sync),
    inside: &(dyn Fn(Complex<T>) -> bool + Sync),
    weight: WeightParameter<T>,
    rect: &Rect<T>,
    spec: &QuadratureSpec<T>,
) -> Result<IntegralEstimate<T>, QuadratureError> {
    let masked = |z: Complex<T>| if inside(z) { f(z) } else { T::zero() };
    run_engine(&masked, Some(inside), weight, rect, spec)
}

fn power_law_tail<T: Real>(
    f: &(dyn Fn(Complex<T>) -> T + Sync),
    weight: WeightParameter<T>,
    window: &Rect<T>,
    decay: T,
) -> Result<T, QuadratureError> {
    let critical = weight.alpha + of::<T>(2.0);
    if !(decay > critical) {
        return Err(QuadratureError::DivergentTail {
            decay: decay.to_f64().unwrap_or(f64::NAN),
            critical: critical.to_f64().unwrap_or(f64::NAN),
        });
    }
    assert!(
        window.xs.left() < T::zero() && window.xs.right() > T::zero() && window.ys.left() == T::zero(),
        "power-law tail needs a truncation window anchored at the origin"
    );
    let radius = window.xs.left().abs().min(window.xs.right()).min(window.ys.right());

    // Envelope constant from boundary samples of |f(z)| |z|^decay.
    let mut m = T::zero();
    let n = 128usize;
    let (xl, xr, yt) = (window.xs.left(), window.xs.right(), window.ys.right());
    let mut probe = |x: T, y: T| {
        let r = x.hypot(y);
        let v = f(Complex::new(x, y)).abs() * r.powf(decay);
        if v > m {
            m = v;
        }
    };
    for k in 0..=n {
        let t = of::<T>(k as f64 / n as f64);
        probe(xl + (xr - xl) * t, yt);
    }
    for k in 1..=n {
        let t = of::<T>(k as f64 / n as f64);
        probe(xl, yt * t);
        probe(xr, yt * t);
    }

    let half = of::<T>(0.5);
    let angular = beta((weight.alpha + T::one()) * half, half);
    Ok(m * weight.constant * angular * radius.powf(critical - decay) / (decay - critical))
}

/// `∫_{upper half-plane} f dA_α`: the truncation-window integral, plus a tail
/// bound folded into `error_bound` when `spec` carries a power-law model.
pub fn integrate_halfplane<T: Real>(
    f: &(dyn Fn(Complex<T>) -> T + Sync),
    weight: WeightParameter<T>,
    spec: &QuadratureSpec<T>,
) -> Result<IntegralEstimate<T>, QuadratureError> {
    let tail_bound = match spec.tail {
        TailModel::Truncate => T::zero(),
        TailModel::PowerLaw { decay } => power_law_tail(f, weight, &spec.truncation, decay)?,
    };
    let interior = integrate_rect(f, weight, &spec.truncation, spec)?;
    Ok(IntegralEstimate {
        error_bound: interior.error_bound + tail_bound,
        tail_bound,
        ..interior
    })
}

/// `‖f‖_{p,α} = (∫ |f|^p dA_α)^{1/p}` over the half-plane. The estimate's
/// `value` is the norm itself; `error_bound` is propagated through the p-th
/// root as `(power + err)^{1/p} − power^{1/p}`, and `tail_bound` stays on the
/// p-th-power scale it was computed on.
pub fn bergman_norm<T: Real>(
    f: &(dyn Fn(Complex<T>) -> Complex<T> + Sync),
    p: T,
    weight: WeightParameter<T>,
    spec: &QuadratureSpec<T>,
) -> Result<IntegralEstimate<T>, QuadratureError> {
    assert!(p >= T::one(), "norm exponent must satisfy p >= 1");
    let power = integrate_halfplane(&|z| f(z).norm().powf(p), weight, spec)?;
    let base = power.value.max(T::zero());
    let root = p.recip();
    let value = base.powf(root);
    Ok(IntegralEstimate {
        value,
        error_bound: (base + power.error_bound).powf(root) - value,
        ..power
    })
}

/// Complex-valued half-plane integral: real and imaginary parts separately.
pub fn integrate_halfplane_complex<T: Real>(
    f: &(dyn Fn(Complex<T>) -> Complex<T> + Sync),
    weight: WeightParameter<T>,
    spec: &QuadratureSpec<T>,
) -> Result<ComplexIntegralEstimate<T>, QuadratureError> {
    let re = integrate_halfplane(&|z| f(z).re, weight, spec)?;
    let im = integrate_halfplane(&|z| f(z).im, weight, spec)?;
    Ok(ComplexIntegralEstimate {
        value: Complex::new(re.value, im.value),
        error_bound: re.error_bound + im.error_bound,
        tail_bound: re.tail_bound + im.tail_bound,
        cells: re.cells + im.cells,
        evaluations: re.evaluations + im.evaluations,
        converged: re.converged && im.converged,
    })
}
