//! Numerical certification toolkit for weighted composition operators
//! `f ↦ u · (f ∘ φ)` acting between Bergman spaces of the upper half-plane.
//!
//! The library is organised around the objects the estimates are built from:
//!
//! * [`geometry`] — half-open intervals, Carleson boxes and tents, Whitney
//!   decompositions, and three shifted dyadic grids with exact
//!   (integer-mantissa) coordinate arithmetic.
//! * [`quadrature`] — an adaptive two-dimensional integrator for the weighted
//!   area measure, with singular-axis substitution, tail models, and
//!   deterministic compensated summation.
//! * [`symbols`] — a small expression language for symbols `u`, `φ` and
//!   weights `ω`, with holomorphy-safe validation.
//! * [`carleson`] — test functions, Carleson/testing conditions, boundedness
//!   and compactness probes, reproducing-kernel and mean-value checks.
//! * [`sparse`] — sparse forms over truncated box collections, dyadic and
//!   fractional maximal operators, kernel domination, compactness tails.
//! * [`weights`] — the B-class of weights and the weighted estimate check.
//!
//! All analysis code is generic over the floating scalar via [`Real`];
//! concrete `f64` aliases are exported at the crate root. Certificates
//! produced here are *numerical evidence* over explicit lattices and
//! truncations, never symbolic proofs: every certificate embeds the lattice,
//! tolerances, and truncation it was computed with.

pub mod accum;
pub mod carleson;
pub mod geometry;
pub mod quadrature;
pub mod real;
pub mod sparse;
pub mod special;
pub mod symbols;
pub mod weights;

pub use real::Real;

/// Default scalar for desk-scale runs and the CLI.
pub type Scalar = f64;

/// `f64` point of the open upper half-plane.
pub type Point = geometry::HalfPlanePoint<Scalar>;
/// `f64` half-open interval.
pub type Interval = geometry::Interval<Scalar>;
/// `f64` axis-aligned rectangle.
pub type Rect = geometry::Rect<Scalar>;
/// `f64` Carleson box.
pub type CarlesonBox = geometry::CarlesonBox<Scalar>;
/// `f64` quadrature control knobs.
pub type QuadratureSpec = quadrature::QuadratureSpec<Scalar>;
/// `f64` integral estimate.
pub type IntegralEstimate = quadrature::IntegralEstimate<Scalar>;
/// `f64` symbol expression.
pub type SymbolExpression = symbols::SymbolExpression<Scalar>;
/// `f64` weight expression.
pub type WeightExpression = symbols::WeightExpression<Scalar>;
/// `f64` test function.
pub type TestFunction = carleson::TestFunction<Scalar>;
