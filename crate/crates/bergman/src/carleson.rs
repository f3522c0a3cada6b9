//! Test functions, pullback measures, testing integrals, and
//! boundedness/compactness certificates for the weighted composition
//! operator `f ↦ u·(f∘φ)` between Bergman spaces of the half-plane.
//!
//! The central object is the pullback measure `μ(E) = ∫_{φ⁻¹(E)} |u|^q dA_α`:
//! the mass the operator drags into a region `E`. Boundedness is governed by
//! tent-uniform control of `μ`, probed here by evaluating testing integrals
//! on concentrated unit-mass test functions over a lattice of apexes.
//! Certificates report numerical evidence — a finite lattice plus a
//! refinement-stability flag — never a proof.

use num_complex::Complex;
use rayon::prelude::*;

use crate::geometry::{clip_to_half_plane, dilate, tent, HalfPlanePoint, Interval, Rect};
use crate::quadrature::{
    integrate_halfplane, integrate_halfplane_complex, integrate_over_subset, integrate_rect,
    IntegralEstimate, QuadratureError, QuadratureSpec, TailModel, WeightParameter,
};
use crate::real::{of, Real};
use crate::special::{beta, gamma};
use crate::symbols::{masked, PoleMask, SymbolExpression};

/// `f_{a,t}(z) = y_a^{(α+2)/t} (z − ā)^{−(2α+4)/t}`: unit mass concentrated
/// at scale `y_a` around the apex `a`, normalized so that `‖f_{a,t}‖_{t,α}^t`
/// is the same for every apex and every exponent.
#[derive(Clone, Copy, Debug)]
pub struct TestFunction<T: Real> {
    apex: HalfPlanePoint<T>,
    exponent: T,
    weight: WeightParameter<T>,
}

impl<T: Real> TestFunction<T> {
    pub fn new(apex: HalfPlanePoint<T>, exponent: T, weight: WeightParameter<T>) -> Self {
        assert!(exponent >= T::one(), "test-function exponent must satisfy t >= 1");
        TestFunction { apex, exponent, weight }
    }

    pub fn apex(&self) -> HalfPlanePoint<T> {
        self.apex
    }

    pub fn exponent(&self) -> T {
        self.exponent
    }

    pub fn alpha(&self) -> T {
        self.weight.alpha()
    }

    /// Principal-branch evaluation; `z − ā` has positive imaginary part for
    /// every z in the half-plane, so the branch cut is never approached.
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let two = of::<T>(2.0);
        let a2 = self.weight.alpha() + two;
        let conj_apex = Complex::new(self.apex.x, -self.apex.y);
        (z - conj_apex).powf(-(two * a2) / self.exponent) * self.apex.y.powf(a2 / self.exponent)
    }

    /// `|f_{a,t}(z)|` decays like `|z|^{−decay}`; used for tail models.
    pub fn decay(&self) -> T {
        (of::<T>(2.0) * self.weight.alpha() + of::<T>(4.0)) / self.exponent
    }

    /// Closed form for `‖f_{a,t}‖_{t,α}^t`, independent of both `a` and `t`:
    /// the inner x-integral is `∫ dx/(x²+c²)^{α+2} = c^{−(2α+3)} √π
    /// Γ(α+3/2)/Γ(α+2)`, and the remaining y-integral is a Beta function.
    pub fn norm_power(&self) -> T {
        let alpha = self.weight.alpha();
        let one = T::one();
        let x_part = T::pi().sqrt() * gamma(alpha + of::<T>(1.5)) / gamma(alpha + of::<T>(2.0));
        self.weight.density_constant() * x_part * beta(alpha + one, alpha + of::<T>(2.0))
    }

    /// `‖f_{a,t}‖_{t,α}` from the closed form.
    pub fn norm(&self) -> T {
        self.norm_power().powf(self.exponent.recip())
    }
}

/// `‖f_{a,t}‖_{t,α}^t` by quadrature (the integrand `y_a^{α+2}|z−ā|^{−(2α+4)}`
/// does not depend on `t`). Integration runs in apex-normalized coordinates
/// `z = x_a + y_a·w` — an exact substitution under which `dA_α` picks up
/// `y_a^{α+2}` — so the bump has unit scale and the adaptive engine resolves
/// it identically for every apex.
pub fn test_function_norm<T: Real>(
    tf: &TestFunction<T>,
    spec: &QuadratureSpec<T>,
) -> Result<IntegralEstimate<T>, QuadratureError> {
    let weight = tf.weight;
    let a2 = weight.alpha() + of::<T>(2.0);
    let conj_apex = Complex::new(tf.apex.x, -tf.apex.y);
    let head = tf.apex.y.powf(a2);
    let (s, xc) = (tf.apex.y, tf.apex.x);
    let jacobian = s.powf(a2);
    let g = move |w: Complex<T>| {
        let z = Complex::new(xc + s * w.re, s * w.im);
        jacobian * head * (z - conj_apex).norm().powf(-(a2 + a2))
    };
    let spec = spec.with_tail(TailModel::PowerLaw { decay: a2 + a2 });
    integrate_halfplane(&g, weight, &spec)
}

/// Exact estimate for closed-form branches: no cells, no error.
fn exact_estimate<T: Real>(value: T) -> IntegralEstimate<T> {
    IntegralEstimate {
        value,
        error_bound: T::zero(),
        tail_bound: T::zero(),
        cells: 0,
        evaluations: 0,
        converged: true,
    }
}

/// `μ(E) = ∫_{φ⁻¹(E)} |u(z)|^q dA_α(z)` for a rectangular target `E`.
///
/// An affine `φ = a·z + b` with real `a > 0` maps rectangles to rectangles,
/// so the preimage is again a rectangle: constant `u` then gives the exact
/// closed-form measure and general `u` a smooth rectangle quadrature. Any
/// other `φ` integrates the indicator `1_E(φ(z))` over the truncation
/// window, which converges far more slowly (the discontinuity forces
/// bisection along the preimage boundary); expect to pass a looser
/// tolerance there.
pub fn pullback_measure<T: Real>(
    target: &Rect<T>,
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    q: T,
    weight: WeightParameter<T>,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<IntegralEstimate<T>, QuadratureError> {
    assert!(q > T::zero(), "pullback exponent must be positive");
    if let Some((a, b)) = phi.expr().affine_in_z() {
        if a.im == T::zero() && a.re > T::zero() {
            let a = a.re;
            let y0 = ((target.ys.left() - b.im) / a).max(T::zero());
            let y1 = ((target.ys.right() - b.im) / a).max(T::zero());
            if !(y1 > y0) {
                return Ok(exact_estimate(T::zero()));
            }
            let pre = Rect::new(
                Interval::from_endpoints(
                    (target.xs.left() - b.re) / a,
                    (target.xs.right() - b.re) / a,
                ),
                Interval::from_endpoints(y0, y1),
            );
            if u.is_constant() && masks.is_empty() {
                let factor = u.eval(Complex::i()).norm().powf(q);
                return Ok(exact_estimate(factor * weight.rect_measure(&pre)));
            }
            let g = move |z: Complex<T>| {
                if masked(masks, z) {
                    T::zero()
                } else {
                    u.eval(z).norm().powf(q)
                }
            };
            return integrate_rect(&g, weight, &pre, spec);
        }
    }

    let f = move |z: Complex<T>| u.eval(z).norm().powf(q);
    let inside = move |z: Complex<T>| {
        if masked(masks, z) {
            return false;
        }
        let w = phi.eval(z);
        w.re.is_finite()
            && w.im.is_finite()
            && target.xs.contains(w.re)
            && target.ys.contains(w.im)
    };
    integrate_over_subset(&f, &inside, weight, &spec.truncation, spec)
}

/// `‖u·(f∘φ)‖_{q,α}^q` for an arbitrary integrand `f`. Tail handling comes
/// from the caller's spec (the decay of `|u|^q|f∘φ|^q` depends on all three
/// ingredients, so it must be declared, not guessed).
pub fn weighted_norm_power<T: Real>(
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    f: &(dyn Fn(Complex<T>) -> Complex<T> + Sync),
    q: T,
    weight: WeightParameter<T>,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<IntegralEstimate<T>, QuadratureError> {
    let g = move |z: Complex<T>| {
        if masked(masks, z) {
            return T::zero();
        }
        (u.eval(z).norm() * f(phi.eval(z)).norm()).powf(q)
    };
    integrate_halfplane(&g, weight, spec)
}

/// Inflates the truncation window to the scale of a far-out apex, keeping
/// its proportions. Without this, testing integrals at `y_a` beyond the
/// window would silently report only the (tiny) truncated mass.
fn apex_window<T: Real>(spec: &QuadratureSpec<T>, apex: HalfPlanePoint<T>) -> QuadratureSpec<T> {
    let scale = T::one().max(apex.y).max(apex.x.abs() / of::<T>(32.0));
    if scale == T::one() {
        return *spec;
    }
    let t = &spec.truncation;
    QuadratureSpec {
        truncation: Rect::new(
            Interval::from_endpoints(t.xs.left() * scale, t.xs.right() * scale),
            Interval::from_endpoints(t.ys.left() * scale, t.ys.right() * scale),
        ),
        ..*spec
    }
}

/// Testing integral `∫ y_a^{(α+2)q/p} |u(z)|^q |φ(z)−ā|^{−(2α+4)q/p} dA_α`
/// — the operator's q-th norm power on the test function `f_{a,p}`. Uniform
/// boundedness of this quantity over all apexes is the boundedness
/// criterion being probed.
pub fn testing_condition_value<T: Real>(
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    apex: HalfPlanePoint<T>,
    p: T,
    q: T,
    weight: WeightParameter<T>,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<IntegralEstimate<T>, QuadratureError> {
    assert!(T::one() <= p && p <= q, "exponents must satisfy 1 <= p <= q");
    let f = TestFunction::new(apex, p, weight);
    // For an affine self-map φ(z) = az + b (real a > 0) the integrand's one
    // feature is the near-singularity of |φ(z) − ā| at (ā − b)/a, a distance
    // s = (y_a + Im b)/a below the axis. Substituting z = x_c + s·w (exact;
    // dA_α gains s^{α+2}) puts that feature at unit scale, so the adaptive
    // engine resolves every apex equally well — a 2^{-12} spike would
    // otherwise fall between the root cell's nodes and be reported as zero.
    if let Some((a, b)) = phi.expr().affine_in_z() {
        if a.im == T::zero() && a.re > T::zero() {
            let s = (apex.y + b.im) / a.re;
            if s > T::zero() && s.is_finite() {
                let xc = (apex.x - b.re) / a.re;
                let jacobian = s.powf(weight.alpha() + of::<T>(2.0));
                let g = move |w: Complex<T>| {
                    let z = Complex::new(xc + s * w.re, s * w.im);
                    if masked(masks, z) {
                        return T::zero();
                    }
                    jacobian * (u.eval(z).norm() * f.eval(phi.eval(z)).norm()).powf(q)
                };
                return integrate_halfplane(&g, weight, spec);
            }
        }
    }
    // Generic φ: the feature location has no closed form, so integrate in
    // the original frame over a window inflated to the apex scale. Apexes
    // far below the window's node spacing are out of reach on this path.
    let spec = apex_window(spec, apex);
    weighted_norm_power(u, phi, &move |w| f.eval(w), q, weight, masks, &spec)
}

/// `μ(T_a) / A_α(T_a)^{q/p}`: how much pullback mass sits on the tent at
/// `a`, against the power of the tent's size that scales correctly for
/// `A^p_α → A^q_α`.
pub fn carleson_intensity<T: Real>(
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    apex: HalfPlanePoint<T>,
    p: T,
    q: T,
    weight: WeightParameter<T>,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<IntegralEstimate<T>, QuadratureError> {
    assert!(T::one() <= p && p <= q, "exponents must satisfy 1 <= p <= q");
    let mu = pullback_measure(&tent(apex).rect(), u, phi, q, weight, masks, spec)?;
    let denom = weight.tent_measure(apex).powf(q / p);
    Ok(IntegralEstimate {
        value: mu.value / denom,
        error_bound: mu.error_bound / denom,
        tail_bound: mu.tail_bound / denom,
        ..mu
    })
}

/// Probe lattice of apexes: heights geometric (so both the boundary and
/// infinity regimes appear), horizontal offsets linear. Refinement doubles
/// both densities **and** widens both ranges, so the refined lattice
/// contains the base one; a sup that keeps growing under refinement is
/// evidence the testing condition is unbounded, a stable sup evidence it is
/// bounded.
#[derive(Clone, Debug)]
pub struct ApexLattice<T: Real> {
    level: u32,
    xs: Vec<T>,
    ys: Vec<T>,
}

impl<T: Real> Default for ApexLattice<T> {
    fn default() -> Self {
        Self::with_refinement(0)
    }
}

impl<T: Real> ApexLattice<T> {
    /// Level 0: `x ∈ {−10,−5,0,5,10}`, `y ∈ {2^k : k = −10..10}`. Each
    /// level doubles the grid densities, widens the x-range by 2, and pushes
    /// the height exponents out by 2 in both directions.
    pub fn with_refinement(level: u32) -> Self {
        let two = of::<T>(2.0);
        let l = level as i32;
        let top = 10 + 2 * l; // extreme height exponent
        let steps = (2 * top) << l; // exponent step 2^{−level}
        let mut ys = Vec::with_capacity(steps as usize + 1);
        for k in 0..=steps {
            let e = of::<T>(f64::from(-top) + f64::from(k) / f64::from(1 << l));
            ys.push(two.powf(e));
        }
        let half_range = 10 * (1 << l);
        let spacing = 5.0 / f64::from(1 << l);
        let count = (2.0 * f64::from(half_range) / spacing).round() as i32;
        let mut xs = Vec::with_capacity(count as usize + 1);
        for k in 0..=count {
            xs.push(of::<T>(f64::from(-half_range) + spacing * f64::from(k)));
        }
        ApexLattice { level, xs, ys }
    }

    pub fn refined(&self) -> Self {
        Self::with_refinement(self.level + 1)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty() || self.ys.is_empty()
    }

    /// Apexes in a fixed order: heights outermost (ascending), offsets
    /// innermost. Sweeps over the lattice are deterministic because of it.
    pub fn points(&self) -> Vec<HalfPlanePoint<T>> {
        let mut out = Vec::with_capacity(self.len());
        for &y in &self.ys {
            for &x in &self.xs {
                out.push(HalfPlanePoint::new(x, y));
            }
        }
        out
    }
}

/// What a certificate claims. Always numerical evidence over a finite
/// lattice, never a theorem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Bounded,
    Unbounded,
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded",
            Verdict::Unbounded => "unbounded",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Relative sup movement below this fraction counts as "stable under
/// refinement"; above it (upward) as growth.
pub const STABILITY_TOLERANCE: f64 = 0.05;

/// One testing value at one apex.
#[derive(Clone, Copy, Debug)]
pub struct ApexSample<T: Real> {
    pub apex: HalfPlanePoint<T>,
    pub value: T,
    pub error_bound: T,
    pub converged: bool,
}

/// Testing-condition sup over a lattice and over its refinement, with the
/// stability verdict. Embeds both sample sets so reports can show exactly
/// what was probed.
#[derive(Clone, Debug)]
pub struct BoundednessCertificate<T: Real> {
    pub p: T,
    pub q: T,
    pub alpha: T,
    pub lattice_level: u32,
    pub rel_tol: T,
    pub abs_tol: T,
    pub base_sup: T,
    pub refined_sup: T,
    pub base_argmax: HalfPlanePoint<T>,
    pub refined_argmax: HalfPlanePoint<T>,
    pub relative_change: T,
    pub all_converged: bool,
    pub verdict: Verdict,
    pub base_samples: Vec<ApexSample<T>>,
    pub refined_samples: Vec<ApexSample<T>>,
}

fn sweep_lattice<T: Real>(
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    p: T,
    q: T,
    weight: WeightParameter<T>,
    lattice: &ApexLattice<T>,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<Vec<ApexSample<T>>, QuadratureError> {
    let points = lattice.points();
    let estimates: Vec<IntegralEstimate<T>> = points
        .par_iter()
        .map(|&a| testing_condition_value(u, phi, a, p, q, weight, masks, spec))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(points
        .into_iter()
        .zip(estimates)
        .map(|(apex, est)| ApexSample {
            apex,
            value: est.value,
            error_bound: est.error_bound,
            converged: est.converged,
        })
        .collect())
}

fn sup_sample<T: Real>(samples: &[ApexSample<T>]) -> (T, HalfPlanePoint<T>) {
    let mut best = samples[0];
    for s in &samples[1..] {
        if s.value > best.value {
            best = *s;
        }
    }
    (best.value, best.apex)
}

/// Sweeps the testing condition over a lattice and its refinement.
///
/// Verdict rules: any non-converged quadrature → inconclusive; otherwise a
/// sup that moved less than [`STABILITY_TOLERANCE`] → bounded, a sup that
/// grew more than that → unbounded. (The refined lattice contains the base
/// one, so the sup cannot honestly shrink.)
pub fn boundedness_certificate<T: Real>(
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    p: T,
    q: T,
    weight: WeightParameter<T>,
    lattice: &ApexLattice<T>,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<BoundednessCertificate<T>, QuadratureError> {
    let base_samples = sweep_lattice(u, phi, p, q, weight, lattice, masks, spec)?;
    let refined_samples = sweep_lattice(u, phi, p, q, weight, &lattice.refined(), masks, spec)?;

    let (base_sup, base_argmax) = sup_sample(&base_samples);
    let (refined_sup, refined_argmax) = sup_sample(&refined_samples);
    let all_converged = base_samples.iter().chain(&refined_samples).all(|s| s.converged);

    let floor = of::<T>(1e-12);
    let relative_change = (refined_sup - base_sup) / base_sup.max(floor);
    let stability = of::<T>(STABILITY_TOLERANCE);
    let verdict = if !all_converged {
        Verdict::Inconclusive
    } else if relative_change > stability {
        Verdict::Unbounded
    } else if relative_change.abs() <= stability {
        Verdict::Bounded
    } else {
        // A large downward move means the base sup was an artifact.
        Verdict::Inconclusive
    };

    Ok(BoundednessCertificate {
        p,
        q,
        alpha: weight.alpha(),
        lattice_level: lattice.level(),
        rel_tol: spec.rel_tol,
        abs_tol: spec.abs_tol,
        base_sup,
        refined_sup,
        base_argmax,
        refined_argmax,
        relative_change,
        all_converged,
        verdict,
        base_samples,
        refined_samples,
    })
}

/// One certificate per lower exponent β of a grid inside `[p, q]`: how the
/// verdict behaves as the source space shrinks toward the target space.
#[derive(Clone, Debug)]
pub struct SweepEntry<T: Real> {
    pub lower_exponent: T,
    pub certificate: BoundednessCertificate<T>,
}

pub fn boundedness_sweep<T: Real>(
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    p: T,
    q: T,
    betas: &[T],
    weight: WeightParameter<T>,
    lattice: &ApexLattice<T>,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<Vec<SweepEntry<T>>, QuadratureError> {
    assert!(T::one() <= p && p <= q, "exponents must satisfy 1 <= p <= q");
    let mut out = Vec::with_capacity(betas.len());
    for &beta in betas {
        assert!(
            p <= beta && beta <= q,
            "sweep exponents must lie between the endpoint exponents"
        );
        let certificate = boundedness_certificate(u, phi, beta, q, weight, lattice, masks, spec)?;
        out.push(SweepEntry { lower_exponent: beta, certificate });
    }
    Ok(out)
}

/// The three default ways an apex can escape the half-plane: straight down
/// to the boundary, straight up to infinity, and sideways at fixed height.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EscapeRoute {
    Boundary,
    Infinity,
    Tangential,
}

impl EscapeRoute {
    pub const ALL: [EscapeRoute; 3] =
        [EscapeRoute::Boundary, EscapeRoute::Infinity, EscapeRoute::Tangential];

    pub fn label(self) -> &'static str {
        match self {
            EscapeRoute::Boundary => "boundary",
            EscapeRoute::Infinity => "infinity",
            EscapeRoute::Tangential => "tangential",
        }
    }

    fn apex<T: Real>(self, n: u32) -> HalfPlanePoint<T> {
        let two = of::<T>(2.0);
        match self {
            EscapeRoute::Boundary => HalfPlanePoint::new(T::zero(), two.powi(-(n as i32))),
            EscapeRoute::Infinity => HalfPlanePoint::new(T::zero(), two.powi(n as i32)),
            EscapeRoute::Tangential => HalfPlanePoint::new(of::<T>(f64::from(n)), T::one()),
        }
    }

    /// The natural escape parameter, for decay fits.
    fn scale<T: Real>(self, n: u32) -> T {
        let two = of::<T>(2.0);
        match self {
            EscapeRoute::Boundary => two.powi(-(n as i32)),
            EscapeRoute::Infinity => two.powi(n as i32),
            EscapeRoute::Tangential => of::<T>(f64::from(n)),
        }
    }
}

/// Least-squares slope of `ln value` against `ln scale`; `None` when a value
/// is zero/negative (no log) or the scales are degenerate.
fn fitted_slope<T: Real>(scales: &[T], values: &[T]) -> Option<T> {
    if scales.len() < 2 || values.iter().any(|v| !(*v > T::zero())) {
        return None;
    }
    let n = of::<T>(scales.len() as f64);
    let ls: Vec<T> = scales.iter().map(|s| s.ln()).collect();
    let lv: Vec<T> = values.iter().map(|v| v.ln()).collect();
    let mean = |v: &[T]| v.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (ms, mv) = (mean(&ls), mean(&lv));
    let mut num = T::zero();
    let mut den = T::zero();
    for k in 0..ls.len() {
        num += (ls[k] - ms) * (lv[k] - mv);
        den += (ls[k] - ms) * (ls[k] - ms);
    }
    if den > T::zero() {
        Some(num / den)
    } else {
        None
    }
}

/// Testing values along one escape route.
#[derive(Clone, Debug)]
pub struct VanishingProfile<T: Real> {
    pub route: EscapeRoute,
    pub apexes: Vec<HalfPlanePoint<T>>,
    pub values: Vec<T>,
    /// d ln(value) / d ln(scale) along the route, when all values are
    /// positive.
    pub fitted_slope: Option<T>,
    /// Last value at or below `10^{-3}` of the largest value seen on any
    /// route (plus an absolute epsilon for the identically-zero case).
    pub vanishes: bool,
}

/// Necessary-condition probe for compactness: the testing values must die
/// out along every escape route. A route that stalls at a positive level is
/// direct evidence against compactness; all routes vanishing is supporting
/// (not conclusive) evidence for it.
#[derive(Clone, Debug)]
pub struct CompactnessProbe<T: Real> {
    pub profiles: Vec<VanishingProfile<T>>,
    pub global_max: T,
    pub all_vanish: bool,
    pub all_converged: bool,
}

pub fn vanishing_probe<T: Real>(
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    p: T,
    q: T,
    weight: WeightParameter<T>,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
    steps: u32,
) -> Result<CompactnessProbe<T>, QuadratureError> {
    assert!(steps >= 2, "an escape route needs at least two steps");
    let jobs: Vec<(EscapeRoute, u32)> = EscapeRoute::ALL
        .iter()
        .flat_map(|&r| (1..=steps).map(move |n| (r, n)))
        .collect();
    let estimates: Vec<IntegralEstimate<T>> = jobs
        .par_iter()
        .map(|&(r, n)| testing_condition_value(u, phi, r.apex(n), p, q, weight, masks, spec))
        .collect::<Result<Vec<_>, _>>()?;

    let mut global_max = T::zero();
    for e in &estimates {
        if e.value > global_max {
            global_max = e.value;
        }
    }
    let threshold = of::<T>(1e-3) * global_max + of::<T>(1e-12);
    let all_converged = estimates.iter().all(|e| e.converged);

    let mut profiles = Vec::with_capacity(EscapeRoute::ALL.len());
    for (i, &route) in EscapeRoute::ALL.iter().enumerate() {
        let chunk = &estimates[i * steps as usize..(i + 1) * steps as usize];
        let apexes: Vec<HalfPlanePoint<T>> = (1..=steps).map(|n| route.apex(n)).collect();
        let scales: Vec<T> = (1..=steps).map(|n| route.scale(n)).collect();
        let values: Vec<T> = chunk.iter().map(|e| e.value).collect();
        let vanishes = *values.last().expect("steps >= 2") <= threshold;
        profiles.push(VanishingProfile {
            route,
            apexes,
            fitted_slope: fitted_slope(&scales, &values),
            values,
            vanishes,
        });
    }

    Ok(CompactnessProbe {
        all_vanish: profiles.iter().all(|p| p.vanishes),
        profiles,
        global_max,
        all_converged,
    })
}

/// Self-consistency check of the reproducing identity
/// `f(z) = C ∫ f(ζ) (i(ζ̄−z))^{−(α+2)} dA_α(ζ)` on a test function: the
/// ratio `f(z) / integral` at a spread of points. The mean ratio estimates
/// the constant `C` (1 for this normalization); the dispersion measures how
/// constant the ratios actually are.
#[derive(Clone, Debug)]
pub struct ReproducingCheck<T: Real> {
    pub points: Vec<HalfPlanePoint<T>>,
    pub ratios: Vec<Complex<T>>,
    pub constant_estimate: Complex<T>,
    /// max over points of |ratio − mean| / |mean|.
    pub dispersion: T,
    pub all_converged: bool,
}

pub fn reproducing_check<T: Real>(
    f: &TestFunction<T>,
    points: &[HalfPlanePoint<T>],
    weight: WeightParameter<T>,
    spec: &QuadratureSpec<T>,
) -> Result<ReproducingCheck<T>, QuadratureError> {
    assert!(!points.is_empty(), "reproducing check needs sample points");
    let a2 = weight.alpha() + of::<T>(2.0);
    // The product integrand decays like |ζ|^{−(α+2)−decay(f)}; the window
    // below keeps the truncated mass at the 1e−6 relative level, and the
    // absolute tolerance floor stops the engine from chasing a vanishing
    // imaginary part forever.
    let window = of::<T>(1024.0);
    let spec = QuadratureSpec {
        abs_tol: spec.abs_tol.max(of::<T>(1e-10)),
        max_cells: spec.max_cells.max(60_000),
        truncation: Rect::new(
            Interval::from_endpoints(-window, window),
            Interval::from_endpoints(T::zero(), window),
        ),
        tail: TailModel::PowerLaw { decay: a2 + f.decay() },
        ..*spec
    };

    let outcomes: Vec<(Complex<T>, bool)> = points
        .par_iter()
        .map(|&zp| {
            let z = zp.complex();
            let kernel = move |zeta: Complex<T>| {
                // i(ζ̄ − z) has positive real part on the half-plane.
                f.eval(zeta) * (Complex::<T>::i() * (zeta.conj() - z)).powf(-a2)
            };
            integrate_halfplane_complex(&kernel, weight, &spec)
                .map(|est| (f.eval(z) / est.value, est.converged))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let all_converged = outcomes.iter().all(|&(_, c)| c);
    let ratios: Vec<Complex<T>> = outcomes.into_iter().map(|(r, _)| r).collect();

    let n = of::<T>(ratios.len() as f64);
    let mut sum = Complex::new(T::zero(), T::zero());
    for r in &ratios {
        sum += *r;
    }
    let mean = sum / n;
    let mut dispersion = T::zero();
    for r in &ratios {
        let d = (*r - mean).norm() / mean.norm();
        if d > dispersion {
            dispersion = d;
        }
    }

    Ok(ReproducingCheck {
        points: points.to_vec(),
        ratios,
        constant_estimate: mean,
        dispersion,
        all_converged,
    })
}

/// Default spread of sample points for [`reproducing_check`].
pub fn default_check_points<T: Real>() -> Vec<HalfPlanePoint<T>> {
    let mut out = Vec::with_capacity(10);
    for &y in &[0.5, 2.0] {
        for &x in &[-2.0, -1.0, 0.0, 1.0, 2.0] {
            out.push(HalfPlanePoint::new(of::<T>(x), of::<T>(y)));
        }
    }
    out
}

/// Sub-mean-value diagnostic: largest `|f|` on a 5×5 sample grid inside
/// `rect` against the average of `|f|` over the 3/2-dilation (clipped to the
/// half-plane), normalized by `A_α(rect)`.
#[derive(Clone, Copy, Debug)]
pub struct MeanValueCheck<T: Real> {
    pub max_sample: T,
    pub dilated_average: T,
    pub ratio: T,
    pub converged: bool,
}

pub fn mean_value_check<T: Real>(
    f: &(dyn Fn(Complex<T>) -> Complex<T> + Sync),
    rect: &Rect<T>,
    weight: WeightParameter<T>,
    spec: &QuadratureSpec<T>,
) -> Result<MeanValueCheck<T>, QuadratureError> {
    let mut max_sample = T::zero();
    let five = of::<T>(5.0);
    for j in 0..5 {
        for k in 0..5 {
            let tx = (of::<T>(f64::from(j)) + of::<T>(0.5)) / five;
            let ty = (of::<T>(f64::from(k)) + of::<T>(0.5)) / five;
            let z = Complex::new(
                rect.xs.left() + rect.xs.length() * tx,
                rect.ys.left() + rect.ys.length() * ty,
            );
            let v = f(z).norm();
            if v > max_sample {
                max_sample = v;
            }
        }
    }

    let dilated = clip_to_half_plane(dilate(*rect, of::<T>(1.5)))
        .expect("the dilation of a half-plane rectangle meets the half-plane");
    let integral = integrate_rect(&|z| f(z).norm(), weight, &dilated, spec)?;
    let dilated_average = integral.value / weight.rect_measure(rect);
    Ok(MeanValueCheck {
        max_sample,
        dilated_average,
        ratio: max_sample / dilated_average,
        converged: integral.converged,
    })
}
