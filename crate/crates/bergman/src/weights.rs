//! The ζ-indexed weight class behind the weighted estimate: per-ζ class
//! integrals `∫ |u|^q ω / |ζ̄−φ(z)|^{α+2} dA_α`, lattice certificates of the
//! class constant, tent-mass probes that separate the class from plain
//! Carleson behavior, and the corpus check of the weighted bound itself.

use num_complex::Complex;
use rayon::prelude::*;

use crate::carleson::{ApexLattice, TestFunction, STABILITY_TOLERANCE};
use crate::geometry::{tent, HalfPlanePoint, Interval, Rect};
use crate::quadrature::{
    integrate_halfplane, integrate_rect, IntegralEstimate, QuadratureError, QuadratureSpec,
    WeightParameter,
};
use crate::real::{of, Real};
use crate::symbols::{masked, PoleMask, SymbolExpression, WeightExpression};

/// Exponent and symbol data for the weight class: target exponent `q > 1`,
/// the Hölder split order `s ∈ (1, q')`, the symbol pair, and the weight.
#[derive(Clone, Debug)]
pub struct BWeightParams<T: Real> {
    u: SymbolExpression<T>,
    phi: SymbolExpression<T>,
    omega: WeightExpression<T>,
    q: T,
    s: T,
    weight: WeightParameter<T>,
}

impl<T: Real> BWeightParams<T> {
    /// The split order defaults to the midpoint `(1 + q')/2` of its
    /// admissible range.
    pub fn new(
        u: SymbolExpression<T>,
        phi: SymbolExpression<T>,
        omega: WeightExpression<T>,
        q: T,
        weight: WeightParameter<T>,
    ) -> Self {
        assert!(q > T::one(), "class exponent must satisfy q > 1");
        let qc = q / (q - T::one());
        let s = (T::one() + qc) / of::<T>(2.0);
        BWeightParams { u, phi, omega, q, s, weight }
    }

    pub fn with_split(mut self, s: T) -> Self {
        assert!(
            T::one() < s && s < self.q_conjugate(),
            "split order must satisfy 1 < s < q'"
        );
        self.s = s;
        self
    }

    pub fn u(&self) -> &SymbolExpression<T> {
        &self.u
    }

    pub fn phi(&self) -> &SymbolExpression<T> {
        &self.phi
    }

    pub fn omega(&self) -> &WeightExpression<T> {
        &self.omega
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn s(&self) -> T {
        self.s
    }

    pub fn alpha(&self) -> T {
        self.weight.alpha()
    }

    pub fn weight(&self) -> WeightParameter<T> {
        self.weight
    }

    pub fn q_conjugate(&self) -> T {
        self.q / (self.q - T::one())
    }

    pub fn s_conjugate(&self) -> T {
        self.s / (self.s - T::one())
    }
}

/// Class integral for an arbitrary weight sample (not just a parsed
/// expression): `∫ |u(z)|^q ω(z) / |ζ̄−φ(z)|^{α+2} dA_α(z)`.
///
/// The quadrature window and tail model come from `spec`: a compactly
/// supported weight wants a window covering exactly its support (the
/// integrand is zero beyond it, and a window much larger than the support
/// starves the sampler); a weight with power decay wants the matching
/// power-law tail, which also flags borderline-divergent integrals.
pub fn b_class_value_of<T: Real>(
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    omega: &(dyn Fn(Complex<T>) -> T + Sync),
    q: T,
    zeta: HalfPlanePoint<T>,
    weight: WeightParameter<T>,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<IntegralEstimate<T>, QuadratureError> {
    assert!(q > T::one(), "class exponent must satisfy q > 1");
    let a2 = weight.alpha() + of::<T>(2.0);
    let conj_zeta = Complex::new(zeta.x, -zeta.y);
    let g = move |z: Complex<T>| {
        if masked(masks, z) {
            return T::zero();
        }
        let w = omega(z).max(T::zero());
        if w == T::zero() {
            return T::zero();
        }
        u.eval(z).norm().powf(q) * w * (conj_zeta - phi.eval(z)).norm().powf(-a2)
    };
    integrate_halfplane(&g, weight, spec)
}

/// [`b_class_value_of`] for the parameter set's own weight.
pub fn b_class_value<T: Real>(
    params: &BWeightParams<T>,
    zeta: HalfPlanePoint<T>,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<IntegralEstimate<T>, QuadratureError> {
    b_class_value_of(
        &params.u,
        &params.phi,
        &|z| params.omega.eval(z),
        params.q,
        zeta,
        params.weight,
        masks,
        spec,
    )
}

/// What a class certificate claims about the weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassVerdict {
    InClass,
    NotInClass,
    Inconclusive,
}

impl ClassVerdict {
    pub fn label(self) -> &'static str {
        match self {
            ClassVerdict::InClass => "in-class",
            ClassVerdict::NotInClass => "not-in-class",
            ClassVerdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for ClassVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One class integral at one probe point.
#[derive(Clone, Copy, Debug)]
pub struct ZetaSample<T: Real> {
    pub zeta: HalfPlanePoint<T>,
    pub value: T,
    pub error_bound: T,
    pub converged: bool,
}

/// Class-constant estimate: the sup of class integrals over a probe lattice
/// and over its refinement, with the stability verdict.
#[derive(Clone, Debug)]
pub struct WeightCertificate<T: Real> {
    pub q: T,
    pub s: T,
    pub alpha: T,
    pub lattice_level: u32,
    pub base_sup: T,
    pub refined_sup: T,
    pub base_argmax: HalfPlanePoint<T>,
    pub refined_argmax: HalfPlanePoint<T>,
    pub relative_change: T,
    /// Some class integral diverges outright (borderline tail decay). The
    /// sups then cover only the finite samples and undercount the true
    /// class constant, which is infinite.
    pub divergent: bool,
    pub all_converged: bool,
    pub verdict: ClassVerdict,
    pub base_samples: Vec<ZetaSample<T>>,
    pub refined_samples: Vec<ZetaSample<T>>,
}

enum SweepOutcome<T: Real> {
    Finite(Vec<ZetaSample<T>>),
    Divergent(Vec<ZetaSample<T>>),
}

fn sweep_zetas<T: Real>(
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    omega: &(dyn Fn(Complex<T>) -> T + Sync),
    q: T,
    weight: WeightParameter<T>,
    lattice: &ApexLattice<T>,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<SweepOutcome<T>, QuadratureError> {
    let points = lattice.points();
    let estimates: Vec<Result<IntegralEstimate<T>, QuadratureError>> = points
        .par_iter()
        .map(|&z| b_class_value_of(u, phi, omega, q, z, weight, masks, spec))
        .collect();
    let mut samples = Vec::with_capacity(points.len());
    let mut divergent = false;
    for (zeta, est) in points.into_iter().zip(estimates) {
        match est {
            Ok(est) => samples.push(ZetaSample {
                zeta,
                value: est.value,
                error_bound: est.error_bound,
                converged: est.converged,
            }),
            Err(QuadratureError::DivergentTail { .. }) => divergent = true,
            Err(other) => return Err(other),
        }
    }
    Ok(if divergent { SweepOutcome::Divergent(samples) } else { SweepOutcome::Finite(samples) })
}

fn sup_sample<T: Real>(samples: &[ZetaSample<T>]) -> (T, HalfPlanePoint<T>) {
    let mut best_value = T::zero();
    let mut best_zeta = HalfPlanePoint::new(T::zero(), T::one());
    for s in samples {
        if s.value > best_value {
            best_value = s.value;
            best_zeta = s.zeta;
        }
    }
    (best_value, best_zeta)
}

/// Doubles the truncation window (keeping its lower edge on the axis), so
/// the refined pass integrates over more of the half-plane as well as
/// probing more ζ.
fn widen_window<T: Real>(spec: &QuadratureSpec<T>) -> QuadratureSpec<T> {
    let two = of::<T>(2.0);
    let xs = &spec.truncation.xs;
    let ys = &spec.truncation.ys;
    let mut wide = *spec;
    wide.truncation = Rect::new(
        Interval::new(xs.left() * two, xs.length() * two),
        Interval::from_endpoints(ys.left(), ys.right() * two),
    );
    wide
}

/// Class-constant sweep for an arbitrary weight sample. The refined pass
/// enlarges both the probe lattice and the integration window, so weights
/// that pile up mass toward infinity reveal themselves as growth; borderline
/// tail divergence is caught per point and reported, not propagated.
#[allow(clippy::too_many_arguments)]
pub fn b_class_constant_of<T: Real>(
    u: &SymbolExpression<T>,
    phi: &SymbolExpression<T>,
    omega: &(dyn Fn(Complex<T>) -> T + Sync),
    q: T,
    s: T,
    weight: WeightParameter<T>,
    lattice: &ApexLattice<T>,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<WeightCertificate<T>, QuadratureError> {
    let base = sweep_zetas(u, phi, omega, q, weight, lattice, masks, spec)?;
    let wide = widen_window(spec);
    let refined =
        sweep_zetas(u, phi, omega, q, weight, &lattice.refined(), masks, &wide)?;

    let divergent =
        matches!(base, SweepOutcome::Divergent(_)) || matches!(refined, SweepOutcome::Divergent(_));
    let (base_samples, refined_samples) = match (base, refined) {
        (
            SweepOutcome::Finite(b) | SweepOutcome::Divergent(b),
            SweepOutcome::Finite(r) | SweepOutcome::Divergent(r),
        ) => (b, r),
    };
    let (base_sup, base_argmax) = sup_sample(&base_samples);
    let (refined_sup, refined_argmax) = sup_sample(&refined_samples);
    let all_converged =
        !divergent && base_samples.iter().chain(&refined_samples).all(|s| s.converged);

    let floor = of::<T>(1e-12);
    let relative_change = (refined_sup - base_sup) / base_sup.max(floor);
    let stability = of::<T>(STABILITY_TOLERANCE);
    let verdict = if divergent {
        ClassVerdict::NotInClass
    } else if !all_converged {
        ClassVerdict::Inconclusive
    } else if relative_change > stability {
        ClassVerdict::NotInClass
    } else if relative_change.abs() <= stability {
        ClassVerdict::InClass
    } else {
        // A large downward move means the base sup was an artifact.
        ClassVerdict::Inconclusive
    };

    Ok(WeightCertificate {
        q,
        s,
        alpha: weight.alpha(),
        lattice_level: lattice.level(),
        base_sup,
        refined_sup,
        base_argmax,
        refined_argmax,
        relative_change,
        divergent,
        all_converged,
        verdict,
        base_samples,
        refined_samples,
    })
}

/// [`b_class_constant_of`] for the parameter set's own weight.
pub fn b_class_constant<T: Real>(
    params: &BWeightParams<T>,
    lattice: &ApexLattice<T>,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<WeightCertificate<T>, QuadratureError> {
    b_class_constant_of(
        &params.u,
        &params.phi,
        &|z| params.omega.eval(z),
        params.q,
        params.s,
        params.weight,
        lattice,
        masks,
        spec,
    )
}

/// Weighted tent mass against plain tent measure at one apex height.
#[derive(Clone, Copy, Debug)]
pub struct TentRatio<T: Real> {
    pub y: T,
    pub weighted_mass: T,
    pub tent_mass: T,
    pub ratio: T,
    pub converged: bool,
}

/// Profile of `ω(T_{iy}) / A_α(T_{iy})` along a sequence of apex heights.
/// A weight whose profile blows up as `y → 0` is not Carleson even when it
/// sits in the class; a vanishing profile is vanishing-Carleson behavior.
pub fn not_carleson_probe<T: Real>(
    omega: &WeightExpression<T>,
    weight: WeightParameter<T>,
    heights: &[T],
    spec: &QuadratureSpec<T>,
) -> Result<Vec<TentRatio<T>>, QuadratureError> {
    heights
        .iter()
        .map(|&y| {
            assert!(y > T::zero() && y.is_finite(), "apex height must be positive");
            let apex = HalfPlanePoint::new(T::zero(), y);
            let mass = integrate_rect(
                &|z| omega.eval(z).max(T::zero()),
                weight,
                &tent(apex).rect(),
                spec,
            )?;
            let tent_mass = weight.tent_measure(apex);
            Ok(TentRatio {
                y,
                weighted_mass: mass.value,
                tent_mass,
                ratio: mass.value / tent_mass,
                converged: mass.converged,
            })
        })
        .collect()
}

/// One corpus row of the weighted-estimate comparison: the weighted operator
/// mass of a kernel test function against the certified bound.
#[derive(Clone, Copy, Debug)]
pub struct EstimateRow<T: Real> {
    pub apex: HalfPlanePoint<T>,
    /// `∫ |u|^q |f∘φ|^q ω dA_α`.
    pub lhs: T,
    /// `[ω^{s'}]^{1/s'} · ‖f‖_{q,α}^q`.
    pub rhs: T,
    /// `lhs/rhs`; absent when the bound side vanishes.
    pub ratio: Option<T>,
    pub converged: bool,
}

/// Corpus table for the weighted estimate, with the class certificate of
/// `ω^{s'}` it rests on.
#[derive(Clone, Debug)]
pub struct WeightedEstimateTable<T: Real> {
    pub class_certificate: WeightCertificate<T>,
    /// `[ω^{s'}]^{1/s'}` from the refined sup.
    pub class_constant: T,
    pub rows: Vec<EstimateRow<T>>,
    pub max_ratio: Option<T>,
    pub min_ratio: Option<T>,
    pub all_converged: bool,
}

/// Checks `∫ |u|^q |f∘φ|^q ω dA_α ≤ C · [ω^{s'}]^{1/s'} ‖f‖_{q,α}^q` across
/// kernel test functions `f = f_{a,q}` at the given apexes, reporting both
/// sides and the observed constant. The boundedness of the operator itself
/// is a standing hypothesis of the estimate and is certified separately.
pub fn weighted_estimate_check<T: Real>(
    params: &BWeightParams<T>,
    apexes: &[HalfPlanePoint<T>],
    lattice: &ApexLattice<T>,
    masks: &[PoleMask<T>],
    spec: &QuadratureSpec<T>,
) -> Result<WeightedEstimateTable<T>, QuadratureError> {
    assert!(!apexes.is_empty(), "estimate check needs at least one test function");
    let sc = params.s_conjugate();
    let class_certificate = b_class_constant_of(
        &params.u,
        &params.phi,
        &|z| params.omega.eval(z).max(T::zero()).powf(sc),
        params.q,
        params.s,
        params.weight,
        lattice,
        masks,
        spec,
    )?;
    let class_constant = class_certificate.refined_sup.max(T::zero()).powf(sc.recip());

    let q = params.q;
    let rows: Vec<EstimateRow<T>> = apexes
        .par_iter()
        .map(|&apex| -> Result<EstimateRow<T>, QuadratureError> {
            let f = TestFunction::new(apex, q, params.weight);
            let g = move |z: Complex<T>| {
                if masked(masks, z) {
                    return T::zero();
                }
                let w = params.omega.eval(z).max(T::zero());
                if w == T::zero() {
                    return T::zero();
                }
                let uv = params.u.eval(z).norm();
                (uv * f.eval(params.phi.eval(z)).norm()).powf(q) * w
            };
            let lhs = integrate_halfplane(&g, params.weight, spec)?;
            let rhs = class_constant * f.norm_power();
            Ok(EstimateRow {
                apex,
                lhs: lhs.value,
                rhs,
                ratio: (rhs > T::zero()).then(|| lhs.value / rhs),
                converged: lhs.converged,
            })
        })
        .collect::<Result<_, _>>()?;

    let ratios: Vec<T> = rows.iter().filter_map(|r| r.ratio).collect();
    let max_ratio =
        ratios.iter().copied().fold(None, |acc: Option<T>, r| Some(acc.map_or(r, |a| a.max(r))));
    let min_ratio =
        ratios.iter().copied().fold(None, |acc: Option<T>, r| Some(acc.map_or(r, |a| a.min(r))));
    let all_converged =
        class_certificate.all_converged && rows.iter().all(|r| r.converged);
    Ok(WeightedEstimateTable {
        class_certificate,
        class_constant,
        rows,
        max_ratio,
        min_ratio,
        all_converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::TailModel;
    use approx::assert_relative_eq;

    fn sym(s: &str) -> SymbolExpression<f64> {
        SymbolExpression::parse(s).unwrap()
    }

    fn wexpr(s: &str) -> WeightExpression<f64> {
        WeightExpression::parse(s).unwrap()
    }

    /// Window covering exactly the support of the disk-restricted weights;
    /// the class integrand vanishes beyond it, so truncation there is exact.
    fn disk_spec() -> QuadratureSpec<f64> {
        let mut spec = QuadratureSpec::default();
        spec.truncation =
            Rect::new(Interval::new(-1.0, 2.0), Interval::new(0.0, 1.0));
        spec.rel_tol = 1e-3;
        spec
    }

    fn disk_weight_params() -> BWeightParams<f64> {
        BWeightParams::new(
            sym("1"),
            sym("z + i"),
            wexpr("indisk(z) / abs(z)"),
            1.5,
            WeightParameter::new(0.0),
        )
        .with_split(2.5)
    }

    #[test]
    fn conjugate_identities_and_default_split() {
        for q in [1.5, 2.0, 3.0, 7.0] {
            let params = BWeightParams::new(
                sym("1"),
                sym("z + i"),
                wexpr("1"),
                q,
                WeightParameter::new(0.0),
            );
            assert_relative_eq!(1.0 / params.q() + 1.0 / params.q_conjugate(), 1.0);
            assert_relative_eq!(1.0 / params.s() + 1.0 / params.s_conjugate(), 1.0);
            assert!(1.0 < params.s() && params.s() < params.q_conjugate());
            assert_relative_eq!(params.s(), (1.0 + params.q_conjugate()) / 2.0);
        }
    }

    #[test]
    fn disk_weight_class_value_is_bracketed_at_i() {
        let params = disk_weight_params();
        let spec = disk_spec();
        let at_i =
            b_class_value(&params, HalfPlanePoint::new(0.0, 1.0), &[], &spec).unwrap();
        // 4 ≤ |z+2i|² ≤ 9 on the support, and the support carries unit mass
        // under (1/|z|) dA_0.
        assert!(
            (1.0 / 9.0..=0.25).contains(&at_i.value),
            "value {} outside the analytic bracket",
            at_i.value
        );

        // The same integral is uniformly ≤ 1 over ζ: |ζ̄−z−i| ≥ 1.
        for (x, y) in [(0.0, 1e-3), (0.0, 0.5), (3.0, 2.0), (-10.0, 1e-2), (0.5, 100.0)] {
            let v = b_class_value(&params, HalfPlanePoint::new(x, y), &[], &spec).unwrap();
            assert!(v.value <= 1.0 + 1e-6, "value {} at ζ = ({x}, {y})", v.value);
        }

        let zero = BWeightParams::new(
            sym("1"),
            sym("z + i"),
            wexpr("0"),
            1.5,
            WeightParameter::new(0.0),
        );
        let nothing =
            b_class_value(&zero, HalfPlanePoint::new(0.0, 1.0), &[], &spec).unwrap();
        assert_eq!(nothing.value, 0.0);
    }

    #[test]
    fn class_value_is_monotone_in_the_weight() {
        let spec = disk_spec();
        let w = WeightParameter::new(0.0);
        let (u, phi) = (sym("1"), sym("z + i"));
        let small = wexpr("im(z)");
        let large = wexpr("im(z) + 1");
        for (x, y) in [(0.0, 1.0), (1.0, 0.25), (-2.0, 4.0)] {
            let zeta = HalfPlanePoint::new(x, y);
            let lo =
                b_class_value_of(&u, &phi, &|z| small.eval(z), 2.0, zeta, w, &[], &spec)
                    .unwrap();
            let hi =
                b_class_value_of(&u, &phi, &|z| large.eval(z), 2.0, zeta, w, &[], &spec)
                    .unwrap();
            assert!(lo.value <= hi.value * (1.0 + 1e-6) + 1e-12);
        }
    }

    #[test]
    fn borderline_tail_is_flagged_divergent() {
        let params = BWeightParams::new(
            sym("1"),
            sym("z"),
            wexpr("1"),
            2.0,
            WeightParameter::new(0.0),
        );
        let spec = QuadratureSpec::default().with_tail(TailModel::PowerLaw { decay: 2.0 });
        let err =
            b_class_value(&params, HalfPlanePoint::new(0.0, 1.0), &[], &spec).unwrap_err();
        assert!(matches!(err, QuadratureError::DivergentTail { .. }), "{err}");

        let cert =
            b_class_constant(&params, &ApexLattice::with_refinement(0), &[], &spec).unwrap();
        assert!(cert.divergent);
        assert_eq!(cert.verdict, ClassVerdict::NotInClass);
        assert!(!cert.all_converged);
    }

    #[test]
    fn zero_weight_is_certified_in_class() {
        let params = BWeightParams::new(
            sym("1"),
            sym("z + i"),
            wexpr("0"),
            2.0,
            WeightParameter::new(0.0),
        );
        let spec = QuadratureSpec::default();
        let cert =
            b_class_constant(&params, &ApexLattice::with_refinement(0), &[], &spec).unwrap();
        assert_eq!(cert.base_sup, 0.0);
        assert_eq!(cert.refined_sup, 0.0);
        assert_eq!(cert.verdict, ClassVerdict::InClass);
        assert!(!cert.divergent);
    }

    #[test]
    fn unbounded_weight_is_certified_not_in_class() {
        // exp(Im z) outgrows the kernel decay: the truncated integrals blow
        // up as the window widens, which the refined pass is built to see.
        let params = BWeightParams::new(
            sym("1"),
            sym("z + i"),
            wexpr("exp(im(z))"),
            2.0,
            WeightParameter::new(0.0),
        );
        let mut spec = QuadratureSpec::default();
        spec.rel_tol = 1e-3;
        let cert =
            b_class_constant(&params, &ApexLattice::with_refinement(0), &[], &spec).unwrap();
        assert!(!cert.divergent);
        assert!(cert.relative_change > STABILITY_TOLERANCE);
        assert_eq!(cert.verdict, ClassVerdict::NotInClass);
    }

    #[test]
    fn tent_ratio_profiles() {
        let w = WeightParameter::new(0.0);
        let mut spec = QuadratureSpec::default();
        spec.rel_tol = 1e-4;

        // Degree −1 homogeneity: halving the height doubles the ratio, as
        // long as the tent stays inside the weight's disk.
        let disk = wexpr("indisk(z) / abs(z)");
        let heights = [0.4, 0.2, 0.1, 0.05];
        let profile = not_carleson_probe(&disk, w, &heights, &spec).unwrap();
        for pair in profile.windows(2) {
            let doubling = pair[1].ratio / pair[0].ratio;
            assert!((doubling - 2.0).abs() <= 0.05 * 2.0, "doubling factor {doubling}");
        }

        let flat = not_carleson_probe(&wexpr("1"), w, &heights, &spec).unwrap();
        for sample in &flat {
            assert_relative_eq!(sample.ratio, 1.0, max_relative = 1e-9);
        }

        // ∫_T Im z dA over a side-y tent is y³/2π against tent mass y²/π.
        let height = not_carleson_probe(&wexpr("im(z)"), w, &heights, &spec).unwrap();
        for sample in &height {
            assert_relative_eq!(sample.ratio, sample.y / 2.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn weighted_estimate_holds_on_the_disk_scenario() {
        let params = disk_weight_params();
        let spec = disk_spec();
        let apexes = [
            HalfPlanePoint::new(0.0, 1.0),
            HalfPlanePoint::new(0.0, 0.25),
            HalfPlanePoint::new(2.0, 1.0),
            HalfPlanePoint::new(-1.0, 4.0),
        ];
        let table = weighted_estimate_check(
            &params,
            &apexes,
            &ApexLattice::with_refinement(0),
            &[],
            &spec,
        )
        .unwrap();
        assert_eq!(table.class_certificate.verdict, ClassVerdict::InClass);
        assert!(table.class_constant.is_finite() && table.class_constant > 0.0);
        let (max, min) = (table.max_ratio.unwrap(), table.min_ratio.unwrap());
        assert!(max.is_finite() && max > 0.0);
        assert!(max / min < 100.0, "ratio spread [{min}, {max}]");
        for row in &table.rows {
            // ‖f_{a,q}‖_q^q = 1/4 for α = 0, so the bound side is constant.
            assert_relative_eq!(row.rhs, table.class_constant * 0.25, max_relative = 1e-12);
        }
    }
}
