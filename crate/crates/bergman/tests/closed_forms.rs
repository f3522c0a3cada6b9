//! Quadrature against analytic closed forms: box masses, test-function
//! norms, testing integrals for the vertical shift and the identity, and
//! the reproducing identity that ties the kernel normalization together.

use approx::assert_relative_eq;
use num_complex::Complex;

use bergman::carleson::{test_function_norm, testing_condition_value};
use bergman::geometry::{CarlesonBox, HalfPlanePoint, Interval, Rect};
use bergman::quadrature::{
    integrate_halfplane_complex, integrate_rect, QuadratureSpec, TailModel, WeightParameter,
};
use bergman::symbols::SymbolExpression;
use bergman::TestFunction;

const PI: f64 = std::f64::consts::PI;

fn symbol(src: &str) -> SymbolExpression<f64> {
    SymbolExpression::parse(src).unwrap()
}

#[test]
fn box_masses_match_the_power_law() {
    let spec = QuadratureSpec::default();
    for alpha in [-0.5, 0.0, 1.0, 2.5] {
        let weight = WeightParameter::new(alpha);
        for side in [0.25f64, 1.0, 8.0] {
            let boxed = CarlesonBox::new(Interval::new(-side / 3.0, side));
            let want = f64::exp2(alpha) / PI * side.powf(alpha + 2.0);
            assert_relative_eq!(weight.box_measure(&boxed), want, max_relative = 1e-12);

            let est = integrate_rect(&|_| 1.0, weight, &boxed.rect(), &spec).unwrap();
            assert!(est.converged);
            assert_relative_eq!(est.value, want, max_relative = 1e-6);
        }
    }
}

#[test]
fn mass_norm_is_apex_and_exponent_free() {
    // α = 0: √π·Γ(3/2)/Γ(2)·Β(1,2) · c_0 = (π/2)·(1/2)·(1/π) = 1/4;
    // α = 1 works out to 1/8.
    let w0 = WeightParameter::new(0.0);
    let w1 = WeightParameter::new(1.0);
    assert_relative_eq!(
        TestFunction::new(HalfPlanePoint::new(0.0, 1.0), 2.0, w0).norm_power(),
        0.25,
        max_relative = 1e-12
    );
    assert_relative_eq!(
        TestFunction::new(HalfPlanePoint::new(3.0, 0.5), 4.0, w1).norm_power(),
        0.125,
        max_relative = 1e-12
    );

    let spec = QuadratureSpec::default();
    let apexes = [
        HalfPlanePoint::new(0.0, 1.0),
        HalfPlanePoint::new(2.0, 0.25),
        HalfPlanePoint::new(-1.0, 4.0),
    ];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for apex in apexes {
        for t in [1.0, 2.0, 4.0] {
            let tf = TestFunction::new(apex, t, w0);
            let est = test_function_norm(&tf, &spec).unwrap();
            assert!(est.converged);
            assert_relative_eq!(est.value, 0.25, max_relative = 1e-3);
            lo = lo.min(est.value);
            hi = hi.max(est.value);
        }
    }
    // Apex-normalized quadrature resolves every bump identically, so the
    // nine values agree far more tightly than the absolute tolerance.
    assert!((hi - lo) / 0.25 < 1e-3, "spread {}", (hi - lo) / 0.25);
}

#[test]
fn vertical_shift_testing_integral() {
    // u = 1, φ = z + i, p = q = 2, α = 0: the testing integral evaluates to
    // y²/(4(1+y)²) — increasing in y with supremum 1/4, never attained.
    let u = symbol("1");
    let phi = symbol("z + i");
    let weight = WeightParameter::new(0.0);
    let spec = QuadratureSpec::default();
    for y in [0.25, 1.0, 4.0, 100.0] {
        let apex = HalfPlanePoint::new(0.0, y);
        let est =
            testing_condition_value(&u, &phi, apex, 2.0, 2.0, weight, &[], &spec).unwrap();
        assert!(est.converged, "not converged at y = {y}");
        let want = y * y / (4.0 * (1.0 + y) * (1.0 + y));
        assert_relative_eq!(est.value, want, max_relative = 1e-2);
    }
}

#[test]
fn identity_testing_integrals() {
    let u = symbol("1");
    let phi = symbol("z");
    let weight = WeightParameter::new(0.0);
    let spec = QuadratureSpec::default();

    // p = q: the integral is the t-th norm power itself, 1/4 at every apex.
    for apex in [HalfPlanePoint::new(0.0, 1.0), HalfPlanePoint::new(1.5, 0.5)] {
        let est =
            testing_condition_value(&u, &phi, apex, 2.0, 2.0, weight, &[], &spec).unwrap();
        assert!(est.converged);
        assert_relative_eq!(est.value, 0.25, max_relative = 1e-3);
    }

    // p = 2, q = 4: ∫ |f_{a,2}|⁴ dA_0 = (5/96)·y_a⁻², which blows up down
    // toward the axis — the upgrade p < q is never bounded for φ = z.
    for y in [0.5, 1.0, 2.0] {
        let apex = HalfPlanePoint::new(-0.75, y);
        let est =
            testing_condition_value(&u, &phi, apex, 2.0, 4.0, weight, &[], &spec).unwrap();
        assert!(est.converged);
        assert_relative_eq!(est.value, 5.0 / 96.0 / (y * y), max_relative = 1e-3);
    }
}

#[test]
fn reproducing_integral_is_apex_free() {
    // For g in the space, ∫ g · conj(f_{a,2}) dA_α = y_a^{(α+2)/2} · g(a)
    // with our normalization, so the ratio below is 1 at every apex. The
    // integrand only decays like |z|⁻⁴ overall, so the window must be much
    // larger than the default for the untracked tail to sit below the
    // constancy tolerance.
    let weight = WeightParameter::new(0.0);
    let g = TestFunction::new(HalfPlanePoint::new(0.3, 1.7), 2.0, weight);
    let spec = QuadratureSpec::default()
        .with_truncation(Rect::new(
            Interval::new(-512.0, 1024.0),
            Interval::new(0.0, 512.0),
        ))
        .with_max_cells(40_000)
        .with_tail(TailModel::PowerLaw { decay: 4.0 });

    let mut values = Vec::new();
    for apex in [
        HalfPlanePoint::new(0.0, 1.0),
        HalfPlanePoint::new(-1.0, 0.5),
        HalfPlanePoint::new(2.0, 2.0),
    ] {
        let f = TestFunction::new(apex, 2.0, weight);
        let pairing = integrate_halfplane_complex(
            &|z: Complex<f64>| g.eval(z) * f.eval(z).conj(),
            weight,
            &spec,
        )
        .unwrap();
        assert!(pairing.converged);
        let ratio = pairing.value.norm() / (apex.y * g.eval(Complex::new(apex.x, apex.y)).norm());
        assert_relative_eq!(ratio, 1.0, max_relative = 2e-2);
        values.push(ratio);
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    assert!((hi - lo) / lo < 1e-4, "dispersion {}", (hi - lo) / lo);
}
