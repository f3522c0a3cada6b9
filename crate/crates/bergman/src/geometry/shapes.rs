//! Half-open intervals, rectangles, Carleson boxes and tents, Whitney
//! decompositions.
//!
//! All intervals are half-open `[left, left+length)`; boxes sit over their
//! base interval with the open vertical range `(0, length)`. Boundary sets
//! are null for every measure in play, so the half-open convention only
//! matters for the exact set identities, which are checked in the grid layer.

use crate::real::{of, Real};
use num_complex::Complex;

/// Point of the open upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlanePoint<T: Real> {
    pub x: T,
    pub y: T,
}

impl<T: Real> HalfPlanePoint<T> {
    pub fn new(x: T, y: T) -> Self {
        assert!(y > T::zero() && y.is_finite() && x.is_finite(), "point must lie strictly above the real axis");
        HalfPlanePoint { x, y }
    }

    pub fn complex(self) -> Complex<T> {
        Complex::new(self.x, self.y)
    }

    pub fn from_complex(z: Complex<T>) -> Self {
        Self::new(z.re, z.im)
    }
}

/// Half-open interval `[left, left+length)`, `length > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval<T: Real> {
    left: T,
    length: T,
}

impl<T: Real> Interval<T> {
    pub fn new(left: T, length: T) -> Self {
        assert!(length > T::zero() && length.is_finite() && left.is_finite(), "interval needs positive finite length");
        Interval { left, length }
    }

    pub fn from_endpoints(left: T, right: T) -> Self {
        Self::new(left, right - left)
    }

    pub fn left(&self) -> T {
        self.left
    }

    pub fn right(&self) -> T {
        self.left + self.length
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn center(&self) -> T {
        self.left + self.length / of::<T>(2.0)
    }

    pub fn contains(&self, x: T) -> bool {
        self.left <= x && x < self.right()
    }

    pub fn contains_interval(&self, other: &Interval<T>) -> bool {
        self.left <= other.left && other.right() <= self.right()
    }

    pub fn meets(&self, other: &Interval<T>) -> bool {
        self.left < other.right() && other.left < self.right()
    }
}

/// Axis-aligned rectangle: `xs × ys`, both half-open.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect<T: Real> {
    pub xs: Interval<T>,
    pub ys: Interval<T>,
}

impl<T: Real> Rect<T> {
    pub fn new(xs: Interval<T>, ys: Interval<T>) -> Self {
        Rect { xs, ys }
    }

    pub fn contains(&self, p: HalfPlanePoint<T>) -> bool {
        self.xs.contains(p.x) && self.ys.contains(p.y)
    }

    pub fn center(&self) -> (T, T) {
        (self.xs.center(), self.ys.center())
    }
}

/// Carleson box over a base interval: `base × (0, |base|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarlesonBox<T: Real> {
    pub base: Interval<T>,
}

impl<T: Real> CarlesonBox<T> {
    pub fn new(base: Interval<T>) -> Self {
        CarlesonBox { base }
    }

    pub fn side(&self) -> T {
        self.base.length()
    }

    /// The full box as a rectangle (vertical range written `[0, ℓ)`; the
    /// bottom edge is outside the half-plane and never sampled).
    pub fn rect(&self) -> Rect<T> {
        Rect::new(self.base, Interval::new(T::zero(), self.side()))
    }

    /// Top-half slab `base × [ℓ/2, ℓ)`: the first Whitney generation, and the
    /// part of the box untouched by strictly smaller grid boxes.
    pub fn upper_box(&self) -> Rect<T> {
        let half = self.side() / of::<T>(2.0);
        Rect::new(self.base, Interval::new(half, half))
    }

    pub fn contains(&self, p: HalfPlanePoint<T>) -> bool {
        self.base.contains(p.x) && p.y < self.side()
    }
}

/// Tent with apex `a`: `{|x − x_a| ≤ y_a/2, 0 < y < y_a}`. As a set this is
/// exactly the Carleson box over the interval of length `y_a` centered at
/// `x_a`.
pub fn tent<T: Real>(apex: HalfPlanePoint<T>) -> CarlesonBox<T> {
    let half = apex.y / of::<T>(2.0);
    CarlesonBox::new(Interval::new(apex.x - half, apex.y))
}

/// One rectangle of the Whitney decomposition of a box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WhitneyRectangle<T: Real> {
    /// Generation ≥ 1; generation `i` spans heights `[ℓ/2^i, ℓ/2^(i-1))`.
    pub generation: u32,
    /// Column within the generation, `0 .. 2^(i-1)`.
    pub index: u64,
    pub rect: Rect<T>,
}

/// Whitney rectangles of the box over `interval`, generations `1..=generations`.
///
/// Generation `i` splits the base into `2^(i-1)` equal columns at heights
/// `[ℓ/2^i, ℓ/2^(i-1))`; generation 1 is the upper box. The union over all
/// generations tiles the box, and on dyadic-rational inputs the tiling is
/// exact in floating point (all subdivisions halve exactly).
pub fn whitney_decompose<T: Real>(interval: Interval<T>, generations: u32) -> Vec<WhitneyRectangle<T>> {
    assert!(generations >= 1);
    let len = interval.length();
    let mut out = Vec::new();
    let two = of::<T>(2.0);
    let mut width = len; // ℓ / 2^(i-1)
    for generation in 1..=generations {
        let height_low = width / two;
        let columns = 1u64 << (generation - 1);
        for index in 0..columns {
            let left = interval.left() + width * of::<T>(index as f64);
            out.push(WhitneyRectangle {
                generation,
                index,
                rect: Rect::new(
                    Interval::new(left, width),
                    Interval::new(height_low, height_low),
                ),
            });
        }
        width = height_low;
    }
    out
}

/// Concentric dilation by `factor` (> 0) about the rectangle center. Does not
/// clip to the half-plane; see [`clip_to_half_plane`].
pub fn dilate<T: Real>(rect: Rect<T>, factor: T) -> Rect<T> {
    assert!(factor > T::zero());
    let (cx, cy) = rect.center();
    let half = of::<T>(0.5) * factor;
    let w = rect.xs.length() * half;
    let h = rect.ys.length() * half;
    Rect::new(
        Interval::new(cx - w, w + w),
        Interval::new(cy - h, h + h),
    )
}

/// Intersection with the open upper half-plane, `None` if empty.
pub fn clip_to_half_plane<T: Real>(rect: Rect<T>) -> Option<Rect<T>> {
    let top = rect.ys.right();
    if top <= T::zero() {
        return None;
    }
    let bottom = rect.ys.left().max(T::zero());
    Some(Rect::new(rect.xs, Interval::from_endpoints(bottom, top)))
}

/// Smallest canonical interval whose Carleson box contains both `z` and `ζ`:
/// centered at the midpoint of the two abscissae with length `2·|ζ̄ − z|`.
pub fn enclosing_interval<T: Real>(z: HalfPlanePoint<T>, zeta: HalfPlanePoint<T>) -> Interval<T> {
    let r = (zeta.x - z.x).hypot(zeta.y + z.y);
    let center = (z.x + zeta.x) / of::<T>(2.0);
    Interval::new(center - r, r + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tent_is_centered_box() {
        let t = tent(HalfPlanePoint::new(0.0, 2.0));
        assert_eq!(t.base.left(), -1.0);
        assert_eq!(t.base.right(), 1.0);
        assert_eq!(t.side(), 2.0);
    }

    #[test]
    fn upper_box_of_unit_box() {
        let b = CarlesonBox::new(Interval::new(-2.0, 4.0));
        let up = b.upper_box();
        assert_eq!(up.ys.left(), 2.0);
        assert_eq!(up.ys.right(), 4.0);
        assert_eq!(up.xs.left(), -2.0);
    }

    #[test]
    fn whitney_unit_interval_two_generations() {
        let rects = whitney_decompose(Interval::new(0.0, 1.0), 2);
        assert_eq!(rects.len(), 3);
        assert_eq!(rects[0].rect, Rect::new(Interval::new(0.0, 1.0), Interval::new(0.5, 0.5)));
        assert_eq!(rects[1].rect, Rect::new(Interval::new(0.0, 0.5), Interval::new(0.25, 0.25)));
        assert_eq!(rects[2].rect, Rect::new(Interval::new(0.5, 0.5), Interval::new(0.25, 0.25)));
    }

    #[test]
    fn whitney_three_generations_counts_and_heights() {
        let rects = whitney_decompose(Interval::new(2.0, 4.0), 3);
        assert_eq!(rects.len(), 1 + 2 + 4);
        let gen3: Vec<_> = rects.iter().filter(|r| r.generation == 3).collect();
        for r in &gen3 {
            assert_eq!(r.rect.ys.left(), 0.5);
            assert_eq!(r.rect.ys.right(), 1.0);
        }
        // Generation 1 is the upper box.
        let b = CarlesonBox::new(Interval::new(2.0, 4.0));
        assert_eq!(rects[0].rect, b.upper_box());
    }

    #[test]
    fn dilate_examples() {
        let r = dilate(Rect::new(Interval::new(0.0, 1.0), Interval::new(1.0, 1.0)), 1.5);
        assert_eq!(r.xs.left(), -0.25);
        assert_eq!(r.xs.right(), 1.25);
        assert_eq!(r.ys.left(), 0.75);
        assert_eq!(r.ys.right(), 2.25);

        // Dilating a box protrudes below the axis; clipping restores it.
        let b = CarlesonBox::new(Interval::new(0.0, 2.0));
        let d = dilate(b.rect(), 1.5);
        assert_eq!(d.ys.left(), -0.5);
        let clipped = clip_to_half_plane(d).unwrap();
        assert_eq!(clipped.ys.left(), 0.0);
        assert_eq!(clipped.ys.right(), 2.5);
    }

    #[test]
    fn whitney_dilations_stay_in_half_plane() {
        for r in whitney_decompose(Interval::new(-3.0, 8.0), 6) {
            let d = dilate(r.rect, 1.5);
            assert!(d.ys.left() > 0.0);
        }
    }

    #[test]
    fn enclosing_interval_examples() {
        let i = HalfPlanePoint::new(0.0, 1.0);
        let e = enclosing_interval(i, i);
        assert_eq!(e.left(), -2.0);
        assert_eq!(e.right(), 2.0);

        let e = enclosing_interval(i, HalfPlanePoint::new(1.0, 1.0));
        let r5 = 5.0f64.sqrt();
        assert!((e.left() - (0.5 - r5)).abs() < 1e-15);
        assert!((e.right() - (0.5 + r5)).abs() < 1e-15);
    }

    #[test]
    fn enclosing_box_contains_both_points() {
        // Deterministic sample sweep; the 1e4-scale randomized version lives
        // in the integration tests.
        for &(zx, zy, wx, wy) in &[
            (0.0, 1.0, 0.0, 1.0),
            (-3.0, 0.25, 4.0, 2.0),
            (10.0, 5.0, 10.5, 0.01),
            (-0.1, 0.001, 0.1, 0.002),
        ] {
            let z = HalfPlanePoint::new(zx, zy);
            let w = HalfPlanePoint::new(wx, wy);
            let b = CarlesonBox::new(enclosing_interval(z, w));
            assert!(b.contains(z), "z {zx},{zy} vs {wx},{wy}");
            assert!(b.contains(w));
        }
    }
}
