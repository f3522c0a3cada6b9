//! Embedded tensor Gauss-Legendre pair used on every cell.
//!
//! The low rule (4 points per axis) and high rule (8 points per axis) share
//! no nodes; their difference is the local error estimate, the high value is
//! kept. Nodes are interior, so the integrand is never sampled on cell
//! boundaries (in particular never at `y = 0`).

use crate::real::{of, Real};

/// 4-point Gauss-Legendre abscissae/weights on [-1, 1].
pub const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_86),
    (-0.339_981_043_584_856_26, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_26, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_86),
];

/// 8-point Gauss-Legendre abscissae/weights on [-1, 1].
pub const GAUSS8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// Tensor rule over `[x0,x1]×[y0,y1]`; returns the weighted node sum times
/// the Jacobian. `None` if any sample is non-finite.
pub fn tensor<T: Real, const N: usize>(
    nodes: &[(f64, f64); N],
    x0: T,
    x1: T,
    y0: T,
    y1: T,
    f: &mut impl FnMut(T, T) -> T,
) -> Option<T> {
    let half = of::<T>(0.5);
    let cx = (x0 + x1) * half;
    let rx = (x1 - x0) * half;
    let cy = (y0 + y1) * half;
    let ry = (y1 - y0) * half;
    let mut acc = T::zero();
    for &(xi, wi) in nodes.iter() {
        let x = cx + rx * of::<T>(xi);
        let mut row = T::zero();
        for &(yj, wj) in nodes.iter() {
            let y = cy + ry * of::<T>(yj);
            let v = f(x, y);
            if !v.is_finite() {
                return None;
            }
            row = row + v * of::<T>(wj);
        }
        acc = acc + row * of::<T>(wi);
    }
    Some(acc * rx * ry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exactness_on_polynomials() {
        // G4 tensor is exact for degree ≤ 7 per axis.
        let got = tensor(&GAUSS4, 0.0f64, 1.0, 0.0, 1.0, &mut |x, y| x * x * x * y).unwrap();
        assert_relative_eq!(got, 0.125, max_relative = 1e-14);
        let got = tensor(&GAUSS8, -1.0f64, 2.0, 0.5, 1.5, &mut |x, y| {
            x.powi(5) * y.powi(3) + 2.0
        })
        .unwrap();
        // ∫x^5 over [-1,2] = (64-1)/6 = 10.5; ∫y^3 over [0.5,1.5] = (1.5^4-0.5^4)/4
        let expect = 10.5 * (1.5f64.powi(4) - 0.5f64.powi(4)) / 4.0 + 2.0 * 3.0;
        assert_relative_eq!(got, expect, max_relative = 1e-13);
    }

    #[test]
    fn non_finite_sample_is_reported() {
        let got = tensor(&GAUSS4, 0.0f64, 1.0, 0.0, 1.0, &mut |x, _| 1.0 / (x - x));
        assert!(got.is_none());
    }
}
