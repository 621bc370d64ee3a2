//! Degree 2 isogenies in Velu form.

use super::{CurveError, WeierstrassModel};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Image curve of the unique 2-isogeny with the given kernel point.
///
/// For an integral kernel (x0, y0) the result is the textbook image
/// [a1, a2, a3, a4 - 5t, a6 - b2 t - 7w] with t = 3x0^2 + 2a2 x0 + a4
/// - a1 y0 and w = x0 t. A kernel with denominators is absorbed by
/// scaling the model first, so the returned model may then be
/// non-minimal; the curve class is what is pinned down.
pub fn velu_two_isogeny(
    e: &WeierstrassModel,
    x0: &BigRational,
    y0: &BigRational,
) -> Result<WeierstrassModel, CurveError> {
    // On-curve check.
    let a1 = BigRational::from(e.a1.clone());
    let a2 = BigRational::from(e.a2.clone());
    let a3 = BigRational::from(e.a3.clone());
    let a4 = BigRational::from(e.a4.clone());
    let a6 = BigRational::from(e.a6.clone());
    let lhs = y0 * y0 + &a1 * x0 * y0 + &a3 * y0;
    let rhs = x0 * x0 * x0 + &a2 * x0 * x0 + &a4 * x0 + &a6;
    if lhs != rhs {
        return Err(CurveError::PointNotOnCurve);
    }
    // Order 2 means the point is its own negative: 2y + a1 x + a3 = 0.
    let two = BigRational::from(BigInt::from(2));
    if &two * y0 + &a1 * x0 + &a3 != BigRational::zero() {
        return Err(CurveError::NotTwoTorsion);
    }
    // Clear denominators: scale by 1/d so (d^2 x0, d^3 y0) is integral.
    let mut d = BigInt::one();
    loop {
        let dx = x0 * BigRational::from(&d * &d);
        let dy = y0 * BigRational::from(&d * &d * &d);
        if dx.denom().is_one() && dy.denom().is_one() {
            break;
        }
        d += 1;
        assert!(&d * &d <= x0.denom() * y0.denom() * 8, "kernel denominator not quadratic");
    }
    let (model, kx, ky) = if d.is_one() {
        (e.clone(), x0.numer().clone(), y0.numer().clone())
    } else {
        let u = BigRational::new(BigInt::one(), d.clone());
        let zero = BigRational::zero();
        let scaled = e
            .transform_rational(&u, &zero, &zero, &zero)
            .expect("scaling by 1/d keeps integrality");
        let kx = (x0 * BigRational::from(&d * &d)).numer().clone();
        let ky = (y0 * BigRational::from(&d * &d * &d)).numer().clone();
        (scaled, kx, ky)
    };
    let t = 3 * &kx * &kx + 2 * &model.a2 * &kx + &model.a4 - &model.a1 * &ky;
    let w = &kx * &t;
    let b2 = &model.a1 * &model.a1 + 4 * &model.a2;
    Ok(WeierstrassModel {
        a1: model.a1.clone(),
        a2: model.a2.clone(),
        a3: model.a3.clone(),
        a4: &model.a4 - 5 * &t,
        a6: &model.a6 - &b2 * &t - 7 * &w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::minimal::minimal_model;

    #[test]
    fn family_isogeny_hits_even_curve_exactly() {
        // u = 3: [1, -1, 0, -1, 0] with kernel (0, 0) maps to
        // [1, -1, 0, 4, -3].
        let e1 = WeierstrassModel::new(1, -1, 0, -1, 0);
        let img = velu_two_isogeny(&e1, &BigRational::zero(), &BigRational::zero()).unwrap();
        assert_eq!(img, WeierstrassModel::new(1, -1, 0, 4, -3));
    }

    #[test]
    fn dual_direction_recovers_odd_curve() {
        // The even curve's 2-torsion point is (3/4, -3/8); the quotient
        // is the odd curve again.
        let e0 = WeierstrassModel::new(1, -1, 0, 4, -3);
        let x = BigRational::new(BigInt::from(3), BigInt::from(4));
        let y = BigRational::new(BigInt::from(-3), BigInt::from(8));
        let img = velu_two_isogeny(&e0, &x, &y).unwrap();
        let back = minimal_model(&img).unwrap();
        assert_eq!(back, WeierstrassModel::new(1, -1, 0, -1, 0));
    }

    #[test]
    fn isogenous_curves_share_the_discriminant_prime() {
        let e1 = WeierstrassModel::new(1, -1, 0, -1, 0);
        let img = velu_two_isogeny(&e1, &BigRational::zero(), &BigRational::zero()).unwrap();
        let d1 = e1.discriminant();
        let d0 = img.discriminant();
        // Delta(E1) = p and Delta(E0) = -p^2 for the u = 3 pair.
        assert_eq!(&d0 * BigInt::from(-1), &d1 * &d1);
    }

    #[test]
    fn rejects_non_torsion_kernel() {
        let e1 = WeierstrassModel::new(1, -1, 0, -1, 0);
        // (1, 0) is not on the curve: reject.
        let err = velu_two_isogeny(&e1, &BigRational::one(), &BigRational::zero());
        assert!(matches!(err, Err(CurveError::PointNotOnCurve)));
        // (0, 0) on y^2 + y = x^3 - x is rational of infinite order.
        let e37 = WeierstrassModel::new(0, 0, 1, -1, 0);
        let err2 = velu_two_isogeny(&e37, &BigRational::zero(), &BigRational::zero());
        assert!(matches!(err2, Err(CurveError::NotTwoTorsion)));
    }
}
