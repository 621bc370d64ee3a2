//! Elliptic curves over Q in long Weierstrass form: invariants, minimal
//! models, the group law on rational points, torsion, point counting over
//! prime fields, local reduction data, real periods and 2-isogenies.

mod counting;
mod isogeny;
mod minimal;
mod period;
mod tate;
mod torsion;

pub use counting::{an_sequence, ap_count, discriminant_bad_primes};
pub use isogeny::velu_two_isogeny;
pub use minimal::{is_minimal, minimal_model};
pub use period::{period_lattice, real_period, LatticeData, PeriodData};
pub use tate::{local_data, KodairaSymbol, ReductionData, ReductionKind};
pub use torsion::{lutz_nagell_torsion, TorsionGroup};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("the model is singular (discriminant zero)")]
    Singular,
    #[error("bad reduction at {0}; a_p for good primes only")]
    BadReduction(u64),
    #[error("point is not on the curve")]
    PointNotOnCurve,
    #[error("point is not a rational 2-torsion point")]
    NotTwoTorsion,
    #[error("curve has no rational point of order 2")]
    NoTwoTorsion,
    #[error("working precision {0} too low to separate the cubic's roots")]
    PrecisionTooLow(u32),
    #[error("coefficient is not an integer")]
    NonIntegralModel,
    #[error("could not fully factor the discriminant for torsion bounds")]
    DiscriminantFactorization,
    #[error("point counting at {0} did not converge to a unique group order")]
    CountingFailure(u64),
}

/// Long Weierstrass model y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6
/// with integer coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WeierstrassModel {
    pub a1: BigInt,
    pub a2: BigInt,
    pub a3: BigInt,
    pub a4: BigInt,
    pub a6: BigInt,
}

impl fmt::Debug for WeierstrassModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}, {}, {}, {}]",
            self.a1, self.a2, self.a3, self.a4, self.a6
        )
    }
}

impl fmt::Display for WeierstrassModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveInvariants {
    pub b2: BigInt,
    pub b4: BigInt,
    pub b6: BigInt,
    pub b8: BigInt,
    pub c4: BigInt,
    pub c6: BigInt,
    pub delta: BigInt,
    pub j: BigRational,
}

/// A rational point in affine coordinates, or the point at infinity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RationalPoint {
    Infinity,
    Affine(BigRational, BigRational),
}

impl RationalPoint {
    pub fn affine(x: impl Into<BigRational>, y: impl Into<BigRational>) -> Self {
        RationalPoint::Affine(x.into(), y.into())
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, RationalPoint::Infinity)
    }
}

impl WeierstrassModel {
    pub fn new(a1: i64, a2: i64, a3: i64, a4: i64, a6: i64) -> Self {
        WeierstrassModel {
            a1: a1.into(),
            a2: a2.into(),
            a3: a3.into(),
            a4: a4.into(),
            a6: a6.into(),
        }
    }

    pub fn from_coeffs(a: [BigInt; 5]) -> Self {
        let [a1, a2, a3, a4, a6] = a;
        WeierstrassModel { a1, a2, a3, a4, a6 }
    }

    pub fn coeffs(&self) -> [BigInt; 5] {
        [
            self.a1.clone(),
            self.a2.clone(),
            self.a3.clone(),
            self.a4.clone(),
            self.a6.clone(),
        ]
    }

    /// b2, b4, b6, b8, c4, c6, discriminant and j-invariant. Panics only
    /// on the zero discriminant (singular) case for j; invariants of a
    /// singular model are still returned by `invariants_allow_singular`.
    pub fn invariants(&self) -> Result<CurveInvariants, CurveError> {
        let inv = self.invariants_allow_singular();
        if inv.delta.is_zero() {
            return Err(CurveError::Singular);
        }
        Ok(inv)
    }

    pub fn invariants_allow_singular(&self) -> CurveInvariants {
        let (a1, a2, a3, a4, a6) = (&self.a1, &self.a2, &self.a3, &self.a4, &self.a6);
        let b2 = a1 * a1 + a2 * 4i64;
        let b4 = a4 * 2i64 + a1 * a3;
        let b6 = a3 * a3 + a6 * 4i64;
        let b8 = a1 * a1 * a6 + (a2 * a6) * 4i64 - a1 * a3 * a4 + a2 * (a3 * a3) - a4 * a4;
        let c4 = &b2 * &b2 - &b4 * 24i64;
        let c6 = -(&b2 * &b2 * &b2) + (&b2 * &b4) * 36i64 - &b6 * 216i64;
        let delta = -(&b2 * &b2 * &b8) - (&b4 * &b4 * &b4) * 8i64 - (&b6 * &b6) * 27i64
            + (&b2 * &b4 * &b6) * 9i64;
        debug_assert_eq!(&b8 * 4i64, &b2 * &b6 - &b4 * &b4);
        debug_assert_eq!(&delta * 1728i64, &c4 * &c4 * &c4 - &c6 * &c6);
        let j = if delta.is_zero() {
            BigRational::zero()
        } else {
            BigRational::new(&c4 * &c4 * &c4, delta.clone())
        };
        CurveInvariants {
            b2,
            b4,
            b6,
            b8,
            c4,
            c6,
            delta,
            j,
        }
    }

    pub fn discriminant(&self) -> BigInt {
        self.invariants_allow_singular().delta
    }

    pub fn is_on_curve(&self, pt: &RationalPoint) -> bool {
        match pt {
            RationalPoint::Infinity => true,
            RationalPoint::Affine(x, y) => {
                let a1: BigRational = BigRational::from(self.a1.clone());
                let a2 = BigRational::from(self.a2.clone());
                let a3 = BigRational::from(self.a3.clone());
                let a4 = BigRational::from(self.a4.clone());
                let a6 = BigRational::from(self.a6.clone());
                y * y + &a1 * x * y + &a3 * y
                    == x * x * x + &a2 * x * x + &a4 * x + &a6
            }
        }
    }

    pub fn negate_point(&self, pt: &RationalPoint) -> RationalPoint {
        match pt {
            RationalPoint::Infinity => RationalPoint::Infinity,
            RationalPoint::Affine(x, y) => {
                let a1 = BigRational::from(self.a1.clone());
                let a3 = BigRational::from(self.a3.clone());
                RationalPoint::Affine(x.clone(), -y - a1 * x - a3)
            }
        }
    }

    /// Chord and tangent addition.
    pub fn add_points(&self, p: &RationalPoint, q: &RationalPoint) -> RationalPoint {
        use RationalPoint::*;
        let (x1, y1, x2, y2) = match (p, q) {
            (Infinity, _) => return q.clone(),
            (_, Infinity) => return p.clone(),
            (Affine(x1, y1), Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        debug_assert!(self.is_on_curve(p) && self.is_on_curve(q));
        let a1 = BigRational::from(self.a1.clone());
        let a2 = BigRational::from(self.a2.clone());
        let a3 = BigRational::from(self.a3.clone());
        let a4 = BigRational::from(self.a4.clone());
        if x1 == x2 {
            // Either inverse points or a doubling.
            let y2_inverse = -y1 - &a1 * x1 - &a3;
            if *y2 == y2_inverse {
                return Infinity;
            }
        }
        let lambda = if x1 == x2 {
            let num = BigRational::from(BigInt::from(3)) * x1 * x1
                + BigRational::from(BigInt::from(2)) * &a2 * x1
                + &a4
                - &a1 * y1;
            let den = BigRational::from(BigInt::from(2)) * y1 + &a1 * x1 + &a3;
            num / den
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let nu = y1 - &lambda * x1;
        let x3 = &lambda * &lambda + &a1 * &lambda - &a2 - x1 - x2;
        let y3 = -(&lambda + &a1) * &x3 - &nu - &a3;
        Affine(x3, y3)
    }

    pub fn multiply_point(&self, p: &RationalPoint, mut k: u32) -> RationalPoint {
        let mut acc = RationalPoint::Infinity;
        let mut base = p.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add_points(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.add_points(&base, &base);
            }
        }
        acc
    }

    /// Apply the coordinate change (x, y) -> ((x - r)/u^2, (y - s x - t + r s)/u^3)
    /// parameters understood as [u, r, s, t]; returns the transformed model.
    /// All five new coefficients must come out integral for integer input
    /// parameters; rational transforms are handled by the caller via
    /// `transform_rational`.
    pub fn transform(&self, u: &BigInt, r: &BigInt, s: &BigInt, t: &BigInt) -> WeierstrassModel {
        let to_r = |v: &BigInt| BigRational::from(v.clone());
        let m = self.transform_rational(&to_r(u), &to_r(r), &to_r(s), &to_r(t));
        m.expect("integral transform produced non-integral model")
    }

    /// General u, r, s, t transform over Q. Returns None when the image
    /// coefficients are not integers.
    pub fn transform_rational(
        &self,
        u: &BigRational,
        r: &BigRational,
        s: &BigRational,
        t: &BigRational,
    ) -> Option<WeierstrassModel> {
        let a1 = BigRational::from(self.a1.clone());
        let a2 = BigRational::from(self.a2.clone());
        let a3 = BigRational::from(self.a3.clone());
        let a4 = BigRational::from(self.a4.clone());
        let a6 = BigRational::from(self.a6.clone());
        let two = BigRational::from(BigInt::from(2));
        let three = BigRational::from(BigInt::from(3));
        let na1 = (&a1 + &two * s) / u;
        let na2 = (&a2 - s * &a1 + &three * r - s * s) / (u * u);
        let na3 = (&a3 + r * &a1 + &two * t) / (u * u * u);
        let na4 = (&a4 - s * &a3 + &two * r * &a2 - (t + r * s) * &a1 + &three * r * r
            - &two * s * t)
            / (u * u * u * u);
        let na6 = (&a6 + r * &a4 + r * r * &a2 + r * r * r - t * &a3 - t * t - r * t * &a1)
            / (u * u * u * u * u * u);
        let as_int = |v: BigRational| -> Option<BigInt> {
            if v.denom().is_one() {
                Some(v.numer().clone())
            } else {
                None
            }
        };
        Some(WeierstrassModel {
            a1: as_int(na1)?,
            a2: as_int(na2)?,
            a3: as_int(na3)?,
            a4: as_int(na4)?,
            a6: as_int(na6)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve11a1() -> WeierstrassModel {
        WeierstrassModel::new(0, -1, 1, -10, -20)
    }

    #[test]
    fn invariants_of_conductor_eleven_curve() {
        let inv = curve11a1().invariants().unwrap();
        assert_eq!(inv.b2, BigInt::from(-4));
        assert_eq!(inv.b4, BigInt::from(-20));
        assert_eq!(inv.b6, BigInt::from(-79));
        assert_eq!(inv.c4, BigInt::from(496));
        assert_eq!(inv.c6, BigInt::from(20008));
        assert_eq!(inv.delta, BigInt::from(-161051)); // -11^5
        assert_eq!(
            inv.j,
            BigRational::new(BigInt::from(-122023936i64), BigInt::from(161051))
        );
    }

    #[test]
    fn singular_model_rejected() {
        // y^2 = x^3 has discriminant 0.
        let m = WeierstrassModel::new(0, 0, 0, 0, 0);
        assert!(matches!(m.invariants(), Err(CurveError::Singular)));
    }

    #[test]
    fn group_law_on_conductor_eleven_curve() {
        // (5, 5) generates the 5-cycle of torsion points.
        let e = curve11a1();
        let p = RationalPoint::affine(BigInt::from(5), BigInt::from(5));
        assert!(e.is_on_curve(&p));
        let p2 = e.add_points(&p, &p);
        assert_eq!(
            p2,
            RationalPoint::affine(BigInt::from(16), BigInt::from(-61))
        );
        let p3 = e.add_points(&p2, &p);
        assert!(e.is_on_curve(&p3));
        let p5 = e.add_points(&e.add_points(&p3, &p), &p);
        assert!(p5.is_infinity());
        assert_eq!(e.multiply_point(&p, 5), RationalPoint::Infinity);
        assert_eq!(e.multiply_point(&p, 7), p2);
        // Negation: -(5,5) = (5, -y - a3) = (5, -6).
        assert_eq!(
            e.negate_point(&p),
            RationalPoint::affine(BigInt::from(5), BigInt::from(-6))
        );
    }

    #[test]
    fn transform_roundtrip_preserves_curve() {
        let e = curve11a1();
        let u = BigInt::from(1);
        let m = e.transform(&u, &BigInt::from(2), &BigInt::from(-1), &BigInt::from(3));
        let inv0 = e.invariants().unwrap();
        let inv1 = m.invariants().unwrap();
        assert_eq!(inv0.c4, inv1.c4);
        assert_eq!(inv0.c6, inv1.c6);
        assert_eq!(inv0.delta, inv1.delta);
        // Scaling by u = 2 multiplies delta by 2^-12... the inverse
        // direction: starting from a scaled-up model.
        let big = e
            .transform_rational(
                &BigRational::new(BigInt::from(1), BigInt::from(2)),
                &BigRational::zero(),
                &BigRational::zero(),
                &BigRational::zero(),
            )
            .unwrap();
        let invb = big.invariants().unwrap();
        assert_eq!(invb.delta, &inv0.delta * BigInt::from(4096));
        assert_eq!(invb.j, inv0.j);
    }
}
