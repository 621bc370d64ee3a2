//! The Neumann-Setzer family: curves of prime conductor p = u^2 + 64
//! with a rational 2-isogeny.
//!
//! For odd u with u = 3 (mod 4) and p = u^2 + 64 prime, the pair is
//!
//!   E1: y^2 + xy = x^3 - (u+1)/4 x^2 - x,        Delta = p,
//!   E0: y^2 + xy = x^3 - (u+1)/4 x^2 + 4x - u,   Delta = -p^2,
//!
//! linked by the 2-isogeny with kernel (0, 0) on E1. Both have torsion
//! Z/2Z and conductor p. The parity of the modular degree of E0 is odd
//! exactly when u = 3 (mod 8); the 2-adic valuation is conjecturally
//! one when u = 7 (mod 16) and at least two when u = 15 (mod 16).

use crate::arith::is_prime;
use crate::ec::{CurveInvariants, RationalPoint, WeierstrassModel};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NsError {
    #[error("u must be odd")]
    EvenParameter,
    #[error("u^2 + 64 is not prime")]
    CompositeP,
    #[error("u must be normalized to 3 (mod 4)")]
    NotNormalized,
}

/// A valid family parameter: odd u with u^2 + 64 prime, kept in the
/// normalized sign class u = 3 (mod 4).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NSParameter {
    u: BigInt,
    p: BigUint,
}

impl NSParameter {
    pub fn new(u: &BigInt) -> Result<Self, NsError> {
        let u = normalize_u(u)?;
        let p = (&u * &u + 64i64).to_biguint().unwrap();
        if !is_prime(&p) {
            return Err(NsError::CompositeP);
        }
        Ok(NSParameter { u, p })
    }

    pub fn u(&self) -> &BigInt {
        &self.u
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn p_u64(&self) -> Option<u64> {
        u64::try_from(&self.p).ok()
    }
}

/// Whether u is odd with u^2 + 64 prime.
pub fn is_ns_u(u: &BigInt) -> bool {
    if u.is_even() {
        return false;
    }
    let p = (u * u + 64i64).to_biguint().unwrap();
    is_prime(&p)
}

/// The representative of {u, -u} congruent to 3 mod 4.
pub fn normalize_u(u: &BigInt) -> Result<BigInt, NsError> {
    if u.is_even() {
        return Err(NsError::EvenParameter);
    }
    if u.mod_floor(&BigInt::from(4)) == BigInt::from(3) {
        Ok(u.clone())
    } else {
        Ok(-u)
    }
}

/// The curve pair attached to a normalized parameter.
#[derive(Clone, Debug)]
pub struct NSPair {
    pub parameter: NSParameter,
    pub e0: WeierstrassModel,
    pub e1: WeierstrassModel,
    pub invariants0: CurveInvariants,
    pub invariants1: CurveInvariants,
}

/// Build the pair from a normalized parameter; the defining invariant
/// identities are checked exactly on construction.
pub fn construct_pair(u: &BigInt) -> Result<NSPair, NsError> {
    if u.is_even() {
        return Err(NsError::EvenParameter);
    }
    if u.mod_floor(&BigInt::from(4)) != BigInt::from(3) {
        return Err(NsError::NotNormalized);
    }
    let parameter = NSParameter::new(u)?;
    let a2 = -((u + 1i64) / 4i64);
    let e1 = WeierstrassModel {
        a1: BigInt::one(),
        a2: a2.clone(),
        a3: BigInt::zero(),
        a4: BigInt::from(-1),
        a6: BigInt::zero(),
    };
    let e0 = WeierstrassModel {
        a1: BigInt::one(),
        a2,
        a3: BigInt::zero(),
        a4: BigInt::from(4),
        a6: -u.clone(),
    };
    let invariants1 = e1.invariants().expect("family curve is nonsingular");
    let invariants0 = e0.invariants().expect("family curve is nonsingular");
    let p = BigInt::from(parameter.p.clone());
    assert_eq!(invariants1.c4, &p - 16, "c4(E1) identity");
    assert_eq!(invariants1.c6, u * (&p + 8), "c6(E1) identity");
    assert_eq!(invariants1.delta, p, "Delta(E1) identity");
    assert_eq!(invariants0.c4, &p - 256, "c4(E0) identity");
    assert_eq!(invariants0.c6, u * (&p + 512), "c6(E0) identity");
    assert_eq!(invariants0.delta, -(&p * &p), "Delta(E0) identity");
    Ok(NSPair {
        parameter,
        e0,
        e1,
        invariants0,
        invariants1,
    })
}

/// The rational 2-torsion point of either curve: (0, 0) on E1 and
/// (u/4, -u/8) on E0.
pub fn two_torsion_point(pair: &NSPair, which: u8) -> RationalPoint {
    match which {
        1 => RationalPoint::Affine(BigRational::zero(), BigRational::zero()),
        0 => {
            let u = pair.parameter.u();
            RationalPoint::Affine(
                BigRational::new(u.clone(), BigInt::from(4)),
                BigRational::new(-u, BigInt::from(8)),
            )
        }
        _ => panic!("which must be 0 or 1"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwoValuation {
    ExactlyZero,
    ExactlyOne,
    AtLeastTwo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Theorem,
    Conjecture,
}

/// Predicted parity and 2-adic valuation of the modular degree of E0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParityPrediction {
    pub parity: Parity,
    pub two_adic: TwoValuation,
    /// Strength of the claim the caller asked about: the parity statement
    /// is a theorem; the refined valuation is conjectural except in the
    /// odd case.
    pub provenance: Provenance,
}

fn residue(u: &BigInt, m: i64) -> i64 {
    i64::try_from(&u.mod_floor(&BigInt::from(m))).unwrap()
}

fn two_adic_class(u: &BigInt) -> TwoValuation {
    match residue(u, 8) {
        3 => TwoValuation::ExactlyZero,
        7 => match residue(u, 16) {
            7 => TwoValuation::ExactlyOne,
            15 => TwoValuation::AtLeastTwo,
            _ => unreachable!(),
        },
        _ => unreachable!("normalized u is 3 mod 4"),
    }
}

/// Parity of the modular degree: odd iff u = 3 (mod 8).
pub fn predict_parity(u: &BigInt) -> Result<ParityPrediction, NsError> {
    let param = NSParameter::new(u)?;
    if param.u() != u {
        return Err(NsError::NotNormalized);
    }
    let two_adic = two_adic_class(u);
    Ok(ParityPrediction {
        parity: if two_adic == TwoValuation::ExactlyZero {
            Parity::Odd
        } else {
            Parity::Even
        },
        two_adic,
        provenance: Provenance::Theorem,
    })
}

/// Refined 2-adic valuation of the modular degree, conjectural beyond
/// the odd case.
pub fn predict_two_valuation(u: &BigInt) -> Result<ParityPrediction, NsError> {
    let mut pred = predict_parity(u)?;
    pred.provenance = if pred.two_adic == TwoValuation::ExactlyZero {
        Provenance::Theorem
    } else {
        Provenance::Conjecture
    };
    Ok(pred)
}

/// The numerator of (p-1)/12 in lowest terms. This is the order of the
/// cuspidal subgroup generated by the difference of the cusps 0 and
/// infinity on the modular Jacobian of level p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EisensteinData {
    pub n: BigUint,
}

pub fn eisenstein_n(p: &BigUint) -> EisensteinData {
    let pm1 = p - 1u32;
    let g = pm1.gcd(&BigUint::from(12u32));
    EisensteinData { n: pm1 / g }
}
