//! Global minimal models over Q by the Laska-Kraus-Connell method: shrink
//! (c4, c6) by u^4, u^6 as far as the Kraus conditions at 2 and 3 allow,
//! then rebuild a reduced integral model from the surviving pair.

use super::{CurveError, WeierstrassModel};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Kraus: an integral model with invariants (c4, c6) exists iff
/// v3(c6) != 2 and, at 2, either c6 == -1 (mod 4) or
/// (c4 == 0 (mod 16) and c6 == 0 or 8 (mod 32)).
fn kraus_conditions(c4: &BigInt, c6: &BigInt) -> bool {
    let m27 = c6.mod_floor(&BigInt::from(27));
    if m27 == BigInt::from(9) || m27 == BigInt::from(18) {
        return false;
    }
    if c6.mod_floor(&BigInt::from(4)) == BigInt::from(3) {
        return true;
    }
    if c4.mod_floor(&BigInt::from(16)).is_zero() {
        let m32 = c6.mod_floor(&BigInt::from(32));
        return m32.is_zero() || m32 == BigInt::from(8);
    }
    false
}

/// Model with the given invariants, coefficients reduced: a1, a3 in {0,1},
/// a2 in {-1, 0, 1}. The caller must have checked the Kraus conditions.
fn model_from_c4_c6(c4: &BigInt, c6: &BigInt) -> WeierstrassModel {
    // b2 is determined mod 12 by b2 == -c6 (mod 12); pick it in (-6, 6].
    let mut b2 = (-c6).mod_floor(&BigInt::from(12));
    if b2 > BigInt::from(6) {
        b2 -= 12;
    }
    let b4 = (&b2 * &b2 - c4) / BigInt::from(24);
    let b6 = (-(&b2 * &b2 * &b2) + (&b2 * &b4) * 36i64 - c6) / BigInt::from(216);
    let a1 = b2.mod_floor(&BigInt::from(2));
    let a3 = b6.mod_floor(&BigInt::from(2));
    let a2 = (&b2 - &a1) / BigInt::from(4);
    let a4 = (&b4 - &a1 * &a3) / BigInt::from(2);
    let a6 = (&b6 - &a3) / BigInt::from(4);
    WeierstrassModel { a1, a2, a3, a4, a6 }
}

fn v_q(n: &BigInt, q: u64) -> u32 {
    let mut n = n.clone();
    let q = BigInt::from(q);
    let mut v = 0;
    while !n.is_zero() && n.mod_floor(&q).is_zero() {
        n /= &q;
        v += 1;
    }
    v
}

/// Small primes q whose powers q^4 | c4 and q^6 | c6 might be removable.
fn candidate_scale(c4: &BigInt, c6: &BigInt) -> Vec<(u64, u32)> {
    let mut g = if c4.is_zero() {
        c6.abs()
    } else if c6.is_zero() {
        c4.abs()
    } else {
        c4.gcd(c6)
    };
    let mut primes = Vec::new();
    let mut q = 2u64;
    // Trial division of the gcd; any prime scale factor must divide it
    // (when both invariants are nonzero). Non-minimal twists by primes
    // beyond the bound would need c4, c6 each divisible by q^4, enormous
    // for every model arising here.
    while q <= 1_000_000 && g > BigInt::from(1) {
        if g.mod_floor(&BigInt::from(q)).is_zero() {
            while g.mod_floor(&BigInt::from(q)).is_zero() {
                g /= BigInt::from(q);
            }
            let e4 = if c4.is_zero() { u32::MAX } else { v_q(c4, q) / 4 };
            let e6 = if c6.is_zero() { u32::MAX } else { v_q(c6, q) / 6 };
            let e = e4.min(e6);
            if e > 0 {
                primes.push((q, e));
            }
        }
        q += if q == 2 { 1 } else { 2 };
    }
    primes
}

/// Whether the model is already a global minimal model in reduced form.
pub fn is_minimal(e: &WeierstrassModel) -> bool {
    minimal_model(e).map(|m| m == *e).unwrap_or(false)
}

/// The unique reduced global minimal model of the curve.
pub fn minimal_model(e: &WeierstrassModel) -> Result<WeierstrassModel, CurveError> {
    let inv = e.invariants()?;
    let (c4, c6) = (inv.c4, inv.c6);
    let scales = candidate_scale(&c4, &c6);
    // All divisors u of the maximal scale, largest first.
    let mut divisors: Vec<BigInt> = vec![BigInt::from(1)];
    for &(q, e) in &scales {
        let mut next = Vec::new();
        for d in &divisors {
            let mut powed = d.clone();
            for _ in 0..=e {
                next.push(powed.clone());
                powed *= BigInt::from(q);
            }
        }
        divisors = next;
    }
    divisors.sort();
    divisors.reverse();
    for u in &divisors {
        let u4 = u * u * u * u;
        let u6 = &u4 * u * u;
        if !(&c4 % &u4).is_zero() || !(&c6 % &u6).is_zero() {
            continue;
        }
        let c4s = &c4 / &u4;
        let c6s = &c6 / &u6;
        if kraus_conditions(&c4s, &c6s) {
            let m = model_from_c4_c6(&c4s, &c6s);
            let check = m.invariants_allow_singular();
            debug_assert_eq!(check.c4, c4s);
            debug_assert_eq!(check.c6, c6s);
            return Ok(m);
        }
    }
    // u = 1 with the original invariants always satisfies Kraus because
    // an integral model (the input) exists.
    unreachable!("input model invariants must satisfy the Kraus conditions");
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn conductor_eleven_curve_is_minimal() {
        let e = WeierstrassModel::new(0, -1, 1, -10, -20);
        let m = minimal_model(&e).unwrap();
        assert_eq!(m, e);
        assert!(is_minimal(&e));
    }

    #[test]
    fn scaled_up_model_reduces_back() {
        let e = WeierstrassModel::new(0, -1, 1, -10, -20);
        // Scale by u = 1/2 (blowing coefficients up by powers of 2), then
        // by 1/3, and also apply a shear so the reduction must renormalize.
        let two = num_rational::BigRational::new(BigInt::one(), BigInt::from(2));
        let blown = e
            .transform_rational(
                &two,
                &num_rational::BigRational::from(BigInt::from(4)),
                &num_rational::BigRational::from(BigInt::from(1)),
                &num_rational::BigRational::from(BigInt::from(-3)),
            )
            .unwrap();
        assert_eq!(minimal_model(&blown).unwrap(), e);
        let third = num_rational::BigRational::new(BigInt::one(), BigInt::from(3));
        let blown3 = e
            .transform_rational(
                &third,
                &num_rational::BigRational::zero(),
                &num_rational::BigRational::zero(),
                &num_rational::BigRational::zero(),
            )
            .unwrap();
        assert_eq!(minimal_model(&blown3).unwrap(), e);
    }

    #[test]
    fn reduction_normalizes_shifted_models() {
        // Same curve, coefficients shifted by an integral transform; the
        // minimal model must come out in the canonical reduced form.
        let e = WeierstrassModel::new(1, 1, 1, -2, 16);
        let shifted = e.transform(
            &BigInt::one(),
            &BigInt::from(12),
            &BigInt::from(-5),
            &BigInt::from(7),
        );
        assert_eq!(minimal_model(&shifted).unwrap(), e);
    }

    #[test]
    fn minimal_model_idempotent_on_family_models() {
        // Both members of the u = 3 pair are already minimal.
        let e1 = WeierstrassModel::new(1, -1, 0, -1, 0);
        let e0 = WeierstrassModel::new(1, -1, 0, 4, -3);
        assert_eq!(minimal_model(&e1).unwrap(), e1);
        assert_eq!(minimal_model(&e0).unwrap(), e0);
    }

    #[test]
    fn singular_input_is_an_error() {
        let e = WeierstrassModel::new(0, 0, 0, 0, 0);
        assert!(minimal_model(&e).is_err());
    }
}
