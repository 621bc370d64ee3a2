//! L(E,1) for the rank-0 family, the BSD-conjectural order of Sha, and
//! the period comparison that orders the pair by Faltings height.

use crate::arith::{exact_sqrt, is_prime_u64};
use crate::ec::{
    an_sequence, ap_count, discriminant_bad_primes, local_data, minimal_model, real_period,
    WeierstrassModel,
};
use crate::ns::NSPair;
use crate::numeric::Interval;
use num_bigint::BigInt;
use rug::float::Round;
use rug::Float;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error("conductor is not an odd prime")]
    BadConductor,
    #[error("tolerance {0} unreachable within the term cap")]
    TolUnreachable(f64),
    #[error("rounding residual {residual} at tolerance {tol} after precision escalation")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("periods indistinguishable at the working precision")]
    Indistinguishable,
    #[error("L-value consistent with zero; rank-0 assumption suspect")]
    LValueNearZero,
    #[error("curve-side failure: {0}")]
    Curve(#[from] crate::ec::CurveError),
}

#[derive(Clone, Debug)]
pub struct LValueResult {
    pub value: Interval,
    pub terms: u64,
    pub tail_bound: f64,
}

#[derive(Clone, Debug)]
pub struct BSDData {
    pub l_value: LValueResult,
    pub omega: Interval,
    pub torsion_order: u32,
    pub tamagawa_product: u64,
    pub sha_real: Interval,
    pub sha: u64,
    /// Whether the rounded order is a perfect square, as a finite Sha
    /// must be. A false value is a flag for inspection, not an error.
    pub square: bool,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveTag {
    E0,
    E1,
}

#[derive(Clone, Debug)]
pub struct HeightComparison {
    pub omega0: Interval,
    pub omega1: Interval,
    /// Ratio omega1/omega0 with certified bounds; > 1 for the family.
    pub ratio: Interval,
    pub smaller_height: CurveTag,
}

/// Hard cap on series length; tolerances needing more terms are refused.
const TERM_CAP: usize = 20_000_000;

/// Smallest N with 2 x^{N+1} / (1 - x) <= tail_tol for x = e^{-2 pi/sqrt p},
/// the tail bound coming from |a_n| <= 2n. None when N would exceed the cap.
fn series_terms(p: u64, tail_tol: f64) -> Option<usize> {
    if !(tail_tol > 0.0) || !tail_tol.is_finite() {
        return None;
    }
    let t = 2.0 * std::f64::consts::PI / (p as f64).sqrt();
    let denom = -(-t).exp_m1();
    let n = ((2.0 / (tail_tol * denom)).ln() / t).ceil() + 8.0;
    if !n.is_finite() || n < 0.0 || n > TERM_CAP as f64 {
        return None;
    }
    Some(n.max(1.0) as usize)
}

/// Conductor of the minimal model from Tate's algorithm at each bad
/// prime, accepted only when it is an odd prime that fits in a u64.
fn odd_prime_conductor(emin: &WeierstrassModel) -> Result<u64, AnalyticError> {
    let mut n = BigInt::from(1);
    for q in discriminant_bad_primes(emin)? {
        let f = local_data(emin, q)?.f;
        let qb = BigInt::from(q);
        for _ in 0..f {
            n *= &qb;
        }
    }
    let n = u64::try_from(n.magnitude()).map_err(|_| AnalyticError::BadConductor)?;
    if n < 3 || n % 2 == 0 || !is_prime_u64(n) {
        return Err(AnalyticError::BadConductor);
    }
    Ok(n)
}

/// Partial sum S_N = sum_{n<=N} (a_n/n) x^n with x = e^{-2 pi/sqrt p} and
/// a certified bound on the dropped tail. The power x^n is carried as an
/// incrementally multiplied positive real interval, which keeps relative
/// width growth linear in N.
fn lvalue_series(
    emin: &WeierstrassModel,
    p: u64,
    n_terms: usize,
    prec: u32,
) -> Result<(Interval, Interval), AnalyticError> {
    let an = an_sequence(emin, n_terms)?;
    let two_pi = Interval::pi(prec).scale_i64(2);
    let sqrt_p = Interval::from_int(&BigInt::from(p), prec).sqrt();
    let radius = two_pi.div(&sqrt_p).neg().exp();
    let one = Interval::from_i64(1, prec);
    let mut xn = one.clone();
    let mut sum = Interval::from_i64(0, prec);
    for n in 1..=n_terms {
        xn = xn.mul(&radius);
        if an[n] != 0 {
            let c = Interval::from_ratio(&BigInt::from(an[n]), &BigInt::from(n as i64), prec);
            sum = sum.add(&xn.mul(&c));
        }
    }
    let tail = xn.mul(&radius).scale_i64(2).div(&one.sub(&radius));
    Ok((sum, tail))
}

/// L(E,1) for odd prime conductor p via the exponentially convergent
/// series (1 + w) sum_{n>=1} (a_n/n) e^{-2 pi n/sqrt p}, where w = a_p is
/// the sign of the functional equation. The returned interval encloses
/// both the rounding and the dropped tail; for w = -1 the value is an
/// exact zero, which is the correct L(E,1) under the odd equation.
pub fn lvalue_rank0(e: &WeierstrassModel, tol: f64) -> Result<LValueResult, AnalyticError> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(AnalyticError::TolUnreachable(tol));
    }
    let emin = minimal_model(e)?;
    let p = odd_prime_conductor(&emin)?;
    let w = ap_count(&emin, p)?;
    debug_assert!(w == 1 || w == -1, "multiplicative a_p must be a sign");
    let n_terms = series_terms(p, tol / 4.0).ok_or(AnalyticError::TolUnreachable(tol))?;
    let mut prec = 32u32.max((-tol.log2()).ceil() as u32) + 48;
    loop {
        let (sum, tail) = lvalue_series(&emin, p, n_terms, prec)?;
        let value = sum.add(&tail.symmetrize()).scale_i64(1 + w);
        if value.width() <= tol {
            let tail_bound = tail.hi().to_f64() * (1 + w) as f64;
            return Ok(LValueResult {
                value,
                terms: n_terms as u64,
                tail_bound,
            });
        }
        if prec > (1 << 14) {
            return Err(AnalyticError::TolUnreachable(tol));
        }
        prec *= 2;
    }
}

/// Conjectural |Sha| = L(E,1) t^2 / (Omega c_p) for the chosen member of
/// the pair, t = 2 for the whole family. Omega spans all real components.
/// Precision climbs 64 -> 128 -> 256 bits until the rounding residual
/// clears tol; an L-value still consistent with zero at the top rung is
/// reported as such rather than rounded to 0.
pub fn bsd_sha(pair: &NSPair, which: u8, tol: f64) -> Result<BSDData, AnalyticError> {
    assert!(which <= 1, "which selects member 0 or 1 of the pair");
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(AnalyticError::TolUnreachable(tol));
    }
    let e = if which == 0 { &pair.e0 } else { &pair.e1 };
    let p = pair
        .parameter
        .p_u64()
        .ok_or(AnalyticError::BadConductor)?;
    let emin = minimal_model(e)?;
    let w = ap_count(&emin, p)?;
    if w != 1 {
        // Odd functional equation forces L(E,1) = 0.
        return Err(AnalyticError::LValueNearZero);
    }
    let c = local_data(&emin, p)?.c;
    let mut last_residual = f64::INFINITY;
    let mut near_zero = false;
    for (prec, tail_tol) in [(64u32, 1e-9f64), (128, 1e-20), (256, 1e-38)] {
        let n_terms = match series_terms(p, tail_tol) {
            Some(n) => n,
            None => continue,
        };
        let (sum, tail) = lvalue_series(&emin, p, n_terms, prec + 32)?;
        let value = sum.add(&tail.symmetrize()).scale_i64(2);
        let omega = real_period(&emin, prec)?.bsd_period();
        // L t^2 / (Omega c_p) with t = 2.
        let shar = value.scale_i64(4).div(&omega.scale_i64(c as i64));
        near_zero = shar.contains_zero();
        if near_zero {
            continue;
        }
        let mid = shar.mid_f64().round();
        if !(mid >= 1.0) {
            near_zero = true;
            continue;
        }
        let sha = mid as u64;
        let m_f = Float::with_val(shar.prec(), sha);
        let up = Float::with_val_round(shar.prec(), shar.hi() - &m_f, Round::Up).0;
        let down = Float::with_val_round(shar.prec(), &m_f - shar.lo(), Round::Up).0;
        let residual = up.max(&down).to_f64_round(Round::Up);
        if residual < tol {
            let tail_bound = tail.hi().to_f64() * 2.0;
            return Ok(BSDData {
                l_value: LValueResult {
                    value,
                    terms: n_terms as u64,
                    tail_bound,
                },
                omega,
                torsion_order: 2,
                tamagawa_product: c,
                sha_real: shar,
                sha,
                square: exact_sqrt(&BigInt::from(sha)).is_some(),
                residual,
            });
        }
        last_residual = residual;
    }
    if near_zero {
        return Err(AnalyticError::LValueNearZero);
    }
    Err(AnalyticError::ResidualTooLarge {
        residual: last_residual,
        tol,
    })
}

/// Certified comparison of the real periods; E1 has the larger period
/// and hence the smaller Faltings height.
pub fn height_compare(pair: &NSPair, prec: u32) -> Result<HeightComparison, AnalyticError> {
    let omega0 = real_period(&pair.e0, prec)?.bsd_period();
    let omega1 = real_period(&pair.e1, prec)?.bsd_period();
    let ratio = omega1.div(&omega0);
    let smaller_height = if omega0.strictly_less_than(&omega1) {
        CurveTag::E1
    } else if omega1.strictly_less_than(&omega0) {
        CurveTag::E0
    } else {
        return Err(AnalyticError::Indistinguishable);
    };
    Ok(HeightComparison {
        omega0,
        omega1,
        ratio,
        smaller_height,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ns::construct_pair;

    fn pair_for(u: i64) -> NSPair {
        construct_pair(&BigInt::from(u)).unwrap()
    }

    #[test]
    fn direct_summation_oracle_at_the_smallest_parameter() {
        // Independent oracle: plain f64 summation of 10^4 terms.
        let pair = pair_for(3);
        let an = an_sequence(&pair.e1, 10_000).unwrap();
        let x = (-2.0 * std::f64::consts::PI / 73.0f64.sqrt()).exp();
        let mut s = 0.0f64;
        let mut xn = 1.0f64;
        for n in 1..=10_000usize {
            xn *= x;
            s += an[n] as f64 / n as f64 * xn;
        }
        let oracle = 2.0 * s;
        let got = lvalue_rank0(&pair.e1, 1e-10).unwrap();
        assert!(got.value.is_strictly_positive());
        assert!((got.value.mid_f64() - oracle).abs() < 1e-8);
        assert!(got.tail_bound < 1e-10);
    }

    #[test]
    fn lvalue_matches_the_proven_quotient_for_conductor_eleven() {
        // X_0(11): L(E,1)/Omega = 1/5 exactly, so the certified L-value
        // interval and the certified period interval must overlap on it.
        let e = WeierstrassModel::new(0, -1, 1, -10, -20);
        let got = lvalue_rank0(&e, 1e-12).unwrap();
        let omega = real_period(&e, 128).unwrap().bsd_period();
        let fifth = omega.div(&Interval::from_i64(5, 128));
        assert!(got.value.is_strictly_positive());
        assert!(got.value.sub(&fifth).contains_zero());
    }

    #[test]
    fn odd_sign_gives_an_exact_zero() {
        // Rank 1, conductor 37: a_37 = -1, so the series factor 1 + w
        // vanishes and the L-value must be the exact zero interval.
        let e = WeierstrassModel::new(0, 0, 1, -1, 0);
        let got = lvalue_rank0(&e, 1e-8).unwrap();
        assert!(got.value.contains_zero());
        assert!(got.value.width().is_zero());
        assert_eq!(got.tail_bound, 0.0);
    }

    #[test]
    fn even_composite_conductors_are_rejected() {
        // y^2 = x^3 - x has conductor 32.
        let e = WeierstrassModel::new(0, 0, 0, -1, 0);
        assert!(matches!(
            lvalue_rank0(&e, 1e-8),
            Err(AnalyticError::BadConductor)
        ));
    }

    #[test]
    fn doubling_the_terms_stays_inside_the_tail_bound() {
        for u in [3i64, -5, 7] {
            let pair = pair_for(u);
            let p = pair.parameter.p_u64().unwrap();
            let n = series_terms(p, 1e-6).unwrap();
            let (s1, t1) = lvalue_series(&pair.e1, p, n, 96).unwrap();
            let (s2, _) = lvalue_series(&pair.e1, p, 2 * n, 96).unwrap();
            let drift = (s2.mid_f64() - s1.mid_f64()).abs();
            assert!(
                drift <= t1.hi().to_f64() + 1e-20,
                "u={u}: drift {drift} vs tail {}",
                t1.hi().to_f64()
            );
        }
    }

    #[test]
    fn sha_is_one_at_the_smallest_parameter() {
        let pair = pair_for(3);
        let bsd = bsd_sha(&pair, 1, 1e-3).unwrap();
        assert_eq!(bsd.sha, 1);
        assert!(bsd.square);
        assert!(bsd.residual < 1e-3);
        assert_eq!(bsd.torsion_order, 2);
        assert_eq!(bsd.tamagawa_product, 1);
        assert!(bsd.l_value.value.is_strictly_positive());
    }

    #[test]
    fn members_agree_on_the_odd_part_of_sha() {
        let pair = pair_for(3);
        let s0 = bsd_sha(&pair, 0, 1e-3).unwrap();
        let s1 = bsd_sha(&pair, 1, 1e-3).unwrap();
        assert_eq!(s0.tamagawa_product, 2);
        assert_eq!(s1.tamagawa_product, 1);
        let odd = |mut n: u64| {
            while n % 2 == 0 {
                n /= 2;
            }
            n
        };
        assert_eq!(odd(s0.sha), odd(s1.sha));
    }

    #[test]
    fn tamagawa_numbers_split_one_and_two() {
        for u in [3i64, -5, 7, -13] {
            let pair = pair_for(u);
            let p = pair.parameter.p_u64().unwrap();
            assert_eq!(local_data(&pair.e1, p).unwrap().c, 1, "u={u}");
            assert_eq!(local_data(&pair.e0, p).unwrap().c, 2, "u={u}");
        }
    }

    #[test]
    fn sha_orders_are_squares_for_small_parameters() {
        for u in [3i64, -5, 7, -13, -17, 23, -33, 35, -37, 43] {
            let bsd = bsd_sha(&pair_for(u), 1, 1e-3).unwrap();
            assert!(bsd.square, "u={u} gave sha={}", bsd.sha);
        }
    }

    #[test]
    fn e1_has_the_smaller_height() {
        for u in [3i64, -17] {
            let hc = height_compare(&pair_for(u), 96).unwrap();
            assert_eq!(hc.smaller_height, CurveTag::E1, "u={u}");
            let one = Interval::from_i64(1, 96);
            assert!(one.strictly_less_than(&hc.ratio), "u={u}");
        }
    }
}
