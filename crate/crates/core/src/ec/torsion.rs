//! Rational torsion by the Lutz-Nagell method on the short model
//! Y^2 = X^3 - 27 c4 X - 54 c6, reached from (x, y) by X = 36x + 3 b2,
//! Y = 108 (2y + a1 x + a3). Torsion points are integral there with
//! Y = 0 or Y^2 dividing the short discriminant 6^12 Delta, and the
//! preimages may have denominators 4 in x and 8 in y. Candidates are
//! confirmed by checking that some multiple up to the rational torsion
//! bound vanishes.

use super::{CurveError, RationalPoint, WeierstrassModel};
use crate::arith::{exact_sqrt, factor_u64, is_prime};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionGroup {
    pub order: u32,
    /// Cyclic invariant factors, smallest first: [] trivial, [n], or [2, n].
    pub structure: Vec<u32>,
    /// All affine torsion points, sorted by (x, y).
    pub points: Vec<RationalPoint>,
    pub generators: Vec<RationalPoint>,
}

fn factor_abs(n: &BigInt) -> Result<Vec<(BigInt, u32)>, CurveError> {
    let mut m = n.abs();
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    if m.is_zero() {
        return Err(CurveError::Singular);
    }
    for q in std::iter::once(2u64).chain((3..100_000).step_by(2)) {
        if m.is_one() {
            break;
        }
        let qb = BigInt::from(q);
        if (&m % &qb).is_zero() {
            let mut e = 0;
            while (&m % &qb).is_zero() {
                m /= &qb;
                e += 1;
            }
            out.push((qb, e));
        }
    }
    if !m.is_one() {
        if is_prime(m.magnitude()) {
            out.push((m, 1));
        } else if let Some(s) = exact_sqrt(&m) {
            if is_prime(s.magnitude()) {
                out.push((s, 2));
            } else if let Ok(s64) = u64::try_from(&s) {
                for (q, e) in factor_u64(s64) {
                    out.push((BigInt::from(q), 2 * e));
                }
            } else {
                return Err(CurveError::DiscriminantFactorization);
            }
        } else if let Ok(m64) = u64::try_from(&m) {
            for (q, e) in factor_u64(m64) {
                out.push((BigInt::from(q), e));
            }
        } else {
            // Out of reach for the strategies above; no curve in this
            // crate's domain gets here.
            return Err(CurveError::DiscriminantFactorization);
        }
    }
    Ok(out)
}

/// All y >= 0 with y^2 dividing n, from the factorization of n.
fn square_divisor_roots(factors: &[(BigInt, u32)]) -> Vec<BigInt> {
    let mut roots = vec![BigInt::one()];
    for (q, e) in factors {
        let half = e / 2;
        if half == 0 {
            continue;
        }
        let mut next = Vec::with_capacity(roots.len() * (half as usize + 1));
        for r in &roots {
            let mut powed = r.clone();
            for _ in 0..=half {
                next.push(powed.clone());
                powed *= q;
            }
        }
        roots = next;
    }
    roots
}

/// Integer roots of X^3 + a X + b by sign-change bisection on the three
/// monotone pieces.
fn integer_cubic_roots(a: &BigInt, b: &BigInt) -> Vec<BigInt> {
    let f = |x: &BigInt| -> BigInt { x * x * x + a * x + b };
    // Cauchy bound on real roots of the monic cubic.
    let bound = BigInt::one() + a.abs().max(b.abs());
    // Split at the critical points +-sqrt(-a/3) so f is monotone on each
    // piece; fr = floor(sqrt(-a/3)) exactly (isqrt commutes with floor here).
    let mut pieces: Vec<(BigInt, BigInt)> = Vec::new();
    if a.is_negative() {
        let q = -a;
        let fr = q.div_floor(&BigInt::from(3)).sqrt();
        let cr = if &fr * &fr * 3i64 == q { fr.clone() } else { &fr + 1i64 };
        pieces.push((-&bound, -&cr));
        pieces.push((-&fr, fr.clone()));
        pieces.push((cr, bound));
    } else {
        pieces.push((-&bound, bound));
    }
    let mut roots = Vec::new();
    let mut push = |x: BigInt| {
        if f(&x).is_zero() && !roots.contains(&x) {
            roots.push(x);
        }
    };
    for (mut lo, mut hi) in pieces {
        push(lo.clone());
        push(hi.clone());
        let (slo, shi) = (f(&lo).sign(), f(&hi).sign());
        if slo == num_bigint::Sign::NoSign || shi == num_bigint::Sign::NoSign || slo == shi {
            continue;
        }
        while &hi - &lo > BigInt::one() {
            let mid = (&lo + &hi) / 2;
            let sm = f(&mid).sign();
            if sm == num_bigint::Sign::NoSign {
                push(mid);
                break;
            }
            if sm == slo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    roots.sort();
    roots
}

/// Order of a point if it is torsion (order at most 12 over Q), else None.
fn torsion_order(e: &WeierstrassModel, p: &RationalPoint) -> Option<u32> {
    if p.is_infinity() {
        return Some(1);
    }
    let mut acc = p.clone();
    for k in 2..=12u32 {
        acc = e.add_points(&acc, p);
        if acc.is_infinity() {
            return Some(k);
        }
    }
    None
}

/// The rational torsion subgroup of an integral model.
pub fn lutz_nagell_torsion(e: &WeierstrassModel) -> Result<TorsionGroup, CurveError> {
    let inv = e.invariants()?;
    let a_short = BigInt::from(-27) * &inv.c4;
    let b_short_base = BigInt::from(-54) * &inv.c6;
    // Factor 6^12 * Delta for the square-divisor candidates.
    let mut factors = factor_abs(&inv.delta)?;
    for (q, extra) in [(BigInt::from(2), 12u32), (BigInt::from(3), 12u32)] {
        match factors.iter_mut().find(|(p, _)| *p == q) {
            Some((_, e)) => *e += extra,
            None => factors.push((q, extra)),
        }
    }
    let mut y_candidates = square_divisor_roots(&factors);
    y_candidates.push(BigInt::zero());
    let mut torsion: Vec<(RationalPoint, u32)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for y_short in &y_candidates {
        let b = &b_short_base - y_short * y_short;
        for x_short in integer_cubic_roots(&a_short, &b) {
            for y_sign in [y_short.clone(), -y_short] {
                if y_short.is_zero() && y_sign.is_negative() {
                    continue;
                }
                // Back to the original model.
                let x = BigRational::new(&x_short - 3 * &inv.b2, BigInt::from(36));
                let y = (BigRational::new(y_sign.clone(), BigInt::from(108))
                    - BigRational::from(e.a1.clone()) * &x
                    - BigRational::from(e.a3.clone()))
                    / BigRational::from(BigInt::from(2));
                let pt = RationalPoint::Affine(x, y);
                if !e.is_on_curve(&pt) || !seen.insert(format!("{:?}", pt)) {
                    continue;
                }
                if let Some(ord) = torsion_order(e, &pt) {
                    torsion.push((pt, ord));
                }
            }
        }
    }
    // Group structure: over Q the group is Z/n or Z/2 x Z/2m.
    let order = torsion.len() as u32 + 1;
    let max_order = torsion.iter().map(|(_, o)| *o).max().unwrap_or(1);
    let mut generators = Vec::new();
    let mut structure = Vec::new();
    if max_order > 1 {
        let gen = torsion
            .iter()
            .find(|(_, o)| *o == max_order)
            .map(|(p, _)| p.clone())
            .unwrap();
        if max_order == order {
            structure.push(order);
            generators.push(gen);
        } else {
            assert_eq!(order, 2 * max_order, "rational torsion must be Z/n or Z/2 x Z/2m");
            // Find a 2-torsion point outside the cyclic piece generated above.
            let half = e.multiply_point(&gen, max_order / 2);
            let extra = torsion
                .iter()
                .find(|(p, o)| *o == 2 && *p != half)
                .map(|(p, _)| p.clone())
                .expect("second generator of order 2");
            structure.push(2);
            structure.push(max_order);
            generators.push(extra);
            generators.push(gen);
        }
    }
    let mut points: Vec<RationalPoint> = torsion.into_iter().map(|(p, _)| p).collect();
    points.sort_by(|a, b| match (a, b) {
        (RationalPoint::Affine(x1, y1), RationalPoint::Affine(x2, y2)) => {
            x1.cmp(x2).then(y1.cmp(y2))
        }
        _ => std::cmp::Ordering::Equal,
    });
    Ok(TorsionGroup {
        order,
        structure,
        points,
        generators,
    })
}
