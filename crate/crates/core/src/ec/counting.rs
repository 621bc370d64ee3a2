//! Point counting over F_l and Fourier coefficient sequences.
//!
//! a_l = l + 1 - #E(F_l) for primes of good reduction. Three regimes:
//! direct enumeration for l < 5, a character sum over the short model for
//! l < 10^4, and for larger l a baby-step giant-step search that collects
//! every multiple of the group order in the Hasse window and intersects
//! candidate sets across random points of the curve and its quadratic
//! twist. The twist intersection is what makes the search terminate even
//! when the group has small exponent, since #E + #E_twist = 2l + 2.

use super::minimal::minimal_model;
use super::tate::{local_data, ReductionKind};
use super::{CurveError, WeierstrassModel};
use crate::arith::{is_prime_u64, legendre, modinv_u64, mulmod, sqrt_mod, XorShift64};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use std::collections::{BTreeSet, HashMap};

const BSGS_THRESHOLD: u64 = 10_000;

fn red(n: &BigInt, q: u64) -> u64 {
    u64::try_from(n.mod_floor(&BigInt::from(q)).magnitude()).unwrap()
}

/// Number of points of the general model over F_l by enumeration.
fn count_enumerate(e: &WeierstrassModel, l: u64) -> u64 {
    let (a1, a2, a3, a4, a6) = (
        red(&e.a1, l),
        red(&e.a2, l),
        red(&e.a3, l),
        red(&e.a4, l),
        red(&e.a6, l),
    );
    let mut count = 1; // infinity
    for x in 0..l {
        for y in 0..l {
            let lhs = (mulmod(y, y, l) + mulmod(a1, mulmod(x, y, l), l) + mulmod(a3, y, l)) % l;
            let rhs = (mulmod(x, mulmod(x, x, l), l)
                + mulmod(a2, mulmod(x, x, l), l)
                + mulmod(a4, x, l)
                + a6)
                % l;
            if lhs == rhs {
                count += 1;
            }
        }
    }
    count
}

/// Short model coefficients mod l (valid for l >= 5): y^2 = x^3 + Ax + B
/// with A = -27 c4, B = -54 c6.
fn short_coeffs(e: &WeierstrassModel, l: u64) -> (u64, u64) {
    let inv = e.invariants_allow_singular();
    let a = red(&(-27 * &inv.c4), l);
    let b = red(&(-54 * &inv.c6), l);
    (a, b)
}

/// a_l by summing the quadratic character of x^3 + Ax + B over F_l.
fn ap_char_sum(a: u64, b: u64, l: u64) -> i64 {
    let mut qr = vec![-1i8; l as usize];
    qr[0] = 0;
    let mut sq = 1u64;
    // (i+1)^2 = i^2 + 2i + 1 keeps the table build free of multiplications.
    for i in 1..=l / 2 {
        qr[sq as usize] = 1;
        sq = (sq + 2 * i + 1) % l;
    }
    let mut sum = 0i64;
    for x in 0..l {
        let f = (mulmod(x, mulmod(x, x, l), l) + mulmod(a, x, l) + b) % l;
        sum += qr[f as usize] as i64;
    }
    -sum
}

/// Affine point arithmetic on y^2 = x^3 + Ax + B over F_l.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Pt {
    Inf,
    At(u64, u64),
}

struct ShortCurve {
    a: u64,
    l: u64,
}

impl ShortCurve {
    fn neg(&self, p: Pt) -> Pt {
        match p {
            Pt::Inf => Pt::Inf,
            Pt::At(x, y) => Pt::At(x, if y == 0 { 0 } else { self.l - y }),
        }
    }

    fn add(&self, p: Pt, q: Pt) -> Pt {
        let l = self.l;
        let (x1, y1, x2, y2) = match (p, q) {
            (Pt::Inf, _) => return q,
            (_, Pt::Inf) => return p,
            (Pt::At(x1, y1), Pt::At(x2, y2)) => (x1, y1, x2, y2),
        };
        let slope = if x1 == x2 {
            if (y1 + y2) % l == 0 {
                return Pt::Inf;
            }
            // Tangent: (3x^2 + A) / 2y.
            let num = (3 * mulmod(x1, x1, l) % l + self.a) % l;
            mulmod(num, modinv_u64(2 * y1 % l, l), l)
        } else {
            let dy = (y2 + l - y1) % l;
            let dx = (x2 + l - x1) % l;
            mulmod(dy, modinv_u64(dx, l), l)
        };
        let x3 = (mulmod(slope, slope, l) + 2 * l - x1 - x2) % l;
        let y3 = (mulmod(slope, (x1 + l - x3) % l, l) + l - y1) % l;
        Pt::At(x3, y3)
    }

    fn scalar(&self, mut k: u64, p: Pt) -> Pt {
        let mut acc = Pt::Inf;
        let mut base = p;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }
}

fn isqrt_u64(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r > 0 && r * r > n {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).map_or(false, |s| s <= n) {
        r += 1;
    }
    r
}

/// Every m in the Hasse window [l+1-s, l+1+s] with m P = O, where
/// s = floor(2 sqrt(l)). The order of the group is among them.
fn annihilators(c: &ShortCurve, p: Pt, l: u64) -> BTreeSet<u64> {
    let s = isqrt_u64(4 * l);
    let q = c.scalar(l + 1, p);
    let r = isqrt_u64(2 * s + 1) + 1;
    // Baby table: x(iP) -> list of (i, y(iP)); track i with iP = O.
    let mut baby: HashMap<u64, Vec<(u64, u64)>> = HashMap::new();
    let mut zero_is: Vec<u64> = Vec::new();
    let mut cur = Pt::Inf;
    for i in 0..r {
        match cur {
            Pt::Inf => zero_is.push(i),
            Pt::At(x, y) => baby.entry(x).or_default().push((i, y)),
        }
        cur = c.add(cur, p);
    }
    let rstep = c.scalar(r, p);
    let k_min = -((s / r) as i64) - 1;
    let k_max = (s / r) as i64 + 1;
    // T_k = -Q - k r P, stepped by -rstep as k ascends.
    let mut t_cur = {
        let base = c.neg(q);
        // -Q - k_min r P = -Q + |k_min| (rP) for k_min < 0.
        let off = c.scalar(k_min.unsigned_abs(), rstep);
        c.add(base, off)
    };
    let mut raw: Vec<i64> = Vec::new();
    for k in k_min..=k_max {
        match t_cur {
            Pt::Inf => {
                for &i in &zero_is {
                    raw.push(k * r as i64 + i as i64);
                }
            }
            Pt::At(x, y) => {
                if let Some(hits) = baby.get(&x) {
                    for &(i, yi) in hits {
                        if yi == y {
                            raw.push(k * r as i64 + i as i64);
                        }
                        if (yi + y) % l == 0 {
                            raw.push(k * r as i64 - i as i64);
                        }
                    }
                }
            }
        }
        t_cur = c.add(t_cur, c.neg(rstep));
    }
    let mut out = BTreeSet::new();
    for t in raw {
        if t.unsigned_abs() > s {
            continue;
        }
        let m = ((l + 1) as i64 + t) as u64;
        if c.scalar(m, p) == Pt::Inf {
            out.insert(m);
        }
    }
    out
}

/// Deterministically sample a point on y^2 = x^3 + Ax + B over F_l.
fn sample_point(c: &ShortCurve, b: u64, rng: &mut XorShift64) -> Pt {
    let l = c.l;
    loop {
        let x = rng.below(l);
        let f = (mulmod(x, mulmod(x, x, l), l) + mulmod(c.a, x, l) + b) % l;
        if legendre(f as i64, l) >= 0 {
            let y = sqrt_mod(f, l).expect("legendre said square");
            return Pt::At(x, y);
        }
    }
}

/// Group order of y^2 = x^3 + Ax + B over F_l by BSGS with twist
/// intersection.
fn group_order_bsgs(a: u64, b: u64, l: u64) -> Result<u64, CurveError> {
    let curve = ShortCurve { a, l };
    // Quadratic twist by a nonresidue d: A' = A d^2, B' = B d^3.
    let d = (2..).find(|&d| legendre(d as i64, l) == -1).unwrap();
    let twist = ShortCurve {
        a: mulmod(a, mulmod(d, d, l), l),
        l,
    };
    let twist_b = mulmod(b, mulmod(d, mulmod(d, d, l), l), l);
    let mut rng = XorShift64::new(l ^ 0x9e3779b97f4a7c15);
    let mut cands: Option<BTreeSet<u64>> = None;
    for round in 0..24 {
        let next: BTreeSet<u64> = if round % 2 == 0 {
            let p = sample_point(&curve, b, &mut rng);
            annihilators(&curve, p, l)
        } else {
            let p = sample_point(&twist, twist_b, &mut rng);
            annihilators(&twist, p, l)
                .into_iter()
                .filter_map(|m| (2 * l + 2).checked_sub(m))
                .collect()
        };
        let merged: BTreeSet<u64> = match &cands {
            None => next,
            Some(prev) => prev.intersection(&next).copied().collect(),
        };
        if merged.len() == 1 {
            return Ok(*merged.iter().next().unwrap());
        }
        assert!(
            !merged.is_empty(),
            "candidate group orders cannot vanish at {}",
            l
        );
        cands = Some(merged);
    }
    Err(CurveError::CountingFailure(l))
}

/// a_l for a prime l on the minimal model; bad primes are reduced to the
/// local reduction type (split 1, nonsplit -1, additive 0).
pub fn ap_count(e: &WeierstrassModel, l: u64) -> Result<i64, CurveError> {
    debug_assert!(is_prime_u64(l), "ap_count expects a prime");
    let emin = minimal_model(e)?;
    let delta = emin.discriminant();
    if delta.mod_floor(&BigInt::from(l)).is_zero() {
        let ld = local_data(&emin, l)?;
        return Ok(match ld.kind {
            ReductionKind::Good => unreachable!("l divides the minimal discriminant"),
            ReductionKind::Multiplicative { split: true } => 1,
            ReductionKind::Multiplicative { split: false } => -1,
            ReductionKind::Additive => 0,
        });
    }
    Ok(ap_good(&emin, l)?)
}

/// a_l for a prime of good reduction; the model must be minimal at l.
fn ap_good(e: &WeierstrassModel, l: u64) -> Result<i64, CurveError> {
    if l < 5 {
        return Ok((l + 1) as i64 - count_enumerate(e, l) as i64);
    }
    let (a, b) = short_coeffs(e, l);
    if l < BSGS_THRESHOLD {
        return Ok(ap_char_sum(a, b, l));
    }
    let n = group_order_bsgs(a, b, l)?;
    Ok((l + 1) as i64 - n as i64)
}

/// Prime factors of the minimal discriminant. Handles small factors by
/// trial division and a large prime or prime-square cofactor, which
/// covers conductors of the family and of everyday test curves.
pub fn discriminant_bad_primes(e: &WeierstrassModel) -> Result<Vec<u64>, CurveError> {
    let emin = minimal_model(e)?;
    let mut rem = emin.discriminant().abs();
    let mut out = Vec::new();
    for q in std::iter::once(2u64).chain((3..100_000u64).step_by(2)) {
        if q >= 3 && !is_prime_u64(q) {
            continue;
        }
        let qb = BigInt::from(q);
        if rem.mod_floor(&qb).is_zero() {
            out.push(q);
            while rem.mod_floor(&qb).is_zero() {
                rem /= &qb;
            }
        }
    }
    if rem > BigInt::from(1) {
        let as_u64 = u64::try_from(rem.magnitude());
        if let Ok(r) = as_u64 {
            if is_prime_u64(r) {
                out.push(r);
            } else {
                let s = isqrt_u64(r);
                if s * s == r && is_prime_u64(s) {
                    out.push(s);
                } else {
                    return Err(CurveError::DiscriminantFactorization);
                }
            }
        } else {
            // Try a perfect square of a machine prime.
            let sq = crate::arith::exact_sqrt(&rem);
            match sq.and_then(|s| u64::try_from(&s).ok()) {
                Some(s) if is_prime_u64(s) => out.push(s),
                _ => return Err(CurveError::DiscriminantFactorization),
            }
        }
    }
    Ok(out)
}

/// Fourier coefficients a_1 .. a_nmax of the L-series, index n holding
/// a_n (index 0 is unused and zero). Multiplicativity and the recursion
/// a_{l^{k+1}} = a_l a_{l^k} - l a_{l^{k-1}} at good primes fill the
/// sequence from prime values.
pub fn an_sequence(e: &WeierstrassModel, n_max: usize) -> Result<Vec<i64>, CurveError> {
    let emin = minimal_model(e)?;
    let bad: Vec<u64> = discriminant_bad_primes(&emin)?;
    let mut a = vec![0i64; n_max + 1];
    if n_max >= 1 {
        a[1] = 1;
    }
    if n_max < 2 {
        return Ok(a);
    }
    // Smallest prime factor sieve.
    let mut spf = vec![0u32; n_max + 1];
    for i in 2..=n_max {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n_max {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                match j.checked_add(i) {
                    Some(nj) => j = nj,
                    None => break,
                }
            }
        }
    }
    for n in 2..=n_max {
        let p = spf[n] as usize;
        let mut q = p;
        let mut m = n / p;
        while m % p == 0 {
            q *= p;
            m /= p;
        }
        if m > 1 {
            a[n] = a[q] * a[m];
            continue;
        }
        // n = p^k.
        if n == p {
            a[n] = ap_count(&emin, p as u64)?;
        } else if bad.contains(&(p as u64)) {
            a[n] = a[p] * a[n / p];
        } else {
            a[n] = a[p] * a[n / p] - (p as i64) * a[n / (p * p)];
        }
    }
    Ok(a)
}
