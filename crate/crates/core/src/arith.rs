//! Integer utilities shared across the crate: deterministic primality,
//! factorization of machine-word integers, modular arithmetic helpers,
//! CRT lifting and rational reconstruction.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// (a * b) mod m without overflow.
#[inline]
pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// a^e mod m.
pub fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    a %= m;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64. The witness set
/// {2,3,5,7,11,13,17,19,23,29,31,37} is exact for n < 3.3 * 10^24,
/// which covers the whole u64 range.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin for arbitrary-size integers. Deterministic (same witness
/// set as the u64 case) for n < 3.3 * 10^24; above that bound the twelve
/// fixed witnesses plus twelve pseudorandom ones make this a strong
/// probable-prime test.
pub fn is_prime(n: &BigUint) -> bool {
    if let Ok(small) = u64::try_from(n) {
        return is_prime_u64(small);
    }
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    if n.is_even() {
        return false;
    }
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    let deterministic_bound = BigUint::from(33u64) * BigUint::from(10u64).pow(23);
    let mut witnesses: Vec<BigUint> = [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]
        .iter()
        .map(|&a| BigUint::from(a))
        .collect();
    if *n >= deterministic_bound {
        let mut rng = XorShift64::new(0x9e3779b97f4a7c15 ^ (n.bits() as u64));
        let nm3 = n - BigUint::from(3u32);
        for _ in 0..12 {
            let r = BigUint::from(rng.next_u64()) * BigUint::from(rng.next_u64());
            witnesses.push(&two + (r % &nm3));
        }
    }
    'witness: for a in witnesses {
        if &a % n == BigUint::zero() {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Small deterministic pseudorandom stream used for Pollard rho and for
/// picking points in order-finding. Not cryptographic; fixed seeds keep
/// every computation reproducible.
pub struct XorShift64 {
    state: u64,
}

impl XorShift64 {
    pub fn new(seed: u64) -> Self {
        XorShift64 {
            state: seed | 1,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.state = x;
        x
    }

    /// Uniform-ish value in [0, bound).
    pub fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }
}

fn pollard_rho(n: u64, rng: &mut XorShift64) -> u64 {
    // Brent's cycle variant; n must be odd, composite, not a prime power
    // guarantee is not needed since we retry with new parameters.
    loop {
        let c = 1 + rng.below(n - 1);
        let mut x = rng.below(n);
        let mut y = x;
        let mut d = 1u64;
        let f = |v: u64| (mulmod(v, v, n) + c) % n;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            if x == y {
                break;
            }
            d = x.abs_diff(y).gcd(&n);
        }
        if d != 1 && d != n {
            return d;
        }
    }
}

/// Prime factorization of a u64 as (prime, exponent) pairs, primes ascending.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    if n <= 1 {
        return out;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        if n % q == 0 {
            let mut e = 0;
            while n % q == 0 {
                n /= q;
                e += 1;
            }
            out.push((q, e));
        }
    }
    if n == 1 {
        return out;
    }
    let mut stack = vec![n];
    let mut rng = XorShift64::new(0x5851f42d4c957f2d);
    let mut found: Vec<u64> = Vec::new();
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            found.push(m);
            continue;
        }
        let d = pollard_rho(m, &mut rng);
        stack.push(d);
        stack.push(m / d);
    }
    found.sort_unstable();
    for q in found {
        match out.iter_mut().find(|(p, _)| *p == q) {
            Some((_, e)) => *e += 1,
            None => out.push((q, 1)),
        }
    }
    out.sort_unstable_by_key(|&(p, _)| p);
    out
}

/// Legendre symbol (a/p) for odd prime p, values in {-1, 0, 1}.
pub fn legendre(a: i64, p: u64) -> i32 {
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    let e = powmod(r, (p - 1) / 2, p);
    if e == 1 {
        1
    } else {
        -1
    }
}

/// Square root mod an odd prime p by Tonelli-Shanks; None for non-residues.
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if powmod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(powmod(a, (p + 1) / 4, p));
    }
    // Write p - 1 = q 2^s with q odd.
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    // A non-residue z found by scanning; density 1/2.
    let mut z = 2;
    while powmod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = powmod(z, q, p);
    let mut t = powmod(a, q, p);
    let mut r = powmod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mulmod(t2, t2, p);
            i += 1;
        }
        let mut b = c;
        for _ in 0..(m - i - 1) {
            b = mulmod(b, b, p);
        }
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    Some(r)
}

/// Inverse of a mod m for gcd(a, m) = 1.
pub fn modinv_u64(a: u64, m: u64) -> u64 {
    let eg = i128::extended_gcd(&(a as i128), &(m as i128));
    debug_assert_eq!(eg.gcd, 1, "modinv of non-unit {} mod {}", a, m);
    eg.x.rem_euclid(m as i128) as u64
}

/// One CRT lifting step: given x == r1 (mod m1) and x == r2 (mod m2) with
/// coprime moduli, return the unique class mod m1*m2.
pub fn crt_lift(r1: &BigInt, m1: &BigInt, r2: u64, m2: u64) -> BigInt {
    let m2b = BigInt::from(m2);
    let diff = (BigInt::from(r2) - r1).mod_floor(&m2b);
    let m1_mod = u64::try_from(m1.mod_floor(&m2b).magnitude()).unwrap();
    let inv = modinv_u64(m1_mod % m2, m2);
    let k = (diff * BigInt::from(inv)).mod_floor(&m2b);
    r1 + m1 * k
}

/// Rational reconstruction: find p/q with x == p * q^{-1} (mod m),
/// |p| <= sqrt(m/2), 0 < q <= sqrt(m/2), gcd(q, m) = 1. Returns None when
/// no such pair exists.
pub fn rational_reconstruct(x: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let bound = (m / BigInt::from(2)).sqrt();
    let mut r0 = m.clone();
    let mut r1 = x.mod_floor(m);
    let mut s0 = BigInt::zero();
    let mut s1 = BigInt::one();
    while r1.abs() > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let s2 = &s0 - &q * &s1;
        s0 = std::mem::replace(&mut s1, s2);
    }
    if s1.is_zero() || s1.abs() > bound {
        return None;
    }
    let (num, den) = if s1.is_negative() {
        (-r1, -s1)
    } else {
        (r1, s1)
    };
    if den.gcd(m) != BigInt::one() {
        return None;
    }
    let g = num.gcd(&den);
    Some((num / &g, den / g))
}

/// Integer square root of a perfect square, or None.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    #[test]
    fn primality_small_and_carmichael() {
        let primes = [2u64, 3, 5, 7, 11, 73, 353, 1153, 16193, 30689, 2147483629];
        for p in primes {
            assert!(is_prime_u64(p), "{} should be prime", p);
        }
        // Carmichael numbers and squares.
        for n in [561u64, 1105, 1729, 2465, 294409, 25, 1, 0] {
            assert!(!is_prime_u64(n), "{} should be composite", n);
        }
        // 2^61 - 1 is a Mersenne prime, 2^62 + 1 factors.
        assert!(is_prime_u64((1 << 61) - 1));
        assert!(!is_prime_u64((1 << 62) + 1));
    }

    #[test]
    fn primality_bigint_matches_u64() {
        for n in [73u64, 5329, 30753, 16129 + 64, 1 << 20] {
            assert_eq!(
                is_prime(&BigUint::from(n)),
                is_prime_u64(n),
                "mismatch at {}",
                n
            );
        }
        // 2^332 - 707 is the largest prime below 2^332.
        let p = (BigUint::one() << 332) - BigUint::from(707u32);
        assert!(is_prime(&p));
        assert!(!is_prime(&(&p * BigUint::from(3u32))));
    }

    #[test]
    fn factoring_u64() {
        assert_eq!(factor_u64(1), vec![]);
        assert_eq!(factor_u64(2), vec![(2, 1)]);
        assert_eq!(factor_u64(96), vec![(2, 5), (3, 1)]);
        assert_eq!(factor_u64(7740), vec![(2, 2), (3, 2), (5, 1), (43, 1)]);
        assert_eq!(factor_u64(12420), vec![(2, 2), (3, 3), (5, 1), (23, 1)]);
        let n = 2147483629u64 * 2147483587;
        assert_eq!(factor_u64(n), vec![(2147483587, 1), (2147483629, 1)]);
        let sq = 1000003u64 * 1000003;
        assert_eq!(factor_u64(sq), vec![(1000003, 2)]);
    }

    #[test]
    fn legendre_symbol_matches_square_sets() {
        let p = 73u64;
        let squares: std::collections::HashSet<u64> =
            (1..p).map(|x| x * x % p).collect();
        for a in 1..p {
            let expect = if squares.contains(&a) { 1 } else { -1 };
            assert_eq!(legendre(a as i64, p), expect);
        }
        assert_eq!(legendre(0, p), 0);
        // -243 = -c6 of the u = 3 even curve is a square mod 73 (49).
        assert_eq!(legendre(-243, 73), 1);
    }

    #[test]
    fn crt_and_reconstruction_roundtrip() {
        // Reconstruct 22/7 from its image modulo a product of primes.
        let primes = [2147483629u64, 2147483587, 2147483579];
        let mut m = BigInt::one();
        let mut x = BigInt::zero();
        for q in primes {
            let inv7 = modinv_u64(7, q);
            let target = mulmod(22 % q, inv7, q);
            x = crt_lift(&x, &m, target, q);
            m *= BigInt::from(q);
        }
        let (num, den) = rational_reconstruct(&x, &m).expect("reconstructible");
        assert_eq!(num, BigInt::from(22));
        assert_eq!(den, BigInt::from(7));
    }

    #[test]
    fn reconstruction_with_negative_numerator() {
        let m = BigInt::from_u64(2147483629).unwrap() * BigInt::from_u64(2147483587).unwrap();
        // x == -5/12 mod m
        let inv12 = BigInt::extended_gcd(&BigInt::from(12), &m).x.mod_floor(&m);
        let x = (BigInt::from(-5) * inv12).mod_floor(&m);
        let (num, den) = rational_reconstruct(&x, &m).expect("reconstructible");
        assert_eq!(num, BigInt::from(-5));
        assert_eq!(den, BigInt::from(12));
    }

    #[test]
    fn sqrt_mod_prime() {
        for p in [3u64, 5, 7, 11, 73, 353, 65537, 2147483629] {
            let mut hits = 0;
            for a in 1..50.min(p) {
                if let Some(r) = sqrt_mod(a, p) {
                    assert_eq!(mulmod(r, r, p), a % p, "bad sqrt of {} mod {}", a, p);
                    hits += 1;
                }
            }
            assert!(hits > 0);
        }
        assert_eq!(sqrt_mod(0, 7), Some(0));
        assert_eq!(sqrt_mod(3, 7), None);
    }

    #[test]
    fn exact_sqrt_detects_squares() {
        assert_eq!(exact_sqrt(&BigInt::from(5329)), Some(BigInt::from(73)));
        assert_eq!(exact_sqrt(&BigInt::from(5328)), None);
        assert_eq!(exact_sqrt(&BigInt::from(0)), Some(BigInt::zero()));
        assert_eq!(exact_sqrt(&BigInt::from(-4)), None);
    }
}
