//! Enumeration of admissible survey parameters: positive odd u with
//! u^2 + 64 prime, ascending.

use crate::arith::is_prime_u64;

/// Residue pre-filters: q | u^2+64 forces u into two residue classes
/// mod q whenever -64 is a square mod q (only q = 1 mod 4 qualify).
/// u = +-1 mod 5, +-1 mod 13, +-2 mod 17 are dropped before the
/// primality test; u^2+64 >= 73 > 17 so no admissible p is lost.
const FILTERS: [(u64, u64, u64); 3] = [(5, 1, 4), (13, 1, 12), (17, 2, 15)];

/// All positive odd u <= u_max with u^2 + 64 prime, ascending.
pub fn sieve_ns_u(u_max: u64) -> Vec<u64> {
    assert!(u_max < (1 << 31), "u_max out of range for u64 arithmetic");
    let mut out = Vec::new();
    let mut u = 3u64;
    while u <= u_max {
        if FILTERS.iter().all(|&(q, r1, r2)| {
            let r = u % q;
            r != r1 && r != r2
        }) && is_prime_u64(u * u + 64)
        {
            out.push(u);
        }
        u += 2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle(u_max: u64) -> Vec<u64> {
        // Trial division, no pre-filter.
        let mut out = Vec::new();
        for u in (3..=u_max).step_by(2) {
            let p = u * u + 64;
            let mut d = 2;
            let mut prime = true;
            while d * d <= p {
                if p % d == 0 {
                    prime = false;
                    break;
                }
                d += 1;
            }
            if prime {
                out.push(u);
            }
        }
        out
    }

    #[test]
    fn small_examples() {
        assert_eq!(sieve_ns_u(10), vec![3, 5, 7]);
        assert_eq!(
            sieve_ns_u(50),
            vec![3, 5, 7, 13, 17, 23, 33, 35, 37, 43, 45, 47]
        );
    }

    #[test]
    fn matches_trial_division_oracle() {
        assert_eq!(sieve_ns_u(2000), oracle(2000));
    }

    #[test]
    fn residue_classes_as_claimed() {
        for u in sieve_ns_u(3000) {
            assert_eq!(u % 2, 1);
            assert!(u % 5 != 1 && u % 5 != 4);
            let p = u * u + 64;
            assert_eq!(p % 8, 1);
        }
    }
}
