//! The projective line over F_p as the index set for Manin symbols.
//!
//! Canonical representatives are (1:j) for j in [0,p) and (0:1), indexed
//! 0..=p in that order. The right actions used by the relation and Hecke
//! machinery are
//!
//!   (c:d) sigma = (d:-c),   (c:d) tau = (d:-c-d),   (c:d) T^-1 = (c:d-c),
//!
//! sigma^2 = tau^3 = 1 on classes.

use super::ModSymError;
use crate::arith::{is_prime_u64, modinv_u64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct P1Element {
    pub c: u64,
    pub d: u64,
}

/// Lookup table for P^1(F_p) with constant-time canonicalization.
pub struct P1Table {
    p: u64,
    inv: Vec<u64>,
}

impl P1Table {
    pub fn new(p: u64) -> Result<Self, ModSymError> {
        if !is_prime_u64(p) {
            return Err(ModSymError::CompositeLevel(p));
        }
        let mut inv = vec![0u64; p as usize];
        for c in 1..p {
            if inv[c as usize] == 0 {
                let ic = modinv_u64(c, p);
                inv[c as usize] = ic;
                inv[ic as usize] = c;
            }
        }
        Ok(P1Table { p, inv })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn size(&self) -> usize {
        self.p as usize + 1
    }

    /// Index of the class of (c:d); both reduced mod p internally.
    /// (0:0) is not a projective point and panics.
    pub fn index(&self, c: u64, d: u64) -> usize {
        let c = c % self.p;
        let d = d % self.p;
        if c == 0 {
            assert!(d != 0, "(0:0) is not in P^1");
            self.p as usize
        } else {
            ((d * self.inv[c as usize]) % self.p) as usize
        }
    }

    /// Index of (c:d) with signed entries.
    pub fn index_signed(&self, c: i64, d: i64) -> usize {
        let p = self.p as i64;
        self.index((c.rem_euclid(p)) as u64, (d.rem_euclid(p)) as u64)
    }

    pub fn element(&self, i: usize) -> P1Element {
        if i == self.p as usize {
            P1Element { c: 0, d: 1 }
        } else {
            P1Element { c: 1, d: i as u64 }
        }
    }

    pub fn sigma(&self, i: usize) -> usize {
        let e = self.element(i);
        self.index(e.d, self.p - e.c % self.p)
    }

    pub fn tau(&self, i: usize) -> usize {
        let e = self.element(i);
        self.index(e.d, 2 * self.p - e.c - e.d)
    }

    pub fn t_inv(&self, i: usize) -> usize {
        let e = self.element(i);
        self.index(e.c, self.p + e.d - e.c)
    }
}

pub fn p1_enumerate(p: u64) -> Result<Vec<P1Element>, ModSymError> {
    let table = P1Table::new(p)?;
    Ok((0..table.size()).map(|i| table.element(i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::XorShift64;

    #[test]
    fn sizes() {
        assert_eq!(p1_enumerate(2).unwrap().len(), 3);
        assert_eq!(p1_enumerate(11).unwrap().len(), 12);
        assert!(matches!(
            p1_enumerate(12),
            Err(ModSymError::CompositeLevel(12))
        ));
    }

    #[test]
    fn projective_invariance() {
        let t = P1Table::new(101).unwrap();
        let mut rng = XorShift64::new(7);
        for _ in 0..200 {
            let c = rng.below(101);
            let d = rng.below(101);
            if c == 0 && d == 0 {
                continue;
            }
            let lambda = 1 + rng.below(100);
            assert_eq!(t.index(c, d), t.index(c * lambda, d * lambda));
        }
    }

    #[test]
    fn action_orders() {
        for p in [11u64, 13, 37] {
            let t = P1Table::new(p).unwrap();
            for i in 0..t.size() {
                assert_eq!(t.sigma(t.sigma(i)), i, "sigma^2 at {}", i);
                assert_eq!(t.tau(t.tau(t.tau(i))), i, "tau^3 at {}", i);
                // T^-1 then T = identity: (c:d) T = (c:c+d).
                let ti = t.t_inv(i);
                let back = t.index(t.element(ti).c, t.element(ti).c + t.element(ti).d);
                assert_eq!(back, i);
            }
        }
    }

    #[test]
    fn canonical_indexing() {
        let t = P1Table::new(11).unwrap();
        assert_eq!(t.index(0, 5), 11);
        assert_eq!(t.index(1, 7), 7);
        // (3:5) = (1: 5*3^-1) = (1: 5*4) = (1:9).
        assert_eq!(t.index(3, 5), 9);
        assert_eq!(t.element(11), P1Element { c: 0, d: 1 });
    }
}
