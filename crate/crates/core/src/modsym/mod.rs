//! Integral modular symbols for Gamma0(p), p prime.
//!
//! The space is the quotient of the free Z-module on P^1(F_p) by the
//! two-term and three-term Manin relations, modulo torsion; it has rank
//! 2g+1 where g is the genus of X0(p). Hecke operators act through
//! Merel's family of determinant-l integer matrices. The newform
//! eigenlattice of a Neumann-Setzer curve is the saturated rank-2
//! simultaneous kernel of (T_l - a_l), and the modular degree is the
//! Pfaffian of the intersection pairing restricted to it, computed two
//! independent ways (exact lattice arithmetic and numeric periods).

mod cache;
mod degree;
mod hecke;
mod linalg;
mod p1;
mod pairing;
mod space;

pub use cache::{CacheConfig, CACHE_ENV};
pub use degree::{modular_degree, modular_degree_exact, DegreeResult};
pub use hecke::{apply_rows, hecke_operator, merel_matrices, star_involution};
pub use linalg::{apply_cols_big, apply_rows_big, dual_eigen_lattice, eigen_lattice, EigenLattice};
pub use p1::{p1_enumerate, P1Element, P1Table};
pub use pairing::{cuspidal_class_order, intersection_pairing};
pub use space::{build_space, build_space_with_limit, ManinSymbolSpace, DEFAULT_LEVEL_LIMIT};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModSymError {
    #[error("level {0} is not prime")]
    CompositeLevel(u64),
    #[error("level {0} below the minimum 11")]
    LevelTooSmall(u64),
    #[error("level {0} exceeds the size guard {1} (override to proceed)")]
    LevelTooLarge(u64, u64),
    #[error("Hecke prime {0} equals the level")]
    HeckePrimeIsLevel(u64),
    #[error("{0} is not prime")]
    CompositeHeckePrime(u64),
    #[error("relation elimination failed: {0}")]
    SpaceConstruction(String),
    #[error("eigenlattice rank {got} (expected 2) after l <= {lmax}")]
    EigenRank { got: usize, lmax: u64 },
    #[error("rational reconstruction of the eigenbasis failed")]
    Reconstruction,
    #[error("exact and numeric modular degrees disagree: {exact} vs {numeric}")]
    DegreeMismatch { exact: u64, numeric: f64 },
    #[error("numeric degree uncertainty too large: {0}")]
    NumericPrecision(f64),
    #[error("integer overflow in symbol arithmetic")]
    Overflow,
    #[error("curve-side failure: {0}")]
    Curve(#[from] crate::ec::CurveError),
    #[error("family-side failure: {0}")]
    Family(#[from] crate::ns::NsError),
}

/// Genus of X0(p) for prime p >= 5.
pub fn genus_x0(p: u64) -> u64 {
    assert!(p >= 5);
    let nu2 = if p % 4 == 1 { 2 } else { 0 };
    let nu3 = if p % 3 == 1 { 2 } else { 0 };
    (p + 1 - 3 * nu2 - 4 * nu3) / 12
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genus_values() {
        assert_eq!(genus_x0(11), 1);
        assert_eq!(genus_x0(73), 5);
        assert_eq!(genus_x0(353), 29);
        assert_eq!(genus_x0(1153), 95);
        assert_eq!(genus_x0(16193), 1349);
        assert_eq!(genus_x0(30689), 2557);
    }
}
