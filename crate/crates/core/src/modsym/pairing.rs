//! Topological intersection numbers on the symbol space.
//!
//! A functional c on the space is the crossing datum of a cycle on the
//! modular curve transverse to the triangulation by level cosets: c(x)
//! counts signed crossings of the edge of x into the triangle of x's
//! tau-orbit. Such a cycle deforms onto the 1-skeleton by routing every
//! half-crossing through a fixed corner of its triangle, which realizes
//! c as an honest chain iota(c) of Manin symbols with integer weights.
//! The evaluation pairing against iota then computes intersection
//! numbers of absolute cycles, and on the cuspidal lattice the result
//! is the skew unimodular form of the closed surface.

use super::cache::CacheConfig;
use super::linalg::saturated_kernel;
use super::space::{build_space, ManinSymbolSpace};
use super::ModSymError;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Realize a functional as a chain of Manin symbols, in basis
/// coordinates.
///
/// Routing rule, per coset x with value v = c(x) and tau-orbit
/// representative r (least index), with edges oriented so the triangle
/// of x sits on the right: the half-path from the edge midpoint of x to
/// the triangle corner chosen for the orbit contributes v times a path
/// between two triangle vertices, which reads off the boundary route as
/// 0, +[r], or -[r tau^2]. Both elliptic folds carry zero classes, so
/// their terms vanish and the total is integral.
pub(super) fn iota_apply(space: &ManinSymbolSpace, c: &[BigInt]) -> Vec<BigInt> {
    let t = space.table();
    let n = t.size();
    let mut edge = vec![BigInt::zero(); n];
    for i in 0..n {
        let coords = space.coset_coords(i);
        if coords.is_empty() {
            continue;
        }
        let mut v = BigInt::zero();
        for &(j, co) in coords {
            v += &c[j as usize] * co;
        }
        if v.is_zero() {
            continue;
        }
        let j1 = t.tau(i);
        let j2 = t.tau(j1);
        let r = i.min(j1).min(j2);
        let a = if i == r {
            0
        } else if i == t.tau(r) {
            1
        } else {
            2
        };
        // Start vertex: end of the edge when x is its sigma-pair's
        // canonical side, otherwise the start, which is one step
        // further along the tau-orbit.
        let b = if i <= t.sigma(i) { a } else { (a + 1) % 3 };
        match b {
            1 => edge[r] += v,
            2 => {
                let k = t.tau(t.tau(r));
                edge[k] -= v;
            }
            _ => {}
        }
    }
    let mut out = vec![BigInt::zero(); space.rank()];
    for (k, w) in edge.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        for &(j, co) in space.coset_coords(k) {
            out[j as usize] += w * co;
        }
    }
    out
}

/// Exact determinant by fraction-free elimination.
fn det_bareiss(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1i64;
    let mut prev = BigInt::one();
    for k in 0..(n - 1) {
        if a[k][k].is_zero() {
            let Some(r) = ((k + 1)..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, r);
            sign = -sign;
        }
        let piv = a[k][k].clone();
        for i in (k + 1)..n {
            let f = a[i][k].clone();
            for j in (k + 1)..n {
                let t = &a[i][j] * &piv - &f * &a[k][j];
                debug_assert!((&t % &prev).is_zero());
                a[i][j] = t / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = piv;
    }
    let d = a[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Solve A X = B over the rationals by Gauss-Jordan elimination, free
/// variables pinned to zero. Returns None when inconsistent.
fn solve_rational(a: &[Vec<BigInt>], b: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = a.len();
    let m = b[0].len();
    let mut aug: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            a[i].iter()
                .map(|v| BigRational::from_integer(v.clone()))
                .chain(b[i].iter().cloned())
                .collect()
        })
        .collect();
    let mut pivot_row: Vec<Option<usize>> = vec![None; n];
    let mut r = 0usize;
    for col in 0..n {
        let Some(pr) = (r..n).find(|&i| !aug[i][col].is_zero()) else {
            continue;
        };
        aug.swap(r, pr);
        let inv = aug[r][col].clone();
        for j in col..(n + m) {
            let t = &aug[r][j] / &inv;
            aug[r][j] = t;
        }
        for i in 0..n {
            if i == r || aug[i][col].is_zero() {
                continue;
            }
            let f = aug[i][col].clone();
            for j in col..(n + m) {
                let t = &aug[r][j] * &f;
                let s = &aug[i][j] - &t;
                aug[i][j] = s;
            }
        }
        pivot_row[col] = Some(r);
        r += 1;
    }
    for row in aug.iter().skip(r) {
        if row.iter().skip(n).any(|v| !v.is_zero()) {
            return None;
        }
    }
    let mut x = vec![vec![BigRational::zero(); m]; n];
    for col in 0..n {
        if let Some(pr) = pivot_row[col] {
            for t in 0..m {
                x[col][t] = aug[pr][n + t].clone();
            }
        }
    }
    Some(x)
}

/// Gram matrix of the intersection form on the cuspidal basis:
/// integer, skew-symmetric, and unimodular.
pub fn intersection_pairing(space: &ManinSymbolSpace) -> Result<Vec<Vec<BigInt>>, ModSymError> {
    let n = space.rank();
    let cusp = space.cuspidal_basis();
    let m = cusp.len();
    let mut s: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); m]; n];
    for (j, row) in cusp.iter().enumerate() {
        for &(i, co) in row {
            s[i as usize][j] = BigInt::from(co);
        }
    }
    // Columns of iota on the coordinate functionals.
    let mut iota = vec![vec![BigInt::zero(); n]; n];
    for k in 0..n {
        let mut e = vec![BigInt::zero(); n];
        e[k] = BigInt::one();
        let col = iota_apply(space, &e);
        for (i, v) in col.into_iter().enumerate() {
            iota[i][k] = v;
        }
    }
    // A functional c_j with iota(c_j) = s_j; any preimage works since
    // the kernel of iota pairs to zero against boundary-free vectors.
    let rhs: Vec<Vec<BigRational>> = s
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| BigRational::from_integer(v.clone()))
                .collect()
        })
        .collect();
    let x = solve_rational(&iota, &rhs).ok_or_else(|| {
        ModSymError::SpaceConstruction(format!(
            "cuspidal class without transverse realization at level {}",
            space.p()
        ))
    })?;
    let mut gram = vec![vec![BigInt::zero(); m]; m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = BigRational::zero();
            for k in 0..n {
                if !s[k][j].is_zero() {
                    acc += &x[k][i] * BigRational::from_integer(s[k][j].clone());
                }
            }
            assert!(acc.is_integer(), "intersection number must be integral");
            gram[i][j] = acc.to_integer();
        }
    }
    for i in 0..m {
        assert!(gram[i][i].is_zero(), "self-intersection must vanish");
        for j in 0..i {
            assert_eq!(gram[i][j], -gram[j][i].clone(), "pairing must be skew");
        }
    }
    assert!(
        det_bareiss(gram.clone()).is_one(),
        "intersection form must be unimodular on the cuspidal lattice"
    );
    Ok(gram)
}

/// Order of the class of the path {0, oo} modulo the cuspidal lattice,
/// equivalently the order of the divisor class (0) - (oo) on the
/// Jacobian. Equals numerator((p-1)/12).
pub fn cuspidal_class_order(p: u64) -> Result<u64, ModSymError> {
    let space = build_space(p)?;
    // The boundary eigenline: T_2 acts by 3 on it and by a_2 with
    // |a_2| <= 2 sqrt 2 on every cuspidal eigenvector, so rank 1 is
    // guaranteed.
    let eis = saturated_kernel(&space, &[(2, 3)], 1, false, &CacheConfig::disabled())?;
    let g = &eis[0];
    let b = space.boundary();
    let bg: BigInt = g
        .iter()
        .zip(b.iter())
        .map(|(gi, &bi)| gi * bi)
        .sum();
    assert!(!bg.is_zero(), "boundary eigenvector cannot be cuspidal");
    // Coordinates of {0, oo}: the coset (0:1).
    let idx = space.table().index_signed(0, 1);
    let mut bx = BigInt::zero();
    for &(j, co) in space.coset_coords(idx) {
        bx += co * b[j as usize];
    }
    // Projection along the eigenline: {0, oo} - (bx/bg) g is the
    // cuspidal-rational part; its order is the lcm of denominators.
    let mut order = BigInt::one();
    for gi in g {
        let num = &bx * gi;
        if num.is_zero() {
            continue;
        }
        let den = (&bg / num.gcd(&bg)).abs();
        order = order.lcm(&den);
    }
    u64::try_from(&order).map_err(|_| ModSymError::Overflow)
}
