//! Hecke operators on Manin symbols through Merel's matrices.
//!
//! For prime l != p, T_l sends the symbol of a coset x to the sum of the
//! symbols x.M over all integer matrices M = [a,b;c,d] of determinant l
//! with a > b >= 0 and d > c >= 0. There are 4 such matrices for l = 2
//! and 7 for l = 3; in general the count is O(l log l). The star
//! involution is (c:d) -> (-c:d).

use super::space::{ManinSymbolSpace, SparseRow};
use super::ModSymError;
use crate::arith::is_prime_u64;
use std::collections::BTreeMap;

/// All [a,b;c,d] with det = l, a > b >= 0, d > c >= 0, for prime l.
pub fn merel_matrices(l: u64) -> Vec<[i64; 4]> {
    let mut out = Vec::new();
    for a in 1..=l as i64 {
        for d in 1..=(l as i64 + 1 - a) {
            let m = a * d - l as i64;
            if m < 0 {
                continue;
            }
            if m == 0 {
                for c in 0..d {
                    out.push([a, 0, c, d]);
                }
                for b in 1..a {
                    out.push([a, b, 0, d]);
                }
            } else {
                for b in 1..a {
                    if m % b == 0 && m / b < d {
                        out.push([a, b, m / b, d]);
                    }
                }
            }
        }
    }
    out
}

fn apply_matrices(
    space: &ManinSymbolSpace,
    mats: &[[i64; 4]],
) -> Result<Vec<SparseRow>, ModSymError> {
    let t = space.table();
    let mut rows = Vec::with_capacity(space.rank());
    for j in 0..space.rank() {
        let e = t.element(space.basis_coset(j) as usize);
        let (c, d) = (e.c as i64, e.d as i64);
        let mut acc: BTreeMap<u32, i64> = BTreeMap::new();
        for m in mats {
            let idx = t.index_signed(c * m[0] + d * m[2], c * m[1] + d * m[3]);
            for &(k, v) in space.coset_coords(idx) {
                let entry = acc.entry(k).or_insert(0);
                *entry = entry.checked_add(v).ok_or(ModSymError::Overflow)?;
            }
        }
        acc.retain(|_, v| *v != 0);
        rows.push(acc.into_iter().collect());
    }
    Ok(rows)
}

/// Matrix of T_l on the basis: row j holds the coordinates of the image
/// of basis generator j.
pub fn hecke_operator(
    space: &ManinSymbolSpace,
    l: u64,
) -> Result<Vec<SparseRow>, ModSymError> {
    if l == space.p() {
        return Err(ModSymError::HeckePrimeIsLevel(l));
    }
    if !is_prime_u64(l) {
        return Err(ModSymError::CompositeHeckePrime(l));
    }
    apply_matrices(space, &merel_matrices(l))
}

/// The conjugation involution (c:d) -> (-c:d) on the basis.
pub fn star_involution(space: &ManinSymbolSpace) -> Vec<SparseRow> {
    let t = space.table();
    let mut rows = Vec::with_capacity(space.rank());
    for j in 0..space.rank() {
        let e = t.element(space.basis_coset(j) as usize);
        let idx = t.index_signed(-(e.c as i64), e.d as i64);
        rows.push(space.coset_coords(idx).to_vec());
    }
    rows
}

/// Apply the operator (given as basis rows) to a vector in basis
/// coordinates: w -> w T.
pub fn apply_rows(rows: &[SparseRow], w: &[i64]) -> Result<Vec<i64>, ModSymError> {
    let mut out = vec![0i64; w.len()];
    for (i, &wi) in w.iter().enumerate() {
        if wi == 0 {
            continue;
        }
        for &(j, c) in &rows[i] {
            let t = wi.checked_mul(c).ok_or(ModSymError::Overflow)?;
            out[j as usize] = out[j as usize]
                .checked_add(t)
                .ok_or(ModSymError::Overflow)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modsym::build_space;

    #[test]
    fn merel_counts() {
        assert_eq!(merel_matrices(2).len(), 4);
        assert_eq!(merel_matrices(3).len(), 7);
        for m in merel_matrices(5) {
            assert_eq!(m[0] * m[3] - m[1] * m[2], 5);
            assert!(m[0] > m[1] && m[1] >= 0);
            assert!(m[3] > m[2] && m[2] >= 0);
        }
    }

    fn dense(rows: &[SparseRow], n: usize) -> Vec<Vec<i64>> {
        let mut out = vec![vec![0i64; n]; n];
        for (i, row) in rows.iter().enumerate() {
            for &(j, c) in row {
                out[i][j as usize] = c;
            }
        }
        out
    }

    fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let n = a.len();
        let mut out = vec![vec![0i64; n]; n];
        for i in 0..n {
            for k in 0..n {
                if a[i][k] == 0 {
                    continue;
                }
                for j in 0..n {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    #[test]
    fn hecke_operators_commute() {
        for p in [11u64, 37, 73, 113, 199] {
            let s = build_space(p).unwrap();
            let n = s.rank();
            let mats: Vec<Vec<Vec<i64>>> = [2u64, 3, 5, 7]
                .iter()
                .map(|&l| dense(&hecke_operator(&s, l).unwrap(), n))
                .collect();
            for a in 0..mats.len() {
                for b in (a + 1)..mats.len() {
                    assert_eq!(
                        matmul(&mats[a], &mats[b]),
                        matmul(&mats[b], &mats[a]),
                        "p = {}",
                        p
                    );
                }
            }
        }
    }

    #[test]
    fn boundary_eigenvalue_is_l_plus_one() {
        // The boundary functional intertwines T_l with multiplication by
        // l+1: b(T_l x) = (l+1) b(x).
        for p in [11u64, 37, 73, 113, 199] {
            let s = build_space(p).unwrap();
            for l in [2u64, 3, 5, 7] {
                let rows = hecke_operator(&s, l).unwrap();
                for j in 0..s.rank() {
                    let bt: i64 = rows[j]
                        .iter()
                        .map(|&(k, c)| c * s.boundary()[k as usize])
                        .sum();
                    assert_eq!(
                        bt,
                        (l as i64 + 1) * s.boundary()[j],
                        "p = {}, l = {}, j = {}",
                        p,
                        l,
                        j
                    );
                }
            }
        }
    }

    #[test]
    fn star_squares_to_identity_and_commutes() {
        for p in [11u64, 73] {
            let s = build_space(p).unwrap();
            let n = s.rank();
            let star = dense(&star_involution(&s), n);
            let id: Vec<Vec<i64>> = (0..n)
                .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
                .collect();
            assert_eq!(matmul(&star, &star), id, "p = {}", p);
            let t2 = dense(&hecke_operator(&s, 2).unwrap(), n);
            assert_eq!(matmul(&star, &t2), matmul(&t2, &star), "p = {}", p);
        }
    }

    #[test]
    fn star_ranks_on_cuspidal_part() {
        // Over Q the cuspidal part splits into +/- eigenspaces of rank g
        // each. Check at p = 11 (g = 1): rank(S-1) and rank(S+1)
        // restricted to the cuspidal lattice are both 1.
        let s = build_space(11).unwrap();
        let n = s.rank();
        let star = star_involution(&s);
        let cusp = s.cuspidal_basis();
        // Images of cuspidal rows under S -/+ 1, as dense vectors.
        for sign in [-1i64, 1] {
            let mut m: Vec<Vec<i64>> = Vec::new();
            for row in &cusp {
                let mut w = vec![0i64; n];
                for &(j, c) in row {
                    w[j as usize] = c;
                }
                let mut img = apply_rows(&star, &w).unwrap();
                for (j, v) in img.iter_mut().enumerate() {
                    *v += sign * w[j];
                }
                m.push(img);
            }
            assert_eq!(rank_f64(&m), 1, "sign {}", sign);
        }
    }

    fn rank_f64(m: &[Vec<i64>]) -> usize {
        let mut a: Vec<Vec<f64>> = m
            .iter()
            .map(|r| r.iter().map(|&v| v as f64).collect())
            .collect();
        let rows = a.len();
        let cols = if rows == 0 { 0 } else { a[0].len() };
        let mut rank = 0;
        let mut col = 0;
        while rank < rows && col < cols {
            let piv = (rank..rows).max_by(|&i, &j| {
                a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
            });
            let piv = piv.unwrap();
            if a[piv][col].abs() < 1e-9 {
                col += 1;
                continue;
            }
            a.swap(rank, piv);
            for i in (rank + 1)..rows {
                let f = a[i][col] / a[rank][col];
                for j in col..cols {
                    a[i][j] -= f * a[rank][j];
                }
            }
            rank += 1;
            col += 1;
        }
        rank
    }
}
