//! Eigenlattice extraction: dense modular kernels, CRT lifting with
//! rational reconstruction, exact verification, and saturation.
//!
//! The kernel of (T_l - a_l) is computed mod several 31-bit primes, cut
//! down with further Hecke operators until the dimension is exactly the
//! target, put in reduced row echelon form (the unique canonical basis of
//! the subspace over F_q), lifted by CRT and rational reconstruction, and
//! finally verified exactly over Z. Unlucky primes surface as a pivot-set
//! mismatch or a failed verification and are simply outvoted by taking
//! more primes.

use super::cache::{cached_hecke, CacheConfig};
use super::space::{ManinSymbolSpace, SparseRow};
use super::ModSymError;
use crate::arith::{crt_lift, is_prime_u64, modinv_u64, rational_reconstruct};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use std::collections::HashMap;

/// Saturated rank-2 sublattice on which every verified T_l acts as a_l.
pub struct EigenLattice {
    pub basis: [Vec<BigInt>; 2],
    pub aps: Vec<(u64, i64)>,
}

/// Saturated simultaneous kernel of (T_l - a_l) acting on row vectors
/// (the homology side), cut down to rank exactly 2.
pub fn eigen_lattice(
    space: &ManinSymbolSpace,
    aps: &[(u64, i64)],
) -> Result<EigenLattice, ModSymError> {
    let basis = saturated_kernel(space, aps, 2, false, &CacheConfig::disabled())?;
    let mut it = basis.into_iter();
    Ok(EigenLattice {
        basis: [it.next().unwrap(), it.next().unwrap()],
        aps: aps.to_vec(),
    })
}

/// Saturated kernel of (T_l - a_l) acting on functionals (column
/// vectors), the dual-side analogue of `eigen_lattice`.
pub fn dual_eigen_lattice(
    space: &ManinSymbolSpace,
    aps: &[(u64, i64)],
) -> Result<EigenLattice, ModSymError> {
    let basis = saturated_kernel(space, aps, 2, true, &CacheConfig::disabled())?;
    let mut it = basis.into_iter();
    Ok(EigenLattice {
        basis: [it.next().unwrap(), it.next().unwrap()],
        aps: aps.to_vec(),
    })
}

/// Apply an operator (basis rows) to a row vector with exact integers.
pub fn apply_rows_big(rows: &[SparseRow], w: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::from(0); w.len()];
    for (i, wi) in w.iter().enumerate() {
        if wi.is_zero() {
            continue;
        }
        for &(j, c) in &rows[i] {
            out[j as usize] += wi * c;
        }
    }
    out
}

/// Apply an operator to a functional: (T v)[i] = <row_i, v>.
pub fn apply_cols_big(rows: &[SparseRow], v: &[BigInt]) -> Vec<BigInt> {
    rows.iter()
        .map(|row| {
            let mut acc = BigInt::from(0);
            for &(j, c) in row {
                acc += &v[j as usize] * c;
            }
            acc
        })
        .collect()
}

/// 31-bit primes, largest first; products of two stay under 2^62.
fn kernel_primes() -> impl Iterator<Item = u64> {
    (0..).map(|k| (1u64 << 31) - 1 - 2 * k).filter(|&q| is_prime_u64(q))
}

/// Dense (T - a I) or (T^t - a I) mod q from sparse operator rows.
fn dense_operator(rows: &[SparseRow], a: i64, q: u64, transpose: bool) -> Vec<u32> {
    let n = rows.len();
    let mut mat = vec![0u32; n * n];
    for (i, row) in rows.iter().enumerate() {
        for &(j, c) in row {
            let idx = if transpose {
                (j as usize) * n + i
            } else {
                i * n + j as usize
            };
            let cur = mat[idx] as u64;
            mat[idx] = ((cur + c.rem_euclid(q as i64) as u64) % q) as u32;
        }
    }
    let am = a.rem_euclid(q as i64) as u64;
    for i in 0..n {
        let idx = i * n + i;
        mat[idx] = ((mat[idx] as u64 + q - am) % q) as u32;
    }
    mat
}

/// In-place RREF over F_q; returns the pivot columns.
fn rref_mod(mat: &mut [u32], nrows: usize, ncols: usize, q: u64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut rank = 0usize;
    for col in 0..ncols {
        let Some(pr) = (rank..nrows).find(|&r| mat[r * ncols + col] != 0) else {
            continue;
        };
        if pr != rank {
            for j in 0..ncols {
                mat.swap(pr * ncols + j, rank * ncols + j);
            }
        }
        let inv = modinv_u64(mat[rank * ncols + col] as u64, q);
        for j in col..ncols {
            mat[rank * ncols + j] = ((mat[rank * ncols + j] as u64 * inv) % q) as u32;
        }
        for r in 0..nrows {
            if r == rank {
                continue;
            }
            let f = mat[r * ncols + col] as u64;
            if f == 0 {
                continue;
            }
            let neg = q - f;
            for j in col..ncols {
                let t = mat[rank * ncols + j] as u64;
                if t != 0 {
                    let cur = mat[r * ncols + j] as u64;
                    mat[r * ncols + j] = ((cur + neg * t) % q) as u32;
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    pivots
}

/// Right kernel of an n x n matrix mod q. Returns basis rows together
/// with coordinate columns J where the basis restricts to the identity.
fn right_kernel_mod(mut mat: Vec<u32>, n: usize, q: u64) -> (Vec<Vec<u32>>, Vec<usize>) {
    let pivots = rref_mod(&mut mat, n, n, q);
    let mut is_pivot = vec![false; n];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
    let mut basis = Vec::with_capacity(free.len());
    for &f in &free {
        let mut v = vec![0u32; n];
        v[f] = 1;
        for (r, &pc) in pivots.iter().enumerate() {
            let coef = mat[r * n + f] as u64;
            if coef != 0 {
                v[pc] = (q - coef) as u32;
            }
        }
        basis.push(v);
    }
    (basis, free)
}

/// Per-prime kernel with rank cuts. `ops` holds (sparse rows, a_l) in the
/// order they should be applied; `dual` selects the functional side.
/// Returns the canonical RREF basis (target rows) and its pivot columns,
/// or the dimension reached when it is not the target.
fn kernel_mod_prime(
    ops: &[(Vec<SparseRow>, i64)],
    target: usize,
    dual: bool,
    q: u64,
) -> Result<(Vec<usize>, Vec<Vec<u32>>), usize> {
    let n = ops[0].0.len();
    let first = dense_operator(&ops[0].0, ops[0].1, q, !dual);
    let (mut basis, mut coords) = right_kernel_mod(first, n, q);
    for (rows, a) in &ops[1..] {
        if basis.len() <= target {
            break;
        }
        let k = basis.len();
        // Restriction of T_l to the current subspace, in the coordinates J.
        let mut restr = vec![0u32; k * k];
        for (i, v) in basis.iter().enumerate() {
            let image = apply_mod(rows, v, q, dual);
            for (j, &cj) in coords.iter().enumerate() {
                restr[i * k + j] = image[cj];
            }
        }
        // Row-side condition z R = a z for both sides, so cut with R^t - a.
        let mut tr = vec![0u32; k * k];
        for i in 0..k {
            for j in 0..k {
                tr[j * k + i] = restr[i * k + j];
            }
        }
        let am = a.rem_euclid(q as i64) as u64;
        for i in 0..k {
            tr[i * k + i] = ((tr[i * k + i] as u64 + q - am) % q) as u32;
        }
        let (zs, zcoords) = right_kernel_mod(tr, k, q);
        let mut next = Vec::with_capacity(zs.len());
        for z in &zs {
            let mut v = vec![0u64; n];
            for (m, &zm) in z.iter().enumerate() {
                if zm == 0 {
                    continue;
                }
                for (t, &bt) in basis[m].iter().enumerate() {
                    if bt != 0 {
                        v[t] = (v[t] + zm as u64 * bt as u64) % q;
                    }
                }
            }
            next.push(v.into_iter().map(|x| x as u32).collect::<Vec<u32>>());
        }
        coords = zcoords.iter().map(|&j| coords[j]).collect();
        basis = next;
    }
    if basis.len() != target {
        return Err(basis.len());
    }
    // Strict RREF for a representation that is canonical across primes.
    let mut flat: Vec<u32> = basis.concat();
    let pivots = rref_mod(&mut flat, target, n, q);
    if pivots.len() != target {
        return Err(pivots.len());
    }
    let rows = (0..target).map(|i| flat[i * n..(i + 1) * n].to_vec()).collect();
    Ok((pivots, rows))
}

fn apply_mod(rows: &[SparseRow], v: &[u32], q: u64, dual: bool) -> Vec<u32> {
    let n = v.len();
    let mut out = vec![0u64; n];
    if dual {
        // (T v)[i] = <row_i, v>.
        for (i, row) in rows.iter().enumerate() {
            let mut acc = 0u64;
            for &(j, c) in row {
                let cm = c.rem_euclid(q as i64) as u64;
                acc = (acc + cm * v[j as usize] as u64) % q;
            }
            out[i] = acc;
        }
    } else {
        // (w T)[j] = sum_i w_i row_i[j].
        for (i, row) in rows.iter().enumerate() {
            let wi = v[i] as u64;
            if wi == 0 {
                continue;
            }
            for &(j, c) in row {
                let cm = c.rem_euclid(q as i64) as u64;
                out[j as usize] = (out[j as usize] + wi * cm) % q;
            }
        }
    }
    out.into_iter().map(|x| x as u32).collect()
}

/// Column-lattice Hermite form of a 2 x n integer matrix: the lattice in
/// Z^2 spanned by the columns, as [[a, 0], [b, c]] with a, c > 0.
fn column_hnf(r1: &[BigInt], r2: &[BigInt]) -> (BigInt, BigInt, BigInt) {
    let mut a = BigInt::from(0);
    let mut b = BigInt::from(0);
    let mut c = BigInt::from(0);
    for (x, y) in r1.iter().zip(r2) {
        if x.is_zero() && y.is_zero() {
            continue;
        }
        // Merge column (x, y) into the basis {(a, b), (0, c)}.
        let eg = BigInt::extended_gcd(&a, x);
        let g = eg.gcd.clone();
        if g.is_zero() {
            c = c.gcd(y);
            continue;
        }
        let b_new = &eg.x * &b + &eg.y * y;
        // Both leftovers have first coordinate 0; fold them into c.
        c = c.gcd(&(&b - (&a / &g) * &b_new));
        c = c.gcd(&(y - (x / &g) * &b_new));
        a = g;
        b = b_new;
    }
    if !c.is_zero() {
        b = b.mod_floor(&c);
    }
    (a, b, c)
}

/// Replace a rank-2 lattice basis by a basis of its saturation.
fn saturate_pair(rows: &mut [Vec<BigInt>]) {
    let (a, b, c) = column_hnf(&rows[0], &rows[1]);
    assert!(!a.is_zero() && !c.is_zero(), "saturation needs a rank-2 lattice");
    // M = [[a, 0], [b, c]]; saturated = M^{-1} R, integral by construction.
    let det = &a * &c;
    for j in 0..rows[0].len() {
        let s1 = &rows[0][j] / &a;
        debug_assert!((&rows[0][j] % &a).is_zero());
        let num = &a * &rows[1][j] - &b * &rows[0][j];
        let (s2, rem) = num.div_rem(&det);
        debug_assert!(rem.is_zero());
        rows[0][j] = s1;
        rows[1][j] = s2;
    }
}

/// Multi-prime driver: canonical modular kernels, CRT, reconstruction,
/// exact verification, saturation.
pub(super) fn saturated_kernel(
    space: &ManinSymbolSpace,
    aps: &[(u64, i64)],
    target: usize,
    dual: bool,
    cfg: &CacheConfig,
) -> Result<Vec<Vec<BigInt>>, ModSymError> {
    assert!(!aps.is_empty(), "need at least one Hecke eigenvalue");
    let n = space.rank();
    let mut ops = Vec::with_capacity(aps.len());
    for &(l, a) in aps {
        ops.push((cached_hecke(cfg, space, l)?, a));
    }
    let lmax = aps.iter().map(|&(l, _)| l).max().unwrap();

    // Group per-prime kernels by pivot set; reconstruct from the largest.
    let mut groups: HashMap<Vec<usize>, Vec<(u64, Vec<Vec<u32>>)>> = HashMap::new();
    let mut rank_misses: Vec<usize> = Vec::new();
    for q in kernel_primes().take(25) {
        match kernel_mod_prime(&ops, target, dual, q) {
            Err(got) => {
                rank_misses.push(got);
                // Three agreeing primes cannot all be unlucky for a rank
                // defect; report the failure.
                if rank_misses.len() >= 3
                    && rank_misses.iter().filter(|&&g| g == rank_misses[0]).count() >= 3
                {
                    return Err(ModSymError::EigenRank {
                        got: rank_misses[0],
                        lmax,
                    });
                }
            }
            Ok((pivots, rows)) => {
                let entry = groups.entry(pivots).or_default();
                entry.push((q, rows));
                if entry.len() >= 2 {
                    let cand = try_reconstruct(entry, n, target);
                    if let Some(mut rows) = cand {
                        if verify_exact(&ops, &rows, dual) {
                            if target == 2 {
                                saturate_pair(&mut rows);
                                debug_assert!(verify_exact(&ops, &rows, dual));
                            }
                            return Ok(rows);
                        }
                    }
                }
            }
        }
    }
    Err(ModSymError::Reconstruction)
}

/// CRT the group's kernels entrywise and reconstruct primitive integer
/// rows; None if any entry fails rational reconstruction.
fn try_reconstruct(
    group: &[(u64, Vec<Vec<u32>>)],
    n: usize,
    target: usize,
) -> Option<Vec<Vec<BigInt>>> {
    let mut modulus = BigInt::from(1);
    let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::from(0); n]; target];
    for (q, kq) in group {
        for i in 0..target {
            for j in 0..n {
                rows[i][j] = crt_lift(&rows[i][j], &modulus, kq[i][j] as u64, *q);
            }
        }
        modulus *= BigInt::from(*q);
    }
    let mut out = Vec::with_capacity(target);
    for row in &rows {
        let mut nums = Vec::with_capacity(n);
        let mut lcm = BigInt::from(1);
        for x in row {
            let (num, den) = rational_reconstruct(x, &modulus)?;
            lcm = lcm.lcm(&den);
            nums.push((num, den));
        }
        let mut int_row: Vec<BigInt> = nums
            .into_iter()
            .map(|(num, den)| num * (&lcm / den))
            .collect();
        let mut content = BigInt::from(0);
        for x in &int_row {
            content = content.gcd(x);
        }
        if content.is_zero() {
            return None;
        }
        for x in &mut int_row {
            *x = &*x / &content;
        }
        // Sign convention: first nonzero entry positive.
        if int_row.iter().find(|x| !x.is_zero()).map(|x| x.is_negative()) == Some(true) {
            for x in &mut int_row {
                *x = -&*x;
            }
        }
        out.push(int_row);
    }
    Some(out)
}

fn verify_exact(ops: &[(Vec<SparseRow>, i64)], rows: &[Vec<BigInt>], dual: bool) -> bool {
    for (op, a) in ops {
        for w in rows {
            let image = if dual {
                apply_cols_big(op, w)
            } else {
                apply_rows_big(op, w)
            };
            for (im, wi) in image.iter().zip(w) {
                if *im != wi * *a {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::super::hecke::hecke_operator;
    use super::super::space::build_space;
    use super::*;
    use crate::ec::ap_count;
    use crate::ns::construct_pair;

    fn curve_aps(u: i64, ls: &[u64]) -> Vec<(u64, i64)> {
        let pair = construct_pair(&BigInt::from(u)).unwrap();
        ls.iter()
            .map(|&l| (l, ap_count(&pair.e0, l).unwrap()))
            .collect()
    }

    #[test]
    fn rank_two_lattice_at_eleven() {
        // Level 11: a_2 = -2, a_3 = -1 for the unique newform.
        let space = build_space(11).unwrap();
        let lat = eigen_lattice(&space, &[(2, -2), (3, -1)]).unwrap();
        let t2 = hecke_operator(&space, 2).unwrap();
        for w in &lat.basis {
            let im = apply_rows_big(&t2, w);
            for (x, y) in im.iter().zip(w) {
                assert_eq!(*x, y * -2i64);
            }
        }
        let dual = dual_eigen_lattice(&space, &[(2, -2), (3, -1)]).unwrap();
        for v in &dual.basis {
            let im = apply_cols_big(&t2, v);
            for (x, y) in im.iter().zip(v) {
                assert_eq!(*x, y * -2i64);
            }
        }
    }

    #[test]
    fn family_curve_lattice_and_rank_error() {
        let space = build_space(73).unwrap();
        let aps = curve_aps(3, &[2, 3, 5]);
        let lat = eigen_lattice(&space, &aps).unwrap();
        assert_eq!(lat.basis[0].len(), space.rank());
        // Saturation: the column lattice of the basis is all of Z^2.
        let (a, b, c) = column_hnf(&lat.basis[0], &lat.basis[1]);
        assert_eq!((a, b, c), (BigInt::from(1), BigInt::from(0), BigInt::from(1)));
        // A wrong eigenvalue has no rank-2 simultaneous kernel.
        let mut bad = aps.clone();
        bad[0].1 += 1;
        match eigen_lattice(&space, &bad) {
            Err(ModSymError::EigenRank { got, .. }) => assert!(got < 2),
            other => panic!("expected rank failure, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn eisenstein_line_is_rank_one() {
        for p in [11u64, 73] {
            let space = build_space(p).unwrap();
            let rows = saturated_kernel(&space, &[(2, 3)], 1, false, &CacheConfig::disabled()).unwrap();
            assert_eq!(rows.len(), 1);
            let t2 = hecke_operator(&space, 2).unwrap();
            let im = apply_rows_big(&t2, &rows[0]);
            for (x, y) in im.iter().zip(&rows[0]) {
                assert_eq!(*x, y * 3i64);
            }
        }
    }

    #[test]
    fn column_hnf_small_cases() {
        // Columns (2,0), (0,3), (4,5) span {(x, y) : x even}: covolume 2.
        let r1: Vec<BigInt> = [2, 0, 4].iter().map(|&x| BigInt::from(x)).collect();
        let r2: Vec<BigInt> = [0, 3, 5].iter().map(|&x| BigInt::from(x)).collect();
        let (a, b, c) = column_hnf(&r1, &r2);
        assert_eq!((a, b, c), (BigInt::from(2), BigInt::from(0), BigInt::from(1)));
        // Saturating the two rows makes the column lattice all of Z^2.
        let mut rows = vec![r1, r2];
        saturate_pair(&mut rows);
        let (a, b, c) = column_hnf(&rows[0], &rows[1]);
        assert_eq!((a, b, c), (BigInt::from(1), BigInt::from(0), BigInt::from(1)));
    }
}
