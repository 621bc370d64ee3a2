//! The Manin symbol space for Gamma0(p).
//!
//! Start from the free Z-module on P^1(F_p). The two-term relations
//! x + x.sigma = 0 fold each sigma-orbit onto a signed generator (a
//! sigma-fixed class is 2-torsion and dies in the torsion-free quotient).
//! The three-term relations x + x.tau + x.tau^2 = 0, rewritten over the
//! folded generators, are eliminated by unit pivots after dividing each
//! row by its content, which is legitimate in the torsion-free quotient.
//! What survives is a free basis; the quotient has rank 2g+1 and this is
//! asserted against the genus formula.

use super::p1::P1Table;
use super::{genus_x0, ModSymError};
use std::collections::BTreeMap;

pub const DEFAULT_LEVEL_LIMIT: u64 = 40_000;

/// Expression of a coset class over the free basis, sorted by basis
/// position.
pub type SparseRow = Vec<(u32, i64)>;

pub struct ManinSymbolSpace {
    table: P1Table,
    /// Coset indices of the free generators, ascending.
    basis: Vec<u32>,
    /// For every coset index, its class over `basis` positions.
    coords: Vec<SparseRow>,
    /// Boundary of each basis generator, as the coefficient of the cusp
    /// infinity minus the cusp 0 (values in {-1,0,1}).
    boundary: Vec<i64>,
    genus: u64,
}

fn checked_add(a: i64, b: i64) -> Result<i64, ModSymError> {
    a.checked_add(b).ok_or(ModSymError::Overflow)
}

fn checked_mul(a: i64, b: i64) -> Result<i64, ModSymError> {
    a.checked_mul(b).ok_or(ModSymError::Overflow)
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

pub fn build_space(p: u64) -> Result<ManinSymbolSpace, ModSymError> {
    build_space_with_limit(p, DEFAULT_LEVEL_LIMIT)
}

pub fn build_space_with_limit(p: u64, limit: u64) -> Result<ManinSymbolSpace, ModSymError> {
    if p > limit {
        return Err(ModSymError::LevelTooLarge(p, limit));
    }
    let table = P1Table::new(p)?;
    if p < 11 {
        return Err(ModSymError::LevelTooSmall(p));
    }
    let n = table.size();

    // Fold sigma-orbits: rep[i] = (generator coset, sign), or None for
    // the 2-torsion classes fixed by sigma.
    let mut rep: Vec<Option<(u32, i64)>> = vec![None; n];
    let mut folded = vec![false; n];
    for i in 0..n {
        if folded[i] {
            continue;
        }
        let j = table.sigma(i);
        folded[i] = true;
        folded[j] = true;
        if j == i {
            rep[i] = None;
        } else {
            rep[i] = Some((i as u32, 1));
            rep[j] = Some((i as u32, -1));
        }
    }

    // Three-term relations over the folded generators, one per tau-orbit.
    let mut rows: Vec<Option<BTreeMap<u32, i64>>> = Vec::new();
    let mut seen = vec![false; n];
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let (j, k) = (table.tau(i), table.tau(table.tau(i)));
        seen[i] = true;
        seen[j] = true;
        seen[k] = true;
        let mut row: BTreeMap<u32, i64> = BTreeMap::new();
        for x in [i, j, k] {
            if let Some((g, s)) = rep[x] {
                let e = row.entry(g).or_insert(0);
                *e = checked_add(*e, s)?;
            }
        }
        row.retain(|_, v| *v != 0);
        if !row.is_empty() {
            rows.push(Some(row));
        }
    }

    // Unit-pivot elimination with content normalization. Expressions are
    // recorded against the generators active at elimination time; the
    // DAG is resolved in reverse order afterwards.
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, row) in rows.iter().enumerate() {
        for (&g, _) in row.as_ref().unwrap() {
            col_rows[g as usize].push(r);
        }
    }
    let mut expr: Vec<Option<BTreeMap<u32, i64>>> = vec![None; n];
    let mut eliminated = vec![false; n];
    let mut order: Vec<u32> = Vec::new();
    let mut queue: Vec<usize> = (0..rows.len()).collect();
    let mut qi = 0;
    while qi < queue.len() {
        let r = queue[qi];
        qi += 1;
        let Some(mut row) = rows[r].take() else {
            continue;
        };
        row.retain(|_, v| *v != 0);
        if row.is_empty() {
            continue;
        }
        let content = row.values().fold(0i64, |acc, &v| gcd_i64(acc, v));
        if content > 1 {
            for v in row.values_mut() {
                *v /= content;
            }
        }
        let Some((&g, &c)) = row.iter().find(|(_, &v)| v == 1 || v == -1) else {
            // No unit pivot: park the row and revisit when a later
            // substitution touches it.
            rows[r] = Some(row);
            continue;
        };
        row.remove(&g);
        if c == 1 {
            for v in row.values_mut() {
                *v = -*v;
            }
        }
        eliminated[g as usize] = true;
        order.push(g);
        // Substitute into every other live row containing g.
        let touched = std::mem::take(&mut col_rows[g as usize]);
        for r2 in touched {
            if r2 == r {
                continue;
            }
            let Some(row2) = rows[r2].as_mut() else {
                continue;
            };
            let Some(&cg) = row2.get(&g) else { continue };
            row2.remove(&g);
            for (&h, &ch) in &row {
                let e = row2.entry(h).or_insert(0);
                *e = checked_add(*e, checked_mul(cg, ch)?)?;
                if *e == 0 {
                    row2.remove(&h);
                } else {
                    col_rows[h as usize].push(r2);
                }
            }
            queue.push(r2);
        }
        expr[g as usize] = Some(row);
    }
    if rows.iter().any(|r| r.is_some()) {
        return Err(ModSymError::SpaceConstruction(format!(
            "non-unit relation rows remain at level {}",
            p
        )));
    }

    // Free basis: sigma-reps never eliminated.
    let mut basis: Vec<u32> = Vec::new();
    for i in 0..n {
        if let Some((g, _)) = rep[i] {
            if g as usize == i && !eliminated[i] {
                basis.push(g);
            }
        }
    }
    let genus = genus_x0(p);
    if basis.len() as u64 != 2 * genus + 1 {
        return Err(ModSymError::SpaceConstruction(format!(
            "rank {} at level {}, expected {}",
            basis.len(),
            p,
            2 * genus + 1
        )));
    }
    let mut pos: Vec<u32> = vec![u32::MAX; n];
    for (j, &g) in basis.iter().enumerate() {
        pos[g as usize] = j as u32;
    }

    // Resolve eliminated generators over the basis, in reverse
    // elimination order so every reference is already resolved.
    let mut resolved: Vec<Option<SparseRow>> = vec![None; n];
    for &g in basis.iter() {
        resolved[g as usize] = Some(vec![(pos[g as usize], 1)]);
    }
    for &g in order.iter().rev() {
        let e = expr[g as usize].take().unwrap();
        let mut acc: BTreeMap<u32, i64> = BTreeMap::new();
        for (h, ch) in e {
            let rh = resolved[h as usize]
                .as_ref()
                .expect("DAG order violated in relation resolution");
            for &(bpos, cb) in rh {
                let v = acc.entry(bpos).or_insert(0);
                *v = checked_add(*v, checked_mul(ch, cb)?)?;
            }
        }
        acc.retain(|_, v| *v != 0);
        resolved[g as usize] = Some(acc.into_iter().collect());
    }

    // Coordinates for every coset through its sigma-fold.
    let mut coords: Vec<SparseRow> = Vec::with_capacity(n);
    for i in 0..n {
        match rep[i] {
            None => coords.push(Vec::new()),
            Some((g, s)) => {
                let rg = resolved[g as usize].as_ref().unwrap();
                if s == 1 {
                    coords.push(rg.clone());
                } else {
                    coords.push(rg.iter().map(|&(j, c)| (j, -c)).collect());
                }
            }
        }
    }

    let boundary = basis
        .iter()
        .map(|&g| boundary_of_coset(&table, g as usize))
        .collect();

    Ok(ManinSymbolSpace {
        table,
        basis,
        coords,
        boundary,
        genus,
    })
}

/// Reassemble a space from stored basis and coordinate data. Everything
/// cheap to recheck is rechecked: rank against the genus formula, unit
/// rows at basis cosets, and the full sigma and tau relations in
/// coordinates. The boundary functional is recomputed, not trusted.
pub(super) fn from_parts(
    p: u64,
    basis: Vec<u32>,
    coords: Vec<SparseRow>,
) -> Result<ManinSymbolSpace, ModSymError> {
    let reject = || ModSymError::SpaceConstruction(format!("stored space rejected at level {}", p));
    if p < 11 {
        return Err(ModSymError::LevelTooSmall(p));
    }
    let table = P1Table::new(p)?;
    let n = table.size();
    let genus = genus_x0(p);
    if basis.len() as u64 != 2 * genus + 1 || coords.len() != n {
        return Err(reject());
    }
    if !basis.windows(2).all(|w| w[0] < w[1]) || basis.iter().any(|&g| g as usize >= n) {
        return Err(reject());
    }
    let rank = basis.len();
    for row in &coords {
        let mut last = None;
        for &(j, c) in row {
            if j as usize >= rank || c == 0 || last.is_some_and(|l| j <= l) {
                return Err(reject());
            }
            last = Some(j);
        }
    }
    for (j, &g) in basis.iter().enumerate() {
        if coords[g as usize] != [(j as u32, 1)] {
            return Err(reject());
        }
    }
    let cancels = |rows: &[&SparseRow]| -> bool {
        let mut all: Vec<(u32, i64)> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        all.sort_unstable_by_key(|&(j, _)| j);
        let mut k = 0;
        while k < all.len() {
            let j = all[k].0;
            let mut s = 0i64;
            while k < all.len() && all[k].0 == j {
                s += all[k].1;
                k += 1;
            }
            if s != 0 {
                return false;
            }
        }
        true
    };
    for i in 0..n {
        let (si, ti, tti) = (table.sigma(i), table.tau(i), table.tau(table.tau(i)));
        if !cancels(&[&coords[i], &coords[si]])
            || !cancels(&[&coords[i], &coords[ti], &coords[tti]])
        {
            return Err(reject());
        }
    }
    let boundary = basis
        .iter()
        .map(|&g| boundary_of_coset(&table, g as usize))
        .collect();
    Ok(ManinSymbolSpace {
        table,
        basis,
        coords,
        boundary,
        genus,
    })
}

/// Coefficient of (cusp infinity) - (cusp 0) in the boundary of the
/// path attached to the coset.
pub fn boundary_of_coset(table: &P1Table, i: usize) -> i64 {
    let e = table.element(i);
    let head = if e.c % table.p() == 0 { 1 } else { 0 };
    let tail = if e.d % table.p() == 0 { 1 } else { 0 };
    head - tail
}

impl ManinSymbolSpace {
    pub fn p(&self) -> u64 {
        self.table.p()
    }

    pub fn genus(&self) -> u64 {
        self.genus
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn table(&self) -> &P1Table {
        &self.table
    }

    pub fn basis_coset(&self, j: usize) -> u32 {
        self.basis[j]
    }

    /// Class of the coset with the given P^1 index, over basis positions.
    pub fn coset_coords(&self, i: usize) -> &[(u32, i64)] {
        &self.coords[i]
    }

    /// Boundary functional on basis positions.
    pub fn boundary(&self) -> &[i64] {
        &self.boundary
    }

    /// Basis of the saturated cuspidal sublattice (kernel of the
    /// boundary functional), rank 2g, as sparse rows over basis
    /// positions.
    pub fn cuspidal_basis(&self) -> Vec<SparseRow> {
        let b = &self.boundary;
        let k = b
            .iter()
            .position(|&v| v == 1 || v == -1)
            .expect("boundary functional is surjective");
        let mut rows = Vec::with_capacity(b.len() - 1);
        for i in 0..b.len() {
            if i == k {
                continue;
            }
            let mut row = vec![(i as u32, 1)];
            let corr = -b[i] * b[k];
            if corr != 0 {
                row.push((k as u32, corr));
                row.sort_unstable();
            }
            rows.push(row);
        }
        rows
    }
}
