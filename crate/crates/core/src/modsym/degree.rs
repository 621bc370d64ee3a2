//! The modular degree of a Neumann-Setzer curve, computed exactly from
//! the intersection pairing on the newform eigenlattice and
//! cross-validated against a numeric period-lattice method.
//!
//! Exact route: with gamma a basis of the saturated eigenlattice and
//! delta a basis of its dual-side twin, each iota(delta_a) is a cuspidal
//! chain inside the gamma plane, so iota(delta_a) = U gamma has a unique
//! exact rational solution U. The Gram matrix of the intersection form
//! on gamma is then E = U^{-1} (delta . gamma), forced to be integral
//! and skew with zero diagonal; the degree is |E_01|, its Pfaffian.
//!
//! Numeric route: periods of two paths {0, b/d} are computed from the
//! q-expansion with interval arithmetic and a rigorous tail bound. Each
//! period equals s A + t B where (s, t) are the exact eigen-projection
//! coordinates of the path and A, B the periods of gamma, so the degree
//! reappears as |Im(A conj B)| / covol(E0) and is certified to land
//! within 1/2 of the exact answer.

use super::cache::{cached_space, CacheConfig};
use super::linalg::saturated_kernel;
use super::pairing::iota_apply;
use super::space::ManinSymbolSpace;
use super::ModSymError;
use crate::arith::{is_prime_u64, modinv_u64};
use crate::ec::{an_sequence, ap_count, period_lattice};
use crate::ns::NSPair;
use crate::numeric::{ComplexInterval, Interval};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone, Debug)]
pub struct DegreeResult {
    pub m: u64,
    /// Certified enclosure (lo, hi) of the numeric degree when the
    /// cross-check ran; it contains the true numeric value and lies
    /// within 1/2 of `m`.
    pub numeric: Option<(f64, f64)>,
}

fn level_of(pair: &NSPair) -> Result<u64, ModSymError> {
    pair.parameter.p_u64().ok_or(ModSymError::Overflow)
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenvalues a_l of the attached newform for enough primes to cut the
/// eigenlattice to rank 2. The first six primes suffice throughout the
/// family in practice; a rank excess extends the list toward the Sturm
/// bound p/6 instead of failing.
fn eigen_planes(
    space: &ManinSymbolSpace,
    pair: &NSPair,
    cfg: &CacheConfig,
) -> Result<([Vec<BigInt>; 2], [Vec<BigInt>; 2]), ModSymError> {
    let p = space.p();
    let mut ls: Vec<u64> = [2u64, 3, 5, 7, 11, 13].iter().copied().filter(|&l| l != p).collect();
    let sturm = p / 6 + 1;
    loop {
        let mut aps = Vec::with_capacity(ls.len());
        for &l in &ls {
            aps.push((l, ap_count(&pair.e0, l)?));
        }
        match saturated_kernel(space, &aps, 2, false, cfg) {
            Ok(g) => {
                let d = saturated_kernel(space, &aps, 2, true, cfg)?;
                let mut gi = g.into_iter();
                let mut di = d.into_iter();
                return Ok((
                    [gi.next().unwrap(), gi.next().unwrap()],
                    [di.next().unwrap(), di.next().unwrap()],
                ));
            }
            Err(ModSymError::EigenRank { got, lmax }) if got > 2 && lmax < sturm => {
                let mut next = ls.last().unwrap() + 1;
                while !is_prime_u64(next) || next == p {
                    next += 1;
                }
                ls.push(next);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Exact rational coordinates of v in the plane spanned by g0, g1,
/// verified entrywise; None when v falls outside the plane.
fn plane_coordinates(g: &[Vec<BigInt>; 2], v: &[BigInt]) -> Option<(BigRational, BigRational)> {
    let n = v.len();
    let i0 = (0..n).find(|&i| !g[0][i].is_zero() || !g[1][i].is_zero())?;
    let (i1, det) = (0..n).find_map(|i| {
        let d = &g[0][i0] * &g[1][i] - &g[0][i] * &g[1][i0];
        (!d.is_zero()).then_some((i, d))
    })?;
    let s = BigRational::new(&v[i0] * &g[1][i1] - &v[i1] * &g[1][i0], det.clone());
    let t = BigRational::new(&g[0][i0] * &v[i1] - &g[0][i1] * &v[i0], det);
    for i in 0..n {
        let rhs = &s * BigRational::from(g[0][i].clone()) + &t * BigRational::from(g[1][i].clone());
        if BigRational::from(v[i].clone()) != rhs {
            return None;
        }
    }
    Some((s, t))
}

/// The degree and the evaluation matrix Q[a][j] = <delta_a, gamma_j>
/// from the two lattice bases.
fn degree_from_lattices(
    space: &ManinSymbolSpace,
    gamma: &[Vec<BigInt>; 2],
    delta: &[Vec<BigInt>; 2],
) -> Result<(u64, [[BigInt; 2]; 2]), ModSymError> {
    let p = space.p();
    let q = [
        [dot(&delta[0], &gamma[0]), dot(&delta[0], &gamma[1])],
        [dot(&delta[1], &gamma[0]), dot(&delta[1], &gamma[1])],
    ];
    let det_q = &q[0][0] * &q[1][1] - &q[0][1] * &q[1][0];
    assert!(!det_q.is_zero(), "evaluation pairing degenerate on the eigenplanes");

    let b = space.boundary();
    let mut u = Vec::with_capacity(2);
    for d in delta.iter() {
        let v = iota_apply(space, d);
        let bd: BigInt = v.iter().zip(b).map(|(x, &c)| x * c).sum();
        assert!(bd.is_zero(), "realized eigenchain must be cuspidal");
        u.push(plane_coordinates(gamma, &v).expect("realized eigenchain stays in its eigenplane"));
    }
    let det_u = &u[0].0 * &u[1].1 - &u[0].1 * &u[1].0;
    assert!(!det_u.is_zero(), "independent dual vectors realize independently");

    // E = U^{-1} Q, the intersection Gram matrix on the gamma basis.
    let qr = |a: usize, j: usize| BigRational::from(q[a][j].clone());
    let e01 = (&u[1].1 * qr(0, 1) - &u[0].1 * qr(1, 1)) / &det_u;
    let e10 = (&u[0].0 * qr(1, 0) - &u[1].0 * qr(0, 0)) / &det_u;
    let e00 = (&u[1].1 * qr(0, 0) - &u[0].1 * qr(1, 0)) / &det_u;
    let e11 = (&u[0].0 * qr(1, 1) - &u[1].0 * qr(0, 1)) / &det_u;
    assert!(e00.is_zero() && e11.is_zero(), "self-intersections must vanish");
    assert!(e01.is_integer() && e10.is_integer(), "intersection numbers must be integers");
    assert_eq!(e01, -e10.clone(), "intersection form must be skew");
    let m_big = e01.to_integer().abs();

    // Independent determinant identity: det Q / det U = det E = m^2.
    let ratio = BigRational::from(det_q) / det_u;
    assert_eq!(ratio, BigRational::from(&m_big * &m_big), "Pfaffian square check failed");

    let m = m_big.to_u64().ok_or(ModSymError::Overflow)?;
    assert!(m >= 1, "the modular map cannot have degree zero");
    assert!(m % p != 0, "degree divisible by the level");
    Ok((m, q))
}

/// Exact modular degree through the intersection pairing.
pub fn modular_degree_exact(pair: &NSPair, cache: &CacheConfig) -> Result<u64, ModSymError> {
    let p = level_of(pair)?;
    let space = cached_space(cache, p)?;
    let (gamma, delta) = eigen_planes(&space, pair, cache)?;
    Ok(degree_from_lattices(&space, &gamma, &delta)?.0)
}

/// Manin class of the path {0, b/d} with d > 0, as dense coordinates
/// over the space basis. The chain of continued-fraction convergents
/// p_k/q_k of b/d turns each step into the coset (q_k : +-q_{k-1}),
/// signed to land in the level group.
fn path_class(space: &ManinSymbolSpace, b: i64, d: i64) -> Vec<BigInt> {
    let t = space.table();
    let mut out = vec![BigInt::zero(); space.rank()];
    let mut add = |idx: usize| {
        for &(j, co) in space.coset_coords(idx) {
            out[j as usize] += co;
        }
    };
    // The opening step {0, oo} is the identity coset.
    add(t.index_signed(0, 1));
    let (mut pk1, mut qk1) = (1i64, 0i64);
    let (mut pk2, mut qk2) = (0i64, 1i64);
    let mut eps = 1i64;
    let (mut num, mut den) = (b, d);
    while den != 0 {
        let a = num.div_euclid(den);
        let r = num - a * den;
        (num, den) = (den, r);
        let pk = a * pk1 + pk2;
        let qk = a * qk1 + qk2;
        eps = -eps;
        add(t.index_signed(qk, eps * qk1));
        (pk2, qk2) = (pk1, qk1);
        (pk1, qk1) = (pk, qk);
    }
    out
}

/// Eigen-projection coordinates (s, t) of a path class x, solving
/// Q (s, t)^T = (<delta_0, x>, <delta_1, x>)^T; components of x in other
/// eigenspaces are invisible to both sides.
fn projection_coordinates(
    q: &[[BigInt; 2]; 2],
    delta: &[Vec<BigInt>; 2],
    x: &[BigInt],
) -> (BigRational, BigRational) {
    let r0 = dot(&delta[0], x);
    let r1 = dot(&delta[1], x);
    let det = &q[0][0] * &q[1][1] - &q[0][1] * &q[1][0];
    let s = BigRational::new(&r0 * &q[1][1] - &r1 * &q[0][1], det.clone());
    let t = BigRational::new(&q[0][0] * &r1 - &q[1][0] * &r0, det);
    (s, t)
}

/// Certified (cos, sin) of 2 pi j / p for j below p. The series code
/// reduces its rotation angles through this table, which keeps every
/// trigonometric evaluation at a bounded argument; powering an interval
/// rotation instead would let widths grow geometrically.
fn rotation_table(p: u64, prec: u32) -> Vec<(Interval, Interval)> {
    let two_pi = Interval::pi(prec).scale_i64(2);
    let pint = Interval::from_i64(p as i64, prec);
    (0..p)
        .map(|j| {
            let th = two_pi.scale_i64(j as i64).div(&pint);
            (th.cos_enclosure(), th.sin_enclosure())
        })
        .collect()
}

/// Sum of the truncated period series F(gz0) - F(z0) for the path of
/// gamma = [[a, b], [p, d]], with z0 = (-d + i)/p, g z0 = (a + i)/p,
/// padded by the tail bound 4 e^{-t(N+1)} / (1 - e^{-t}), t = 2 pi / p,
/// which dominates because |a_n| <= 2n. The n-th term is
/// r^n (rot(n a) - rot(n (p - d))) a_n / n with r = e^{-2 pi / p}; only
/// the real radius is powered incrementally, which is width-stable.
fn period_series(
    p: u64,
    d: u64,
    a: u64,
    an: &[i64],
    prec: u32,
    rot: &[(Interval, Interval)],
) -> ComplexInterval {
    let two_pi = Interval::pi(prec).scale_i64(2);
    let pint = Interval::from_i64(p as i64, prec);
    let radius = two_pi.div(&pint).neg().exp();
    let from_k = (p - d % p) % p;
    let to_k = a % p;
    let mut rp = radius.clone();
    let mut acc = ComplexInterval::zero(prec);
    let n_max = an.len() - 1;
    for n in 1..=n_max {
        if an[n] != 0 {
            let c = Interval::from_ratio(&BigInt::from(an[n]), &BigInt::from(n as u64), prec);
            let nr = n as u64 % p;
            let jf = ((nr * from_k) % p) as usize;
            let jt = ((nr * to_k) % p) as usize;
            let term = ComplexInterval {
                re: rp.mul(&rot[jt].0.sub(&rot[jf].0)),
                im: rp.mul(&rot[jt].1.sub(&rot[jf].1)),
            };
            acc = acc.add(&term.scale(&c));
        }
        if n < n_max {
            rp = rp.mul(&radius);
        }
    }
    let one = Interval::from_i64(1, prec);
    let tail = rp
        .mul(&radius)
        .scale_i64(4)
        .div(&one.sub(&radius))
        .symmetrize();
    acc.add(&ComplexInterval {
        re: tail.clone(),
        im: tail,
    })
}

/// Terms needed to push the series tail below eps for decay e^{-2 pi/p}.
fn terms_for(p: u64, eps_log: f64) -> usize {
    let pf = p as f64;
    let t = 2.0 * std::f64::consts::PI / pf;
    (((4.0f64.ln() + eps_log + (1.0 / t).ln()) / t).ceil() as usize) + 8
}

/// Certified numeric enclosure of the degree from two independent path
/// periods, laddering precision until the enclosure separates from both
/// gate ends or the rungs run out.
fn numeric_degree_check(
    pair: &NSPair,
    space: &ManinSymbolSpace,
    delta: &[Vec<BigInt>; 2],
    q: &[[BigInt; 2]; 2],
    m: u64,
) -> Result<(f64, f64), ModSymError> {
    let p = space.p();
    // Two paths with independent eigen-projections.
    let mut chosen: Vec<(u64, u64, BigRational, BigRational)> = Vec::new();
    for d in 1..p {
        let a = modinv_u64(d, p);
        let b = ((a as i128 * d as i128 - 1) / p as i128) as i64;
        let x = path_class(space, b, d as i64);
        let (s, t) = projection_coordinates(q, delta, &x);
        if s.is_zero() && t.is_zero() {
            continue;
        }
        match chosen.first() {
            None => chosen.push((d, a, s, t)),
            Some((_, _, s1, t1)) => {
                if !(s1 * &t - t1 * &s).is_zero() {
                    chosen.push((d, a, s, t));
                    break;
                }
            }
        }
    }
    assert!(chosen.len() == 2, "projections of {{0, b/d}} span the eigenplane");
    let (d1, a1, s1, t1) = chosen[0].clone();
    let (d2, a2, s2, t2) = chosen[1].clone();
    let cross = s1 * t2 - t1 * s2;

    let mut width = f64::NAN;
    for (prec, eps_log) in [(160u32, 18.0 * std::f64::consts::LN_10), (256, 30.0 * std::f64::consts::LN_10)] {
        let an = an_sequence(&pair.e0, terms_for(p, eps_log))?;
        let rot = rotation_table(p, prec);
        let phi1 = period_series(p, d1, a1, &an, prec, &rot);
        let phi2 = period_series(p, d2, a2, &an, prec, &rot);
        let im = phi1.mul(&phi2.conj()).im;
        let cross_iv = Interval::from_ratio(cross.numer(), cross.denom(), prec);
        let area = period_lattice(&pair.e0, prec.min(128))?.area;
        let m_num = im.div(&cross_iv).div(&area).abs().sqrt();

        let two = BigInt::from(2);
        let gate_lo = Interval::from_ratio(&BigInt::from(2 * m as i128 - 1), &two, prec);
        let gate_hi = Interval::from_ratio(&BigInt::from(2 * m as i128 + 1), &two, prec);
        if gate_lo.strictly_less_than(&m_num) && m_num.strictly_less_than(&gate_hi) {
            let lo = m_num.lo().to_f64_round(rug::float::Round::Down);
            let hi = m_num.hi().to_f64_round(rug::float::Round::Up);
            return Ok((lo, hi));
        }
        if m_num.strictly_less_than(&gate_lo) || gate_hi.strictly_less_than(&m_num) {
            return Err(ModSymError::DegreeMismatch {
                exact: m,
                numeric: m_num.mid_f64(),
            });
        }
        width = m_num.width().to_f64();
    }
    Err(ModSymError::NumericPrecision(width))
}

/// Exact degree with the numeric period cross-check; the two must agree
/// within a certified error below 1/2.
pub fn modular_degree(pair: &NSPair) -> Result<DegreeResult, ModSymError> {
    let cache = CacheConfig::from_env();
    let p = level_of(pair)?;
    let space = cached_space(&cache, p)?;
    let (gamma, delta) = eigen_planes(&space, pair, &cache)?;
    let (m, q) = degree_from_lattices(&space, &gamma, &delta)?;
    let numeric = numeric_degree_check(pair, &space, &delta, &q, m)?;
    Ok(DegreeResult {
        m,
        numeric: Some(numeric),
    })
}
