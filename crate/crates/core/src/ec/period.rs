//! Period lattices with certified error bounds.
//!
//! Substituting X = 4x, Y = 4(2y + a1 x + a3) turns the minimal model
//! into Y^2 = g(X) = X^3 + b2 X^2 + 8 b4 X + 16 b6 with dX/Y equal to
//! the Neron differential dx/(2y + a1 x + a3). The periods are then
//! arithmetic-geometric means:
//!
//!   three real roots e1 > e2 > e3:
//!     omega = 2 pi / M(sqrt(e1 - e2), sqrt(e1 - e3)), two components,
//!     nu    = 2 pi / M(sqrt(e1 - e3), sqrt(e2 - e3)),
//!     lattice Z omega + Z i nu;
//!   one real root e1, with B = (3 e1 + b2)/2 and C = g'(e1):
//!     omega = 2 pi / M(sqrt((B + sqrt(C))/2), C^(1/4)), one component,
//!     nu    = 2 pi / M(sqrt((sqrt(C) - B)/2), C^(1/4)),
//!     lattice Z omega + Z (omega + i nu)/2.
//!
//! All follow from Gauss's evaluation of int dt / sqrt((t^2+a^2)(t^2+b^2))
//! after the substitution X = e1 + t^2. Roots are isolated by exact
//! bisection on dyadic rationals, so every quantity that enters the AGM
//! is a true enclosure.

use super::minimal::minimal_model;
use super::{CurveError, WeierstrassModel};
use crate::numeric::Interval;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug)]
pub struct PeriodData {
    /// Least positive real period of the Neron differential.
    pub omega: Interval,
    /// Number of connected components of the real locus (1 or 2).
    pub components: u32,
}

impl PeriodData {
    /// The period that enters the Birch and Swinnerton-Dyer quotient:
    /// the integral of |omega| over the full real locus.
    pub fn bsd_period(&self) -> Interval {
        self.omega.scale_i64(self.components as i64)
    }
}

#[derive(Clone, Debug)]
pub struct LatticeData {
    /// Least positive real period.
    pub omega: Interval,
    /// The second generator is i nu (two components) or
    /// (omega + i nu)/2 (one component).
    pub nu: Interval,
    /// Covolume of the period lattice.
    pub area: Interval,
    pub components: u32,
}

struct Cubic {
    /// Coefficients of g(X) = X^3 + c2 X^2 + c1 X + c0.
    c2: BigInt,
    c1: BigInt,
    c0: BigInt,
}

impl Cubic {
    fn eval(&self, x: &BigRational) -> BigRational {
        let c2 = BigRational::from(self.c2.clone());
        let c1 = BigRational::from(self.c1.clone());
        let c0 = BigRational::from(self.c0.clone());
        ((x + c2) * x + c1) * x + c0
    }

    fn eval_deriv(&self, x: &BigRational) -> BigRational {
        let three = BigRational::from(BigInt::from(3));
        let two_c2 = BigRational::from(2 * &self.c2);
        let c1 = BigRational::from(self.c1.clone());
        (three * x + two_c2) * x + c1
    }

    /// Cauchy bound: every real root lies in [-r, r].
    fn root_bound(&self) -> BigRational {
        let m = self.c2.abs().max(self.c1.abs()).max(self.c0.abs());
        BigRational::from(m + 1)
    }
}

/// Shrink a sign-change interval [lo, hi] (f(lo) < 0 < f(hi) or the
/// reverse) until its width drops below 2^-bits. Exact arithmetic.
fn bisect<F>(f: F, mut lo: BigRational, mut hi: BigRational, bits: u32) -> (BigRational, BigRational)
where
    F: Fn(&BigRational) -> BigRational,
{
    let flo = f(&lo);
    debug_assert!(!flo.is_zero() && f(&hi).signum() != flo.signum());
    let sign_lo = flo.signum();
    let tol = BigRational::new(BigInt::one(), BigInt::one() << bits);
    while &hi - &lo > tol {
        let mid = (&lo + &hi) / BigRational::from(BigInt::from(2));
        let fm = f(&mid);
        if fm.is_zero() {
            // A dyadic root; return a degenerate-width bracket around it.
            let eps = &tol / BigRational::from(BigInt::from(2));
            return (&mid - &eps, mid + eps);
        }
        if fm.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

fn ratio_interval(lo: &BigRational, hi: &BigRational, prec: u32) -> Interval {
    Interval::from_ratio_bounds(lo.numer(), lo.denom(), hi.numer(), hi.denom(), prec)
}

/// Certified real period of the curve at roughly `prec` bits. The result
/// interval is guaranteed to contain the true period; its width shrinks
/// with prec but is also reported through the interval itself.
pub fn real_period(e: &WeierstrassModel, prec: u32) -> Result<PeriodData, CurveError> {
    let l = period_lattice(e, prec)?;
    Ok(PeriodData {
        omega: l.omega,
        components: l.components,
    })
}

/// Certified generators and covolume of the full period lattice.
pub fn period_lattice(e: &WeierstrassModel, prec: u32) -> Result<LatticeData, CurveError> {
    let emin = minimal_model(e)?;
    let inv = emin.invariants()?;
    let g = Cubic {
        c2: inv.b2.clone(),
        c1: 8 * &inv.b4,
        c0: 16 * &inv.b6,
    };
    let positive_disc = inv.delta.is_positive();

    let mut guard = 64u32;
    for _ in 0..5 {
        let work = prec + guard;
        let (omega, nu) = if positive_disc {
            period_three_real_roots(&g, work)
        } else {
            period_one_real_root(&g, work)
        };
        if omega.width_exponent() <= -(prec as i64) && nu.width_exponent() <= -(prec as i64) {
            let area = if positive_disc {
                omega.mul(&nu)
            } else {
                omega.mul(&nu).div(&Interval::from_i64(2, work))
            };
            return Ok(LatticeData {
                omega,
                nu,
                area,
                components: if positive_disc { 2 } else { 1 },
            });
        }
        guard *= 2;
    }
    Err(CurveError::PrecisionTooLow(prec))
}

fn period_three_real_roots(g: &Cubic, work: u32) -> (Interval, Interval) {
    let r = g.root_bound();
    let two = BigRational::from(BigInt::from(2));
    // Critical points eta1 < eta2 of g bracket the middle root:
    // e3 < eta1 < e2 < eta2 < e1. The vertex of g' sits between them.
    let vertex = BigRational::new(-g.c2.clone(), BigInt::from(3));
    debug_assert!(g.eval_deriv(&vertex).is_negative());
    // Dyadic separators: s1 in (e3, e2) with g > 0, s2 in (e2, e1) with
    // g < 0, found by refining brackets of eta1 and eta2.
    let s1 = {
        let (mut lo, mut hi) = (-&r, vertex.clone());
        loop {
            // g' > 0 at lo, <= 0 at hi: hi converges to eta1 from the
            // right, where g is strictly positive.
            if g.eval(&hi).is_positive() && !g.eval_deriv(&hi).is_positive() {
                break hi;
            }
            let mid = (&lo + &hi) / &two;
            if g.eval_deriv(&mid).is_positive() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    };
    let s2 = {
        let (mut lo, mut hi) = (vertex.clone(), r.clone());
        loop {
            if g.eval(&lo).is_negative() && !g.eval_deriv(&lo).is_positive() {
                break lo;
            }
            let mid = (&lo + &hi) / &two;
            if g.eval_deriv(&mid).is_negative() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    };
    let bits = work + 16;
    let e3 = bisect(|x| g.eval(x), -&r, s1.clone(), bits);
    let e2 = bisect(|x| g.eval(x), s1, s2.clone(), bits);
    let e1 = bisect(|x| g.eval(x), s2, r, bits);
    // Bisection brackets carry the sign orientation; normalize to
    // (lower, upper) per root.
    let order = |p: (BigRational, BigRational)| if p.0 <= p.1 { p } else { (p.1, p.0) };
    let (e1, e2, e3) = (order(e1), order(e2), order(e3));
    let i1 = ratio_interval(&e1.0, &e1.1, work);
    let i2 = ratio_interval(&e2.0, &e2.1, work);
    let i3 = ratio_interval(&e3.0, &e3.1, work);
    let a = i1.sub(&i2).sqrt();
    let b = i1.sub(&i3).sqrt();
    let c = i2.sub(&i3).sqrt();
    let two_pi = Interval::pi(work).scale_i64(2);
    let omega = two_pi.div(&Interval::agm(&a, &b));
    let nu = two_pi.div(&Interval::agm(&b, &c));
    (omega, nu)
}

fn period_one_real_root(g: &Cubic, work: u32) -> (Interval, Interval) {
    let r = g.root_bound();
    let bits = work + 16;
    let e1 = bisect(|x| g.eval(x), -g.root_bound(), r, bits);
    let e1 = if e1.0 <= e1.1 { e1 } else { (e1.1, e1.0) };
    let i1 = ratio_interval(&e1.0, &e1.1, work);
    // B = (3 e1 + b2) / 2, C = g'(e1) = 3 e1^2 + 2 b2 e1 + 8 b4.
    let b2 = Interval::from_int(&g.c2, work);
    let c1 = Interval::from_int(&g.c1, work);
    let two = Interval::from_i64(2, work);
    let b = i1.scale_i64(3).add(&b2).div(&two);
    let c = i1
        .mul(&i1)
        .scale_i64(3)
        .add(&b2.mul(&i1).scale_i64(2))
        .add(&c1);
    let sqrt_c = c.sqrt();
    let quartic_c = sqrt_c.sqrt();
    let two_pi = Interval::pi(work).scale_i64(2);
    let x = b.add(&sqrt_c).div(&two).sqrt();
    let y = sqrt_c.sub(&b).div(&two).sqrt();
    let omega = two_pi.div(&Interval::agm(&x, &quartic_c));
    let nu = two_pi.div(&Interval::agm(&y, &quartic_c));
    (omega, nu)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// f64 quadrature of the real period: 2 int_{e1}^{inf} dX/sqrt(g)
    /// via X = e1 + t^2, Simpson's rule plus a 1/T tail estimate. Crude
    /// but independent of the AGM identities.
    fn quadrature_period(g: &Cubic, e1: f64) -> f64 {
        let gf = |x: f64| {
            let c2 = rough(&g.c2);
            let c1 = rough(&g.c1);
            let c0 = rough(&g.c0);
            ((x + c2) * x + c1) * x + c0
        };
        let integrand = |t: f64| {
            if t == 0.0 {
                return 0.0;
            }
            let x = e1 + t * t;
            2.0 / (gf(x) / (x - e1)).sqrt() * 1.0
        };
        // Integrand at t = 0 equals 2/sqrt(g'(e1)): finite; evaluate by
        // the limit expression g(x)/(x - e1) -> g'(e1).
        let t_max = 4000.0f64;
        let n = 2_000_000usize;
        let h = t_max / n as f64;
        let mut sum = 0.0;
        for i in 0..=n {
            let t = i as f64 * h;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let v = if i == 0 {
                let c2 = rough(&g.c2);
                let gp = 3.0 * e1 * e1 + 2.0 * c2 * e1 + rough(&g.c1);
                2.0 / gp.sqrt()
            } else {
                integrand(t)
            };
            sum += w * v;
        }
        let integral = sum * h / 3.0;
        // Tail: integrand ~ 2/t^2, so int_T^inf ~ 2/T.
        let tail = 2.0 / t_max;
        2.0 * (integral + tail)
    }

    fn rough(n: &BigInt) -> f64 {
        use num_traits::ToPrimitive;
        n.to_f64().unwrap()
    }

    #[test]
    fn one_component_period_of_conductor_eleven() {
        let e = WeierstrassModel::new(0, -1, 1, -10, -20);
        let p = real_period(&e, 128).unwrap();
        assert_eq!(p.components, 1);
        let mid = p.omega.mid_f64();
        assert!((mid - 1.269209304279553).abs() < 1e-9, "omega = {}", mid);
        // Independent quadrature check.
        let inv = e.invariants().unwrap();
        let g = Cubic {
            c2: inv.b2.clone(),
            c1: 8 * &inv.b4,
            c0: 16 * &inv.b6,
        };
        let e1 = {
            let b = bisect(|x| g.eval(x), -g.root_bound(), g.root_bound(), 60);
            (rough(b.0.numer()) / rough(b.0.denom())
                + rough(b.1.numer()) / rough(b.1.denom()))
                / 2.0
        };
        let quad = quadrature_period(&g, e1);
        assert!(
            (quad - mid).abs() < 2e-3 * mid,
            "quadrature {} vs agm {}",
            quad,
            mid
        );
    }

    #[test]
    fn two_component_period_against_quadrature() {
        // Rank one curve of conductor 37 has positive discriminant.
        let e = WeierstrassModel::new(0, 0, 1, -1, 0);
        let p = real_period(&e, 128).unwrap();
        assert_eq!(p.components, 2);
        let mid = p.omega.mid_f64();
        let inv = e.invariants().unwrap();
        let g = Cubic {
            c2: inv.b2.clone(),
            c1: 8 * &inv.b4,
            c0: 16 * &inv.b6,
        };
        // g = X^3 - 16X + 16 is negative at 2 and positive at the Cauchy
        // bound, so [2, r] brackets exactly the largest root.
        let r = g.root_bound();
        let s2 = bisect(
            |x| g.eval(x),
            BigRational::new(BigInt::from(2), BigInt::from(1)),
            r,
            60,
        );
        let e1 = (rough(s2.0.numer()) / rough(s2.0.denom())
            + rough(s2.1.numer()) / rough(s2.1.denom()))
            / 2.0;
        let quad = quadrature_period(&g, e1);
        assert!(
            (quad - mid).abs() < 2e-3 * mid,
            "quadrature {} vs agm {}",
            quad,
            mid
        );
        assert!(p.bsd_period().mid_f64() > mid * 1.99);
    }

    #[test]
    fn family_periods_have_expected_component_counts() {
        // u = 3: the odd curve has Delta = 73 > 0, the even one -73^2.
        let e1 = WeierstrassModel::new(1, -1, 0, -1, 0);
        let e0 = WeierstrassModel::new(1, -1, 0, 4, -3);
        let p1 = real_period(&e1, 96).unwrap();
        let p0 = real_period(&e0, 96).unwrap();
        assert_eq!(p1.components, 2);
        assert_eq!(p0.components, 1);
        // The lattices are 2-isogenous: the ratio of least real periods
        // is a power of 2 in [1/2, 2].
        let ratio = p1.omega.mid_f64() / p0.omega.mid_f64();
        let near = [0.5, 1.0, 2.0]
            .iter()
            .any(|&t| (ratio - t).abs() < 1e-12 * ratio.max(1.0));
        assert!(near, "period ratio {} not a small power of two", ratio);
    }

    #[test]
    fn period_is_model_independent() {
        let e = WeierstrassModel::new(0, -1, 1, -10, -20);
        let blown = e.transform(
            &BigInt::from(1),
            &BigInt::from(-4),
            &BigInt::from(3),
            &BigInt::from(7),
        );
        let a = real_period(&e, 96).unwrap();
        let b = real_period(&blown, 96).unwrap();
        assert!((a.omega.mid_f64() - b.omega.mid_f64()).abs() < 1e-14);
    }

    #[test]
    fn width_certificate_meets_request() {
        let e = WeierstrassModel::new(1, -1, 0, -1, 0);
        for prec in [64u32, 128, 256] {
            let p = real_period(&e, prec).unwrap();
            assert!(p.omega.width_exponent() <= -(prec as i64));
        }
    }

    /// One-way integral over the unbounded negative-g ray, for the
    /// loop around the conjugate-root cut: X = e1 - t^2.
    fn quadrature_nu_one_root(g: &Cubic, e1: f64) -> f64 {
        let gf = |x: f64| {
            ((x + rough(&g.c2)) * x + rough(&g.c1)) * x + rough(&g.c0)
        };
        let t_max = 4000.0f64;
        let n = 2_000_000usize;
        let h = t_max / n as f64;
        let mut sum = 0.0;
        for i in 0..=n {
            let t = i as f64 * h;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let v = if i == 0 {
                let gp = 3.0 * e1 * e1 + 2.0 * rough(&g.c2) * e1 + rough(&g.c1);
                2.0 / gp.sqrt()
            } else {
                2.0 * t / (-gf(e1 - t * t)).sqrt()
            };
            sum += w * v;
        }
        sum * h / 3.0 + 2.0 / t_max
    }

    /// Loop integral around the bounded cut (e2, e1) where g < 0, with
    /// the sine substitution absorbing both endpoint singularities.
    fn quadrature_nu_three_roots(e1: f64, e2: f64, e3: f64) -> f64 {
        let mid = (e1 + e2) / 2.0;
        let half = (e1 - e2) / 2.0;
        let n = 200_000usize;
        let h = std::f64::consts::PI / n as f64;
        let mut sum = 0.0;
        for i in 0..=n {
            let theta = -std::f64::consts::FRAC_PI_2 + i as f64 * h;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            sum += w / ((mid + half * theta.sin()) - e3).sqrt();
        }
        2.0 * sum * h / 3.0
    }

    #[test]
    fn one_component_lattice_of_conductor_eleven() {
        let e = WeierstrassModel::new(0, -1, 1, -10, -20);
        let l = period_lattice(&e, 128).unwrap();
        assert_eq!(l.components, 1);
        let nu = l.nu.mid_f64();
        assert!((nu - 2.9176332338606444).abs() < 1e-9, "nu = {}", nu);
        let area = l.area.mid_f64();
        let expected = l.omega.mid_f64() * nu / 2.0;
        assert!((area - expected).abs() < 1e-12);
        // The loop around the conjugate cut is twice the one-way ray
        // integral.
        let inv = e.invariants().unwrap();
        let g = Cubic {
            c2: inv.b2.clone(),
            c1: 8 * &inv.b4,
            c0: 16 * &inv.b6,
        };
        let b = bisect(|x| g.eval(x), -g.root_bound(), g.root_bound(), 60);
        let e1 = (rough(b.0.numer()) / rough(b.0.denom())
            + rough(b.1.numer()) / rough(b.1.denom()))
            / 2.0;
        let quad = 2.0 * quadrature_nu_one_root(&g, e1);
        assert!((quad - nu).abs() < 2e-3 * nu, "quadrature {} vs {}", quad, nu);
    }

    #[test]
    fn two_component_lattice_against_quadrature() {
        let e = WeierstrassModel::new(0, 0, 1, -1, 0);
        let l = period_lattice(&e, 128).unwrap();
        assert_eq!(l.components, 2);
        // g = X^3 - 16X + 16: brackets found by sign inspection.
        let inv = e.invariants().unwrap();
        let g = Cubic {
            c2: inv.b2.clone(),
            c1: 8 * &inv.b4,
            c0: 16 * &inv.b6,
        };
        let f = |lo: i64, hi: i64| {
            let b = bisect(
                |x| g.eval(x),
                BigRational::from(BigInt::from(lo)),
                BigRational::from(BigInt::from(hi)),
                60,
            );
            (rough(b.0.numer()) / rough(b.0.denom())
                + rough(b.1.numer()) / rough(b.1.denom()))
                / 2.0
        };
        let (e3, e2, e1) = (f(-5, 0), f(0, 2), f(2, 5));
        let quad = quadrature_nu_three_roots(e1, e2, e3);
        let nu = l.nu.mid_f64();
        assert!((quad - nu).abs() < 1e-5 * nu, "quadrature {} vs {}", quad, nu);
        let area = l.area.mid_f64();
        assert!((area - l.omega.mid_f64() * nu).abs() < 1e-12);
    }

    #[test]
    fn family_covolumes_halve_under_the_isogeny() {
        // Even-discriminant member = quotient by the rational
        // 2-torsion point, so its lattice is coarser by index 2.
        for u in [3i64, -5, 7] {
            let a2 = -(u + 1) / 4;
            let e1 = WeierstrassModel::new(1, a2, 0, -1, 0);
            let e0 = WeierstrassModel::new(1, a2, 0, 4, -u);
            let l1 = period_lattice(&e1, 96).unwrap();
            let l0 = period_lattice(&e0, 96).unwrap();
            assert_eq!(l1.components, 2);
            assert_eq!(l0.components, 1);
            let ratio = l1.area.mid_f64() / l0.area.mid_f64();
            assert!((ratio - 2.0).abs() < 1e-12, "u = {}, ratio = {}", u, ratio);
        }
    }
}
