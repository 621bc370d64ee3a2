//! Certified floating point intervals on top of arbitrary precision
//! floats. Every operation rounds the lower endpoint down and the upper
//! endpoint up, so a computed interval always encloses the exact value.
//! The AGM returns the structural bracket [g_n, a_n] of the iteration,
//! which encloses the limit without any separate error analysis.

use num_bigint::BigInt;
use rug::float::{Constant, Round};
use rug::ops::DivAssignRound;
use rug::Float;

fn big_to_rug(n: &BigInt) -> rug::Integer {
    let digits = n.magnitude().to_u64_digits();
    let mag = rug::Integer::from_digits(&digits, rug::integer::Order::Lsf);
    if n.sign() == num_bigint::Sign::Minus {
        -mag
    } else {
        mag
    }
}

/// Closed interval [lo, hi] guaranteed to contain the exact quantity.
#[derive(Clone, Debug)]
pub struct Interval {
    lo: Float,
    hi: Float,
}

impl Interval {
    pub fn prec(&self) -> u32 {
        self.lo.prec()
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    fn check(self) -> Self {
        debug_assert!(
            self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi,
            "malformed interval [{}, {}]",
            self.lo,
            self.hi
        );
        self
    }

    pub fn from_int(n: &BigInt, prec: u32) -> Self {
        let v = big_to_rug(n);
        let lo = Float::with_val_round(prec, &v, Round::Down).0;
        let hi = Float::with_val_round(prec, &v, Round::Up).0;
        Interval { lo, hi }.check()
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        Self::from_int(&BigInt::from(n), prec)
    }

    /// Enclosure of the exact rational n/d, d != 0.
    pub fn from_ratio(n: &BigInt, d: &BigInt, prec: u32) -> Self {
        let (n, d) = if d.sign() == num_bigint::Sign::Minus {
            (-n, -d)
        } else {
            (n.clone(), d.clone())
        };
        let nv = big_to_rug(&n);
        let dv = big_to_rug(&d);
        let mut lo = Float::with_val_round(prec, &nv, Round::Down).0;
        lo.div_assign_round(Float::with_val(prec, &dv), Round::Down);
        let mut hi = Float::with_val_round(prec, &nv, Round::Up).0;
        hi.div_assign_round(Float::with_val(prec, &dv), Round::Up);
        Interval { lo, hi }.check()
    }

    /// Enclosure of [a, b] given as exact rationals a <= b.
    pub fn from_ratio_bounds(
        an: &BigInt,
        ad: &BigInt,
        bn: &BigInt,
        bd: &BigInt,
        prec: u32,
    ) -> Self {
        let a = Self::from_ratio(an, ad, prec);
        let b = Self::from_ratio(bn, bd, prec);
        debug_assert!(a.lo <= b.hi, "bounds out of order");
        Interval { lo: a.lo, hi: b.hi }.check()
    }

    pub fn zero(prec: u32) -> Self {
        Interval {
            lo: Float::with_val(prec, 0),
            hi: Float::with_val(prec, 0),
        }
    }

    pub fn pi(prec: u32) -> Self {
        Interval {
            lo: Float::with_val_round(prec, Constant::Pi, Round::Down).0,
            hi: Float::with_val_round(prec, Constant::Pi, Round::Up).0,
        }
        .check()
    }

    pub fn add(&self, other: &Interval) -> Self {
        let prec = self.prec().max(other.prec());
        Interval {
            lo: Float::with_val_round(prec, &self.lo + &other.lo, Round::Down).0,
            hi: Float::with_val_round(prec, &self.hi + &other.hi, Round::Up).0,
        }
        .check()
    }

    pub fn sub(&self, other: &Interval) -> Self {
        let prec = self.prec().max(other.prec());
        Interval {
            lo: Float::with_val_round(prec, &self.lo - &other.hi, Round::Down).0,
            hi: Float::with_val_round(prec, &self.hi - &other.lo, Round::Up).0,
        }
        .check()
    }

    pub fn neg(&self) -> Self {
        Interval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
        .check()
    }

    pub fn mul(&self, other: &Interval) -> Self {
        let prec = self.prec().max(other.prec());
        let pairs = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let down = Float::with_val_round(prec, a * b, Round::Down).0;
            let up = Float::with_val_round(prec, a * b, Round::Up).0;
            lo = Some(match lo {
                Some(v) => v.min(&down),
                None => down,
            });
            hi = Some(match hi {
                Some(v) => v.max(&up),
                None => up,
            });
        }
        Interval {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
        }
        .check()
    }

    /// Division; the divisor interval must not contain zero.
    pub fn div(&self, other: &Interval) -> Self {
        assert!(
            !other.contains_zero(),
            "interval division by an interval containing zero"
        );
        let prec = self.prec().max(other.prec());
        let pairs = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let mut down = Float::with_val_round(prec, a, Round::Down).0;
            down.div_assign_round(Float::with_val(prec, b), Round::Down);
            let mut up = Float::with_val_round(prec, a, Round::Up).0;
            up.div_assign_round(Float::with_val(prec, b), Round::Up);
            lo = Some(match lo {
                Some(v) => v.min(&down),
                None => down,
            });
            hi = Some(match hi {
                Some(v) => v.max(&up),
                None => up,
            });
        }
        Interval {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
        }
        .check()
    }

    /// Square root; requires lo >= 0.
    pub fn sqrt(&self) -> Self {
        assert!(
            !self.lo.is_sign_negative() || self.lo.is_zero(),
            "sqrt of an interval with negative lower endpoint {}",
            self.lo
        );
        let prec = self.prec();
        Interval {
            lo: Float::with_val_round(prec, self.lo.sqrt_ref(), Round::Down).0,
            hi: Float::with_val_round(prec, self.hi.sqrt_ref(), Round::Up).0,
        }
        .check()
    }

    pub fn exp(&self) -> Self {
        let prec = self.prec();
        Interval {
            lo: Float::with_val_round(prec, self.lo.exp_ref(), Round::Down).0,
            hi: Float::with_val_round(prec, self.hi.exp_ref(), Round::Up).0,
        }
        .check()
    }

    pub fn abs(&self) -> Self {
        if !self.lo.is_sign_negative() {
            return self.clone();
        }
        if self.hi.is_sign_negative() {
            return self.neg();
        }
        let hi = Float::with_val(self.prec(), (-self.lo.clone()).max(&self.hi));
        Interval {
            lo: Float::with_val(self.prec(), 0),
            hi,
        }
        .check()
    }

    pub fn scale_i64(&self, k: i64) -> Self {
        self.mul(&Interval::from_i64(k, self.prec()))
    }

    /// Smallest symmetric interval [-M, M] containing self; used to pad a
    /// value by an error bound of unknown sign.
    pub fn symmetrize(&self) -> Self {
        let m = Float::with_val(self.prec(), (-self.lo.clone()).max(&self.hi));
        Interval {
            lo: -m.clone(),
            hi: m,
        }
        .check()
    }

    /// Nonnegative integer power by binary exponentiation.
    pub fn pow_u64(&self, e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Interval::from_i64(1, self.prec());
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn contains_zero(&self) -> bool {
        // Closed-interval membership; signed zeros count as zero.
        (self.lo.is_sign_negative() || self.lo.is_zero())
            && (self.hi.is_sign_positive() || self.hi.is_zero())
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.lo.is_sign_positive() && !self.lo.is_zero()
    }

    /// Certified strict comparison: true only when every point of self is
    /// below every point of other.
    pub fn strictly_less_than(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    /// Whether the exact rational n/d lies inside the interval.
    pub fn contains_ratio(&self, n: &BigInt, d: &BigInt) -> bool {
        let r = Interval::from_ratio(n, d, self.prec() + 8);
        self.lo <= r.lo && r.hi <= self.hi
    }

    pub fn width(&self) -> Float {
        Float::with_val_round(self.prec(), &self.hi - &self.lo, Round::Up).0
    }

    pub fn mid_f64(&self) -> f64 {
        (self.lo.to_f64() + self.hi.to_f64()) / 2.0
    }

    /// Width as a power of two exponent: smallest k with width <= 2^k.
    pub fn width_exponent(&self) -> i64 {
        let w = self.width();
        if w.is_zero() {
            return i64::MIN / 2;
        }
        w.get_exp().unwrap() as i64
    }

    /// Arithmetic-geometric mean of two strictly positive intervals.
    ///
    /// The lower run iterates on the lower endpoints rounding every
    /// operation down; by induction each iterate stays below the exact
    /// iterate, and the geometric-side value g_n is below the limit from
    /// the first step on. The upper run mirrors this. The returned
    /// interval [g_down, a_up] therefore contains AGM(x, y) rigorously.
    pub fn agm(x: &Interval, y: &Interval) -> Self {
        assert!(x.is_strictly_positive() && y.is_strictly_positive());
        let prec = x.prec().max(y.prec());
        let run = |mut a: Float, mut b: Float, round: Round| -> Float {
            // One step in; afterwards the bracket min <= limit <= max holds.
            for _ in 0..(64 + prec.ilog2() * 4) {
                let am = Float::with_val_round(prec, &a + &b, round).0 / 2u32;
                let prod = Float::with_val_round(prec, &a * &b, round).0;
                let gm = Float::with_val_round(prec, prod.sqrt_ref(), round).0;
                a = am;
                b = gm;
                let diff = Float::with_val(prec, &a - &b);
                if diff.is_zero() {
                    break;
                }
                let dexp = diff.get_exp().unwrap();
                let aexp = a.get_exp().unwrap_or(1);
                if dexp < aexp - prec as i32 + 2 {
                    break;
                }
            }
            match round {
                Round::Down => a.min(&b),
                _ => a.max(&b),
            }
        };
        let lo = run(
            Float::with_val_round(prec, &x.lo, Round::Down).0,
            Float::with_val_round(prec, &y.lo, Round::Down).0,
            Round::Down,
        );
        let hi = run(
            Float::with_val_round(prec, &x.hi, Round::Up).0,
            Float::with_val_round(prec, &y.hi, Round::Up).0,
            Round::Up,
        );
        Interval { lo, hi }.check()
    }

    /// Enclosure of sin over the interval: endpoint enclosures padded by
    /// the interval width, using |sin'| <= 1.
    pub fn sin_enclosure(&self) -> Self {
        self.trig_enclosure(true)
    }

    /// Enclosure of cos over the interval, same scheme as sin.
    pub fn cos_enclosure(&self) -> Self {
        self.trig_enclosure(false)
    }

    fn trig_enclosure(&self, sine: bool) -> Self {
        let prec = self.prec();
        let eval = |x: &Float, round: Round| -> Float {
            if sine {
                Float::with_val_round(prec, x.sin_ref(), round).0
            } else {
                Float::with_val_round(prec, x.cos_ref(), round).0
            }
        };
        let w = self.width();
        let lo_pt = eval(&self.lo, Round::Down);
        let hi_pt = eval(&self.hi, Round::Down);
        let lo_raw = Float::with_val(prec, lo_pt.min(&hi_pt));
        let lo = Float::with_val_round(prec, &lo_raw - &w, Round::Down).0;
        let lo_pt2 = eval(&self.lo, Round::Up);
        let hi_pt2 = eval(&self.hi, Round::Up);
        let hi_raw = Float::with_val(prec, lo_pt2.max(&hi_pt2));
        let hi = Float::with_val_round(prec, &hi_raw + &w, Round::Up).0;
        let one = Float::with_val(prec, 1);
        Interval {
            lo: lo.max(&-one.clone()),
            hi: hi.min(&one),
        }
        .check()
    }
}

/// Rectangular complex interval.
#[derive(Clone, Debug)]
pub struct ComplexInterval {
    pub re: Interval,
    pub im: Interval,
}

impl ComplexInterval {
    pub fn zero(prec: u32) -> Self {
        ComplexInterval {
            re: Interval::zero(prec),
            im: Interval::zero(prec),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        ComplexInterval {
            re: self.re.add(&other.re),
            im: self.im.add(&other.im),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        ComplexInterval {
            re: self.re.sub(&other.re),
            im: self.im.sub(&other.im),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        ComplexInterval {
            re: self.re.mul(&other.re).sub(&self.im.mul(&other.im)),
            im: self.re.mul(&other.im).add(&self.im.mul(&other.re)),
        }
    }

    pub fn conj(&self) -> Self {
        ComplexInterval {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    pub fn scale(&self, k: &Interval) -> Self {
        ComplexInterval {
            re: self.re.mul(k),
            im: self.im.mul(k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn ratio_encloses_and_orders() {
        let x = Interval::from_ratio(&BigInt::from(1), &BigInt::from(3), 64);
        assert!(x.contains_ratio(&BigInt::from(1), &BigInt::from(3)));
        assert!(!x.contains_ratio(&BigInt::from(1), &BigInt::from(2)));
        assert!(x.width().to_f64() < 1e-18);
        let y = Interval::from_ratio(&BigInt::from(-22), &BigInt::from(7), 96);
        assert!(y.contains_ratio(&BigInt::from(-22), &BigInt::from(7)));
        assert!(y.strictly_less_than(&x));
    }

    #[test]
    fn arithmetic_encloses_rationals() {
        let a = Interval::from_ratio(&BigInt::from(3), &BigInt::from(7), 80);
        let b = Interval::from_ratio(&BigInt::from(-5), &BigInt::from(11), 80);
        let s = a.add(&b);
        assert!(s.contains_ratio(&BigInt::from(3 * 11 - 5 * 7), &BigInt::from(77)));
        let p = a.mul(&b);
        assert!(p.contains_ratio(&BigInt::from(-15), &BigInt::from(77)));
        let q = a.div(&b);
        assert!(q.contains_ratio(&BigInt::from(3 * 11), &BigInt::from(-35)));
        let d = a.sub(&b);
        assert!(d.contains_ratio(&BigInt::from(3 * 11 + 5 * 7), &BigInt::from(77)));
    }

    #[test]
    fn sqrt_two_bracket() {
        let two = Interval::from_i64(2, 128);
        let r = two.sqrt();
        // 1.41421356237309504880168872420969807856967187537694...
        let lo = 141421356237309504i64;
        let hi = 141421356237309505i64;
        let e17 = BigInt::from(10u64.pow(17));
        assert!(Interval::from_ratio(&BigInt::from(lo), &e17, 160).lo() <= r.lo());
        assert!(r.hi() <= Interval::from_ratio(&BigInt::from(hi), &e17, 160).hi());
        let sq = r.mul(&r);
        assert!(sq.contains_ratio(&BigInt::from(2), &BigInt::from(1)));
    }

    #[test]
    fn pi_and_exp_known_digits() {
        let pi = Interval::pi(128);
        // The twenty digit truncation 3.14159265358979323846 sits just
        // below pi, so pin pi by ordering against it and its successor.
        let below = Interval::from_ratio(
            &BigInt::from(314159265358979323846u128),
            &BigInt::from(10u128.pow(20)),
            160,
        );
        let above = Interval::from_ratio(
            &BigInt::from(314159265358979323847u128),
            &BigInt::from(10u128.pow(20)),
            160,
        );
        assert!(below.strictly_less_than(&pi));
        assert!(pi.strictly_less_than(&above));
        let e = Interval::from_i64(1, 128).exp();
        let e_below = Interval::from_ratio(
            &BigInt::from(271828182845904523536u128),
            &BigInt::from(10u128.pow(20)),
            160,
        );
        let e_above = Interval::from_ratio(
            &BigInt::from(271828182845904523537u128),
            &BigInt::from(10u128.pow(20)),
            160,
        );
        assert!(e_below.strictly_less_than(&e));
        assert!(e.strictly_less_than(&e_above));
    }

    #[test]
    fn agm_of_one_and_sqrt_two() {
        // M(1, sqrt 2) = 1.19814023473559220743992249228... (Gauss's constant
        // relation: the lemniscatic value).
        let one = Interval::from_i64(1, 192);
        let r2 = Interval::from_i64(2, 192).sqrt();
        let m = Interval::agm(&one, &r2);
        let below = Interval::from_ratio(
            &BigInt::from(119814023473559220743u128),
            &BigInt::from(10u128.pow(20)),
            224,
        );
        let above = Interval::from_ratio(
            &BigInt::from(119814023473559220744u128),
            &BigInt::from(10u128.pow(20)),
            224,
        );
        assert!(below.strictly_less_than(&m));
        assert!(m.strictly_less_than(&above));
        assert!(m.width().to_f64() < 1e-50);
    }

    #[test]
    fn agm_respects_interval_inputs() {
        // Widen an input; the output must still contain the tight value.
        let one = Interval::from_i64(1, 96);
        let two = Interval::from_i64(2, 96);
        let wide = Interval {
            lo: Float::with_val(96, 1.9),
            hi: Float::with_val(96, 2.1),
        };
        let tight = Interval::agm(&one, &two);
        let loose = Interval::agm(&one, &wide);
        assert!(loose.lo() <= tight.lo() && tight.hi() <= loose.hi());
    }

    #[test]
    fn trig_enclosures() {
        let pi = Interval::pi(128);
        let s = pi.sin_enclosure();
        assert!(s.contains_zero());
        assert!(s.width().to_f64() < 1e-30);
        let c = pi.cos_enclosure();
        assert!(c.contains_ratio(&BigInt::from(-1), &BigInt::from(1)));
        let half_pi = pi.mul(&Interval::from_ratio(&BigInt::from(1), &BigInt::from(2), 128));
        assert!(half_pi.sin_enclosure().contains_ratio(&BigInt::from(1), &BigInt::from(1)));
    }

    #[test]
    fn complex_mul_matches_hand_value() {
        let prec = 96;
        let a = ComplexInterval {
            re: Interval::from_i64(2, prec),
            im: Interval::from_i64(3, prec),
        };
        let b = ComplexInterval {
            re: Interval::from_i64(-1, prec),
            im: Interval::from_i64(5, prec),
        };
        let p = a.mul(&b);
        // (2+3i)(-1+5i) = -17 + 7i
        assert!(p.re.contains_ratio(&BigInt::from(-17), &BigInt::from(1)));
        assert!(p.im.contains_ratio(&BigInt::from(7), &BigInt::from(1)));
        let q = a.mul(&b.conj());
        // (2+3i)(-1-5i) = 13 - 13i
        assert!(q.re.contains_ratio(&BigInt::from(13), &BigInt::from(1)));
        assert!(q.im.contains_ratio(&BigInt::from(-13), &BigInt::from(1)));
    }
}
