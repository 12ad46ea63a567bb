//! Dyadic interval enclosures and rigorous elementary functions on them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::sync::RwLock;

type Q = BigRational;

/// Closed interval `[lo, hi]` with rational (usually dyadic) endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Q,
    pub hi: Q,
}

fn pow2(w: u32) -> BigInt {
    BigInt::one() << w
}

pub fn floor_dyadic(x: &Q, w: u32) -> Q {
    if x.denom().is_one() {
        return x.clone();
    }
    let s = x * Q::from_integer(pow2(w));
    Q::new(s.floor().to_integer(), pow2(w))
}

pub fn ceil_dyadic(x: &Q, w: u32) -> Q {
    if x.denom().is_one() {
        return x.clone();
    }
    let s = x * Q::from_integer(pow2(w));
    Q::new(s.ceil().to_integer(), pow2(w))
}

fn is_dyadic(x: &Q) -> bool {
    let d = x.denom();
    (d & (d - BigInt::one())).is_zero()
}

impl Interval {
    pub fn point(q: Q) -> Self {
        Interval { lo: q.clone(), hi: q }
    }

    pub fn new(lo: Q, hi: Q) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    /// Outward rounding to dyadic endpoints with `w` fractional bits.
    pub fn round(&self, w: u32) -> Self {
        Interval { lo: floor_dyadic(&self.lo, w), hi: ceil_dyadic(&self.hi, w) }
    }

    /// Outward rounding that leaves dyadic endpoints untouched.
    pub fn to_dyadic(&self, w: u32) -> Self {
        let lo = if is_dyadic(&self.lo) { self.lo.clone() } else { floor_dyadic(&self.lo, w) };
        let hi = if is_dyadic(&self.hi) { self.hi.clone() } else { ceil_dyadic(&self.hi, w) };
        Interval { lo, hi }
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Q {
        (&self.lo + &self.hi) / Q::from_integer(BigInt::from(2))
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn contains(&self, q: &Q) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    /// Lower bound of `|x|` over the interval.
    pub fn mag_lower(&self) -> Q {
        if self.contains_zero() {
            Q::zero()
        } else if self.lo.is_positive() {
            self.lo.clone()
        } else {
            -self.hi.clone()
        }
    }

    pub fn mag_upper(&self) -> Q {
        let a = self.lo.abs();
        let b = self.hi.abs();
        if a > b {
            a
        } else {
            b
        }
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let lo = if self.lo > other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi < other.hi { self.hi.clone() } else { other.hi.clone() };
        if lo <= hi {
            Interval { lo, hi }
        } else {
            // disjoint enclosures can only come from a bug upstream
            self.clone()
        }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let mut lo = c[0].clone();
        let mut hi = c[0].clone();
        for v in &c[1..] {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        Interval { lo, hi }
    }

    pub fn scale(&self, q: &Q) -> Interval {
        if q.is_negative() {
            Interval { lo: &self.hi * q, hi: &self.lo * q }
        } else {
            Interval { lo: &self.lo * q, hi: &self.hi * q }
        }
    }

    pub fn recip(&self) -> Option<Interval> {
        if self.contains_zero() {
            return None;
        }
        Some(Interval { lo: self.hi.recip(), hi: self.lo.recip() })
    }

    pub fn pow_int(&self, n: i64, w: u32) -> Option<Interval> {
        if n == 0 {
            return Some(Interval::point(Q::one()));
        }
        let mut acc = Interval::point(Q::one());
        let mut base = self.clone();
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base).round(w);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base).round(w);
            }
        }
        if n % 2 == 0 && self.contains_zero() {
            acc.lo = Q::zero();
        }
        if n < 0 {
            acc.recip().map(|r| r.round(w))
        } else {
            Some(acc)
        }
    }
}

fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn eps(w: u32) -> Q {
    Q::new(BigInt::one(), pow2(w))
}

/// Encloses `exp(x)` for a rational point.
pub fn exp_point(x: &Q, w: u32) -> Interval {
    if x.is_zero() {
        return Interval::point(Q::one());
    }
    let half = Q::new(BigInt::one(), BigInt::from(2));
    let mut y = x.clone();
    let mut m = 0u32;
    while y.abs() > half {
        y /= q(2);
        m += 1;
    }
    let mag = x.abs().ceil().to_integer().to_u64().unwrap_or(u64::MAX / 4).min(1 << 20) as u32;
    let wp = w + 2 * m + 16 + 2 * mag;
    let tiny = eps(wp);
    let mut sum = Interval::point(Q::one());
    let mut term = Interval::point(Q::one());
    let mut n = 1i64;
    loop {
        term = term.scale(&y).scale(&Q::new(BigInt::one(), BigInt::from(n))).round(wp);
        sum = sum.add(&term);
        if term.mag_upper() <= tiny {
            break;
        }
        n += 1;
    }
    let t = term.mag_upper() + tiny;
    sum = Interval { lo: sum.lo - &t, hi: sum.hi + &t }.round(wp);
    for _ in 0..m {
        sum = sum.mul(&sum).round(wp);
    }
    if sum.lo.is_negative() {
        sum.lo = Q::zero();
    }
    sum
}

pub fn exp_iv(x: &Interval, w: u32) -> Interval {
    let lo = exp_point(&x.lo, w).lo;
    let hi = exp_point(&x.hi, w).hi;
    Interval { lo, hi }
}

fn atanh_small(z: &Q, wp: u32) -> Interval {
    // z in [0, 1/3]
    let tiny = eps(wp);
    let z2 = z * z;
    let mut pw = Interval::point(z.clone());
    let mut sum = Interval::point(Q::zero());
    let mut k = 1i64;
    loop {
        let term = pw.scale(&Q::new(BigInt::one(), BigInt::from(k))).round(wp);
        sum = sum.add(&term);
        if term.mag_upper() <= tiny {
            break;
        }
        pw = pw.scale(&z2).round(wp);
        k += 2;
    }
    let t = pw.mag_upper() * q(2) + &tiny;
    Interval { lo: sum.lo - &t, hi: sum.hi + &t }
}

static LN2: RwLock<Option<(u32, Interval)>> = RwLock::new(None);
static PI: RwLock<Option<(u32, Interval)>> = RwLock::new(None);

fn cached(cell: &RwLock<Option<(u32, Interval)>>, w: u32, f: impl FnOnce(u32) -> Interval) -> Interval {
    if let Some((cw, iv)) = cell.read().unwrap().as_ref() {
        if *cw >= w {
            return iv.clone();
        }
    }
    let iv = f(w);
    let mut g = cell.write().unwrap();
    let keep = matches!(g.as_ref(), Some((cw, _)) if *cw >= w);
    if !keep {
        *g = Some((w, iv.clone()));
    }
    iv
}

pub fn ln2(w: u32) -> Interval {
    cached(&LN2, w, |w| {
        let wp = w + 8;
        atanh_small(&Q::new(BigInt::one(), BigInt::from(3)), wp).scale(&q(2)).round(wp)
    })
}

/// Encloses `log(x)` for a positive rational point.
pub fn log_point(x: &Q, w: u32) -> Interval {
    assert!(x.is_positive(), "log of non-positive rational");
    if x.is_one() {
        return Interval::point(Q::zero());
    }
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    let mut k = nb - db;
    let two_k = |k: i64| {
        if k >= 0 {
            Q::from_integer(pow2(k as u32))
        } else {
            Q::new(BigInt::one(), pow2((-k) as u32))
        }
    };
    let mut m = x / two_k(k);
    while m < Q::one() {
        k -= 1;
        m = x / two_k(k);
    }
    while m >= q(2) {
        k += 1;
        m = x / two_k(k);
    }
    let kb = 64 - (k.unsigned_abs()).leading_zeros();
    let wp = w + 10 + kb;
    let z = (&m - Q::one()) / (&m + Q::one());
    let lm = atanh_small(&z, wp).scale(&q(2));
    let l2 = ln2(wp).scale(&q(k));
    l2.add(&lm).round(wp)
}

pub fn log_iv(x: &Interval, w: u32) -> Option<Interval> {
    if !x.lo.is_positive() {
        return None;
    }
    Some(Interval { lo: log_point(&x.lo, w).lo, hi: log_point(&x.hi, w).hi })
}

fn atan_taylor(x: &Q, wp: u32) -> Interval {
    // |x| <= 1/2
    let tiny = eps(wp);
    let x2 = x * x;
    let mut pw = Interval::point(x.clone());
    let mut sum = Interval::point(Q::zero());
    let mut k = 1i64;
    let mut sign = 1i64;
    loop {
        let term = pw.scale(&Q::new(BigInt::from(sign), BigInt::from(k))).round(wp);
        sum = sum.add(&term);
        pw = pw.scale(&x2).round(wp);
        k += 2;
        sign = -sign;
        if pw.mag_upper() <= tiny {
            break;
        }
    }
    let t = pw.mag_upper() + &tiny;
    Interval { lo: sum.lo - &t, hi: sum.hi + &t }
}

pub fn pi(w: u32) -> Interval {
    cached(&PI, w, |w| {
        let wp = w + 10;
        let a = atan_taylor(&Q::new(BigInt::one(), BigInt::from(5)), wp).scale(&q(16));
        let b = atan_taylor(&Q::new(BigInt::one(), BigInt::from(239)), wp).scale(&q(4));
        a.sub(&b).round(wp)
    })
}

/// Encloses `arctan(x)` for a rational point.
pub fn atan_point(x: &Q, w: u32) -> Interval {
    if x.is_zero() {
        return Interval::point(Q::zero());
    }
    if x.is_negative() {
        return atan_point(&-x.clone(), w).neg();
    }
    let wp = w + 8;
    let half = Q::new(BigInt::one(), BigInt::from(2));
    if *x > Q::one() {
        let inner = atan_point(&x.recip(), wp);
        return pi(wp).scale(&half).sub(&inner).round(wp);
    }
    if *x > half {
        let y = (x - Q::one()) / (x + Q::one());
        let quarter = Q::new(BigInt::one(), BigInt::from(4));
        return pi(wp).scale(&quarter).add(&atan_taylor(&y, wp)).round(wp);
    }
    atan_taylor(x, wp).round(wp)
}

pub fn atan_iv(x: &Interval, w: u32) -> Interval {
    Interval { lo: atan_point(&x.lo, w).lo, hi: atan_point(&x.hi, w).hi }
}

/// Encloses the real `n`-th root of a non-negative rational point.
pub fn root_point(x: &Q, n: u32, w: u32) -> Interval {
    assert!(!x.is_negative());
    if n == 1 {
        return Interval::point(x.clone());
    }
    let scale = Q::from_integer(pow2(n * w));
    let s = x * scale;
    let lo_i = s.floor().to_integer();
    let hi_i = s.ceil().to_integer();
    let lo = lo_i.nth_root(n);
    let mut hi = hi_i.nth_root(n);
    if hi.pow(n) != hi_i {
        hi += 1;
    }
    Interval { lo: Q::new(lo, pow2(w)), hi: Q::new(hi, pow2(w)) }
}

/// Encloses `x^r` for positive rational point x.
pub fn pow_rat_point(x: &Q, r: &Q, w: u32) -> Interval {
    let a = r.numer().to_i64().expect("exponent numerator too large");
    let b = r.denom().to_u32().expect("exponent denominator too large");
    let xa = if a >= 0 { x.pow(a as i32) } else { x.recip().pow((-a) as i32) };
    let mag = xa.abs().ceil().to_integer().bits() as u32;
    root_point(&xa, b, w + mag + 4)
}

/// Encloses `x^r` for an interval `x`; positivity is required unless `r` is an integer.
pub fn pow_rat_iv(x: &Interval, r: &Q, w: u32) -> Option<Interval> {
    if r.is_integer() {
        let n = r.to_integer().to_i64()?;
        return x.pow_int(n, w);
    }
    if !x.lo.is_positive() {
        if x.lo.is_zero() && r.is_positive() {
            let hi = pow_rat_point(&x.hi, r, w).hi;
            return Some(Interval { lo: Q::zero(), hi });
        }
        return None;
    }
    if r.is_positive() {
        Some(Interval { lo: pow_rat_point(&x.lo, r, w).lo, hi: pow_rat_point(&x.hi, r, w).hi })
    } else {
        Some(Interval { lo: pow_rat_point(&x.hi, r, w).lo, hi: pow_rat_point(&x.lo, r, w).hi })
    }
}

/// Encloses `arcsin(x)` for a rational point in [-1, 1].
pub fn asin_point(x: &Q, w: u32) -> Interval {
    if x.is_negative() {
        return asin_point(&-x.clone(), w).neg();
    }
    let wp = w + 12;
    if x.is_one() {
        return pi(wp).scale(&Q::new(BigInt::one(), BigInt::from(2))).round(wp);
    }
    if x.is_zero() {
        return Interval::point(Q::zero());
    }
    let s = root_point(&(Q::one() - x * x), 2, wp + 4);
    let y = Interval { lo: x / &s.hi, hi: x / &s.lo };
    atan_iv(&y.round(wp + 4), wp).round(wp)
}

pub fn asin_iv(x: &Interval, w: u32) -> Option<Interval> {
    let one = Q::one();
    if x.lo < -one.clone() || x.hi > one {
        return None;
    }
    Some(Interval { lo: asin_point(&x.lo, w).lo, hi: asin_point(&x.hi, w).hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(iv: &Interval) -> (f64, f64) {
        (iv.lo.to_f64().unwrap(), iv.hi.to_f64().unwrap())
    }

    #[test]
    fn pi_brackets_known_digits() {
        let iv = pi(80);
        let (lo, hi) = f(&iv);
        assert!(lo <= std::f64::consts::PI + 1e-15 && hi >= std::f64::consts::PI - 1e-15);
        assert!(iv.width() < Q::new(BigInt::one(), pow2(70)));
    }

    #[test]
    fn elementary_points_match_floats() {
        let cases: Vec<(Interval, f64)> = vec![
            (exp_point(&q(1), 60), std::f64::consts::E),
            (exp_point(&q(-3), 60), (-3f64).exp()),
            (log_point(&q(10), 60), 10f64.ln()),
            (log_point(&Q::new(BigInt::one(), BigInt::from(7)), 60), (1.0f64 / 7.0).ln()),
            (atan_point(&q(3), 60), 3f64.atan()),
            (atan_point(&Q::new(BigInt::from(3), BigInt::from(4)), 60), 0.75f64.atan()),
            (asin_point(&Q::new(BigInt::from(1), BigInt::from(3)), 60), (1.0f64 / 3.0).asin()),
            (root_point(&q(2), 2, 60), 2f64.sqrt()),
            (pow_rat_point(&q(5), &Q::new(BigInt::from(-2), BigInt::from(3)), 60), 5f64.powf(-2.0 / 3.0)),
        ];
        for (iv, x) in cases {
            let (lo, hi) = f(&iv);
            assert!(lo <= x + 1e-14 && x - 1e-14 <= hi, "{lo} {hi} {x}");
            assert!(hi - lo < 1e-12);
        }
    }
}
