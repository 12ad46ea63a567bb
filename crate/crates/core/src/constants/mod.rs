//! Exact closed-form real constants with interval enclosures.

mod canon;
pub mod interval;

use crate::error::{Error, Result};
use canon::Canon;
pub use interval::Interval;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};
use std::sync::{Arc, RwLock};

pub type Q = BigRational;

pub const DEFAULT_BUDGET: u32 = 256;

static BUDGET: AtomicU32 = AtomicU32::new(DEFAULT_BUDGET);

/// Default comparison budget in bits.
pub fn budget() -> u32 {
    BUDGET.load(AtomicOrdering::Relaxed)
}

pub fn set_budget(bits: u32) {
    BUDGET.store(bits.max(16), AtomicOrdering::Relaxed);
}

struct Inner {
    canon: Canon,
    cache: RwLock<Option<Interval>>,
}

/// An exactly represented real number.
#[derive(Clone)]
pub struct RealConstant(Arc<Inner>);

/// Expression tree for constants as written by a user.
#[derive(Clone, Debug, PartialEq)]
pub enum RealExpr {
    Rational(Q),
    Pi,
    Add(Box<RealExpr>, Box<RealExpr>),
    Sub(Box<RealExpr>, Box<RealExpr>),
    Mul(Box<RealExpr>, Box<RealExpr>),
    Div(Box<RealExpr>, Box<RealExpr>),
    Neg(Box<RealExpr>),
    PowRational(Box<RealExpr>, Q),
    Log(Box<RealExpr>),
    Arctan(Box<RealExpr>),
    Arcsin(Box<RealExpr>),
    Exp(Box<RealExpr>),
    Sqrt(Box<RealExpr>),
}

impl RealExpr {
    pub fn normalize(&self) -> Result<RealConstant> {
        use RealExpr::*;
        Ok(match self {
            Rational(q) => RealConstant::from_rational(q.clone()),
            Pi => RealConstant::pi(),
            Add(a, b) => &a.normalize()? + &b.normalize()?,
            Sub(a, b) => &a.normalize()? - &b.normalize()?,
            Mul(a, b) => &a.normalize()? * &b.normalize()?,
            Div(a, b) => a.normalize()?.div(&b.normalize()?)?,
            Neg(a) => -&a.normalize()?,
            PowRational(a, q) => a.normalize()?.pow_rational(q)?,
            Log(a) => a.normalize()?.log()?,
            Arctan(a) => a.normalize()?.atan()?,
            Arcsin(a) => a.normalize()?.asin()?,
            Exp(a) => a.normalize()?.exp()?,
            Sqrt(a) => a.normalize()?.sqrt()?,
        })
    }
}

impl RealConstant {
    fn from_canon(canon: Canon) -> Self {
        let cache = canon.as_rational().map(Interval::point);
        RealConstant(Arc::new(Inner { canon, cache: RwLock::new(cache) }))
    }

    pub fn from_rational(q: Q) -> Self {
        Self::from_canon(Canon::rational(q))
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(Q::from_integer(BigInt::from(n)))
    }

    pub fn from_frac(n: i64, d: i64) -> Self {
        Self::from_rational(Q::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn zero() -> Self {
        Self::from_canon(Canon::zero())
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn pi() -> Self {
        Self::from_canon(Canon::atom(canon::Atom::Pi, Q::one()))
    }

    /// Euler's number exp(1).
    pub fn e() -> Self {
        Self::from_canon(Canon::atom(canon::Atom::E, Q::one()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.canon.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().map(|q| q.is_one()).unwrap_or(false)
    }

    pub fn as_rational(&self) -> Option<Q> {
        self.0.canon.as_rational()
    }

    pub fn is_rational(&self) -> bool {
        self.as_rational().is_some()
    }

    /// Number of canonical terms; used to decide when a coefficient needs parentheses.
    pub fn term_count(&self) -> usize {
        self.0.canon.terms.len()
    }

    /// Structural (not numeric) total order on canonical forms.
    pub fn canon_cmp(&self, other: &Self) -> Ordering {
        self.0.canon.cmp(&other.0.canon)
    }

    pub fn normalize(&self) -> RealConstant {
        self.clone()
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(Self::from_canon(canon::inv(&self.0.canon, budget())?))
    }

    pub fn pow_int(&self, n: i64) -> Result<Self> {
        Ok(Self::from_canon(canon::pow_int(&self.0.canon, n, budget())?))
    }

    pub fn pow_rational(&self, r: &Q) -> Result<Self> {
        Ok(Self::from_canon(canon::pow_rat(&self.0.canon, r, budget())?))
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.pow_rational(&Q::new(BigInt::one(), BigInt::from(2)))
    }

    pub fn log(&self) -> Result<Self> {
        Ok(Self::from_canon(canon::log(&self.0.canon, budget())?))
    }

    pub fn exp(&self) -> Result<Self> {
        Ok(Self::from_canon(canon::exp(&self.0.canon, budget())?))
    }

    pub fn atan(&self) -> Result<Self> {
        Ok(Self::from_canon(canon::atan(&self.0.canon, budget())?))
    }

    pub fn asin(&self) -> Result<Self> {
        Ok(Self::from_canon(canon::asin(&self.0.canon, budget())?))
    }

    pub fn scale(&self, q: &Q) -> Self {
        Self::from_canon(self.0.canon.scale(q))
    }

    pub fn sign(&self) -> Result<Ordering> {
        self.sign_with(budget())
    }

    pub fn sign_with(&self, bits: u32) -> Result<Ordering> {
        if let Some(iv) = self.0.cache.read().unwrap().as_ref() {
            if iv.lo.is_positive() {
                return Ok(Ordering::Greater);
            }
            if iv.hi.is_negative() {
                return Ok(Ordering::Less);
            }
        }
        canon::sign(&self.0.canon, bits)
    }

    pub fn compare(&self, other: &Self, bits: u32) -> Result<Ordering> {
        (self - other).sign_with(bits)
    }

    pub fn cmp_default(&self, other: &Self) -> Result<Ordering> {
        self.compare(other, budget())
    }

    pub fn abs(&self) -> Result<Self> {
        Ok(if self.sign()? == Ordering::Less { -self } else { self.clone() })
    }

    /// Dyadic enclosure of width at most 2^(1-bits)·max(1, |a|).
    pub fn approx(&self, bits: u32) -> Interval {
        let bits = bits.max(1);
        if let Some(iv) = self.0.cache.read().unwrap().as_ref() {
            if width_ok(iv, bits) {
                return iv.to_dyadic(bits + 2);
            }
        }
        let mut w = bits + 8;
        let iv = loop {
            let iv = canon::enclose(&self.0.canon, w);
            if width_ok(&iv, bits) {
                break iv;
            }
            w += 16 + w / 4;
        };
        let mut g = self.0.cache.write().unwrap();
        let merged = match g.as_ref() {
            Some(old) => old.intersect(&iv),
            None => iv,
        };
        *g = Some(merged.clone());
        drop(g);
        merged.to_dyadic(bits + 2)
    }

    pub fn to_f64(&self) -> f64 {
        if let Some(q) = self.as_rational() {
            return q.to_f64().unwrap_or(f64::NAN);
        }
        self.approx(64).mid().to_f64().unwrap_or(f64::NAN)
    }

    /// Rational coordinates of `self` over `basis`, if it lies in their ℚ-span.
    pub fn linear_coords(&self, basis: &[RealConstant]) -> Option<Vec<Q>> {
        let mut keys: Vec<&canon::Monomial> = Vec::new();
        for b in basis.iter().chain(std::iter::once(self)) {
            for m in b.0.canon.terms.keys() {
                if !keys.contains(&m) {
                    keys.push(m);
                }
            }
        }
        let k = basis.len();
        // rows: monomials, columns: basis entries then the target
        let mut rows: Vec<Vec<Q>> = keys
            .iter()
            .map(|m| {
                let mut r: Vec<Q> = basis.iter().map(|b| b.0.canon.terms.get(*m).cloned().unwrap_or_else(Q::zero)).collect();
                r.push(self.0.canon.terms.get(*m).cloned().unwrap_or_else(Q::zero));
                r
            })
            .collect();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..k {
            let Some(p) = (row..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
            rows.swap(row, p);
            let inv = rows[row][col].recip();
            for v in rows[row].iter_mut() {
                *v = &*v * &inv;
            }
            for i in 0..rows.len() {
                if i != row && !rows[i][col].is_zero() {
                    let f = rows[i][col].clone();
                    let pr = rows[row].clone();
                    for (v, pv) in rows[i].iter_mut().zip(pr.iter()) {
                        *v = &*v - &(&f * pv);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        if rows[row..].iter().any(|r| !r[k].is_zero()) {
            return None;
        }
        let mut out = vec![Q::zero(); k];
        for (i, &c) in pivots.iter().enumerate() {
            out[c] = rows[i][k].clone();
        }
        Some(out)
    }

    /// Canonical expression tree.
    pub fn to_expr(&self) -> RealExpr {
        crate::syntax::parse_constant(&self.to_string())
            .expect("canonical rendering must reparse")
            .1
    }
}

fn width_ok(iv: &Interval, bits: u32) -> bool {
    let mag = iv.mag_lower();
    let scale = if mag > Q::one() { mag } else { Q::one() };
    let bound = scale * Q::new(BigInt::from(2), BigInt::one() << bits);
    iv.width() <= bound
}

impl PartialEq for RealConstant {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.canon == other.0.canon
    }
}

impl Eq for RealConstant {}

impl Hash for RealConstant {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.canon.hash(state)
    }
}

impl fmt::Display for RealConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&canon::render(&self.0.canon))
    }
}

impl fmt::Debug for RealConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealConstant({self})")
    }
}

impl From<i64> for RealConstant {
    fn from(n: i64) -> Self {
        RealConstant::from_int(n)
    }
}

impl From<Q> for RealConstant {
    fn from(q: Q) -> Self {
        RealConstant::from_rational(q)
    }
}

impl std::ops::Add for &RealConstant {
    type Output = RealConstant;
    fn add(self, o: &RealConstant) -> RealConstant {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        RealConstant::from_canon(self.0.canon.add(&o.0.canon))
    }
}

impl std::ops::Sub for &RealConstant {
    type Output = RealConstant;
    fn sub(self, o: &RealConstant) -> RealConstant {
        if o.is_zero() {
            return self.clone();
        }
        RealConstant::from_canon(self.0.canon.sub(&o.0.canon))
    }
}

impl std::ops::Mul for &RealConstant {
    type Output = RealConstant;
    fn mul(self, o: &RealConstant) -> RealConstant {
        if self.is_one() {
            return o.clone();
        }
        if o.is_one() {
            return self.clone();
        }
        RealConstant::from_canon(self.0.canon.mul(&o.0.canon))
    }
}

impl std::ops::Neg for &RealConstant {
    type Output = RealConstant;
    fn neg(self) -> RealConstant {
        RealConstant::from_canon(self.0.canon.neg())
    }
}

impl std::ops::Neg for RealConstant {
    type Output = RealConstant;
    fn neg(self) -> RealConstant {
        -&self
    }
}

pub fn render_rational(q: &Q) -> String {
    canon::render_q(q)
}

pub fn sign_to_error(o: Ordering) -> Error {
    Error::Invariant(format!("unexpected sign {o:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn c(s: &str) -> RealConstant {
        crate::syntax::parse_constant(s).unwrap().0
    }

    #[test]
    fn rational_arithmetic() {
        let a = RealConstant::from_frac(1, 3);
        let b = RealConstant::from_frac(1, 6);
        assert_eq!(&a + &b, RealConstant::from_frac(1, 2));
        assert!((&RealConstant::pi() * &RealConstant::zero()).is_zero());
        assert!((&RealConstant::pi() - &RealConstant::pi()).is_zero());
    }

    #[test]
    fn compare_examples() {
        let r = RealConstant::from_frac(22, 7).compare(&RealConstant::pi(), 256).unwrap();
        assert_eq!(r, Ordering::Greater);
        assert_eq!(c("log(1)").compare(&RealConstant::zero(), 256).unwrap(), Ordering::Equal);
        assert_eq!(c("2*arctan(1)").compare(&c("pi/2"), 256).unwrap(), Ordering::Equal);
        assert_eq!(c("arcsin(1)"), c("pi/2"));
        assert_eq!(c("log(6)"), c("log(2) + log(3)"));
        assert_eq!(c("log(exp(1))"), RealConstant::one());
        assert_eq!(c("sqrt(8)"), c("2*sqrt(2)"));
        assert_eq!(c("sqrt(2)*sqrt(2)"), RealConstant::from_int(2));
        assert_eq!(c("1/(1+sqrt(2))"), c("sqrt(2) - 1"));
    }

    #[test]
    fn undecidable_overlap_reports_exhaustion() {
        let a = c("arctan(1/5)*4 - arctan(1/239)");
        let b = c("pi/4");
        assert!(matches!(a.compare(&b, 128), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn approx_examples() {
        let iv = RealConstant::pi().approx(20);
        assert!(iv.lo <= Q::new(BigInt::from(31415927), BigInt::from(10000000)));
        assert!(iv.hi >= Q::new(BigInt::from(31415926), BigInt::from(10000000)));
        assert!(iv.width() <= Q::new(BigInt::from(4), BigInt::one() << 19));
        assert_eq!(RealConstant::zero().approx(7), Interval::point(Q::zero()));
        let h = RealConstant::from_frac(1, 2).approx(4);
        assert_eq!(h, Interval::point(Q::new(BigInt::one(), BigInt::from(2))));
    }

    #[test]
    fn fractional_power_of_a_log() {
        assert_eq!(c("log(pi)^(-3/2)"), c("1/log(pi)^(3/2)"));
        assert_eq!(c("log(pi)^(3/2)"), c("log(pi)*sqrt(log(pi))"));
    }

    #[test]
    fn render_roundtrip() {
        for s in ["3*pi/4", "sqrt(2) - 1", "log(2) + pi^2", "arctan(1/3)", "exp(1/2)", "(1 + pi)^(-1)", "sqrt(1 + sqrt(2))", "-2*log(3)/(5*pi)", "1/(pi*sqrt(2))", "log(pi)^(-3/2)"] {
            let v = c(s);
            assert_eq!(c(&v.to_string()), v, "{s} -> {v}");
        }
        assert_eq!(c("2/pi").to_string(), "2/pi");
        assert_eq!(c("log(3)/(5*pi)").to_string(), "log(3)/(5*pi)");
    }
}
