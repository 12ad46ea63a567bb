//! Canonical sum-of-monomials form for closed-form real constants.
//!
//! A constant is a finite ℚ-linear combination of monomials; a monomial is a
//! product of atoms raised to rational powers. Atoms are treated as
//! multiplicatively independent, so structural identity decides equality.

use super::interval::{self, Interval};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

pub(crate) type Q = BigRational;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Atom {
    Pi,
    /// exp(1); exponents carry exp(r).
    E,
    /// positive integer base (prime after factoring), exponent kept in (0, 1)
    Root(BigInt),
    /// log of a prime
    Log(BigInt),
    /// arctan of a rational in (0, 1)
    Atan(Q),
    /// arcsin of a rational in (0, 1) outside the table
    Asin(Q),
    /// positive irrational non-monomial base, leading coefficient ±1
    Base(Arc<Canon>),
    LogOf(Arc<Canon>),
    AtanOf(Arc<Canon>),
    AsinOf(Arc<Canon>),
    /// exp of an irreducible argument with leading coefficient 1
    ExpOf(Arc<Canon>),
}

pub(crate) type Monomial = Vec<(Atom, Q)>;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Canon {
    pub terms: BTreeMap<Monomial, Q>,
}

fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn bigq(n: BigInt) -> Q {
    Q::from_integer(n)
}

impl Canon {
    pub fn zero() -> Self {
        Canon::default()
    }

    pub fn rational(q: Q) -> Self {
        let mut c = Canon::zero();
        if !q.is_zero() {
            c.terms.insert(Vec::new(), q);
        }
        c
    }

    pub fn atom(a: Atom, e: Q) -> Self {
        let mut c = Canon::zero();
        c.terms.insert(vec![(a, e)], Q::one());
        c
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_rational(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn single_term(&self) -> Option<(&Monomial, &Q)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let v = o.get() + c;
                if v.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add(&self, other: &Canon) -> Canon {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Canon {
        Canon { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }

    pub fn sub(&self, other: &Canon) -> Canon {
        self.add(&other.neg())
    }

    pub fn scale(&self, q: &Q) -> Canon {
        if q.is_zero() {
            return Canon::zero();
        }
        Canon { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect() }
    }

    pub fn mul(&self, other: &Canon) -> Canon {
        let mut r = Canon::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let (f, m, extra) = mul_monomials(ma, mb);
                let coef = ca * cb * f;
                match extra {
                    None => r.add_term(m, coef),
                    Some(x) => {
                        let t = Canon { terms: [(m, coef)].into_iter().collect() }.mul(&x);
                        r = r.add(&t);
                    }
                }
            }
        }
        r
    }

    /// Leading coefficient in canonical order.
    pub fn leading_coeff(&self) -> Option<&Q> {
        self.terms.values().next()
    }
}

/// Multiplies two monomials; returns a rational factor, the product monomial,
/// and an optional extra factor produced by re-expanding integer powers of
/// opaque bases.
fn mul_monomials(a: &Monomial, b: &Monomial) -> (Q, Monomial, Option<Canon>) {
    let mut map: BTreeMap<Atom, Q> = BTreeMap::new();
    for (atom, e) in a.iter().chain(b.iter()) {
        let v = map.entry(atom.clone()).or_insert_with(Q::zero);
        *v += e;
    }
    normalize_monomial(map)
}

fn normalize_monomial(map: BTreeMap<Atom, Q>) -> (Q, Monomial, Option<Canon>) {
    let mut factor = Q::one();
    let mut out = Vec::new();
    let mut extra: Option<Canon> = None;
    for (atom, e) in map {
        if e.is_zero() {
            continue;
        }
        match &atom {
            Atom::Root(p) => {
                let k = e.floor();
                let frac = &e - &k;
                let ki = k.to_integer().to_i32().expect("radical exponent out of range");
                let pq = bigq(p.clone());
                factor *= if ki >= 0 { pq.pow(ki) } else { pq.recip().pow(-ki) };
                if !frac.is_zero() {
                    out.push((atom, frac));
                }
            }
            Atom::Base(s) => {
                let k = e.floor();
                if k.is_positive() {
                    let frac = &e - &k;
                    let ki = k.to_integer().to_u32().expect("power too large");
                    let mut p = Canon::rational(Q::one());
                    for _ in 0..ki {
                        p = p.mul(s);
                    }
                    extra = Some(match extra {
                        None => p,
                        Some(x) => x.mul(&p),
                    });
                    if !frac.is_zero() {
                        out.push((atom, frac));
                    }
                } else {
                    out.push((atom, e));
                }
            }
            _ => out.push((atom, e)),
        }
    }
    (factor, out, extra)
}

// ---------------------------------------------------------------------------
// factoring helpers

pub(crate) fn factor_integer(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    if n <= BigInt::one() {
        return out;
    }
    let mut p = BigInt::from(2);
    let limit = BigInt::from(1_000_000u64);
    while &p * &p <= n && p <= limit {
        let mut k = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            k += 1;
        }
        if k > 0 {
            out.push((p.clone(), k));
        }
        p += if p == BigInt::from(2) { 1 } else { 2 };
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

/// q^r for positive rational q, as a canonical constant.
pub(crate) fn rational_pow(q: &Q, r: &Q) -> Canon {
    assert!(q.is_positive());
    if r.is_integer() {
        let k = r.to_integer().to_i32().expect("exponent too large");
        let v = if k >= 0 { q.pow(k) } else { q.recip().pow(-k) };
        return Canon::rational(v);
    }
    let mut map: BTreeMap<Atom, Q> = BTreeMap::new();
    for (p, k) in factor_integer(q.numer()) {
        *map.entry(Atom::Root(p)).or_insert_with(Q::zero) += r * qi(k as i64);
    }
    for (p, k) in factor_integer(q.denom()) {
        *map.entry(Atom::Root(p)).or_insert_with(Q::zero) -= r * qi(k as i64);
    }
    let (f, m, extra) = normalize_monomial(map);
    debug_assert!(extra.is_none());
    let mut c = Canon::zero();
    c.add_term(m, f);
    c
}

// ---------------------------------------------------------------------------
// enclosures

fn atom_base_interval(atom: &Atom, w: u32) -> Option<Interval> {
    Some(match atom {
        Atom::Pi => interval::pi(w),
        Atom::E => interval::exp_point(&Q::one(), w),
        Atom::Root(p) => Interval::point(bigq(p.clone())),
        Atom::Log(p) => interval::log_point(&bigq(p.clone()), w),
        Atom::Atan(q) => interval::atan_point(q, w),
        Atom::Asin(q) => interval::asin_point(q, w),
        Atom::Base(s) => positive_enclosure(s, w)?,
        Atom::LogOf(s) => interval::log_iv(&positive_enclosure(s, w + 4)?, w)?,
        Atom::AtanOf(s) => interval::atan_iv(&enclose(s, w + 4), w),
        Atom::AsinOf(s) => {
            let mut wp = w + 4;
            loop {
                let iv = enclose(s, wp);
                if let Some(r) = interval::asin_iv(&iv, w) {
                    break r;
                }
                wp += 32;
                if wp > w + 4096 {
                    return None;
                }
            }
        }
        Atom::ExpOf(s) => interval::exp_iv(&enclose(s, w + 4), w),
    })
}

fn positive_enclosure(s: &Canon, w: u32) -> Option<Interval> {
    let mut wp = w;
    loop {
        let iv = enclose(s, wp);
        if iv.lo.is_positive() {
            return Some(iv);
        }
        wp += 32;
        if wp > w + 4096 {
            return None;
        }
    }
}

fn atom_interval(atom: &Atom, e: &Q, w: u32) -> Interval {
    match atom {
        Atom::E => {
            let lo = interval::exp_point(e, w);
            lo
        }
        Atom::Root(p) => interval::pow_rat_point(&bigq(p.clone()), e, w),
        _ => {
            let base = atom_base_interval(atom, w + 8).expect("enclosure of atom failed");
            interval::pow_rat_iv(&base, e, w + 8).expect("power enclosure failed").round(w + 8)
        }
    }
}

/// Encloses a canonical constant with working precision `w` (absolute bits).
pub(crate) fn enclose(c: &Canon, w: u32) -> Interval {
    let mut acc = Interval::point(Q::zero());
    let wp = w + 8;
    for (m, coef) in &c.terms {
        let mut prod = Interval::point(coef.clone());
        for (atom, e) in m {
            let guard = prod.mag_upper().ceil().to_integer().bits() as u32;
            let iv = atom_interval(atom, e, wp + guard);
            prod = prod.mul(&iv).round(wp + guard);
        }
        acc = acc.add(&prod);
    }
    acc.round(wp)
}

// ---------------------------------------------------------------------------
// sign and transcendental constructors

pub(crate) fn sign(c: &Canon, budget: u32) -> Result<Ordering> {
    if c.is_zero() {
        return Ok(Ordering::Equal);
    }
    if let Some(q) = c.as_rational() {
        return Ok(q.cmp(&Q::zero()));
    }
    let mut bits = 16u32;
    loop {
        let iv = enclose(c, bits);
        if iv.lo.is_positive() {
            return Ok(Ordering::Greater);
        }
        if iv.hi.is_negative() {
            return Ok(Ordering::Less);
        }
        if bits >= budget {
            return Err(Error::precision(format!("sign of constant undecided at {budget} bits")));
        }
        bits = (bits * 2).min(budget);
    }
}

/// Splits off the absolute value of the leading coefficient: c = k·c'.
fn primitive(c: &Canon) -> (Q, Canon) {
    let k = c.leading_coeff().expect("primitive of zero").abs();
    (k.clone(), c.scale(&k.recip()))
}

fn atoms_positive(m: &Monomial, budget: u32) -> bool {
    m.iter().all(|(a, e)| match a {
        Atom::LogOf(s) => {
            e.is_integer() && e.to_integer().is_even() || matches!(sign(&s.sub(&Canon::rational(Q::one())), budget), Ok(Ordering::Greater))
        }
        _ => true,
    })
}

pub(crate) fn inv(c: &Canon, budget: u32) -> Result<Canon> {
    if c.is_zero() {
        return Err(Error::DivisionByZero);
    }
    if let Some(q) = c.as_rational() {
        return Ok(Canon::rational(q.recip()));
    }
    if let Some((m, q)) = c.single_term() {
        let map: BTreeMap<Atom, Q> = m.iter().map(|(a, e)| (a.clone(), -e.clone())).collect();
        let (f, mm, extra) = normalize_monomial(map);
        let mut r = Canon::zero();
        r.add_term(mm, f * q.recip());
        return Ok(match extra {
            Some(x) => r.mul(&x),
            None => r,
        });
    }
    // a + b·m with m² rational
    if c.terms.len() == 2 {
        if let Some(a) = c.terms.get(&Vec::new()) {
            let (m, b) = c.terms.iter().find(|(m, _)| !m.is_empty()).unwrap();
            let mm = Canon::atom_monomial(m);
            let sq = mm.mul(&mm);
            if let Some(s) = sq.as_rational() {
                let den = a * a - b * b * s;
                if !den.is_zero() {
                    let conj = Canon::rational(a.clone()).sub(&mm.scale(b));
                    return Ok(conj.scale(&den.recip()));
                }
            }
        }
    }
    let s = sign(c, budget)?;
    let (k, p) = primitive(c);
    let (p, k) = if s == Ordering::Less { (p.neg(), -k) } else { (p, k) };
    Ok(Canon::atom(Atom::Base(Arc::new(p)), qi(-1)).scale(&k.recip()))
}

impl Canon {
    pub(crate) fn atom_monomial(m: &Monomial) -> Canon {
        let mut c = Canon::zero();
        c.add_term(m.clone(), Q::one());
        c
    }
}

pub(crate) fn pow_int(c: &Canon, n: i64, budget: u32) -> Result<Canon> {
    if n == 0 {
        return Ok(Canon::rational(Q::one()));
    }
    if n < 0 {
        let p = pow_int(c, -n, budget)?;
        return inv(&p, budget);
    }
    let mut acc = Canon::rational(Q::one());
    let mut base = c.clone();
    let mut k = n as u64;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc.mul(&base);
        }
        k >>= 1;
        if k > 0 {
            base = base.mul(&base);
        }
    }
    Ok(acc)
}

pub(crate) fn pow_rat(c: &Canon, r: &Q, budget: u32) -> Result<Canon> {
    if r.is_integer() {
        let n = r.to_integer().to_i64().ok_or_else(|| Error::domain("exponent too large"))?;
        return pow_int(c, n, budget);
    }
    if c.is_zero() {
        return if r.is_positive() { Ok(Canon::zero()) } else { Err(Error::DivisionByZero) };
    }
    let s = sign(c, budget)?;
    if s == Ordering::Less {
        if r.denom().is_even() {
            return Err(Error::NegativeRadicand);
        }
        let p = pow_rat(&c.neg(), r, budget)?;
        return Ok(if r.numer().is_odd() { p.neg() } else { p });
    }
    if let Some(q) = c.as_rational() {
        return Ok(rational_pow(&q, r));
    }
    if let Some((m, q)) = c.single_term() {
        if q.is_positive() && atoms_positive(m, budget) {
            let mut map: BTreeMap<Atom, Q> = BTreeMap::new();
            for (a, e) in m {
                map.insert(a.clone(), e * r);
            }
            let (f, mm, extra) = normalize_monomial(map);
            let mut out = Canon::zero();
            out.add_term(mm, f);
            let out = match extra {
                Some(x) => out.mul(&x),
                None => out,
            };
            return Ok(out.mul(&rational_pow(q, r)));
        }
    }
    let (k, p) = primitive(c);
    let base = Canon::atom(Atom::Base(Arc::new(p)), Q::one());
    // route through normalize_monomial so that integer parts expand
    let map: BTreeMap<Atom, Q> = base.terms.keys().next().unwrap().iter().map(|(a, _)| (a.clone(), r.clone())).collect();
    let (f, mm, extra) = normalize_monomial(map);
    let mut out = Canon::zero();
    out.add_term(mm, f);
    let out = match extra {
        Some(x) => out.mul(&x),
        None => out,
    };
    Ok(out.mul(&rational_pow(&k, r)))
}

pub(crate) fn log(c: &Canon, budget: u32) -> Result<Canon> {
    if sign(c, budget)? != Ordering::Greater {
        return Err(Error::domain("log of a non-positive constant"));
    }
    if let Some(q) = c.as_rational() {
        let mut out = Canon::zero();
        for (p, k) in factor_integer(q.numer()) {
            out.add_term(vec![(Atom::Log(p), Q::one())], qi(k as i64));
        }
        for (p, k) in factor_integer(q.denom()) {
            out.add_term(vec![(Atom::Log(p), Q::one())], qi(-(k as i64)));
        }
        return Ok(out);
    }
    if let Some((m, q)) = c.single_term() {
        if q.is_positive() && m.iter().all(|(a, _)| !matches!(a, Atom::LogOf(_))) {
            let mut out = log(&Canon::rational(q.clone()), budget)?;
            for (a, e) in m {
                let la = match a {
                    Atom::E => Canon::rational(Q::one()),
                    Atom::Root(p) => log(&Canon::rational(bigq(p.clone())), budget)?,
                    Atom::Base(s) => Canon::atom(Atom::LogOf(s.clone()), Q::one()),
                    Atom::ExpOf(s) => (**s).clone(),
                    other => {
                        let inner = Canon::atom(other.clone(), Q::one());
                        Canon::atom(Atom::LogOf(Arc::new(inner)), Q::one())
                    }
                };
                out = out.add(&la.scale(e));
            }
            return Ok(out);
        }
    }
    let (k, p) = primitive(c);
    let lk = log(&Canon::rational(k), budget)?;
    Ok(lk.add(&Canon::atom(Atom::LogOf(Arc::new(p)), Q::one())))
}

pub(crate) fn exp(c: &Canon, budget: u32) -> Result<Canon> {
    let mut out = Canon::rational(Q::one());
    let mut rest = Canon::zero();
    for (m, k) in &c.terms {
        if m.is_empty() {
            out = out.mul(&Canon::atom(Atom::E, k.clone()));
        } else if m.len() == 1 && m[0].1.is_one() {
            match &m[0].0 {
                Atom::Log(p) => out = out.mul(&rational_pow(&bigq(p.clone()), k)),
                Atom::LogOf(s) => out = out.mul(&pow_rat(s, k, budget)?),
                _ => rest.add_term(m.clone(), k.clone()),
            }
        } else {
            rest.add_term(m.clone(), k.clone());
        }
    }
    if !rest.is_zero() {
        let lead = rest.leading_coeff().unwrap().clone();
        let p = rest.scale(&lead.recip());
        out = out.mul(&Canon::atom(Atom::ExpOf(Arc::new(p)), lead));
    }
    Ok(out)
}

fn pi_times(q: Q) -> Canon {
    Canon::atom(Atom::Pi, Q::one()).scale(&q)
}

fn frac(a: i64, b: i64) -> Q {
    Q::new(BigInt::from(a), BigInt::from(b))
}

pub(crate) fn atan(c: &Canon, budget: u32) -> Result<Canon> {
    if c.is_zero() {
        return Ok(Canon::zero());
    }
    if let Some(q) = c.as_rational() {
        if q.is_negative() {
            return Ok(atan(&Canon::rational(-q), budget)?.neg());
        }
        if q.is_one() {
            return Ok(pi_times(frac(1, 4)));
        }
        if q > Q::one() {
            let inner = atan(&Canon::rational(q.recip()), budget)?;
            return Ok(pi_times(frac(1, 2)).sub(&inner));
        }
        return Ok(Canon::atom(Atom::Atan(q), Q::one()));
    }
    if sign(c, budget)? == Ordering::Less {
        return Ok(atan(&c.neg(), budget)?.neg());
    }
    let sqrt3 = rational_pow(&qi(3), &frac(1, 2));
    if *c == sqrt3 {
        return Ok(pi_times(frac(1, 3)));
    }
    if *c == sqrt3.scale(&frac(1, 3)) {
        return Ok(pi_times(frac(1, 6)));
    }
    Ok(Canon::atom(Atom::AtanOf(Arc::new(c.clone())), Q::one()))
}

pub(crate) fn asin(c: &Canon, budget: u32) -> Result<Canon> {
    if c.is_zero() {
        return Ok(Canon::zero());
    }
    if let Some(q) = c.as_rational() {
        if q.abs() > Q::one() {
            return Err(Error::domain("arcsin argument outside [-1, 1]"));
        }
        if q.is_negative() {
            return Ok(asin(&Canon::rational(-q), budget)?.neg());
        }
        if q.is_one() {
            return Ok(pi_times(frac(1, 2)));
        }
        if q == frac(1, 2) {
            return Ok(pi_times(frac(1, 6)));
        }
        return Ok(Canon::atom(Atom::Asin(q), Q::one()));
    }
    let s = sign(c, budget)?;
    if s == Ordering::Less {
        return Ok(asin(&c.neg(), budget)?.neg());
    }
    if sign(&c.sub(&Canon::rational(Q::one())), budget)? == Ordering::Greater {
        return Err(Error::domain("arcsin argument outside [-1, 1]"));
    }
    let half_sqrt2 = rational_pow(&qi(2), &frac(1, 2)).scale(&frac(1, 2));
    if *c == half_sqrt2 {
        return Ok(pi_times(frac(1, 4)));
    }
    let half_sqrt3 = rational_pow(&qi(3), &frac(1, 2)).scale(&frac(1, 2));
    if *c == half_sqrt3 {
        return Ok(pi_times(frac(1, 3)));
    }
    Ok(Canon::atom(Atom::AsinOf(Arc::new(c.clone())), Q::one()))
}

// ---------------------------------------------------------------------------
// rendering

pub(crate) fn render_q(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn pow_suffix(e: &Q) -> String {
    if e.is_one() {
        String::new()
    } else if e.is_integer() && e.is_positive() {
        format!("^{}", e.numer())
    } else {
        format!("^({})", render_q(e))
    }
}

fn render_atom(a: &Atom, e: &Q) -> String {
    match a {
        Atom::Pi => format!("pi{}", pow_suffix(e)),
        Atom::E => format!("exp({})", render_q(e)),
        Atom::Root(p) => {
            if *e == frac(1, 2) {
                format!("sqrt({p})")
            } else {
                format!("{p}^({})", render_q(e))
            }
        }
        Atom::Log(p) => format!("log({p}){}", pow_suffix(e)),
        Atom::Atan(q) => format!("arctan({}){}", render_q(q), pow_suffix(e)),
        Atom::Asin(q) => format!("arcsin({}){}", render_q(q), pow_suffix(e)),
        Atom::Base(s) => {
            if *e == frac(1, 2) {
                format!("sqrt({})", render(s))
            } else {
                format!("({}){}", render(s), if e.is_one() { String::new() } else { format!("^({})", render_q(e)) })
            }
        }
        Atom::LogOf(s) => format!("log({}){}", render(s), pow_suffix(e)),
        Atom::AtanOf(s) => format!("arctan({}){}", render(s), pow_suffix(e)),
        Atom::AsinOf(s) => format!("arcsin({}){}", render(s), pow_suffix(e)),
        Atom::ExpOf(s) => {
            if e.is_one() {
                format!("exp({})", render(s))
            } else {
                format!("exp({})^({})", render(s), render_q(e))
            }
        }
    }
}

fn render_term(m: &Monomial, c: &Q) -> String {
    if m.is_empty() {
        return render_q(c);
    }
    let mut num = Vec::new();
    let mut den = Vec::new();
    for (a, e) in m.iter() {
        if e.is_negative() {
            den.push(render_atom(a, &-e.clone()));
        } else {
            num.push(render_atom(a, e));
        }
    }
    let n = c.numer();
    let d = c.denom();
    let mut s = String::new();
    if n.is_negative() {
        s.push('-');
    }
    let n = n.abs();
    if num.is_empty() {
        s.push_str(&n.to_string());
    } else {
        if !n.is_one() {
            s.push_str(&format!("{n}*"));
        }
        s.push_str(&num.join("*"));
    }
    if !d.is_one() {
        den.insert(0, d.to_string());
    }
    match den.len() {
        0 => {}
        1 => s.push_str(&format!("/{}", den[0])),
        _ => s.push_str(&format!("/({})", den.join("*"))),
    }
    s
}

pub(crate) fn render(c: &Canon) -> String {
    if c.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, q)) in c.terms.iter().enumerate() {
        let t = render_term(m, q);
        if i == 0 {
            out.push_str(&t);
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&t);
        }
    }
    out
}
