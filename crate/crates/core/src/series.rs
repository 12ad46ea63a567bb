//! Generalized power series Σ a_γ t^γ with finitely many known terms.

use crate::constants::{render_rational, RealConstant, Q};
use crate::error::{Error, Result};
use crate::exponents::{Exponent, ExponentGroup, Group};
use crate::syntax::{self, Ast};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

pub const DEFAULT_OMEGA: i64 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Precision {
    Exact,
    /// every term with exponent below the bound is present
    KnownBelow(Exponent),
}

impl Precision {
    pub fn bound(&self) -> Option<&Exponent> {
        match self {
            Precision::Exact => None,
            Precision::KnownBelow(w) => Some(w),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Precision::Exact)
    }

    pub fn min(a: &Precision, b: &Precision) -> Precision {
        match (a, b) {
            (Precision::Exact, p) | (p, Precision::Exact) => p.clone(),
            (Precision::KnownBelow(x), Precision::KnownBelow(y)) => Precision::KnownBelow(Exponent::min(x, y)),
        }
    }

    fn shifted(&self, by: &Exponent) -> Precision {
        match self {
            Precision::Exact => Precision::Exact,
            Precision::KnownBelow(w) => Precision::KnownBelow(w.add(by)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StandardPart {
    Finite(RealConstant),
    Infinite,
}

#[derive(Clone)]
pub struct Series {
    group: Group,
    terms: Vec<(Exponent, RealConstant)>,
    prec: Precision,
}

pub fn default_target(g: &Group) -> Exponent {
    Exponent::from_int(g, DEFAULT_OMEGA)
}

/// Exponent group and working precision shared by a computation.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub group: Group,
    pub target: Exponent,
}

impl Ctx {
    pub fn new(group: Group, omega: Q) -> Self {
        let target = Exponent::from_rational(&group, omega);
        Ctx { group, target }
    }

    pub fn rational() -> Self {
        let g = ExponentGroup::rational();
        Ctx { target: default_target(&g), group: g }
    }

    pub fn with_group(group: &Group) -> Self {
        Ctx { target: default_target(group), group: group.clone() }
    }

    pub fn series(&self, src: &str) -> Result<Series> {
        Series::parse(src, &self.group, &self.target)
    }

    pub fn int(&self, n: i64) -> Series {
        Series::from_int(&self.group, n)
    }

    pub fn exp(&self, q: Q) -> Exponent {
        Exponent::from_rational(&self.group, q)
    }
}

impl Series {
    pub fn zero(g: &Group) -> Self {
        Series { group: g.clone(), terms: Vec::new(), prec: Precision::Exact }
    }

    pub fn constant(g: &Group, c: RealConstant) -> Self {
        Self::monomial(Exponent::zero(g), c)
    }

    pub fn rational(g: &Group, q: Q) -> Self {
        Self::constant(g, RealConstant::from_rational(q))
    }

    pub fn from_int(g: &Group, n: i64) -> Self {
        Self::constant(g, RealConstant::from_int(n))
    }

    pub fn one(g: &Group) -> Self {
        Self::from_int(g, 1)
    }

    pub fn t(g: &Group) -> Self {
        Self::monomial(Exponent::from_int(g, 1), RealConstant::one())
    }

    /// t^q for a rational q.
    pub fn t_pow(g: &Group, q: Q) -> Self {
        Self::monomial(Exponent::from_rational(g, q), RealConstant::one())
    }

    pub fn monomial(e: Exponent, c: RealConstant) -> Self {
        let group = e.group().clone();
        let terms = if c.is_zero() { Vec::new() } else { vec![(e, c)] };
        Series { group, terms, prec: Precision::Exact }
    }

    /// O(t^w): nothing known at or above w.
    pub fn big_o(w: Exponent) -> Self {
        Series { group: w.group().clone(), terms: Vec::new(), prec: Precision::KnownBelow(w) }
    }

    /// Builds from arbitrary terms; combines duplicates, drops zeros and terms beyond precision.
    pub fn from_terms(g: &Group, terms: Vec<(Exponent, RealConstant)>, prec: Precision) -> Self {
        let mut map: BTreeMap<Exponent, RealConstant> = BTreeMap::new();
        for (e, c) in terms {
            if let Some(w) = prec.bound() {
                if e >= *w {
                    continue;
                }
            }
            let entry = map.entry(e).or_insert_with(RealConstant::zero);
            *entry = &*entry + &c;
        }
        let terms = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Series { group: g.clone(), terms, prec }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn terms(&self) -> &[(Exponent, RealConstant)] {
        &self.terms
    }

    pub fn precision(&self) -> &Precision {
        &self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_exact()
    }

    /// Exactly zero (not merely unknown).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.prec.is_exact()
    }

    pub fn has_known_terms(&self) -> bool {
        !self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<(&Exponent, &RealConstant)> {
        self.terms.first().map(|(e, c)| (e, c))
    }

    pub fn max_exponent(&self) -> Option<&Exponent> {
        self.terms.last().map(|(e, _)| e)
    }

    /// ord(f).
    pub fn ord(&self) -> Result<Exponent> {
        match (self.terms.first(), &self.prec) {
            (Some((e, _)), _) => Ok(e.clone()),
            (None, Precision::Exact) => Err(Error::DivisionByZero),
            (None, Precision::KnownBelow(w)) => Err(Error::precision(format!("no term known below t^{w}"))),
        }
    }

    /// A lower bound for the valuation: ord if known, the precision bound otherwise.
    fn lo(&self) -> Option<Exponent> {
        match (self.terms.first(), &self.prec) {
            (Some((e, _)), _) => Some(e.clone()),
            (None, Precision::KnownBelow(w)) => Some(w.clone()),
            (None, Precision::Exact) => None,
        }
    }

    /// The constant coefficient (exponent 0).
    pub fn coeff_at(&self, e: &Exponent) -> RealConstant {
        self.terms.iter().find(|(x, _)| x == e).map(|(_, c)| c.clone()).unwrap_or_else(RealConstant::zero)
    }

    pub fn as_constant(&self) -> Option<RealConstant> {
        if !self.is_exact() {
            return None;
        }
        match self.terms.as_slice() {
            [] => Some(RealConstant::zero()),
            [(e, c)] if e.is_zero() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<Q> {
        self.as_constant().and_then(|c| c.as_rational())
    }

    pub fn is_monomial(&self) -> bool {
        self.is_exact() && self.terms.len() == 1
    }

    pub fn truncate(&self, w: &Exponent) -> Series {
        if self.terms.iter().all(|(e, _)| e < w) {
            let prec = match &self.prec {
                Precision::Exact => Precision::Exact,
                p => Precision::min(p, &Precision::KnownBelow(w.clone())),
            };
            return Series { group: self.group.clone(), terms: self.terms.clone(), prec };
        }
        let terms = self.terms.iter().filter(|(e, _)| e < w).cloned().collect();
        let prec = Precision::min(&self.prec, &Precision::KnownBelow(w.clone()));
        Series { group: self.group.clone(), terms, prec }
    }

    /// Drops known terms at or above the current precision bound.
    fn clip(mut self) -> Series {
        if let Some(w) = self.prec.bound().cloned() {
            self.terms.retain(|(e, _)| *e < w);
        }
        self
    }

    pub fn add(&self, o: &Series) -> Series {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Series::from_terms(&self.group, terms, Precision::min(&self.prec, &o.prec))
    }

    pub fn neg(&self) -> Series {
        Series {
            group: self.group.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
            prec: self.prec.clone(),
        }
    }

    pub fn sub(&self, o: &Series) -> Series {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &RealConstant) -> Series {
        if c.is_zero() {
            return Series::zero(&self.group);
        }
        Series {
            group: self.group.clone(),
            terms: self.terms.iter().map(|(e, a)| (e.clone(), a * c)).collect(),
            prec: self.prec.clone(),
        }
    }

    pub fn scale_q(&self, q: &Q) -> Series {
        self.scale(&RealConstant::from_rational(q.clone()))
    }

    /// Multiplication by t^e.
    pub fn shift(&self, e: &Exponent) -> Series {
        Series {
            group: self.group.clone(),
            terms: self.terms.iter().map(|(x, c)| (x.add(e), c.clone())).collect(),
            prec: self.prec.shifted(e),
        }
    }

    pub fn mul(&self, o: &Series) -> Series {
        if self.is_zero() || o.is_zero() {
            return Series::zero(&self.group);
        }
        let prec = match (&self.prec, &o.prec) {
            (Precision::Exact, Precision::Exact) => Precision::Exact,
            (Precision::KnownBelow(w), Precision::Exact) => Precision::KnownBelow(w.add(&o.lo().unwrap())),
            (Precision::Exact, Precision::KnownBelow(w)) => Precision::KnownBelow(w.add(&self.lo().unwrap())),
            (Precision::KnownBelow(wf), Precision::KnownBelow(wg)) => {
                let a = wf.add(&o.lo().unwrap());
                let b = wg.add(&self.lo().unwrap());
                Precision::KnownBelow(Exponent::min(&a, &b))
            }
        };
        let mut terms = Vec::with_capacity(self.terms.len() * o.terms.len());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e = e1.add(e2);
                if let Some(w) = prec.bound() {
                    if e >= *w {
                        continue;
                    }
                }
                terms.push((e, c1 * c2));
            }
        }
        Series::from_terms(&self.group, terms, prec)
    }

    fn mul_trunc(&self, o: &Series, w: &Exponent) -> Series {
        self.mul(o).truncate(w)
    }

    /// Leading monomial a·t^γ and the infinitesimal h with f = a t^γ (1 + h).
    fn unit_split(&self) -> Result<(Exponent, RealConstant, Series)> {
        let (g, a) = match self.leading() {
            Some((g, a)) => (g.clone(), a.clone()),
            None => return Err(self.ord().unwrap_err()),
        };
        let inv_a = a.inv()?;
        let h = self.shift(&g.neg()).scale(&inv_a).sub(&Series::one(&self.group));
        Ok((g, a, h))
    }

    /// Σ_k coeffs(k) h^k for infinitesimal h, truncated below w.
    fn compose_infinitesimal(h: &Series, w: &Exponent, mut coeff: impl FnMut(usize) -> Result<RealConstant>) -> Result<Series> {
        let g = h.group.clone();
        let mut sum = Series::constant(&g, coeff(0)?).truncate(w);
        if h.is_zero() {
            return Ok(sum);
        }
        let Some(delta) = h.lo() else { return Ok(sum) };
        if !delta.is_positive() {
            return Err(Error::Invariant("expansion point is not infinitesimal".into()));
        }
        let mut pw = Series::one(&g);
        let mut k = 0usize;
        loop {
            k += 1;
            if delta.scale_int(k as i64) >= *w {
                break;
            }
            pw = pw.mul_trunc(h, w);
            let c = coeff(k)?;
            if !c.is_zero() {
                sum = sum.add(&pw.scale(&c));
            }
            if k > 100_000 {
                return Err(Error::precision("series expansion did not reach the target"));
            }
        }
        // all remaining contributions start at k·δ ≥ w
        Ok(sum.add(&Series::big_o(w.clone())))
    }

    pub fn inv(&self, target: &Exponent) -> Result<Series> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (g, a, h) = self.unit_split()?;
        let a_inv = a.inv()?;
        if h.is_zero() {
            return Ok(Series::monomial(g.neg(), a_inv));
        }
        // h known below ω_f − γ; result known below ω_f − 2γ
        let rel = target.add(&g);
        let geo = Self::compose_infinitesimal(&h, &rel, |k| Ok(RealConstant::from_int(if k % 2 == 0 { 1 } else { -1 })))?;
        Ok(geo.scale(&a_inv).shift(&g.neg()).clip())
    }

    /// Exact quotient when one exists with finite support.
    pub fn exact_div(&self, o: &Series) -> Option<Series> {
        if !self.is_exact() || !o.is_exact() || o.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Series::zero(&self.group));
        }
        let (og, oc) = o.leading()?;
        let oc_inv = oc.inv().ok()?;
        let limit = self.max_exponent()?.sub(o.max_exponent()?);
        let mut r = self.clone();
        let mut q = Series::zero(&self.group);
        for _ in 0..256 {
            if r.is_zero() {
                return Some(q);
            }
            let (re, rc) = r.leading()?;
            let e = re.sub(og);
            if e > limit {
                return None;
            }
            let term = Series::monomial(e, rc * &oc_inv);
            r = r.sub(&term.mul(o));
            q = q.add(&term);
        }
        None
    }

    pub fn div(&self, o: &Series, target: &Exponent) -> Result<Series> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(q) = self.exact_div(o) {
            return Ok(q);
        }
        if self.is_zero() {
            return Ok(Series::zero(&self.group));
        }
        let lo = self.lo().unwrap();
        let inv = o.inv(&target.sub(&lo))?;
        Ok(self.mul(&inv).truncate(target))
    }

    pub fn pow_int(&self, n: i64, target: &Exponent) -> Result<Series> {
        if n < 0 {
            return self.pow_int(-n, target)?.inv(target);
        }
        let mut result = Series::one(&self.group);
        let mut base = self.clone();
        let mut k = n as u64;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        Ok(result.truncate_if_inexact(target))
    }

    /// f^r for rational r, with exact-result detection.
    pub fn pow_rational(&self, r: &Q, target: &Exponent) -> Result<Series> {
        if r.is_integer() {
            return self.pow_int(r.to_integer().to_i64().ok_or_else(|| Error::domain("exponent too large"))?, target);
        }
        let (g, a, h) = self.unit_split()?;
        let even_den = (r.denom() % BigInt::from(2)).is_zero();
        let lead = match a.sign()? {
            Ordering::Greater => a.pow_rational(r)?,
            Ordering::Less if even_den => return Err(Error::NegativeRadicand),
            Ordering::Less => -(&(-&a).pow_rational(r)?),
            Ordering::Equal => unreachable!(),
        };
        let ge = g.scale(r);
        if h.is_zero() {
            return Ok(Series::monomial(ge, lead));
        }
        let binom = |k: usize| -> Result<RealConstant> {
            let mut c = Q::one();
            for j in 0..k {
                c = c * (r - Q::from_integer(BigInt::from(j as i64))) / Q::from_integer(BigInt::from(j as i64 + 1));
            }
            Ok(RealConstant::from_rational(c))
        };
        if self.is_exact() {
            // a finite root must end at max(f)·r
            let top = self.max_exponent().unwrap().scale(r).sub(&ge);
            let probe = top.add(&Exponent::from_rational(&self.group, Q::new(BigInt::one(), BigInt::from(1_000_000))));
            if r.is_positive() && !top.is_negative() {
                let cand = Self::compose_infinitesimal(&h, &probe, binom)?;
                let cand = Series { group: cand.group.clone(), terms: cand.terms, prec: Precision::Exact };
                let cand = cand.scale(&lead).shift(&ge);
                let n = r.denom().to_i64().unwrap();
                let m = r.numer().to_i64().unwrap();
                if let Ok(back) = cand.pow_int(n, target) {
                    if back.is_exact() && back == self.pow_int(m, target)? {
                        return Ok(cand);
                    }
                }
            }
        }
        let rel = target.sub(&ge);
        let s = Self::compose_infinitesimal(&h, &rel, binom)?;
        Ok(s.scale(&lead).shift(&ge).clip())
    }

    pub fn nth_root(&self, n: u32, target: &Exponent) -> Result<Series> {
        if n == 0 {
            return Err(Error::domain("zeroth root"));
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        self.pow_rational(&Q::new(BigInt::one(), BigInt::from(n)), target)
    }

    pub fn sqrt(&self, target: &Exponent) -> Result<Series> {
        self.nth_root(2, target)
    }

    pub fn sign(&self) -> Result<Ordering> {
        match self.leading() {
            Some((_, c)) => c.sign(),
            None if self.is_exact() => Ok(Ordering::Equal),
            None => Err(Error::precision(format!("all known terms cancel below t^{}", self.prec.bound().unwrap()))),
        }
    }

    pub fn compare(&self, o: &Series) -> Result<Ordering> {
        self.sub(o).sign()
    }

    pub fn is_positive(&self) -> Result<bool> {
        Ok(self.sign()? == Ordering::Greater)
    }

    pub fn abs(&self) -> Result<Series> {
        Ok(if self.sign()? == Ordering::Less { self.neg() } else { self.clone() })
    }

    pub fn standard_part(&self) -> Result<StandardPart> {
        match self.leading() {
            Some((e, _)) if e.is_negative() => Ok(StandardPart::Infinite),
            _ => {
                if let Some(w) = self.prec.bound() {
                    if !w.is_positive() {
                        return Err(Error::precision("standard part beyond known precision"));
                    }
                }
                Ok(StandardPart::Finite(self.coeff_at(&Exponent::zero(&self.group))))
            }
        }
    }

    pub fn is_bounded(&self) -> Result<bool> {
        Ok(matches!(self.standard_part()?, StandardPart::Finite(_)))
    }

    pub fn is_infinitesimal(&self) -> Result<bool> {
        match self.standard_part()? {
            StandardPart::Finite(c) => Ok(c.is_zero()),
            StandardPart::Infinite => Ok(false),
        }
    }

    /// Equality of all terms below w.
    pub fn equal_up_to(&self, o: &Series, w: &Exponent) -> bool {
        let a = self.truncate(w);
        let b = o.truncate(w);
        a.terms == b.terms
    }

    /// Part with exponents < 0.
    pub fn principal_part(&self) -> Series {
        let z = Exponent::zero(&self.group);
        let terms = self.terms.iter().filter(|(e, _)| e.is_negative()).cloned().collect();
        let prec = match self.prec.bound() {
            Some(w) if *w < z => self.prec.clone(),
            _ => Precision::Exact,
        };
        Series { group: self.group.clone(), terms, prec }
    }

    /// Part with exponents ≥ 0.
    pub fn bounded_part(&self) -> Series {
        let terms = self.terms.iter().filter(|(e, _)| !e.is_negative()).cloned().collect();
        Series { group: self.group.clone(), terms, prec: self.prec.clone() }
    }

    /// Applies t^e ↦ image(e) termwise.
    pub fn substitute(&self, image: &dyn Fn(&Exponent) -> Result<Series>, target: &Exponent) -> Result<Series> {
        let mut acc = Series::zero(&self.group);
        for (e, c) in &self.terms {
            acc = acc.add(&image(e)?.scale(c).truncate(target));
        }
        if let Some(w) = self.prec.bound() {
            acc = acc.add(&image(w)?.mul(&Series::big_o(Exponent::zero(&self.group))));
        }
        Ok(acc)
    }

    pub fn map_coeffs(&self, f: impl Fn(&RealConstant) -> RealConstant) -> Series {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), f(c))).collect();
        Series::from_terms(&self.group, terms, self.prec.clone())
    }

    /// f(τ) for a concrete real τ > 0.
    pub fn eval_f64(&self, tau: f64) -> f64 {
        self.terms.iter().map(|(e, c)| c.to_f64() * tau.powf(e.to_f64())).sum()
    }

    /// f(τ) with τ generic over the float type.
    pub fn eval_float<F: num_traits::Float>(&self, tau: F) -> F {
        let mut acc = F::zero();
        for (e, c) in &self.terms {
            let cf = F::from(c.to_f64()).unwrap();
            let ef = F::from(e.to_f64()).unwrap();
            acc = acc + cf * tau.powf(ef);
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(e, c)| json!({"exp": e.coords().iter().map(render_rational).collect::<Vec<_>>(), "coeff": c.to_string()}))
            .collect();
        let prec = match &self.prec {
            Precision::Exact => json!("exact"),
            Precision::KnownBelow(w) => json!({"below": w.coords().iter().map(render_rational).collect::<Vec<_>>()}),
        };
        json!({"terms": terms, "precision": prec})
    }

    pub fn from_json(g: &Group, v: &Value) -> Result<Series> {
        let bad = || Error::domain("malformed series JSON");
        let coords = |a: &Value| -> Result<Exponent> {
            let xs = a.as_array().ok_or_else(bad)?;
            let qs = xs
                .iter()
                .map(|x| x.as_str().ok_or_else(bad).and_then(|s| syntax::parse_constant(s)?.0.as_rational().ok_or_else(bad)))
                .collect::<Result<Vec<_>>>()?;
            Exponent::from_coords(g, qs)
        };
        let mut terms = Vec::new();
        for t in v["terms"].as_array().ok_or_else(bad)? {
            let e = coords(&t["exp"])?;
            let c = syntax::parse_constant(t["coeff"].as_str().ok_or_else(bad)?)?.0;
            terms.push((e, c));
        }
        let prec = if v["precision"] == json!("exact") { Precision::Exact } else { Precision::KnownBelow(coords(&v["precision"]["below"])?) };
        Ok(Series::from_terms(g, terms, prec))
    }

    pub fn parse(src: &str, g: &Group, target: &Exponent) -> Result<Series> {
        let ast = syntax::parse_ast(src)?;
        Self::from_ast(&ast, g, target)
    }

    pub fn from_ast(a: &Ast, g: &Group, target: &Exponent) -> Result<Series> {
        Ok(match a {
            Ast::Num(q) => Series::rational(g, q.clone()),
            Ast::Ident(n) if n == "t" => Series::t(g),
            Ast::Ident(_) => Series::constant(g, syntax::ast_to_real_expr(a)?.normalize()?),
            Ast::Neg(x) => Self::from_ast(x, g, target)?.neg(),
            Ast::Add(x, y) => Self::from_ast(x, g, target)?.add(&Self::from_ast(y, g, target)?),
            Ast::Sub(x, y) => Self::from_ast(x, g, target)?.sub(&Self::from_ast(y, g, target)?),
            Ast::Mul(x, y) => Self::from_ast(x, g, target)?.mul(&Self::from_ast(y, g, target)?).truncate_if_inexact(target),
            Ast::Div(x, y) => Self::from_ast(x, g, target)?.div(&Self::from_ast(y, g, target)?, target)?,
            Ast::Pow(b, e) => {
                let ec = syntax::ast_to_real_expr(e)?.normalize()?;
                if matches!(&**b, Ast::Ident(n) if n == "t") {
                    Series::monomial(g.element(&ec)?, RealConstant::one())
                } else {
                    let r = ec.as_rational().ok_or_else(|| Error::domain("series powers must be rational"))?;
                    Self::from_ast(b, g, target)?.pow_rational(&r, target)?
                }
            }
            Ast::Call(f, args) if f == "O" && args.len() == 1 => {
                let s = Self::from_ast(&args[0], g, target)?;
                match s.terms.as_slice() {
                    [(e, _)] => Series::big_o(e.clone()),
                    _ => return Err(Error::domain("O(...) expects a monomial")),
                }
            }
            Ast::Call(f, args) if args.len() == 1 => {
                let x = Self::from_ast(&args[0], g, target)?;
                crate::logexp::apply_named(f, &x, target)?
            }
            _ => return Err(Error::domain("not a series expression")),
        })
    }

    fn truncate_if_inexact(self, target: &Exponent) -> Series {
        if self.is_exact() {
            self
        } else {
            self.truncate(target)
        }
    }
}

impl PartialEq for Series {
    fn eq(&self, o: &Self) -> bool {
        self.terms == o.terms && self.prec == o.prec
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn render_power(e: &Exponent) -> String {
    if let Some(q) = e.as_rational() {
        if q.is_one() {
            return "t".into();
        }
        if q.is_integer() && q.is_positive() {
            return format!("t^{q}");
        }
        return format!("t^({})", render_rational(&q));
    }
    format!("t^({})", e.embed())
}

fn needs_parens(s: &str) -> bool {
    s.trim_start_matches('-').contains(" + ") || s.trim_start_matches('-').contains(" - ")
}

/// Renders `c·m` as a sequence of (negative?, body) for joining with signs.
pub(crate) fn render_scaled(c: &RealConstant, m: Option<String>) -> (bool, String) {
    if let Some(q) = c.as_rational() {
        let neg = q.is_negative();
        let q = q.abs();
        let (n, d) = (q.numer().clone(), q.denom().clone());
        let body = match m {
            None => render_rational(&q),
            Some(m) => {
                let mut s = if n.is_one() { m } else { format!("{n}*{m}") };
                if !d.is_one() {
                    s = format!("{s}/{d}");
                }
                s
            }
        };
        return (neg, body);
    }
    let cs = c.to_string();
    let single = !needs_parens(&cs);
    let (neg, cs) = if single && cs.starts_with('-') { (true, cs[1..].to_string()) } else { (false, cs) };
    let cs = if single { cs } else { format!("({cs})") };
    let body = match m {
        None => cs,
        Some(m) => format!("{cs}*{m}"),
    };
    (neg, body)
}

pub(crate) fn join_signed(parts: Vec<(bool, String)>) -> String {
    if parts.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (neg, body)) in parts.into_iter().enumerate() {
        if i == 0 {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        s.push_str(&body);
    }
    s
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(bool, String)> = self
            .terms
            .iter()
            .map(|(e, c)| render_scaled(c, if e.is_zero() { None } else { Some(render_power(e)) }))
            .collect();
        if let Some(w) = self.prec.bound() {
            let o = if w.is_zero() { "O(1)".to_string() } else { format!("O({})", render_power(w)) };
            parts.push((false, o));
        }
        write!(f, "{}", join_signed(parts))
    }
}

impl ExponentGroup {
    pub fn default_group() -> Group {
        ExponentGroup::rational()
    }
}
