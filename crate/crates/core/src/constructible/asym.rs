//! Truncated expansions Σ c·x^q·(log x)^j at x → +∞ with coefficients in R[X].

use crate::algebra::AlgebraElement;
use crate::constants::{RealConstant, Q};
use crate::error::{Error, Result};
use crate::logexp;
use crate::semialg::expr::{apply_func, Expr, Func};
use crate::series::{Ctx, Series};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

#[derive(Clone, Debug)]
pub struct Term {
    pub q: Q,
    pub j: i64,
    pub c: AlgebraElement,
}

/// Known terms in decreasing (q, j) order; the unknown rest is O(x^rem·(log x)^k) for some k.
#[derive(Clone, Debug)]
pub struct Asym {
    pub terms: Vec<Term>,
    pub rem: Option<Q>,
}

fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn key_cmp(a: (&Q, i64), b: (&Q, i64)) -> Ordering {
    a.0.cmp(b.0).then(a.1.cmp(&b.1))
}

fn qmax(a: Option<Q>, b: Option<Q>) -> Option<Q> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if x > y { x } else { y }),
        (x, None) => x,
        (None, y) => y,
    }
}

fn unsupported(msg: &str) -> Error {
    Error::unsupported(format!("asymptotic expansion: {msg}"))
}

/// Expansion engine for one variable with a fixed truncation floor.
pub struct Expander<'a> {
    pub ctx: &'a Ctx,
    pub v: usize,
    pub floor: Q,
}

impl Asym {
    pub fn zero() -> Self {
        Asym { terms: Vec::new(), rem: None }
    }

    pub fn constant(c: AlgebraElement) -> Self {
        Self::monomial(Q::zero(), 0, c)
    }

    pub fn monomial(q: Q, j: i64, c: AlgebraElement) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Asym { terms: vec![Term { q, j, c }], rem: None }
    }

    pub fn is_exact(&self) -> bool {
        self.rem.is_none()
    }

    pub fn lead(&self) -> Option<&Term> {
        self.terms.first()
    }

    /// Largest q present, known or unknown.
    fn top_q(&self) -> Option<Q> {
        qmax(self.terms.first().map(|t| t.q.clone()), self.rem.clone())
    }

    fn normalize(mut terms: Vec<Term>, rem: Option<Q>) -> Asym {
        terms.sort_by(|a, b| key_cmp((&b.q, b.j), (&a.q, a.j)));
        let mut out: Vec<Term> = Vec::new();
        for t in terms {
            if let Some(r) = &rem {
                if t.q <= *r {
                    continue;
                }
            }
            match out.last_mut() {
                Some(l) if l.q == t.q && l.j == t.j => l.c = l.c.add(&t.c),
                _ => out.push(t),
            }
        }
        out.retain(|t| !t.c.is_zero());
        Asym { terms: out, rem }
    }

    pub fn truncate(&self, floor: &Q) -> Asym {
        if self.terms.iter().any(|t| t.q <= *floor) {
            let rem = qmax(self.rem.clone(), Some(floor.clone()));
            Asym::normalize(self.terms.clone(), rem)
        } else {
            self.clone()
        }
    }

    pub fn add(&self, o: &Asym) -> Asym {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Asym::normalize(terms, qmax(self.rem.clone(), o.rem.clone()))
    }

    pub fn neg(&self) -> Asym {
        Asym {
            terms: self.terms.iter().map(|t| Term { q: t.q.clone(), j: t.j, c: t.c.neg() }).collect(),
            rem: self.rem.clone(),
        }
    }

    pub fn sub(&self, o: &Asym) -> Asym {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Asym, ctx: &Ctx) -> Asym {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &o.terms {
                let mut c = a.c.mul(&b.c);
                if !c.is_exact() {
                    c = c.truncate(&ctx.target);
                }
                terms.push(Term { q: &a.q + &b.q, j: a.j + b.j, c });
            }
        }
        let mut rem = None;
        if let (Some(r), Some(top)) = (&self.rem, o.top_q()) {
            rem = qmax(rem, Some(r + top));
        }
        if let (Some(r), Some(top)) = (&o.rem, self.top_q()) {
            rem = qmax(rem, Some(r + top));
        }
        Asym::normalize(terms, rem)
    }

    pub fn scale(&self, c: &AlgebraElement) -> Asym {
        Asym::normalize(
            self.terms.iter().map(|t| Term { q: t.q.clone(), j: t.j, c: t.c.mul(c) }).collect(),
            self.rem.clone(),
        )
    }

    fn shift(&self, q: &Q, j: i64) -> Asym {
        Asym {
            terms: self.terms.iter().map(|t| Term { q: &t.q + q, j: t.j + j, c: t.c.clone() }).collect(),
            rem: self.rem.as_ref().map(|r| r + q),
        }
    }

    /// Sign of the function for large x, if decided.
    pub fn sign(&self) -> Result<Ordering> {
        match self.lead() {
            Some(t) => t.c.sign(),
            None if self.rem.is_none() => Ok(Ordering::Equal),
            None => Err(Error::precision("expansion cancels to its truncation order")),
        }
    }
}

fn series_coeff(c: &AlgebraElement, what: &str) -> Result<Series> {
    c.as_series().ok_or_else(|| unsupported(&format!("{what} of a coefficient with an X part")))
}

/// Taylor coefficients of f^r at 0 for a power series f with f₀ ≠ 0.
fn ps_pow(f: &[Series], r: &Q, n: usize, ctx: &Ctx) -> Result<Vec<Series>> {
    let t = &ctx.target;
    let g0 = f[0].pow_rational(r, t)?;
    let f0_inv = f[0].inv(t)?;
    let mut g = vec![g0];
    for m in 1..n {
        let mut acc = Series::zero(&ctx.group);
        for k in 1..=m.min(f.len() - 1) {
            let w = (r + Q::one()) * qi(k as i64) - qi(m as i64);
            acc = acc.add(&f[k].mul(&g[m - k]).scale_q(&w));
        }
        let gm = acc.mul(&f0_inv).scale_q(&Q::new(BigInt::one(), BigInt::from(m as i64))).truncate(t);
        g.push(gm);
    }
    Ok(g)
}

impl Expander<'_> {
    fn one(&self) -> AlgebraElement {
        AlgebraElement::from_int(&self.ctx.group, 1)
    }

    fn fix(&self, a: Asym) -> Asym {
        a.truncate(&self.floor)
    }

    /// Σ_k coeffs[k]·δ^k down to the floor; δ must be decaying.
    fn compose(&self, coeffs: &dyn Fn(usize) -> Result<AlgebraElement>, delta: &Asym, rel_floor: &Q) -> Result<Asym> {
        let dq = match delta.top_q() {
            None => return Ok(Asym::constant(coeffs(0)?)),
            Some(q) => q,
        };
        if !dq.is_negative() {
            return Err(unsupported("correction term does not decay"));
        }
        let kmax = (rel_floor / &dq).ceil().to_integer().to_usize().unwrap_or(64).clamp(1, 64);
        let mut acc = Asym::constant(coeffs(0)?);
        let mut pw = Asym::constant(self.one());
        for k in 1..=kmax {
            pw = pw.mul(delta, self.ctx).truncate(rel_floor);
            let c = coeffs(k)?;
            if !c.is_zero() {
                acc = acc.add(&pw.scale(&c));
            }
        }
        let cut = dq * qi(kmax as i64 + 1);
        Ok(Asym::normalize(acc.terms, qmax(acc.rem, Some(if cut > *rel_floor { cut } else { rel_floor.clone() }))))
    }

    /// a = L·(1 + δ) with L the leading term.
    fn split_lead(&self, a: &Asym) -> Result<(Term, Asym)> {
        let lead = a.lead().cloned().ok_or_else(|| Error::precision("expansion has no known leading term"))?;
        let lc = series_coeff(&lead.c, "division")?;
        let inv = AlgebraElement::from_series(lc.inv(&self.ctx.target)?);
        let rest: Vec<Term> = a.terms[1..]
            .iter()
            .map(|t| Term { q: &t.q - &lead.q, j: t.j - lead.j, c: t.c.mul(&inv).truncate(&self.ctx.target) })
            .collect();
        if rest.iter().any(|t| t.q.is_zero()) {
            return Err(unsupported("logarithmic correction to a leading term"));
        }
        let delta = Asym::normalize(rest, a.rem.as_ref().map(|r| r - &lead.q));
        Ok((lead, delta))
    }

    pub fn pow(&self, a: &Asym, r: &Q) -> Result<Asym> {
        if a.terms.is_empty() && a.rem.is_none() {
            return if r.is_positive() { Ok(Asym::zero()) } else { Err(Error::DivisionByZero) };
        }
        if r.is_integer() && !r.is_negative() {
            let mut acc = Asym::constant(self.one());
            for _ in 0..r.to_integer().to_usize().unwrap_or(0) {
                acc = self.fix(acc.mul(a, self.ctx));
            }
            return Ok(acc);
        }
        let (lead, delta) = self.split_lead(a)?;
        let jr = r * qi(lead.j);
        if !jr.is_integer() {
            return Err(unsupported("fractional power of a logarithm"));
        }
        let lc = series_coeff(&lead.c, "power")?;
        let cr = AlgebraElement::from_series(lc.pow_rational(r, &self.ctx.target)?);
        let qr = &lead.q * r;
        let rel = &self.floor - &qr;
        let g = self.ctx.group.clone();
        let coeff = |k: usize| -> Result<AlgebraElement> {
            // binomial(r, k)
            let mut b = Q::one();
            for i in 0..k {
                b = b * (r - qi(i as i64)) / qi(i as i64 + 1);
            }
            Ok(AlgebraElement::from_series(Series::rational(&g, b)))
        };
        let body = self.compose(&coeff, &delta, &rel)?;
        Ok(self.fix(body.scale(&cr).shift(&qr, jr.to_integer().to_i64().unwrap())))
    }

    fn exp(&self, a: &Asym) -> Result<Asym> {
        let mut xpow = Q::zero();
        let mut c0 = AlgebraElement::zero(&self.ctx.group);
        let mut small = Vec::new();
        for t in &a.terms {
            match key_cmp((&t.q, t.j), (&Q::zero(), 0)) {
                Ordering::Greater => {
                    let k = t.c.as_series().and_then(|s| s.as_rational());
                    match (t.q.is_zero() && t.j == 1, k) {
                        (true, Some(k)) => xpow = k,
                        _ => return Err(unsupported("exponential growth")),
                    }
                }
                Ordering::Equal => c0 = t.c.clone(),
                Ordering::Less => {
                    if t.q.is_zero() {
                        return Err(unsupported("exponential of an inverse logarithm"));
                    }
                    small.push(t.clone());
                }
            }
        }
        if let Some(r) = &a.rem {
            if !r.is_negative() {
                return Err(Error::precision("exponent known only to a non-decaying order"));
            }
        }
        let delta = Asym::normalize(small, a.rem.clone());
        let g = self.ctx.group.clone();
        let coeff = |k: usize| -> Result<AlgebraElement> {
            let mut f = BigInt::one();
            for i in 1..=k {
                f *= BigInt::from(i);
            }
            Ok(AlgebraElement::from_series(Series::rational(&g, Q::new(BigInt::one(), f))))
        };
        let rel = &self.floor - &xpow;
        let body = self.compose(&coeff, &delta, &rel)?;
        let ec = apply_func(Func::Exp, &c0, self.ctx)?;
        Ok(self.fix(body.scale(&ec).shift(&xpow, 0)))
    }

    fn log(&self, a: &Asym) -> Result<Asym> {
        let (lead, delta) = self.split_lead(a)?;
        if lead.j != 0 {
            return Err(unsupported("logarithm of a logarithm"));
        }
        let lc = series_coeff(&lead.c, "logarithm")?;
        let lc_log = logexp::extended_log(&lc, &self.ctx.target)?;
        let g = self.ctx.group.clone();
        let coeff = |k: usize| -> Result<AlgebraElement> {
            if k == 0 {
                return Ok(AlgebraElement::zero(&g));
            }
            let s = if k % 2 == 1 { 1 } else { -1 };
            Ok(AlgebraElement::from_series(Series::rational(&g, Q::new(BigInt::from(s), BigInt::from(k as i64)))))
        };
        let body = self.compose(&coeff, &delta, &self.floor)?;
        let mut out = body.add(&Asym::constant(lc_log));
        if !lead.q.is_zero() {
            out = out.add(&Asym::monomial(Q::zero(), 1, AlgebraElement::from_series(Series::rational(&g, lead.q.clone()))));
        }
        Ok(self.fix(out))
    }

    /// f(c + δ) for f ∈ {atan, asin} and a decaying δ.
    fn taylor_at(&self, f: Func, c: &Series, delta: &Asym) -> Result<Asym> {
        let ctx = self.ctx;
        let g = &ctx.group;
        let dq = delta.top_q();
        let n = match dq {
            None => 1,
            Some(dq) => {
                if !dq.is_negative() {
                    return Err(unsupported("correction term does not decay"));
                }
                (&self.floor / &dq).ceil().to_integer().to_usize().unwrap_or(64).clamp(1, 64) + 1
            }
        };
        let two_c = c.scale_q(&qi(2));
        let (poly, r, value) = match f {
            Func::Atan => (vec![Series::one(g).add(&c.mul(c)), two_c, Series::one(g)], qi(-1), logexp::atan(c, &ctx.target)?),
            _ => (
                vec![Series::one(g).sub(&c.mul(c)), two_c.neg(), Series::from_int(g, -1)],
                Q::new(BigInt::from(-1), BigInt::from(2)),
                logexp::asin(c, &ctx.target)?,
            ),
        };
        let der = ps_pow(&poly, &r, n, ctx)?;
        let mut coeffs = vec![AlgebraElement::from_series(value)];
        for (k, d) in der.iter().enumerate() {
            coeffs.push(AlgebraElement::from_series(d.scale_q(&Q::new(BigInt::one(), BigInt::from(k as i64 + 1)))));
        }
        let gz = g.clone();
        let coeff = |k: usize| -> Result<AlgebraElement> { Ok(coeffs.get(k).cloned().unwrap_or_else(|| AlgebraElement::zero(&gz))) };
        self.compose(&coeff, delta, &self.floor)
    }

    fn split_bounded(&self, a: &Asym) -> Result<(Series, Asym)> {
        let mut c0 = Series::zero(&self.ctx.group);
        let mut small = Vec::new();
        for t in &a.terms {
            match key_cmp((&t.q, t.j), (&Q::zero(), 0)) {
                Ordering::Greater => return Err(unsupported("unbounded argument")),
                Ordering::Equal => c0 = series_coeff(&t.c, "bounded function")?,
                Ordering::Less => {
                    if t.q.is_zero() {
                        return Err(unsupported("inverse logarithm"));
                    }
                    small.push(t.clone());
                }
            }
        }
        Ok((c0, Asym::normalize(small, a.rem.clone())))
    }

    fn atan(&self, a: &Asym) -> Result<Asym> {
        if let Some(t) = a.lead() {
            if key_cmp((&t.q, t.j), (&Q::zero(), 0)) == Ordering::Greater {
                // ±π/2 − atan(1/a)
                let s = t.c.sign()?;
                let half_pi = AlgebraElement::constant(&self.ctx.group, RealConstant::pi().scale(&Q::new(BigInt::one(), BigInt::from(2))));
                let inv = self.pow(a, &qi(-1))?;
                let tail = self.atan(&inv)?;
                let base = if s == Ordering::Greater { half_pi } else { half_pi.neg() };
                return Ok(self.fix(Asym::constant(base).sub(&tail)));
            }
        }
        let (c, delta) = self.split_bounded(a)?;
        Ok(self.fix(self.taylor_at(Func::Atan, &c, &delta)?))
    }

    fn asin(&self, a: &Asym) -> Result<Asym> {
        let (c, delta) = self.split_bounded(a)?;
        if !delta.terms.is_empty() || delta.rem.is_some() {
            let one = Series::one(&self.ctx.group);
            if c.abs()?.compare(&one)? != Ordering::Less {
                return Err(unsupported("arcsin at the boundary of its domain"));
            }
        }
        Ok(self.fix(self.taylor_at(Func::Asin, &c, &delta)?))
    }

    pub fn expand(&self, e: &Expr) -> Result<Asym> {
        let ctx = self.ctx;
        Ok(match e {
            Expr::Const(c) => Asym::constant(c.clone()),
            Expr::Var(i) if *i == self.v => Asym::monomial(Q::one(), 0, self.one()),
            Expr::Var(i) => return Err(unsupported(&format!("free variable {i}"))),
            Expr::Add(xs) => {
                let mut acc = Asym::zero();
                for x in xs {
                    acc = acc.add(&self.expand(x)?);
                }
                acc
            }
            Expr::Mul(xs) => {
                let mut acc = Asym::constant(self.one());
                for x in xs {
                    acc = self.fix(acc.mul(&self.expand(x)?, ctx));
                }
                acc
            }
            Expr::Pow(b, r) => {
                let a = self.expand(b)?;
                if !r.is_integer() && (r.denom() % BigInt::from(2)).is_zero() && a.sign()? == Ordering::Less {
                    return Err(Error::domain("even root of a negative quantity"));
                }
                if !r.is_integer() && r.denom().is_odd() && a.sign()? == Ordering::Less {
                    return Ok(self.pow(&a.neg(), r)?.scale(&AlgebraElement::from_int(&ctx.group, if r.numer().is_odd() { -1 } else { 1 })));
                }
                self.pow(&a, r)?
            }
            Expr::Fn(f, u) => {
                let a = self.expand(u)?;
                match f {
                    Func::Abs => {
                        if a.sign()? == Ordering::Less {
                            a.neg()
                        } else {
                            a
                        }
                    }
                    Func::Exp => self.exp(&a)?,
                    Func::Log => {
                        if a.sign()? != Ordering::Greater {
                            return Err(Error::domain("logarithm of a nonpositive quantity"));
                        }
                        self.log(&a)?
                    }
                    Func::Atan => self.atan(&a)?,
                    Func::Asin => self.asin(&a)?,
                }
            }
            Expr::Piecewise(bs, d) => {
                for (gd, x) in bs {
                    let s = self.expand(&gd.expr)?.sign()?;
                    if gd.holds(s) {
                        return self.expand(x);
                    }
                }
                self.expand(d)?
            }
        })
    }
}
