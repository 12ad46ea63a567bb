//! Definite integrals: cell splitting, G(b) − G(a), limits at improper ends, Fubini.

use super::antideriv::antiderivative;
use crate::algebra::AlgebraElement;
use crate::constructible::limit::{limit_at_infinity, limit_at_neg_infinity, limit_at_point, Limit, Side};
use crate::error::{Error, Result};
use crate::semialg::expr::{Expr, Func};
use crate::semialg::poly;
use crate::semialg::set::{Component, Endpoint, Region, SetOneD};
use crate::series::{Ctx, Series};
use num_bigint::BigInt;
use num_traits::{One, Signed};
use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureValue {
    Finite(AlgebraElement),
    Infinite,
}

impl MeasureValue {
    pub fn finite(&self) -> Option<&AlgebraElement> {
        match self {
            MeasureValue::Finite(a) => Some(a),
            MeasureValue::Infinite => None,
        }
    }

    pub fn degree(&self) -> Option<usize> {
        self.finite().map(AlgebraElement::degree_or_zero)
    }
}

impl fmt::Display for MeasureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureValue::Finite(a) => write!(f, "{a}"),
            MeasureValue::Infinite => write!(f, "infinite"),
        }
    }
}

/// Integral value before the caller decides how to treat divergence.
#[derive(Clone, Debug)]
pub(crate) enum Total {
    Finite(AlgebraElement),
    PosInf,
    NegInf,
    NoLimit,
}

impl Total {
    fn add(self, o: Total) -> Total {
        use Total::*;
        match (self, o) {
            (Finite(a), Finite(b)) => Finite(a.add(&b)),
            (NoLimit, _) | (_, NoLimit) => NoLimit,
            (PosInf, NegInf) | (NegInf, PosInf) => NoLimit,
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
        }
    }

    fn neg(self) -> Total {
        match self {
            Total::Finite(a) => Total::Finite(a.neg()),
            Total::PosInf => Total::NegInf,
            Total::NegInf => Total::PosInf,
            Total::NoLimit => Total::NoLimit,
        }
    }

    pub(crate) fn into_integral(self, what: &str) -> Result<AlgebraElement> {
        match self {
            Total::Finite(a) => Ok(a),
            Total::PosInf => Err(Error::DivergentIntegral(format!("{what} diverges to +inf"))),
            Total::NegInf => Err(Error::DivergentIntegral(format!("{what} diverges to -inf"))),
            Total::NoLimit => Err(Error::DivergentIntegral(format!("{what} has no limit"))),
        }
    }

    fn into_measure(self, what: &str) -> Result<MeasureValue> {
        match self {
            Total::PosInf => Ok(MeasureValue::Infinite),
            t => t.into_integral(what).map(MeasureValue::Finite),
        }
    }
}

pub(crate) fn from_limit(l: Limit) -> Total {
    match l {
        Limit::Finite(a) => Total::Finite(a),
        Limit::PosInf => Total::PosInf,
        Limit::NegInf => Total::NegInf,
        Limit::NoLimit => Total::NoLimit,
    }
}

// ---------------------------------------------------------------- critical points

/// Points where `e` may fail to be smooth in `v`: poles, branch points, case boundaries.
pub fn critical_points(e: &Expr, v: usize, ctx: &Ctx) -> Result<Vec<Series>> {
    let mut out = Vec::new();
    collect(e, v, ctx, &mut out)?;
    poly::sort_dedup(&mut out)?;
    Ok(out)
}

fn collect(e: &Expr, v: usize, ctx: &Ctx, out: &mut Vec<Series>) -> Result<()> {
    if !e.depends_on(v) {
        return Ok(());
    }
    let g = &ctx.group;
    match e {
        Expr::Const(_) | Expr::Var(_) => {}
        Expr::Add(xs) | Expr::Mul(xs) => {
            for x in xs {
                collect(x, v, ctx, out)?;
            }
        }
        Expr::Pow(b, q) => {
            if q.is_negative() || !q.is_integer() {
                zeros(b, v, ctx, out)?;
            }
            collect(b, v, ctx, out)?;
        }
        Expr::Fn(f, u) => {
            match f {
                Func::Log | Func::Abs => zeros(u, v, ctx, out)?,
                Func::Asin => {
                    zeros(&u.sub(&Expr::int(g, 1), g), v, ctx, out)?;
                    zeros(&u.add(&Expr::int(g, 1), g), v, ctx, out)?;
                }
                Func::Atan | Func::Exp => {}
            }
            collect(u, v, ctx, out)?;
        }
        Expr::Piecewise(bs, d) => {
            for (gd, x) in bs {
                zeros(&gd.expr, v, ctx, out)?;
                collect(&gd.expr, v, ctx, out)?;
                collect(x, v, ctx, out)?;
            }
            collect(d, v, ctx, out)?;
        }
    }
    Ok(())
}

/// Real zeros of `b` in `v` (constant-coefficient polynomial parts only).
pub fn zeros_of(b: &Expr, v: usize, ctx: &Ctx) -> Result<Vec<Series>> {
    let mut out = Vec::new();
    zeros(b, v, ctx, &mut out)?;
    poly::sort_dedup(&mut out)?;
    Ok(out)
}

fn zeros(b: &Expr, v: usize, ctx: &Ctx, out: &mut Vec<Series>) -> Result<()> {
    if !b.depends_on(v) {
        return Ok(());
    }
    let g = &ctx.group;
    match b {
        Expr::Mul(fs) => {
            for f in fs {
                zeros(f, v, ctx, out)?;
            }
            return Ok(());
        }
        Expr::Pow(c, _) => return zeros(c, v, ctx, out),
        Expr::Fn(Func::Exp, _) => return Ok(()),
        Expr::Fn(Func::Abs, u) => return zeros(u, v, ctx, out),
        _ => {}
    }
    if b.find_case(v, g).is_some() {
        return piecewise_zeros(b, v, ctx, out);
    }
    let Some(p) = b.as_poly(v, g) else {
        return Err(Error::unsupported(format!("cannot locate the zeros of {}", b.key())));
    };
    if let Some(ps) = p.iter().map(Expr::as_series).collect::<Option<Vec<Series>>>() {
        out.extend(poly::real_roots(&ps, ctx)?);
        return Ok(());
    }
    if no_real_roots(&p) {
        return Ok(());
    }
    Err(Error::unsupported(format!("singular locus of {} depends on other variables", b.key())))
}

/// Zeros of each branch, kept where that branch is in force; the case boundaries come along.
fn piecewise_zeros(b: &Expr, v: usize, ctx: &Ctx, out: &mut Vec<Series>) -> Result<()> {
    let cuts = critical_points(b, v, ctx)?;
    let mut ends = vec![Endpoint::NegInf];
    ends.extend(cuts.iter().cloned().map(Endpoint::Finite));
    ends.push(Endpoint::PosInf);
    out.extend(cuts);
    for w in ends.windows(2) {
        let branch = specialize(b, v, &sample(&w[0], &w[1], ctx), ctx)?;
        for z in zeros_of(&branch, v, ctx)? {
            let ep = Endpoint::Finite(z.clone());
            if w[0].compare(&ep)? == Ordering::Less && ep.compare(&w[1])? == Ordering::Less {
                out.push(z);
            }
        }
    }
    Ok(())
}

/// A quadratic s·((v + h)² + A) with the sign of A evident.
fn no_real_roots(p: &[Expr]) -> bool {
    if p.len() != 3 {
        return false;
    }
    let g = p[0].as_const().map(|c| c.group().clone());
    let Some(g) = g.or_else(|| p[2].as_const().map(|c| c.group().clone())) else { return false };
    let disc = p[1].pow(&qi(2), &g).sub(&p[0].mul(&p[2], &g).scale_q(&qi(4), &g), &g);
    disc.sign_hint() == Some(Ordering::Less)
}

fn qi(n: i64) -> crate::constants::Q {
    crate::constants::Q::from_integer(BigInt::from(n))
}

// ---------------------------------------------------------------- one variable

pub fn sample(a: &Endpoint, b: &Endpoint, ctx: &Ctx) -> Series {
    let one = Series::one(&ctx.group);
    match (a, b) {
        (Endpoint::Finite(x), Endpoint::Finite(y)) => x.add(y).scale_q(&crate::constants::Q::new(BigInt::one(), BigInt::from(2))),
        (Endpoint::Finite(x), _) => x.add(&one),
        (_, Endpoint::Finite(y)) => y.sub(&one),
        _ => Series::zero(&ctx.group),
    }
}

/// Resolves case distinctions in `v` by their sign at `m`.
pub fn specialize(e: &Expr, v: usize, m: &Series, ctx: &Ctx) -> Result<Expr> {
    let g = &ctx.group;
    let mut cur = e.clone();
    for _ in 0..256 {
        let Some((guard, yes, no)) = cur.find_case(v, g) else { return Ok(cur) };
        let s = guard.expr.substitute(v, &Expr::series(m.clone()), g).eval(&[], ctx)?.sign()?;
        cur = if guard.holds(s) { yes } else { no };
    }
    Err(Error::unsupported("too many case distinctions"))
}

pub(crate) fn end_value(gx: &Expr, v: usize, p: &Endpoint, side: Side, ctx: &Ctx) -> Result<Total> {
    let g = &ctx.group;
    match p {
        Endpoint::PosInf => Ok(from_limit(limit_at_infinity(gx, v, ctx)?)),
        Endpoint::NegInf => Ok(from_limit(limit_at_neg_infinity(gx, v, ctx)?)),
        Endpoint::Finite(x) => match gx.substitute(v, &Expr::series(x.clone()), g).eval(&[], ctx) {
            Ok(a) => Ok(Total::Finite(a)),
            Err(Error::Domain(_)) | Err(Error::DivisionByZero) | Err(Error::NegativeRadicand) => {
                Ok(from_limit(limit_at_point(gx, v, x, side, ctx)?))
            }
            Err(e) => Err(e),
        },
    }
}

fn integrate_cells(e: &Expr, v: usize, lo: &Endpoint, hi: &Endpoint, ctx: &Ctx) -> Result<Total> {
    match lo.compare(hi)? {
        Ordering::Equal => return Ok(Total::Finite(AlgebraElement::zero(&ctx.group))),
        Ordering::Greater => return Ok(integrate_cells(e, v, hi, lo, ctx)?.neg()),
        Ordering::Less => {}
    }
    let mut cuts = vec![lo.clone()];
    for p in critical_points(e, v, ctx)? {
        let ep = Endpoint::Finite(p);
        if lo.compare(&ep)? == Ordering::Less && ep.compare(hi)? == Ordering::Less {
            cuts.push(ep);
        }
    }
    cuts.push(hi.clone());
    let mut total = Total::Finite(AlgebraElement::zero(&ctx.group));
    for w in cuts.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let m = sample(a, b, ctx);
        let cell = specialize(e, v, &m, ctx)?;
        let gx = antiderivative(&cell, v, ctx)?;
        let vb = end_value(&gx, v, b, Side::Left, ctx)?;
        let va = end_value(&gx, v, a, Side::Right, ctx)?;
        total = total.add(vb).add(va.neg());
    }
    if let Total::Finite(a) = &mut total {
        if !a.is_exact() {
            *a = a.truncate(&ctx.target);
        }
    }
    Ok(total)
}

fn only_var(e: &Expr, v: usize) -> bool {
    e.max_var().map(|m| (0..=m).all(|i| i == v || !e.depends_on(i))).unwrap_or(true)
}

/// ∫_lo^hi e dv for an integrand in the single variable `v`.
pub fn integrate_interval(e: &Expr, v: usize, lo: &Endpoint, hi: &Endpoint, ctx: &Ctx) -> Result<AlgebraElement> {
    if !only_var(e, v) {
        return Err(Error::unsupported("integrand has free variables besides the integration variable"));
    }
    integrate_cells(e, v, lo, hi, ctx)?.into_integral("integral")
}

pub(crate) fn set_total(e: &Expr, v: usize, s: &SetOneD, ctx: &Ctx) -> Result<Total> {
    let s = s.normalize()?;
    let mut total = Total::Finite(AlgebraElement::zero(&ctx.group));
    for c in &s.components {
        if let Component::Interval { lo, hi, .. } = c {
            total = total.add(integrate_cells(e, v, lo, hi, ctx)?);
        }
    }
    Ok(total)
}

pub fn integrate_set(e: &Expr, v: usize, s: &SetOneD, ctx: &Ctx) -> Result<AlgebraElement> {
    if !only_var(e, v) {
        return Err(Error::unsupported("integrand has free variables besides the integration variable"));
    }
    set_total(e, v, s, ctx)?.into_integral("integral")
}

/// Sum of lengths; unbounded components give Infinite and points give 0.
pub fn measure_1d(s: &SetOneD, ctx: &Ctx) -> Result<MeasureValue> {
    let s = s.normalize()?;
    let mut acc = Series::zero(&ctx.group);
    for c in &s.components {
        if let Component::Interval { lo, hi, .. } = c {
            match (lo, hi) {
                (Endpoint::Finite(a), Endpoint::Finite(b)) => acc = acc.add(&b.sub(a)),
                _ => return Ok(MeasureValue::Infinite),
            }
        }
    }
    Ok(MeasureValue::Finite(AlgebraElement::from_series(acc)))
}

// ---------------------------------------------------------------- Fubini

/// ∫_lo^hi e dv where e and the bounds may involve earlier variables.
pub fn integrate_layer(e: &Expr, v: usize, lo: &Expr, hi: &Expr, ctx: &Ctx) -> Result<Expr> {
    let g = &ctx.group;
    let terms = match e {
        Expr::Add(ts) => ts.clone(),
        other => vec![other.clone()],
    };
    let constant_bounds = lo.is_constant() && hi.is_constant();
    let mut parts = Vec::new();
    for term in terms {
        let factors = match &term {
            Expr::Mul(fs) => fs.clone(),
            other => vec![other.clone()],
        };
        let (free, dep): (Vec<Expr>, Vec<Expr>) = factors.into_iter().partition(|f| !f.depends_on(v));
        let c = Expr::product(free, g);
        let r = Expr::product(dep, g);
        if constant_bounds && only_var(&r, v) {
            let (Some(a), Some(b)) = (lo.as_series(), hi.as_series()) else {
                return Err(Error::unsupported("fiber bounds must be series or expressions"));
            };
            let val = integrate_interval(&r, v, &Endpoint::Finite(a), &Endpoint::Finite(b), ctx)?;
            parts.push(c.mul(&Expr::Const(val), g));
            continue;
        }
        let crit = critical_points(&r, v, ctx)?;
        if !crit.is_empty() || r.find_case(v, g).is_some() {
            return Err(Error::unsupported("singularities or case boundaries inside a variable fiber"));
        }
        let gx = antiderivative(&r, v, ctx)?;
        let val = gx.substitute(v, hi, g).sub(&gx.substitute(v, lo, g), g);
        parts.push(c.mul(&val, g));
    }
    Ok(Expr::sum(parts, g))
}

fn region_total(e: &Expr, r: &Region, ctx: &Ctx) -> Result<Total> {
    let mut cur = e.clone();
    for k in (1..r.dim()).rev() {
        let (lo, hi) = &r.layers[k - 1];
        cur = integrate_layer(&cur, k, lo, hi, ctx).map_err(|err| err.at_layer(k))?;
    }
    if !only_var(&cur, 0) {
        return Err(Error::unsupported("integrand has variables outside the region").at_layer(0));
    }
    set_total(&cur, 0, &r.base, ctx).map_err(|err| err.at_layer(0))
}

fn check_degree(v: &MeasureValue, bound: usize, strict: bool, what: &str) -> Result<()> {
    if let Some(d) = v.degree() {
        let ok = if strict { d < bound } else { d <= bound };
        if !ok {
            return Err(Error::Invariant(format!("{what} has X-degree {d}, bound {bound}")));
        }
    }
    Ok(())
}

/// Iterated integral, innermost variable first.
pub fn integrate_region(e: &Expr, r: &Region, ctx: &Ctx) -> Result<AlgebraElement> {
    let val = region_total(e, r, ctx)?.into_integral("integral")?;
    if !e.has_log_or_x() {
        check_degree(&MeasureValue::Finite(val.clone()), r.dim(), false, "integral")?;
    }
    Ok(val)
}

pub fn measure_region(r: &Region, ctx: &Ctx) -> Result<MeasureValue> {
    let one = Expr::int(&ctx.group, 1);
    let val = if r.dim() == 1 { measure_1d(&r.base, ctx)? } else { region_total(&one, r, ctx)?.into_measure("measure")? };
    check_degree(&val, r.dim(), true, "measure")?;
    Ok(val)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semialg::expr::default_names;

    fn integral(src: &str, set: &str) -> Result<String> {
        let ctx = Ctx::rational();
        let e = Expr::parse(src, &default_names(1), &ctx)?;
        Ok(integrate_set(&e, 0, &SetOneD::parse(set, &ctx)?, &ctx)?.to_string())
    }

    fn measure(src: &str) -> String {
        let ctx = Ctx::rational();
        measure_region(&Region::parse(src, &ctx).unwrap(), &ctx).unwrap().to_string()
    }

    #[test]
    fn examples() {
        assert_eq!(integral("1/x", "[1, t^(-1)]").unwrap(), "X");
        assert_eq!(integral("1", "[0, 1 + t]").unwrap(), "1 + t");
        assert_eq!(integral("1/(pi*(1 + x^2))", "]-inf, inf[").unwrap(), "1");
        assert_eq!(integral("x^(-1/2)", "[0, 1]").unwrap(), "2");
        assert_eq!(integral("abs(x)", "[-1, 1]").unwrap(), "1");
        assert!(matches!(integral("1/x", "[0, 1]"), Err(Error::DivergentIntegral(_))));
        assert!(matches!(integral("1/x^2", "[-1, 1]"), Err(Error::DivergentIntegral(_))));
    }

    #[test]
    fn measures() {
        assert_eq!(measure("[0, t^(-1/2)]"), "t^(-1/2)");
        assert_eq!(measure("{0} u {1}"), "0");
        assert_eq!(measure("[0, inf["), "infinite");
        assert_eq!(measure("region x in [-1, 1]; y in [-sqrt(1 - x^2), sqrt(1 - x^2)]"), "pi");
        assert_eq!(measure("region x in [-t, t]; y in [-1/t, 1/t]"), "4");
        assert_eq!(measure("region x in [1, t^(-1)]; y in [0, 1/x]"), "X");
    }

    #[test]
    fn fubini_hyperbola() {
        let ctx = Ctx::rational();
        let r = Region::parse("region x in [1, t^(-1)]; y in [1, t^(-1)]", &ctx).unwrap();
        let e = Expr::parse("1/(x*y)", &r.names, &ctx).unwrap();
        assert_eq!(integrate_region(&e, &r, &ctx).unwrap().to_string(), "X^2");
    }
}
