//! Limits of constructible functions at ±∞ and at points.

use super::asym::{Asym, Expander};
use crate::algebra::AlgebraElement;
use crate::constants::Q;
use crate::error::{Error, Result};
use crate::exponents::Group;
use crate::semialg::expr::Expr;
use crate::series::{Ctx, Series};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Limit {
    Finite(AlgebraElement),
    PosInf,
    NegInf,
    NoLimit,
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::Finite(a) => write!(f, "{a}"),
            Limit::PosInf => write!(f, "+inf"),
            Limit::NegInf => write!(f, "-inf"),
            Limit::NoLimit => write!(f, "no-limit"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

pub const FLOORS: [i64; 3] = [-2, -6, -16];

/// Expansion at +∞ with the first floor that decides the limit.
pub fn expansion_at_infinity(f: &Expr, v: usize, ctx: &Ctx) -> Result<Asym> {
    let mut last = None;
    for fl in FLOORS {
        let ex = Expander { ctx, v, floor: Q::from_integer(BigInt::from(fl)) };
        match ex.expand(f) {
            Ok(a) => {
                if verdict(&a, &ctx.group)?.is_some() {
                    return Ok(a);
                }
                last = Some(Ok(a));
            }
            Err(Error::PrecisionExhausted(m)) => last = Some(Err(Error::PrecisionExhausted(m))),
            Err(e) => return Err(e),
        }
    }
    last.unwrap_or_else(|| Err(Error::precision("no expansion")))
}

/// Limit from the dominant exponent pair (q, j).
pub fn verdict(a: &Asym, g: &Group) -> Result<Option<Limit>> {
    let Some(lead) = a.lead() else {
        return Ok(match &a.rem {
            Some(r) if !r.is_negative() => None,
            _ => Some(Limit::Finite(AlgebraElement::zero(g))),
        });
    };
    if lead.q.is_positive() {
        return Ok(Some(match lead.c.sign()? {
            Ordering::Greater => Limit::PosInf,
            _ => Limit::NegInf,
        }));
    }
    if lead.q.is_zero() && lead.j != 0 {
        return Ok(Some(Limit::NoLimit));
    }
    if lead.q.is_zero() {
        // a term x⁰(log x)^j with j < 0 has no limit either
        if a.terms.iter().any(|t| t.q.is_zero() && t.j < 0) {
            return Ok(Some(Limit::NoLimit));
        }
        return Ok(Some(Limit::Finite(lead.c.clone())));
    }
    Ok(Some(Limit::Finite(AlgebraElement::zero(g))))
}

fn single_variable(f: &Expr, v: usize) -> Result<()> {
    match f.max_var() {
        Some(m) if (0..=m).any(|i| i != v && f.depends_on(i)) => {
            Err(Error::unsupported("limits are taken in one variable"))
        }
        _ => Ok(()),
    }
}

pub fn limit_at_infinity(f: &Expr, v: usize, ctx: &Ctx) -> Result<Limit> {
    single_variable(f, v)?;
    let a = expansion_at_infinity(f, v, ctx)?;
    verdict(&a, &ctx.group)?.ok_or_else(|| Error::precision("limit undecided at the deepest truncation"))
}

pub fn limit_at_neg_infinity(f: &Expr, v: usize, ctx: &Ctx) -> Result<Limit> {
    let g = &ctx.group;
    limit_at_infinity(&f.substitute(v, &Expr::Var(v).neg(g), g), v, ctx)
}

/// Substitutes x = a ± 1/u and lets u → ∞.
pub fn limit_at_point(f: &Expr, v: usize, a: &Series, side: Side, ctx: &Ctx) -> Result<Limit> {
    let g = &ctx.group;
    let step = Expr::Var(v).pow(&Q::from_integer(BigInt::from(-1)), g);
    let step = if side == Side::Left { step.neg(g) } else { step };
    let x = Expr::series(a.clone()).add(&step, g);
    limit_at_infinity(&f.substitute(v, &x, g), v, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semialg::expr::default_names;

    fn lim(src: &str) -> String {
        let ctx = Ctx::rational();
        let e = Expr::parse(src, &default_names(1), &ctx).unwrap();
        limit_at_infinity(&e, 0, &ctx).unwrap().to_string()
    }

    fn lim_at(src: &str, a: i64, side: Side) -> String {
        let ctx = Ctx::rational();
        let e = Expr::parse(src, &default_names(1), &ctx).unwrap();
        limit_at_point(&e, 0, &ctx.int(a), side, &ctx).unwrap().to_string()
    }

    #[test]
    fn at_infinity() {
        assert_eq!(lim("log(x)/x"), "0");
        assert_eq!(lim("2*arctan(x)/pi"), "1");
        assert_eq!(lim("log(x)"), "no-limit");
        assert_eq!(lim("x^2 - 5*x"), "+inf");
        assert_eq!(lim("t^(-1/x) - x"), "-inf");
        assert_eq!(lim("(x + 1)/x + X"), "X + 1");
        assert_eq!(lim("log(x + 1) - log(x)"), "0");
        assert_eq!(lim("sqrt(x^2 + 1) - x"), "0");
    }

    #[test]
    fn at_points() {
        assert_eq!(lim_at("(x^2 - 1)/(x - 1)", 1, Side::Right), "2");
        assert_eq!(lim_at("log(x)", 1, Side::Left), "0");
        assert_eq!(lim_at("1/x", 0, Side::Right), "+inf");
        assert_eq!(lim_at("1/x", 0, Side::Left), "-inf");
        assert_eq!(lim_at("log(abs(x))", 0, Side::Right), "no-limit");
    }
}
