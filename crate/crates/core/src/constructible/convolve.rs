//! S_h g(x) = ∫ g(s) Φ_h(s − x) ds with Φ(s) = 1/(π(1 + s²)).

use crate::calculus::integrate::{critical_points, specialize};
use crate::constants::{RealConstant, Q};
use crate::error::{Error, Result};
use crate::semialg::expr::{Expr, Func};
use crate::series::{Ctx, Series};
use num_bigint::BigInt;
use num_integer::binomial;
use std::cmp::Ordering;

fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Φ(s)
pub fn cauchy_kernel(v: usize, ctx: &Ctx) -> Expr {
    let g = &ctx.group;
    let pi = Expr::real(g, RealConstant::pi());
    pi.mul(&Expr::int(g, 1).add(&Expr::var(v).pow(&qi(2), g), g), g).pow(&qi(-1), g)
}

/// ∫ w^k/(1 + w²) dw as an expression in `w`.
fn kernel_moment(k: usize, w: &Expr, ctx: &Ctx) -> Expr {
    let g = &ctx.group;
    match k {
        0 => Expr::func(Func::Atan, w.clone(), g),
        1 => Expr::func(Func::Log, Expr::int(g, 1).add(&w.pow(&qi(2), g), g), g).scale_q(&Q::new(1.into(), 2.into()), g),
        _ => w
            .pow(&qi(k as i64 - 1), g)
            .scale_q(&Q::new(1.into(), BigInt::from(k - 1)), g)
            .sub(&kernel_moment(k - 2, w, ctx), g),
    }
}

/// Polynomial pieces of g between consecutive breakpoints; the outer pieces must vanish.
fn pieces(gx: &Expr, ctx: &Ctx) -> Result<Vec<(Series, Series, Vec<Series>)>> {
    let g = &ctx.group;
    let cuts = critical_points(gx, 0, ctx)?;
    let one = Series::one(g);
    let poly_at = |m: &Series| -> Result<Vec<Series>> {
        specialize(gx, 0, m, ctx)?
            .simplify(g)
            .as_series_poly(0, g)
            .ok_or_else(|| Error::unsupported("convolution needs a piecewise polynomial"))
    };
    let (Some(first), Some(last)) = (cuts.first(), cuts.last()) else {
        return if poly_at(&Series::zero(g))?.iter().all(Series::is_zero) {
            Ok(Vec::new())
        } else {
            Err(Error::unsupported("convolution needs bounded support"))
        };
    };
    for outer in [first.sub(&one), last.add(&one)] {
        if !poly_at(&outer)?.iter().all(Series::is_zero) {
            return Err(Error::unsupported("convolution needs bounded support"));
        }
    }
    let half = Q::new(1.into(), 2.into());
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let p = poly_at(&w[0].add(&w[1]).scale_q(&half))?;
        if !p.iter().all(Series::is_zero) {
            out.push((w[0].clone(), w[1].clone(), p));
        }
    }
    Ok(out)
}

/// Closed form of S_h g as an expression in x = var 0.
pub fn convolve(gx: &Expr, h: &Series, ctx: &Ctx) -> Result<Expr> {
    let g = &ctx.group;
    if h.sign()? != Ordering::Greater {
        return Err(Error::domain("the smoothing width must be positive"));
    }
    if gx.max_var().is_some_and(|m| m > 0) {
        return Err(Error::unsupported("convolution acts on functions of one variable"));
    }
    let x = Expr::var(0);
    let hinv = Expr::series(h.inv(&ctx.target)?);
    let mut total = Vec::new();
    for (a, b, p) in pieces(gx, ctx)? {
        let wa = Expr::series(a).sub(&x, g).mul(&hinv, g);
        let wb = Expr::series(b).sub(&x, g).mul(&hinv, g);
        // p(x + h w) = Σ_k c_k(x) w^k
        for k in 0..p.len() {
            let mut ck = Vec::new();
            for i in k..p.len() {
                let c = p[i].scale_q(&Q::from_integer(binomial(BigInt::from(i), BigInt::from(k))));
                ck.push(Expr::series(c).mul(&x.pow(&qi((i - k) as i64), g), g));
            }
            let hk = Expr::series(h.pow_int(k as i64, &ctx.target)?);
            let coeff = Expr::sum(ck, g).mul(&hk, g);
            let diff = kernel_moment(k, &wb, ctx).sub(&kernel_moment(k, &wa, ctx), g);
            total.push(coeff.mul(&diff, g));
        }
    }
    let pi_inv = Expr::real(g, RealConstant::pi()).pow(&qi(-1), g);
    Ok(Expr::sum(total, g).mul(&pi_inv, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::checks::agree;
    use crate::semialg::expr::default_names;

    #[test]
    fn indicator() {
        let ctx = Ctx::rational();
        let g = &ctx.group;
        let ind = Expr::parse("piecewise(x < -1: 0, x <= 1: 1, 0)", &default_names(1), &ctx).unwrap();
        let h = ctx.int(2);
        let s = convolve(&ind, &h, &ctx).unwrap();
        let want = Expr::parse("(arctan((1 - x)/2) + arctan((1 + x)/2))/pi", &default_names(1), &ctx).unwrap();
        for p in [0, 1, 3, -5] {
            let pt = [ctx.int(p)];
            assert!(agree(&s.eval(&pt, &ctx).unwrap(), &want.eval(&pt, &ctx).unwrap(), &ctx), "at {p}");
        }
        let zero = Expr::int(g, 0);
        assert!(convolve(&zero, &h, &ctx).unwrap().is_zero());
    }

    #[test]
    fn refuses_unbounded_support() {
        let ctx = Ctx::rational();
        let e = Expr::parse("piecewise(x < 0: 0, 1)", &default_names(1), &ctx).unwrap();
        assert!(matches!(convolve(&e, &ctx.int(1), &ctx), Err(Error::UnsupportedIntegrand { .. })));
    }
}
