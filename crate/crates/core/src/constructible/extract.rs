//! Splitting f = Σ h_j X^j on an interval or at a point.

use crate::calculus::checks::agree;
use crate::constants::Q;
use crate::error::{Error, Result};
use crate::semialg::expr::{Expr, Func};
use crate::semialg::set::Component;
use crate::series::{Ctx, Series};
use num_bigint::BigInt;
use num_traits::Zero;

fn failed(msg: impl Into<String>) -> Error {
    Error::ExtractionFailed(msg.into())
}

/// Returns h_0, …, h_N with f = Σ h_j X^j on `k`.
pub fn extract_coefficients(f: &Expr, v: usize, k: &Component, ctx: &Ctx) -> Result<Vec<Expr>> {
    match k {
        Component::Point(p) => pointwise(f, p, ctx),
        Component::Interval { lo, hi, .. } => {
            let (Some(a), Some(b)) = (lo.finite(), hi.finite()) else {
                return Err(failed("coefficient extraction needs a bounded interval"));
            };
            on_interval(f, v, a, b, ctx)
        }
    }
}

fn pointwise(f: &Expr, p: &Series, ctx: &Ctx) -> Result<Vec<Expr>> {
    let val = f.eval(std::slice::from_ref(p), ctx).map_err(|e| failed(format!("f is undefined at {p}: {e}")))?;
    let n = val.coeffs().len().max(1);
    Ok((0..n).map(|j| Expr::series(val.coeff(j))).collect())
}

fn samples(a: &Series, b: &Series) -> Vec<Series> {
    let span = b.sub(a);
    [0, 1, 2, 3, 4].iter().map(|i| a.add(&span.scale_q(&Q::new(BigInt::from(*i), BigInt::from(4))))).collect()
}

struct Lift<'a> {
    ctx: &'a Ctx,
    v: usize,
    marker: usize,
    pts: Vec<Series>,
}

impl Lift<'_> {
    /// Order of `u` on the interval, required to be the same at every sample.
    fn order(&self, u: &Expr) -> Result<crate::exponents::Exponent> {
        let mut ord = None;
        for p in &self.pts {
            let mut pt = vec![Series::zero(&self.ctx.group); self.v + 1];
            pt[self.v] = p.clone();
            let val = u.eval(&pt, self.ctx)?;
            let s = val.as_series().ok_or_else(|| failed("log argument involves X"))?;
            let o = s.ord()?;
            match &ord {
                None => ord = Some(o),
                Some(prev) if *prev != o => return Err(failed("order of a log argument varies on the interval")),
                _ => {}
            }
        }
        ord.ok_or_else(|| failed("empty interval"))
    }

    fn lift(&self, e: &Expr) -> Result<Expr> {
        let g = &self.ctx.group;
        let m = self.marker;
        Ok(match e {
            Expr::Const(a) => {
                let parts = a
                    .coeffs()
                    .iter()
                    .enumerate()
                    .map(|(k, c)| Expr::series(c.clone()).mul(&Expr::var(m).pow(&Q::from_integer(BigInt::from(k)), g), g))
                    .collect();
                Expr::sum(parts, g)
            }
            Expr::Var(_) => e.clone(),
            Expr::Add(xs) => Expr::sum(xs.iter().map(|x| self.lift(x)).collect::<Result<_>>()?, g),
            Expr::Mul(xs) => Expr::product(xs.iter().map(|x| self.lift(x)).collect::<Result<_>>()?, g),
            Expr::Pow(b, q) => {
                let lb = self.lift(b)?;
                if lb.depends_on(m) && !(q.is_integer() && *q >= Q::zero()) {
                    return Err(failed("X under a non-polynomial power"));
                }
                lb.pow(q, g)
            }
            Expr::Fn(Func::Log, u) => {
                let lu = self.lift(u)?;
                if lu.depends_on(m) {
                    return Err(failed("X inside a logarithm"));
                }
                if !u.depends_on(self.v) {
                    return Ok(Expr::func(Func::Log, lu, g));
                }
                let ord = self.order(u)?;
                if ord.is_zero() {
                    return Ok(Expr::func(Func::Log, lu, g));
                }
                // log u = −ord·X + log(t^{−ord} u)
                let q = ord.as_rational().ok_or_else(|| failed("irrational order of a log argument"))?;
                let shift = Series::t_pow(g, -q.clone());
                let rest = Expr::func(Func::Log, Expr::series(shift).mul(&lu, g), g);
                Expr::var(m).scale_q(&-q, g).add(&rest, g)
            }
            Expr::Fn(Func::Exp, u) => {
                let lu = self.lift(u)?;
                if !lu.depends_on(m) {
                    return Ok(Expr::func(Func::Exp, lu, g));
                }
                let p = lu.as_poly(m, g).filter(|p| p.len() == 2).ok_or_else(|| failed("X inside exp"))?;
                let a = p[1].as_rational().ok_or_else(|| failed("non-rational X coefficient inside exp"))?;
                Expr::series(Series::t_pow(g, -a)).mul(&Expr::func(Func::Exp, p[0].clone(), g), g)
            }
            Expr::Fn(f, u) => {
                let lu = self.lift(u)?;
                if lu.depends_on(m) {
                    return Err(failed(format!("X inside {}", f.name())));
                }
                Expr::func(*f, lu, g)
            }
            Expr::Piecewise(bs, d) => {
                let mut nb = Vec::new();
                for (gd, x) in bs {
                    if self.lift(&gd.expr)?.depends_on(m) {
                        return Err(failed("X in a case condition"));
                    }
                    nb.push((gd.clone(), self.lift(x)?));
                }
                Expr::piecewise(nb, self.lift(d)?)
            }
        })
    }
}

fn on_interval(f: &Expr, v: usize, a: &Series, b: &Series, ctx: &Ctx) -> Result<Vec<Expr>> {
    let g = &ctx.group;
    let marker = f.max_var().map_or(v + 1, |m| m.max(v) + 1);
    let pts = samples(a, b);
    let lift = Lift { ctx, v, marker, pts: pts.clone() };
    let lifted = lift.lift(f)?;
    let coeffs = lifted.as_poly(marker, g).ok_or_else(|| failed("not polynomial in X"))?;
    // reconstruction at the samples
    for p in &pts {
        let mut pt = vec![Series::zero(g); v + 1];
        pt[v] = p.clone();
        let direct = f.eval(&pt, ctx)?;
        let mut rebuilt = crate::algebra::AlgebraElement::zero(g);
        for (j, h) in coeffs.iter().enumerate() {
            let val = h.eval(&pt, ctx)?;
            let xj = crate::algebra::AlgebraElement::x_pow(g, j);
            rebuilt = rebuilt.add(&val.mul(&xj));
        }
        if !agree(&direct, &rebuilt, ctx) {
            return Err(failed(format!("reconstruction differs at {p}")));
        }
    }
    Ok(if coeffs.is_empty() { vec![Expr::int(g, 0)] } else { coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semialg::expr::default_names;

    fn ex(src: &str, k: &str) -> Result<Vec<String>> {
        let ctx = Ctx::rational();
        let f = Expr::parse(src, &default_names(1), &ctx)?;
        let s = crate::semialg::set::SetOneD::parse(k, &ctx)?;
        Ok(extract_coefficients(&f, 0, &s.components[0], &ctx)?.iter().map(|e| e.to_string()).collect())
    }

    #[test]
    fn split() {
        assert_eq!(ex("x + x^2*X", "[0, 1]").unwrap(), vec!["x", "x^2"]);
        assert_eq!(ex("log(1 + x^2)", "[0, 1]").unwrap(), vec!["log(x^2 + 1)"]);
        assert_eq!(ex("log(x/t)", "[1, 2]").unwrap(), vec!["log(x)", "1"]);
        assert_eq!(ex("x*X + X^2", "{2}").unwrap(), vec!["0", "2", "1"]);
        assert!(matches!(ex("log(x)", "[t, 1]"), Err(Error::ExtractionFailed(_))));
    }
}
