//! Univariate polynomials with series coefficients (lowest degree first).

use crate::constants::Q;
use crate::error::{Error, Result};
use crate::series::{Ctx, Series};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

pub type Poly = Vec<Series>;

pub fn trim(mut p: Poly) -> Poly {
    while p.last().map(Series::is_zero).unwrap_or(false) {
        p.pop();
    }
    p
}

pub fn degree(p: &[Series]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn eval(p: &[Series], x: &Series, ctx: &Ctx) -> Series {
    let mut acc = Series::zero(&ctx.group);
    for c in p.iter().rev() {
        acc = acc.mul(x).add(c).truncate(&ctx.target);
    }
    acc
}

pub fn derivative(p: &[Series]) -> Poly {
    trim(p.iter().enumerate().skip(1).map(|(k, c)| c.scale_q(&Q::from_integer(BigInt::from(k)))).collect())
}

pub fn mul(a: &[Series], b: &[Series], ctx: &Ctx) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Series::zero(&ctx.group); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    trim(out)
}

/// Long division; returns (quotient, remainder).
pub fn divmod(a: &[Series], b: &[Series], ctx: &Ctx) -> Result<(Poly, Poly)> {
    let db = degree(b).ok_or(Error::DivisionByZero)?;
    let lead = &b[db];
    let mut r: Poly = trim(a.to_vec());
    let n = r.len();
    if n <= db {
        return Ok((Vec::new(), r));
    }
    let mut quo = vec![Series::zero(&ctx.group); n - db];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = r[dr].div(lead, &ctx.target)?;
        for (k, bk) in b.iter().enumerate().take(db + 1) {
            r[dr - db + k] = r[dr - db + k].sub(&c.mul(bk)).truncate(&ctx.target);
        }
        r[dr] = Series::zero(&ctx.group);
        quo[dr - db] = c;
        r = trim(r);
    }
    Ok((trim(quo), r))
}

fn rational_coeffs(p: &[Series]) -> Option<Vec<Q>> {
    p.iter().map(|c| c.as_rational()).collect()
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let Some(m) = n.to_u64() else { return Vec::new() };
    if m == 0 || m > 1_000_000 {
        return Vec::new();
    }
    (1..=m).filter(|d| m % d == 0).map(BigInt::from).collect()
}

/// Rational roots of a polynomial with rational coefficients.
fn rational_roots(p: &[Q]) -> Vec<Q> {
    let mut l = BigInt::one();
    for c in p {
        l = l.lcm(c.denom());
    }
    let ints: Vec<BigInt> = p.iter().map(|c| (c * Q::from_integer(l.clone())).to_integer()).collect();
    let Some(lo) = ints.iter().position(|c| !c.is_zero()) else { return Vec::new() };
    let mut out = Vec::new();
    if lo > 0 {
        out.push(Q::zero());
    }
    let a0 = &ints[lo];
    let an = ints.last().unwrap();
    for pn in divisors(a0) {
        for qd in divisors(an) {
            for s in [1i64, -1] {
                let cand = Q::new(&pn * BigInt::from(s), qd.clone());
                if out.contains(&cand) {
                    continue;
                }
                let mut acc = Q::zero();
                for c in ints.iter().rev() {
                    acc = acc * &cand + Q::from_integer(c.clone());
                }
                if acc.is_zero() {
                    out.push(cand);
                }
            }
        }
    }
    out
}

/// Distinct real roots in increasing order.
///
/// Degree ≤ 2 in general; higher degrees only when every root can be peeled off
/// rationally (or at 0) down to a quadratic.
pub fn real_roots(p: &[Series], ctx: &Ctx) -> Result<Vec<Series>> {
    let p = trim(p.to_vec());
    let d = degree(&p).ok_or(Error::ZeroPolynomial)?;
    let mut roots = match d {
        0 => Vec::new(),
        1 => vec![p[0].neg().div(&p[1], &ctx.target)?],
        2 => quadratic_roots(&p[2], &p[1], &p[0], ctx)?,
        _ => {
            let mut found: Option<Series> = None;
            if p[0].is_zero() {
                found = Some(Series::zero(&ctx.group));
            } else if let Some(rq) = rational_coeffs(&p) {
                found = rational_roots(&rq).into_iter().next().map(|r| Series::rational(&ctx.group, r));
            }
            let Some(r) = found else {
                return Err(Error::NonlinearFactorRequired(format!("polynomial of degree {d}")));
            };
            let lin = vec![r.neg(), Series::one(&ctx.group)];
            let (quo, rem) = divmod(&p, &lin, ctx)?;
            debug_assert!(rem.is_empty());
            let mut rest = real_roots(&quo, ctx)?;
            rest.push(r);
            rest
        }
    };
    sort_dedup(&mut roots)?;
    Ok(roots)
}

pub fn sort_dedup(v: &mut Vec<Series>) -> Result<()> {
    let mut err = None;
    v.sort_by(|a, b| match a.compare(b) {
        Ok(o) => o,
        Err(e) => {
            err.get_or_insert(e);
            Ordering::Equal
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    v.dedup_by(|a, b| a.compare(b).map(|o| o == Ordering::Equal).unwrap_or(false));
    Ok(())
}

pub fn discriminant(a: &Series, b: &Series, c: &Series) -> Series {
    b.mul(b).sub(&a.mul(c).scale_q(&Q::from_integer(BigInt::from(4))))
}

pub fn quadratic_roots(a: &Series, b: &Series, c: &Series, ctx: &Ctx) -> Result<Vec<Series>> {
    let disc = discriminant(a, b, c).truncate(&ctx.target);
    let two_a = a.scale_q(&Q::from_integer(BigInt::from(2)));
    match disc.sign()? {
        Ordering::Less => Ok(Vec::new()),
        Ordering::Equal => Ok(vec![b.neg().div(&two_a, &ctx.target)?]),
        Ordering::Greater => {
            let r = disc.sqrt(&ctx.target)?;
            let x1 = b.neg().sub(&r).div(&two_a, &ctx.target)?;
            let x2 = b.neg().add(&r).div(&two_a, &ctx.target)?;
            Ok(vec![x1, x2])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots() {
        let c = Ctx::rational();
        let p = vec![c.int(-1), c.int(0), c.int(1)];
        let r = real_roots(&p, &c).unwrap();
        assert_eq!(r.iter().map(|s| s.to_string()).collect::<Vec<_>>(), ["-1", "1"]);
        let cubic = vec![c.int(0), c.int(-1), c.int(0), c.int(1)];
        assert_eq!(real_roots(&cubic, &c).unwrap().len(), 3);
        let p = vec![c.series("t^2").unwrap(), c.int(0), c.int(1)];
        assert!(real_roots(&p, &c).unwrap().is_empty());
        let p = vec![c.series("-t^2").unwrap(), c.int(0), c.int(1)];
        let r = real_roots(&p, &c).unwrap();
        assert_eq!(r[1].to_string(), "t");
        let irreducible = vec![c.int(2), c.int(0), c.int(0), c.int(1)];
        assert!(matches!(real_roots(&irreducible, &c), Err(Error::NonlinearFactorRequired(_))));
    }

    #[test]
    fn division() {
        let c = Ctx::rational();
        let a = vec![c.int(-1), c.int(0), c.int(0), c.int(1)];
        let b = vec![c.int(-1), c.int(1)];
        let (q, r) = divmod(&a, &b, &c).unwrap();
        assert!(r.is_empty());
        assert_eq!(q.iter().map(|s| s.to_string()).collect::<Vec<_>>(), ["1", "1", "1"]);
    }
}
