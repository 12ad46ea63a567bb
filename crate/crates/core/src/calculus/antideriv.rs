//! Symbolic antiderivatives on the integrable fragment.

use crate::constants::Q;
use crate::error::{Error, Result};
use crate::exponents::Group;
use crate::semialg::expr::{poly_add, poly_mul, poly_trim, Expr, Func};
use crate::semialg::poly::{self as spoly, Poly};
use crate::series::{Ctx, Series};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

/// An antiderivative of `e` in variable `v`; case distinctions become piecewise branches.
pub fn antiderivative(e: &Expr, v: usize, ctx: &Ctx) -> Result<Expr> {
    Anti { v, ctx }.anti(&e.simplify(&ctx.group))
}

fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn half() -> Q {
    Q::new(BigInt::one(), BigInt::from(2))
}

fn unsupported(reason: impl Into<String>) -> Error {
    Error::unsupported(reason)
}

/// How a factor of a product depends on the integration variable.
enum Factor {
    Poly(Vec<Expr>),
    PolyPow(Vec<Expr>, Q),
    Other(Expr),
}

struct Anti<'a> {
    v: usize,
    ctx: &'a Ctx,
}

impl Anti<'_> {
    fn g(&self) -> &Group {
        &self.ctx.group
    }

    fn var(&self) -> Expr {
        Expr::Var(self.v)
    }

    fn anti(&self, e: &Expr) -> Result<Expr> {
        let g = self.g().clone();
        let v = self.v;
        if !e.depends_on(v) {
            return Ok(e.mul(&self.var(), &g));
        }
        if let Some((guard, yes, no)) = e.find_case(v, &g) {
            return Ok(Expr::piecewise(vec![(guard, self.anti(&yes)?)], self.anti(&no)?));
        }
        if let Expr::Add(ts) = e {
            let parts: Result<Vec<Expr>> = ts.iter().map(|t| self.anti(t)).collect();
            return Ok(Expr::sum(parts?, &g));
        }
        if let Expr::Piecewise(bs, d) = e {
            let mut nb = Vec::new();
            for (gd, x) in bs {
                nb.push((gd.clone(), self.anti(x)?));
            }
            return Ok(Expr::piecewise(nb, self.anti(d)?));
        }
        if let Some(p) = e.as_poly(v, &g) {
            return Ok(self.poly_anti(&p));
        }
        let factors = match e {
            Expr::Mul(fs) => fs.clone(),
            other => vec![other.clone()],
        };
        let (free, dep): (Vec<Expr>, Vec<Expr>) = factors.into_iter().partition(|f| !f.depends_on(v));
        let c = Expr::product(free, &g);
        // distribute over non-polynomial sums
        if let Some(i) = dep.iter().position(|f| matches!(f, Expr::Add(_)) && f.as_poly(v, &g).is_none()) {
            let Expr::Add(ts) = &dep[i] else { unreachable!() };
            let mut parts = Vec::new();
            for t in ts {
                let mut fs = dep.clone();
                fs[i] = t.clone();
                parts.push(self.anti(&Expr::product(fs, &g))?);
            }
            return Ok(c.mul(&Expr::sum(parts, &g), &g));
        }
        let core = self.anti_factors(&dep)?;
        Ok(c.mul(&core, &g))
    }

    fn poly_anti(&self, p: &[Expr]) -> Expr {
        let g = self.g();
        Expr::sum(
            p.iter()
                .enumerate()
                .map(|(k, c)| {
                    let k1 = (k + 1) as i64;
                    c.mul(&self.var().pow(&qi(k1), g), g).scale_q(&Q::new(BigInt::one(), BigInt::from(k1)), g)
                })
                .collect(),
            g,
        )
    }

    fn classify(&self, f: &Expr) -> Factor {
        let g = self.g();
        if let Some(p) = f.as_poly(self.v, g) {
            return Factor::Poly(p);
        }
        if let Expr::Pow(b, e) = f {
            if let Some(p) = b.as_poly(self.v, g) {
                return Factor::PolyPow(p, e.clone());
            }
        }
        Factor::Other(f.clone())
    }

    fn anti_factors(&self, fs: &[Expr]) -> Result<Expr> {
        let g = self.g().clone();
        let mut num = vec![Expr::int(&g, 1)];
        let mut pows: Vec<(Vec<Expr>, Q)> = Vec::new();
        let mut others: Vec<Expr> = Vec::new();
        for f in fs {
            match self.classify(f) {
                Factor::Poly(p) => num = poly_mul(&num, &p, &g),
                Factor::PolyPow(p, q) => pows.push((p, q)),
                Factor::Other(e) => others.push(e),
            }
        }
        let rendered = || Expr::product(fs.to_vec(), &g).key();
        if others.is_empty() {
            if pows.iter().all(|(_, q)| q.is_integer()) {
                let dens: Vec<(Vec<Expr>, u32)> = pows
                    .into_iter()
                    .map(|(p, q)| (p, (-q).to_integer().try_into().unwrap_or(0)))
                    .collect();
                return self.rational(&num, &dens);
            }
            if pows.len() == 1 {
                let (b, q) = pows.pop().unwrap();
                return self.poly_times_power(&num, &b, &q);
            }
            return Err(unsupported(format!("product of several radicals: {}", rendered())));
        }
        if others.len() == 1 && pows.is_empty() {
            return self.poly_times_function(&num, &others[0]);
        }
        Err(unsupported(format!("integrand outside the fragment: {}", rendered())))
    }

    // ------------------------------------------------------------ rational functions

    fn rational(&self, num: &[Expr], dens: &[(Vec<Expr>, u32)]) -> Result<Expr> {
        let g = self.g().clone();
        let dens: Vec<(Vec<Expr>, u32)> = dens.iter().filter(|(p, k)| *k > 0 && p.len() > 1).cloned().collect();
        if dens.is_empty() {
            return Ok(self.poly_anti(num));
        }
        if dens.len() == 1 {
            let (b, k) = &dens[0];
            if b.len() <= 3 {
                return self.poly_times_power(num, b, &qi(-(*k as i64)));
            }
        }
        let numeric = |p: &[Expr]| -> Option<Poly> { p.iter().map(Expr::as_series).collect() };
        let num_s = numeric(num);
        let dens_s: Option<Vec<(Poly, u32)>> = dens.iter().map(|(p, k)| numeric(p).map(|s| (s, *k))).collect();
        match (num_s, dens_s) {
            (Some(n), Some(d)) => self.partial_fractions(&n, &d),
            _ => {
                let _ = g;
                Err(unsupported("rational function with symbolic coefficients and several denominator factors"))
            }
        }
    }

    fn partial_fractions(&self, num: &Poly, dens: &[(Poly, u32)]) -> Result<Expr> {
        let ctx = self.ctx;
        let g = self.g().clone();
        let t = &ctx.target;
        let mut lead = Series::one(&g);
        let mut lin: Vec<(Series, u32)> = Vec::new();
        let mut quad: Vec<(Series, Series, u32)> = Vec::new();
        for (p, k) in dens {
            let d = spoly::degree(p).ok_or(Error::DivisionByZero)?;
            let lc = p[d].clone();
            lead = lead.mul(&lc.pow_int(*k as i64, t)?);
            let monic: Poly = p.iter().map(|c| c.div(&lc, t)).collect::<Result<_>>()?;
            for f in factor_monic(&monic, ctx)? {
                match f {
                    MonicFactor::Linear(r) => match lin.iter_mut().find(|(s, _)| s.compare(&r).map(|o| o == Ordering::Equal).unwrap_or(false)) {
                        Some(e) => e.1 += k,
                        None => lin.push((r, *k)),
                    },
                    MonicFactor::Quad(b, c) => match quad.iter_mut().find(|(b2, c2, _)| b2 == &b && c2 == &c) {
                        Some(e) => e.2 += k,
                        None => quad.push((b, c, *k)),
                    },
                }
            }
        }
        let lin_poly = |r: &Series| vec![r.neg(), Series::one(&g)];
        let quad_poly = |b: &Series, c: &Series| vec![c.clone(), b.clone(), Series::one(&g)];
        let pow_poly = |p: &Poly, k: u32| -> Poly {
            let mut acc = vec![Series::one(&g)];
            for _ in 0..k {
                acc = spoly::mul(&acc, p, ctx);
            }
            acc
        };
        let mut dtil = vec![Series::one(&g)];
        for (r, m) in &lin {
            dtil = spoly::mul(&dtil, &pow_poly(&lin_poly(r), *m), ctx);
        }
        for (b, c, m) in &quad {
            dtil = spoly::mul(&dtil, &pow_poly(&quad_poly(b, c), *m), ctx);
        }
        let num_n: Poly = num.iter().map(|c| c.div(&lead, t)).collect::<Result<_>>()?;
        let (quo, rem) = spoly::divmod(&num_n, &dtil, ctx)?;
        let n = spoly::degree(&dtil).unwrap_or(0);
        // basis columns and how to rebuild each piece
        enum Piece {
            Lin(usize, u32),
            QuadConst(usize, u32),
            QuadLin(usize, u32),
        }
        let mut cols: Vec<Poly> = Vec::new();
        let mut pieces = Vec::new();
        let others = |skip_lin: Option<usize>, skip_quad: Option<usize>, lin_exp: u32, quad_exp: u32| -> Poly {
            let mut acc = vec![Series::one(&g)];
            for (i, (r, m)) in lin.iter().enumerate() {
                let e = if Some(i) == skip_lin { *m - lin_exp } else { *m };
                acc = spoly::mul(&acc, &pow_poly(&lin_poly(r), e), ctx);
            }
            for (i, (b, c, m)) in quad.iter().enumerate() {
                let e = if Some(i) == skip_quad { *m - quad_exp } else { *m };
                acc = spoly::mul(&acc, &pow_poly(&quad_poly(b, c), e), ctx);
            }
            acc
        };
        for (i, (_, m)) in lin.iter().enumerate() {
            for j in 1..=*m {
                cols.push(others(Some(i), None, j, 0));
                pieces.push(Piece::Lin(i, j));
            }
        }
        for (i, (_, _, m)) in quad.iter().enumerate() {
            for j in 1..=*m {
                let base = others(None, Some(i), 0, j);
                let shifted = spoly::mul(&base, &[Series::zero(&g), Series::one(&g)], ctx);
                cols.push(base);
                pieces.push(Piece::QuadConst(i, j));
                cols.push(shifted);
                pieces.push(Piece::QuadLin(i, j));
            }
        }
        let coeffs = solve(&cols, &rem, n, ctx)?;
        let x = self.var();
        let mut parts = vec![self.poly_anti(&quo.iter().cloned().map(Expr::series).collect::<Vec<_>>())];
        let mut quad_acc: Vec<(Series, Series)> = vec![(Series::zero(&g), Series::zero(&g)); quad.len() * 64];
        let mut quad_idx: Vec<(usize, u32)> = Vec::new();
        for (piece, c) in pieces.iter().zip(coeffs) {
            match piece {
                Piece::Lin(i, j) => {
                    if c.is_zero() {
                        continue;
                    }
                    let base = vec![Expr::series(lin[*i].0.neg()), Expr::int(&g, 1)];
                    parts.push(self.poly_times_power(&[Expr::series(c)], &base, &qi(-(*j as i64)))?);
                }
                Piece::QuadConst(i, j) | Piece::QuadLin(i, j) => {
                    let slot = i * 64 + *j as usize;
                    if !quad_idx.contains(&(*i, *j)) {
                        quad_idx.push((*i, *j));
                    }
                    if matches!(piece, Piece::QuadConst(..)) {
                        quad_acc[slot].0 = c;
                    } else {
                        quad_acc[slot].1 = c;
                    }
                }
            }
        }
        for (i, j) in quad_idx {
            let (c0, c1) = &quad_acc[i * 64 + j as usize];
            if c0.is_zero() && c1.is_zero() {
                continue;
            }
            let (b, c, _) = &quad[i];
            let base = vec![Expr::series(c.clone()), Expr::series(b.clone()), Expr::int(&g, 1)];
            let numer = vec![Expr::series(c0.clone()), Expr::series(c1.clone())];
            parts.push(self.poly_times_power(&numer, &base, &qi(-(j as i64)))?);
        }
        let _ = x;
        Ok(Expr::sum(parts, &g))
    }

    // ------------------------------------------------------------ P(v)·B(v)^q

    fn poly_times_power(&self, num: &[Expr], b: &[Expr], q: &Q) -> Result<Expr> {
        let g = self.g().clone();
        let b = poly_trim(b.to_vec());
        match b.len() {
            0 => Err(Error::DivisionByZero),
            1 => Ok(self.poly_anti(num).mul(&b[0].pow(q, &g), &g)),
            2 => self.linear_power(num, &b[1], &b[0], q),
            3 => {
                if num.len() <= 2 {
                    return self.quadratic_power(num, &b, q);
                }
                // B-adic expansion: num = Σ r_j B^j with deg r_j ≤ 1
                let mut parts = Vec::new();
                let mut rest = num.to_vec();
                let mut j: i64 = 0;
                while !rest.is_empty() {
                    let (quo, rem) = expr_divmod(&rest, &b, &g)?;
                    if !rem.is_empty() {
                        let e = q + qi(j);
                        if e.is_integer() && !e.is_negative() {
                            let bp = pow_poly_expr(&b, e.to_integer().try_into().unwrap(), &g);
                            parts.push(self.poly_anti(&poly_mul(&rem, &bp, &g)));
                        } else {
                            parts.push(self.quadratic_power(&rem, &b, &e)?);
                        }
                    }
                    rest = quo;
                    j += 1;
                }
                Ok(Expr::sum(parts, &g))
            }
            _ => Err(Error::NonlinearFactorRequired(format!(
                "denominator of degree {} in {}",
                b.len() - 1,
                Expr::from_poly(&b, self.v, &g).key()
            ))),
        }
    }

    /// ∫ P(v)·(αv+β)^q dv through w = αv+β.
    fn linear_power(&self, num: &[Expr], alpha: &Expr, beta: &Expr, q: &Q) -> Result<Expr> {
        let g = self.g().clone();
        let w = Expr::from_poly(&[beta.clone(), alpha.clone()], self.v, &g);
        let inv_a = Expr::int(&g, 1).div(alpha, &g);
        // v = (w − β)/α
        let sub = vec![beta.neg(&g).mul(&inv_a, &g), inv_a.clone()];
        let pw = compose(num, &sub, &g);
        let mut parts = Vec::new();
        for (k, c) in pw.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = qi(k as i64) + q;
            let term = if e == qi(-1) {
                Expr::func(Func::Log, Expr::func(Func::Abs, w.clone(), &g), &g)
            } else {
                let e1 = &e + Q::one();
                w.pow(&e1, &g).scale_q(&(Q::one() / e1), &g)
            };
            parts.push(c.mul(&term, &g).mul(&inv_a, &g));
        }
        Ok(Expr::sum(parts, &g))
    }

    /// ∫ (p₀ + p₁v)·(a₂v² + a₁v + a₀)^q dv by completing the square.
    fn quadratic_power(&self, num: &[Expr], b: &[Expr], q: &Q) -> Result<Expr> {
        let g = self.g().clone();
        let (a0, a1, a2) = (&b[0], &b[1], &b[2]);
        let s = a2.sign_hint().ok_or_else(|| unsupported(format!("sign of {} is not evident", a2.key())))?;
        let s = match s {
            Ordering::Greater => 1i64,
            Ordering::Less => -1,
            Ordering::Equal => return self.linear_power(num, a1, a0, q),
        };
        let abs_a2 = a2.scale_q(&qi(s), &g);
        let shift = a1.div(&a2.scale_q(&qi(2), &g), &g);
        let w = self.var().add(&shift, &g);
        let a = a0.sub(&a1.pow(&qi(2), &g).div(&a2.scale_q(&qi(4), &g), &g), &g).div(&abs_a2, &g);
        let p0 = num.first().cloned().unwrap_or_else(|| Expr::int(&g, 0));
        let p1 = num.get(1).cloned().unwrap_or_else(|| Expr::int(&g, 0));
        let c0 = p0.sub(&p1.mul(&shift, &g), &g);
        let r = w.pow(&qi(2), &g).scale_q(&qi(s), &g).add(&a, &g);
        let mut parts = Vec::new();
        if !p1.is_zero() {
            let t = if *q == qi(-1) {
                Expr::func(Func::Log, Expr::func(Func::Abs, r.clone(), &g), &g).scale_q(&Q::new(BigInt::one(), BigInt::from(2 * s)), &g)
            } else {
                let q1 = q + Q::one();
                r.pow(&q1, &g).scale_q(&(Q::one() / (q1 * qi(2 * s))), &g)
            };
            parts.push(p1.mul(&t, &g));
        }
        if !c0.is_zero() {
            parts.push(c0.mul(&self.square_power(&w, s, &a, q)?, &g));
        }
        Ok(abs_a2.pow(q, &g).mul(&Expr::sum(parts, &g), &g))
    }

    /// ∫ (s·w² + A)^q dw with reduction to q ∈ {0, −1, −1/2}.
    fn square_power(&self, w: &Expr, s: i64, a: &Expr, q: &Q) -> Result<Expr> {
        let g = self.g().clone();
        let r = w.pow(&qi(2), &g).scale_q(&qi(s), &g).add(a, &g);
        if a.is_zero() {
            if !q.is_integer() {
                return Err(unsupported("fractional power of a perfect square"));
            }
            let e = q * qi(2) + Q::one();
            let sign = if s < 0 && !(q.to_integer() % BigInt::from(2)).is_zero() { -1 } else { 1 };
            return Ok(if e.is_zero() {
                Expr::func(Func::Log, Expr::func(Func::Abs, w.clone(), &g), &g).scale_q(&qi(sign), &g)
            } else {
                w.pow(&e, &g).scale_q(&(qi(sign) / e), &g)
            });
        }
        let two_q = q * qi(2);
        if !two_q.is_integer() {
            return Err(unsupported(format!("power {q} of a quadratic")));
        }
        if q.is_zero() {
            return Ok(w.clone());
        }
        if *q == qi(-1) || *q == -half() {
            let sa = a.sign_hint().ok_or_else(|| unsupported(format!("sign of {} is not evident", a.key())))?;
            let pos = sa == Ordering::Greater;
            let k = if pos { a.sqrt(&g) } else { a.neg(&g).sqrt(&g) };
            let log_abs = |x: Expr| Expr::func(Func::Log, Expr::func(Func::Abs, x, &g), &g);
            if *q == qi(-1) {
                return Ok(match (s, pos) {
                    (1, true) | (-1, false) => {
                        let at = Expr::func(Func::Atan, w.div(&k, &g), &g).div(&k, &g);
                        if s == 1 { at } else { at.neg(&g) }
                    }
                    _ => {
                        // 1/(w² − K²) = (1/2K)(1/(w − K) − 1/(w + K))
                        let l = log_abs(w.sub(&k, &g)).sub(&log_abs(w.add(&k, &g)), &g).div(&k.scale_q(&qi(2), &g), &g);
                        if s == 1 { l } else { l.neg(&g) }
                    }
                });
            }
            return match s {
                1 => Ok(log_abs(w.add(&r.sqrt(&g), &g))),
                _ if pos => Ok(Expr::func(Func::Asin, w.div(&k, &g), &g)),
                _ => Err(Error::domain("square root of a negative quadratic")),
            };
        }
        if *q < qi(-1) {
            // 2(q+1)A ∫R^q = (2q+3)∫R^{q+1} − w R^{q+1}
            let q1 = q + Q::one();
            let inner = self.square_power(w, s, a, &q1)?;
            let num = inner.scale_q(&(&two_q + qi(3)), &g).sub(&w.mul(&r.pow(&q1, &g), &g), &g);
            return Ok(num.div(&a.scale_q(&(q1 * qi(2)), &g), &g));
        }
        // ∫R^q = (w R^q + 2qA ∫R^{q−1})/(2q+1)
        let inner = self.square_power(w, s, a, &(q - Q::one()))?;
        let num = w.mul(&r.pow(q, &g), &g).add(&inner.mul(a, &g).scale_q(&two_q, &g), &g);
        Ok(num.scale_q(&(Q::one() / (two_q + Q::one())), &g))
    }

    // ------------------------------------------------------------ transcendental factors

    fn poly_times_function(&self, num: &[Expr], f: &Expr) -> Result<Expr> {
        let g = self.g().clone();
        let v = self.v;
        let linear = |u: &Expr| -> Option<(Expr, Expr)> {
            let p = u.as_poly(v, &g)?;
            (p.len() == 2).then(|| (p[1].clone(), p[0].clone()))
        };
        let fail = || unsupported(format!("integrand outside the fragment: {}", Expr::from_poly(num, v, &g).mul(f, &g).key()));
        match f {
            Expr::Fn(Func::Log, u) => {
                let (inner, wrapped) = match &**u {
                    Expr::Fn(Func::Abs, x) => ((**x).clone(), true),
                    x => (x.clone(), false),
                };
                if let Expr::Mul(fs) = &inner {
                    let logs = fs.iter().map(|x| Expr::func(Func::Log, Expr::func(Func::Abs, x.clone(), &g), &g)).collect();
                    let _ = wrapped;
                    return self.anti(&Expr::from_poly(num, v, &g).mul(&Expr::sum(logs, &g), &g));
                }
                if let Some((alpha, beta)) = linear(&inner) {
                    let w = Expr::from_poly(&[beta.clone(), alpha.clone()], v, &g);
                    let inv_a = Expr::int(&g, 1).div(&alpha, &g);
                    let sub = vec![beta.neg(&g).mul(&inv_a, &g), inv_a.clone()];
                    let pw = compose(num, &sub, &g);
                    let lw = f.clone();
                    let mut parts = Vec::new();
                    for (k, c) in pw.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        let k1 = qi(k as i64 + 1);
                        let wk = w.pow(&k1, &g);
                        let term = wk.mul(&lw, &g).scale_q(&(Q::one() / &k1), &g).sub(&wk.scale_q(&(Q::one() / (&k1 * &k1)), &g), &g);
                        parts.push(c.mul(&term, &g));
                    }
                    return Ok(Expr::sum(parts, &g).mul(&inv_a, &g));
                }
                if let Some(p) = inner.as_poly(v, &g) {
                    if p.len() == 3 && num.len() == 1 {
                        // ∫ log(a₂(w² + A)) = w log(Q) − 2w + 2√A atan(w/√A)
                        let (a0, a1, a2) = (&p[0], &p[1], &p[2]);
                        if a2.sign_hint() == Some(Ordering::Greater) {
                            let shift = a1.div(&a2.scale_q(&qi(2), &g), &g);
                            let w = self.var().add(&shift, &g);
                            let a = a0.sub(&a1.pow(&qi(2), &g).div(&a2.scale_q(&qi(4), &g), &g), &g).div(a2, &g);
                            if a.sign_hint() == Some(Ordering::Greater) {
                                let k = a.sqrt(&g);
                                let at = Expr::func(Func::Atan, w.div(&k, &g), &g).mul(&k, &g).scale_q(&qi(2), &g);
                                let r = w.mul(f, &g).sub(&w.scale_q(&qi(2), &g), &g).add(&at, &g);
                                return Ok(num[0].mul(&r, &g));
                            }
                        }
                    }
                }
                Err(fail())
            }
            Expr::Fn(func @ (Func::Atan | Func::Asin), u) if num.len() == 1 => {
                let (alpha, _) = linear(u).ok_or_else(fail)?;
                let w = (**u).clone();
                let one = Expr::int(&g, 1);
                let r = if *func == Func::Atan {
                    w.mul(f, &g).sub(&Expr::func(Func::Log, one.add(&w.pow(&qi(2), &g), &g), &g).scale_q(&half(), &g), &g)
                } else {
                    w.mul(f, &g).add(&one.sub(&w.pow(&qi(2), &g), &g).sqrt(&g), &g)
                };
                Ok(num[0].mul(&r, &g).div(&alpha, &g))
            }
            Expr::Fn(Func::Exp, u) => {
                let (alpha, beta) = linear(u).ok_or_else(fail)?;
                let inv_a = Expr::int(&g, 1).div(&alpha, &g);
                let sub = vec![beta.neg(&g).mul(&inv_a, &g), inv_a.clone()];
                let pw = compose(num, &sub, &g);
                let w = (**u).clone();
                // ∫ w^k e^w = e^w Σ_i (−1)^i k!/(k−i)! w^{k−i}
                let mut parts = Vec::new();
                for (k, c) in pw.iter().enumerate() {
                    let mut fall = BigInt::one();
                    for i in 0..=k {
                        let sign = if i % 2 == 0 { 1 } else { -1 };
                        let coef = Q::from_integer(&fall * BigInt::from(sign));
                        parts.push(c.mul(&w.pow(&qi((k - i) as i64), &g), &g).scale_q(&coef, &g));
                        fall *= BigInt::from((k - i) as i64);
                    }
                }
                Ok(Expr::sum(parts, &g).mul(f, &g).mul(&inv_a, &g))
            }
            _ => Err(fail()),
        }
    }
}

fn compose(p: &[Expr], sub: &[Expr], g: &Group) -> Vec<Expr> {
    let mut acc: Vec<Expr> = Vec::new();
    for c in p.iter().rev() {
        acc = poly_add(&poly_mul(&acc, sub, g), &[c.clone()], g);
    }
    acc
}

fn pow_poly_expr(p: &[Expr], k: u32, g: &Group) -> Vec<Expr> {
    let mut acc = vec![Expr::int(g, 1)];
    for _ in 0..k {
        acc = poly_mul(&acc, p, g);
    }
    acc
}

/// Long division with the eliminated top coefficient forced to zero.
fn expr_divmod(a: &[Expr], b: &[Expr], g: &Group) -> Result<(Vec<Expr>, Vec<Expr>)> {
    let db = b.len() - 1;
    let lead = &b[db];
    let mut r = a.to_vec();
    if r.len() <= db {
        return Ok((Vec::new(), poly_trim(r)));
    }
    let mut quo = vec![Expr::int(g, 0); r.len() - db];
    let mut top = r.len() - 1;
    loop {
        let c = r[top].div(lead, g);
        for k in 0..db {
            r[top - db + k] = r[top - db + k].sub(&c.mul(&b[k], g), g);
        }
        r[top] = Expr::int(g, 0);
        quo[top - db] = c;
        if top == db {
            break;
        }
        top -= 1;
    }
    r.truncate(db);
    Ok((poly_trim(quo), poly_trim(r)))
}

enum MonicFactor {
    Linear(Series),
    Quad(Series, Series),
}

fn factor_monic(p: &Poly, ctx: &Ctx) -> Result<Vec<MonicFactor>> {
    let d = spoly::degree(p).unwrap_or(0);
    match d {
        0 => Ok(Vec::new()),
        1 => Ok(vec![MonicFactor::Linear(p[0].neg())]),
        2 => {
            let roots = spoly::quadratic_roots(&p[2], &p[1], &p[0], ctx)?;
            Ok(match roots.len() {
                0 => vec![MonicFactor::Quad(p[1].clone(), p[0].clone())],
                1 => vec![MonicFactor::Linear(roots[0].clone()), MonicFactor::Linear(roots[0].clone())],
                _ => roots.into_iter().map(MonicFactor::Linear).collect(),
            })
        }
        _ => {
            let roots = spoly::real_roots(p, ctx)?;
            let mut rest = p.clone();
            let mut out = Vec::new();
            for r in roots {
                loop {
                    let lin = vec![r.neg(), Series::one(&ctx.group)];
                    let (quo, rem) = spoly::divmod(&rest, &lin, ctx)?;
                    if !rem.is_empty() {
                        break;
                    }
                    out.push(MonicFactor::Linear(r.clone()));
                    rest = quo;
                }
            }
            if spoly::degree(&rest).unwrap_or(0) > 2 {
                return Err(Error::NonlinearFactorRequired(format!("irreducible factor of degree {}", rest.len() - 1)));
            }
            out.extend(factor_monic(&rest, ctx)?);
            Ok(out)
        }
    }
}

/// Solves Σ c_j·cols[j] = rhs coefficientwise for an n×n system.
fn solve(cols: &[Poly], rhs: &Poly, n: usize, ctx: &Ctx) -> Result<Vec<Series>> {
    let g = &ctx.group;
    let t = &ctx.target;
    let at = |p: &Poly, i: usize| p.get(i).cloned().unwrap_or_else(|| Series::zero(g));
    let mut m: Vec<Vec<Series>> = (0..n)
        .map(|i| {
            let mut row: Vec<Series> = cols.iter().map(|c| at(c, i)).collect();
            row.push(at(rhs, i));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !m[r][col].is_zero() && m[r][col].has_known_terms())
            .ok_or_else(|| Error::precision("singular partial fraction system"))?;
        m.swap(col, piv);
        let p = m[col][col].clone();
        for k in col..=n {
            m[col][k] = m[col][k].div(&p, t)?;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for k in col..=n {
                    let sub = f.mul(&m[col][k]);
                    m[r][k] = m[r][k].sub(&sub).truncate(t);
                }
            }
        }
    }
    Ok(m.into_iter().map(|row| row[n].clone()).collect())
}
