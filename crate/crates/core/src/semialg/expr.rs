//! Integrand and constructible-function expressions over a fixed variable list.

use crate::algebra::AlgebraElement;
use crate::constants::{render_rational, RealConstant, Q};
use crate::error::{Error, Result};
use crate::exponents::{Exponent, Group};
use crate::logexp;
use crate::series::{Ctx, Series};
use crate::syntax::{self, Ast, CmpOp};
use num_bigint::BigInt;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Abs,
    Atan,
    Asin,
    Exp,
    /// extended logarithm, valued in R[X]
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Atan => "arctan",
            Func::Asin => "arcsin",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }
}

/// `expr op 0`
#[derive(Clone, Debug, PartialEq)]
pub struct Guard {
    pub expr: Expr,
    pub op: CmpOp,
}

impl Guard {
    pub fn holds(&self, s: Ordering) -> bool {
        match self.op {
            CmpOp::Lt => s == Ordering::Less,
            CmpOp::Le => s != Ordering::Greater,
            CmpOp::Gt => s == Ordering::Greater,
            CmpOp::Ge => s != Ordering::Less,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(AlgebraElement),
    Var(usize),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, Q),
    Fn(Func, Box<Expr>),
    Piecewise(Vec<(Guard, Expr)>, Box<Expr>),
}

fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn fold_ctx(g: &Group) -> Ctx {
    Ctx::with_group(g)
}

impl Expr {
    pub fn constant(a: AlgebraElement) -> Expr {
        Expr::Const(a)
    }

    pub fn series(s: Series) -> Expr {
        Expr::Const(AlgebraElement::from_series(s))
    }

    pub fn real(g: &Group, c: RealConstant) -> Expr {
        Expr::series(Series::constant(g, c))
    }

    pub fn int(g: &Group, n: i64) -> Expr {
        Expr::series(Series::from_int(g, n))
    }

    pub fn rational(g: &Group, r: Q) -> Expr {
        Expr::series(Series::rational(g, r))
    }

    pub fn x_symbol(g: &Group) -> Expr {
        Expr::Const(AlgebraElement::x(g))
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn as_const(&self) -> Option<&AlgebraElement> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_series(&self) -> Option<Series> {
        self.as_const().and_then(|c| c.as_series())
    }

    pub fn as_rational(&self) -> Option<Q> {
        self.as_series().and_then(|s| s.as_rational())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().map(|r| r.is_one()).unwrap_or(false)
    }

    /// Deterministic structural key.
    pub fn key(&self) -> String {
        self.render(&[])
    }

    // ------------------------------------------------------------------ building

    pub fn add(&self, o: &Expr, g: &Group) -> Expr {
        Expr::sum(vec![self.clone(), o.clone()], g)
    }

    pub fn sub(&self, o: &Expr, g: &Group) -> Expr {
        Expr::sum(vec![self.clone(), o.neg(g)], g)
    }

    pub fn mul(&self, o: &Expr, g: &Group) -> Expr {
        Expr::product(vec![self.clone(), o.clone()], g)
    }

    pub fn div(&self, o: &Expr, g: &Group) -> Expr {
        Expr::product(vec![self.clone(), o.pow(&q(-1), g)], g)
    }

    pub fn neg(&self, g: &Group) -> Expr {
        Expr::product(vec![Expr::int(g, -1), self.clone()], g)
    }

    pub fn scale(&self, c: &AlgebraElement, g: &Group) -> Expr {
        Expr::product(vec![Expr::Const(c.clone()), self.clone()], g)
    }

    pub fn scale_q(&self, r: &Q, g: &Group) -> Expr {
        Expr::product(vec![Expr::rational(g, r.clone()), self.clone()], g)
    }

    fn split_coeff(self, g: &Group) -> (AlgebraElement, Expr) {
        match self {
            Expr::Const(c) => (c, Expr::int(g, 1)),
            Expr::Mul(mut fs) => {
                if let Some(Expr::Const(_)) = fs.first() {
                    let Expr::Const(c) = fs.remove(0) else { unreachable!() };
                    let rest = if fs.len() == 1 { fs.pop().unwrap() } else { Expr::Mul(fs) };
                    (c, rest)
                } else {
                    (AlgebraElement::from_int(g, 1), Expr::Mul(fs))
                }
            }
            e => (AlgebraElement::from_int(g, 1), e),
        }
    }

    pub fn sum(items: Vec<Expr>, g: &Group) -> Expr {
        let mut flat = Vec::new();
        for it in items {
            match it {
                Expr::Add(ts) => flat.extend(ts),
                e => flat.push(e),
            }
        }
        let mut konst = AlgebraElement::zero(g);
        let mut groups: Vec<(String, AlgebraElement, Expr)> = Vec::new();
        for it in flat {
            if let Expr::Const(c) = &it {
                konst = konst.add(c);
                continue;
            }
            let (c, rest) = it.split_coeff(g);
            let k = rest.key();
            match groups.iter_mut().find(|(gk, _, _)| *gk == k) {
                Some(entry) => entry.1 = entry.1.add(&c),
                None => groups.push((k, c, rest)),
            }
        }
        groups.sort_by(|a, b| a.0.cmp(&b.0));
        let mut terms: Vec<Expr> = groups
            .into_iter()
            .filter(|(_, c, _)| !c.is_zero())
            .map(|(_, c, rest)| Expr::attach_coeff(c, rest, g))
            .collect();
        if !konst.is_zero() {
            terms.push(Expr::Const(konst));
        }
        match terms.len() {
            0 => Expr::int(g, 0),
            1 => terms.pop().unwrap(),
            _ => Expr::Add(terms),
        }
    }

    fn attach_coeff(c: AlgebraElement, rest: Expr, g: &Group) -> Expr {
        if c.as_series().and_then(|s| s.as_rational()).map(|r| r.is_one()).unwrap_or(false) {
            return rest;
        }
        if rest.is_one() {
            return Expr::Const(c);
        }
        let mut fs = vec![Expr::Const(c)];
        match rest {
            Expr::Mul(xs) => fs.extend(xs),
            e => fs.push(e),
        }
        let _ = g;
        Expr::Mul(fs)
    }

    pub fn product(items: Vec<Expr>, g: &Group) -> Expr {
        let mut flat = Vec::new();
        for it in items {
            match it {
                Expr::Mul(fs) => flat.extend(fs),
                e => flat.push(e),
            }
        }
        let mut konst = AlgebraElement::from_int(g, 1);
        let mut bases: Vec<(String, Expr, Q)> = Vec::new();
        for it in flat {
            let (b, e) = match it {
                Expr::Const(c) => {
                    konst = konst.mul(&c);
                    continue;
                }
                Expr::Pow(b, e) => (*b, e),
                other => (other, Q::one()),
            };
            let k = b.key();
            match bases.iter_mut().find(|(bk, _, _)| *bk == k) {
                Some(entry) => entry.2 += e,
                None => bases.push((k, b, e)),
            }
        }
        if konst.is_zero() {
            return Expr::int(g, 0);
        }
        bases.sort_by(|a, b| a.0.cmp(&b.0));
        let mut factors = Vec::new();
        for (_, b, e) in bases {
            if e.is_zero() {
                continue;
            }
            match Expr::pow_inner(b, e, g) {
                Expr::Const(c) => konst = konst.mul(&c),
                Expr::Mul(fs) => {
                    for f in fs {
                        match f {
                            Expr::Const(c) => konst = konst.mul(&c),
                            f => factors.push(f),
                        }
                    }
                }
                f => factors.push(f),
            }
        }
        if konst.is_zero() {
            return Expr::int(g, 0);
        }
        let is_one = konst.as_series().and_then(|s| s.as_rational()).map(|r| r.is_one()).unwrap_or(false);
        if factors.is_empty() {
            return Expr::Const(konst);
        }
        if is_one && factors.len() == 1 {
            return factors.pop().unwrap();
        }
        let mut fs = Vec::with_capacity(factors.len() + 1);
        if !is_one {
            fs.push(Expr::Const(konst));
        }
        fs.extend(factors);
        Expr::Mul(fs)
    }

    pub fn pow(&self, e: &Q, g: &Group) -> Expr {
        Expr::pow_inner(self.clone(), e.clone(), g)
    }

    fn pow_inner(b: Expr, e: Q, g: &Group) -> Expr {
        if e.is_zero() {
            return Expr::int(g, 1);
        }
        if e.is_one() {
            return b;
        }
        match b {
            Expr::Const(c) => {
                if let Some(s) = c.as_series() {
                    let ctx = fold_ctx(g);
                    if let Ok(r) = s.pow_rational(&e, &ctx.target) {
                        if r.is_exact() {
                            return Expr::series(r);
                        }
                    }
                } else if e.is_integer() && e.is_positive() {
                    return Expr::Const(c.pow(e.to_integer().to_usize().unwrap_or(1)));
                } else if e.is_integer() && !(-e.clone()).is_one() {
                    let k = (-e.to_integer()).to_usize().unwrap_or(1);
                    return Expr::pow_inner(Expr::Const(c.pow(k)), -Q::one(), g);
                } else if (-e.clone()).is_one() {
                    // reciprocals keep a monic base; the leading coefficient moves outside
                    let top = c.coeff(c.degree_or_zero());
                    if let Some((_, lc)) = top.leading() {
                        if !lc.is_one() {
                            if let Ok(inv) = lc.inv() {
                                let monic = c.scale_const(&inv);
                                return Expr::Mul(vec![Expr::Const(AlgebraElement::constant(g, inv)), Expr::Pow(Box::new(Expr::Const(monic)), e)]);
                            }
                        }
                    }
                }
                Expr::Pow(Box::new(Expr::Const(c)), e)
            }
            Expr::Pow(inner, p) if e.is_integer() => Expr::pow_inner(*inner, p * e, g),
            Expr::Mul(fs) if e.is_integer() => Expr::product(fs.into_iter().map(|f| Expr::pow_inner(f, e.clone(), g)).collect(), g),
            b => Expr::Pow(Box::new(b), e),
        }
    }

    pub fn sqrt(&self, g: &Group) -> Expr {
        self.pow(&Q::new(BigInt::one(), BigInt::from(2)), g)
    }

    pub fn func(f: Func, a: Expr, g: &Group) -> Expr {
        if let Expr::Const(c) = &a {
            if let Ok(v) = apply_func(f, c, &fold_ctx(g)) {
                if v.is_exact() {
                    return Expr::Const(v);
                }
            }
        }
        match (f, a) {
            (Func::Log, Expr::Fn(Func::Exp, u)) => *u,
            (Func::Exp, Expr::Fn(Func::Log, u)) => *u,
            (Func::Abs, Expr::Fn(Func::Abs, u)) => Expr::Fn(Func::Abs, u),
            (Func::Abs, Expr::Fn(Func::Exp, u)) => Expr::Fn(Func::Exp, u),
            (Func::Abs, Expr::Pow(b, e)) if (e.denom() % BigInt::from(2)).is_zero() || (e.numer() % BigInt::from(2)).is_zero() => {
                if (e.denom() % BigInt::from(2)).is_zero() {
                    Expr::Pow(b, e)
                } else {
                    Expr::pow_inner(Expr::func(Func::Abs, *b, g), e, g)
                }
            }
            (Func::Abs, Expr::Mul(fs)) => Expr::product(fs.into_iter().map(|x| Expr::func(Func::Abs, x, g)).collect(), g),
            (Func::Log, Expr::Pow(b, e)) => Expr::func(Func::Log, Expr::func(Func::Abs, *b, g), g).scale_q(&e, g),
            (Func::Log, Expr::Fn(Func::Abs, inner)) => match *inner {
                Expr::Mul(fs) => Expr::sum(fs.into_iter().map(|x| Expr::func(Func::Log, Expr::func(Func::Abs, x, g), g)).collect(), g),
                Expr::Pow(b, e) => Expr::func(Func::Log, Expr::func(Func::Abs, *b, g), g).scale_q(&e, g),
                other => Expr::Fn(Func::Log, Box::new(Expr::Fn(Func::Abs, Box::new(other)))),
            },
            (f, a) => Expr::Fn(f, Box::new(a)),
        }
    }

    pub fn piecewise(branches: Vec<(Guard, Expr)>, default: Expr) -> Expr {
        if branches.is_empty() {
            return default;
        }
        Expr::Piecewise(branches, Box::new(default))
    }

    // ------------------------------------------------------------------ queries

    /// Sign that holds wherever the expression is defined, if evident from its shape.
    pub fn sign_hint(&self) -> Option<Ordering> {
        match self {
            Expr::Const(c) => c.sign().ok(),
            Expr::Var(_) => None,
            Expr::Pow(b, e) => {
                if e.is_integer() && (e.numer() % BigInt::from(2)).is_zero() {
                    Some(Ordering::Greater)
                } else if !e.is_integer() {
                    // real roots of even order are taken of nonnegative bases
                    if (e.denom() % BigInt::from(2)).is_zero() {
                        Some(Ordering::Greater)
                    } else {
                        b.sign_hint()
                    }
                } else {
                    b.sign_hint()
                }
            }
            Expr::Fn(Func::Abs, _) | Expr::Fn(Func::Exp, _) => Some(Ordering::Greater),
            Expr::Fn(_, _) => None,
            Expr::Mul(fs) => {
                let mut s = Ordering::Greater;
                for f in fs {
                    match f.sign_hint()? {
                        Ordering::Equal => return Some(Ordering::Equal),
                        Ordering::Less => s = s.reverse(),
                        Ordering::Greater => {}
                    }
                }
                Some(s)
            }
            Expr::Add(ts) => {
                let signs: Option<Vec<Ordering>> = ts.iter().map(Expr::sign_hint).collect();
                let signs = signs?;
                if signs.iter().all(|s| *s != Ordering::Less) && signs.contains(&Ordering::Greater) {
                    Some(Ordering::Greater)
                } else if signs.iter().all(|s| *s != Ordering::Greater) && signs.contains(&Ordering::Less) {
                    Some(Ordering::Less)
                } else {
                    None
                }
            }
            Expr::Piecewise(..) => None,
        }
    }

    /// Replaces every occurrence of the subexpression `target` by `repl`.
    pub fn replace(&self, target: &Expr, repl: &Expr, g: &Group) -> Expr {
        if self == target {
            return repl.clone();
        }
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Add(xs) => Expr::sum(xs.iter().map(|x| x.replace(target, repl, g)).collect(), g),
            Expr::Mul(xs) => Expr::product(xs.iter().map(|x| x.replace(target, repl, g)).collect(), g),
            Expr::Pow(b, e) => b.replace(target, repl, g).pow(e, g),
            Expr::Fn(f, a) => Expr::func(*f, a.replace(target, repl, g), g),
            Expr::Piecewise(bs, d) => simplify_piecewise(
                bs.iter()
                    .map(|(gd, e)| (Guard { expr: gd.expr.replace(target, repl, g), op: gd.op }, e.replace(target, repl, g)))
                    .collect(),
                d.replace(target, repl, g),
                g,
            ),
        }
    }

    /// First case distinction (abs or piecewise) whose condition involves `v`:
    /// (guard, expression when it holds, expression otherwise).
    pub fn find_case(&self, v: usize, g: &Group) -> Option<(Guard, Expr, Expr)> {
        let node = self.case_node(v)?;
        match &node {
            Expr::Fn(Func::Abs, u) => {
                let guard = Guard { expr: (**u).clone(), op: CmpOp::Ge };
                Some((guard, self.replace(&node, u, g), self.replace(&node, &u.neg(g), g)))
            }
            Expr::Piecewise(bs, d) => {
                let (gd, first) = bs[0].clone();
                let rest = Expr::piecewise(bs[1..].to_vec(), (**d).clone());
                Some((gd, self.replace(&node, &first, g), self.replace(&node, &rest, g)))
            }
            _ => None,
        }
    }

    fn case_node(&self, v: usize) -> Option<Expr> {
        match self {
            Expr::Const(_) | Expr::Var(_) => None,
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().find_map(|x| x.case_node(v)),
            Expr::Pow(b, _) => b.case_node(v),
            Expr::Fn(Func::Abs, u) => u.case_node(v).or_else(|| u.depends_on(v).then(|| self.clone())),
            Expr::Fn(_, a) => a.case_node(v),
            Expr::Piecewise(bs, _) => {
                let (gd, _) = &bs[0];
                gd.expr.case_node(v).or_else(|| gd.expr.depends_on(v).then(|| self.clone()))
            }
        }
    }

    pub fn depends_on(&self, v: usize) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(i) => *i == v,
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().any(|x| x.depends_on(v)),
            Expr::Pow(b, _) => b.depends_on(v),
            Expr::Fn(_, a) => a.depends_on(v),
            Expr::Piecewise(bs, d) => d.depends_on(v) || bs.iter().any(|(gd, e)| gd.expr.depends_on(v) || e.depends_on(v)),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.max_var().is_none()
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().filter_map(Expr::max_var).max(),
            Expr::Pow(b, _) => b.max_var(),
            Expr::Fn(_, a) => a.max_var(),
            Expr::Piecewise(bs, d) => bs
                .iter()
                .flat_map(|(gd, e)| [gd.expr.max_var(), e.max_var()])
                .chain([d.max_var()])
                .flatten()
                .max(),
        }
    }

    /// Whether the expression mentions X or a logarithm.
    pub fn has_log_or_x(&self) -> bool {
        match self {
            Expr::Const(c) => c.degree_or_zero() > 0,
            Expr::Var(_) => false,
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().any(Expr::has_log_or_x),
            Expr::Pow(b, _) => b.has_log_or_x(),
            Expr::Fn(Func::Log, _) => true,
            Expr::Fn(_, a) => a.has_log_or_x(),
            Expr::Piecewise(bs, d) => d.has_log_or_x() || bs.iter().any(|(_, e)| e.has_log_or_x()),
        }
    }

    /// Replaces variable `v` by `r` and re-simplifies.
    pub fn substitute(&self, v: usize, r: &Expr, g: &Group) -> Expr {
        self.map_vars(&|i| if i == v { Some(r.clone()) } else { None }, g)
    }

    pub fn map_vars(&self, f: &dyn Fn(usize) -> Option<Expr>, g: &Group) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(i) => f(*i).unwrap_or(Expr::Var(*i)),
            Expr::Add(xs) => Expr::sum(xs.iter().map(|x| x.map_vars(f, g)).collect(), g),
            Expr::Mul(xs) => Expr::product(xs.iter().map(|x| x.map_vars(f, g)).collect(), g),
            Expr::Pow(b, e) => b.map_vars(f, g).pow(e, g),
            Expr::Fn(fun, a) => Expr::func(*fun, a.map_vars(f, g), g),
            Expr::Piecewise(bs, d) => {
                let bs: Vec<(Guard, Expr)> = bs
                    .iter()
                    .map(|(gd, e)| (Guard { expr: gd.expr.map_vars(f, g), op: gd.op }, e.map_vars(f, g)))
                    .collect();
                let d = d.map_vars(f, g);
                simplify_piecewise(bs, d, g)
            }
        }
    }

    /// Re-runs the smart constructors bottom-up.
    pub fn simplify(&self, g: &Group) -> Expr {
        self.map_vars(&|_| None, g)
    }

    pub fn map_consts(&self, f: &dyn Fn(&AlgebraElement) -> Result<AlgebraElement>, g: &Group) -> Result<Expr> {
        Ok(match self {
            Expr::Const(c) => Expr::Const(f(c)?),
            Expr::Var(i) => Expr::Var(*i),
            Expr::Add(xs) => Expr::sum(xs.iter().map(|x| x.map_consts(f, g)).collect::<Result<_>>()?, g),
            Expr::Mul(xs) => Expr::product(xs.iter().map(|x| x.map_consts(f, g)).collect::<Result<_>>()?, g),
            Expr::Pow(b, e) => b.map_consts(f, g)?.pow(e, g),
            Expr::Fn(fun, a) => Expr::func(*fun, a.map_consts(f, g)?, g),
            Expr::Piecewise(bs, d) => {
                let mut nb = Vec::new();
                for (gd, e) in bs {
                    nb.push((Guard { expr: gd.expr.map_consts(f, g)?, op: gd.op }, e.map_consts(f, g)?));
                }
                Expr::piecewise(nb, d.map_consts(f, g)?)
            }
        })
    }

    pub fn derivative(&self, v: usize, g: &Group) -> Expr {
        if !self.depends_on(v) {
            return Expr::int(g, 0);
        }
        match self {
            Expr::Const(_) => Expr::int(g, 0),
            Expr::Var(i) => Expr::int(g, if *i == v { 1 } else { 0 }),
            Expr::Add(xs) => Expr::sum(xs.iter().map(|x| x.derivative(v, g)).collect(), g),
            Expr::Mul(xs) => {
                let mut terms = Vec::new();
                for i in 0..xs.len() {
                    if !xs[i].depends_on(v) {
                        continue;
                    }
                    let mut fs: Vec<Expr> = xs.clone();
                    fs[i] = xs[i].derivative(v, g);
                    terms.push(Expr::product(fs, g));
                }
                Expr::sum(terms, g)
            }
            Expr::Pow(b, e) => {
                let db = b.derivative(v, g);
                Expr::product(vec![Expr::rational(g, e.clone()), b.pow(&(e - Q::one()), g), db], g)
            }
            Expr::Fn(f, a) => {
                let da = a.derivative(v, g);
                let one = Expr::int(g, 1);
                let outer = match f {
                    Func::Abs => {
                        return Expr::piecewise(vec![(Guard { expr: (**a).clone(), op: CmpOp::Ge }, da.clone())], da.neg(g));
                    }
                    Func::Atan => one.add(&a.pow(&q(2), g), g).pow(&q(-1), g),
                    Func::Asin => one.sub(&a.pow(&q(2), g), g).pow(&Q::new(BigInt::from(-1), BigInt::from(2)), g),
                    Func::Exp => self.clone(),
                    Func::Log => a.pow(&q(-1), g),
                };
                outer.mul(&da, g)
            }
            Expr::Piecewise(bs, d) => Expr::piecewise(
                bs.iter().map(|(gd, e)| (gd.clone(), e.derivative(v, g))).collect(),
                d.derivative(v, g),
            ),
        }
    }

    // ------------------------------------------------------------------ evaluation

    pub fn eval(&self, pt: &[Series], ctx: &Ctx) -> Result<AlgebraElement> {
        let g = &ctx.group;
        match self {
            Expr::Const(c) => Ok(c.clone()),
            Expr::Var(i) => pt
                .get(*i)
                .cloned()
                .map(AlgebraElement::from_series)
                .ok_or_else(|| Error::domain(format!("no value for variable {i}"))),
            Expr::Add(xs) => {
                let mut acc = AlgebraElement::zero(g);
                for x in xs {
                    acc = acc.add(&x.eval(pt, ctx)?);
                }
                Ok(acc)
            }
            Expr::Mul(xs) => {
                // reciprocals are collected and divided out once, so exact quotients stay exact
                let mut acc = AlgebraElement::from_int(g, 1);
                let mut den = Series::one(g);
                for x in xs {
                    if let Expr::Pow(b, e) = x {
                        if e.is_integer() && e.is_negative() {
                            if let Some(bs) = b.eval(pt, ctx)?.as_series() {
                                let k = (-e).to_integer().to_i64().unwrap_or(i64::MAX);
                                den = den.mul(&bs.pow_int(k, &ctx.target)?);
                                continue;
                            }
                        }
                    }
                    acc = acc.mul(&x.eval(pt, ctx)?);
                    if !acc.is_exact() {
                        acc = acc.truncate(&ctx.target);
                    }
                }
                if den.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                if den.is_exact() && den.terms().len() == 1 && den.coeff_at(den.leading().unwrap().0).is_one() && den.leading().unwrap().0.is_zero() {
                    return Ok(acc);
                }
                acc.map_coeffs(|c| c.div(&den, &ctx.target))
            }
            Expr::Pow(b, e) => {
                let v = b.eval(pt, ctx)?;
                if let Some(s) = v.as_series() {
                    if s.is_zero() {
                        return if e.is_negative() { Err(Error::DivisionByZero) } else { Ok(v) };
                    }
                    return Ok(AlgebraElement::from_series(s.pow_rational(e, &ctx.target)?));
                }
                if e.is_integer() && !e.is_negative() {
                    return Ok(v.pow(e.to_integer().to_usize().unwrap()));
                }
                Err(Error::domain("power of an element with an X part"))
            }
            Expr::Fn(f, a) => apply_func(*f, &a.eval(pt, ctx)?, ctx),
            Expr::Piecewise(bs, d) => {
                for (gd, e) in bs {
                    let s = gd.expr.eval(pt, ctx)?.sign()?;
                    if gd.holds(s) {
                        return e.eval(pt, ctx);
                    }
                }
                d.eval(pt, ctx)
            }
        }
    }

    pub fn eval_series(&self, pt: &[Series], ctx: &Ctx) -> Result<Series> {
        self.eval(pt, ctx)?.as_series().ok_or_else(|| Error::domain("value has an X part"))
    }

    /// Real instantiation at t := τ, X := log(1/τ).
    pub fn eval_float<F: Float>(&self, pt: &[F], tau: F) -> F {
        match self {
            Expr::Const(c) => c.eval_float(tau),
            Expr::Var(i) => pt.get(*i).copied().unwrap_or_else(F::nan),
            Expr::Add(xs) => xs.iter().fold(F::zero(), |a, x| a + x.eval_float(pt, tau)),
            Expr::Mul(xs) => xs.iter().fold(F::one(), |a, x| a * x.eval_float(pt, tau)),
            Expr::Pow(b, e) => {
                let v = b.eval_float(pt, tau);
                let ef = F::from(e.to_f64().unwrap()).unwrap();
                if e.is_integer() {
                    v.powi(e.to_integer().to_i32().unwrap())
                } else if v < F::zero() && !(e.denom() % BigInt::from(2)).is_zero() {
                    let r = (-v).powf(ef);
                    if (e.numer() % BigInt::from(2)).is_zero() {
                        r
                    } else {
                        -r
                    }
                } else {
                    v.powf(ef)
                }
            }
            Expr::Fn(f, a) => {
                let v = a.eval_float(pt, tau);
                match f {
                    Func::Abs => v.abs(),
                    Func::Atan => v.atan(),
                    Func::Asin => v.asin(),
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                }
            }
            Expr::Piecewise(bs, d) => {
                for (gd, e) in bs {
                    let s = gd.expr.eval_float(pt, tau);
                    let o = s.partial_cmp(&F::zero()).unwrap_or(Ordering::Equal);
                    if gd.holds(o) {
                        return e.eval_float(pt, tau);
                    }
                }
                d.eval_float(pt, tau)
            }
        }
    }

    // ------------------------------------------------------------------ polynomials

    /// Coefficients in `v` (lowest first) when the expression is polynomial in `v`.
    pub fn as_poly(&self, v: usize, g: &Group) -> Option<Vec<Expr>> {
        if !self.depends_on(v) {
            return Some(vec![self.clone()]);
        }
        let p = match self {
            Expr::Var(_) => vec![Expr::int(g, 0), Expr::int(g, 1)],
            Expr::Add(xs) => {
                let mut acc: Vec<Expr> = Vec::new();
                for x in xs {
                    acc = poly_add(&acc, &x.as_poly(v, g)?, g);
                }
                acc
            }
            Expr::Mul(xs) => {
                let mut acc = vec![Expr::int(g, 1)];
                for x in xs {
                    acc = poly_mul(&acc, &x.as_poly(v, g)?, g);
                }
                acc
            }
            Expr::Pow(b, e) if e.is_integer() && e.is_positive() => {
                let bp = b.as_poly(v, g)?;
                let mut acc = vec![Expr::int(g, 1)];
                for _ in 0..e.to_integer().to_usize()? {
                    acc = poly_mul(&acc, &bp, g);
                }
                acc
            }
            _ => return None,
        };
        Some(poly_trim(p))
    }

    /// Polynomial in `v` with constant series coefficients.
    pub fn as_series_poly(&self, v: usize, g: &Group) -> Option<Vec<Series>> {
        self.as_poly(v, g)?.iter().map(Expr::as_series).collect()
    }

    pub fn from_poly(p: &[Expr], v: usize, g: &Group) -> Expr {
        Expr::sum(
            p.iter().enumerate().map(|(k, c)| c.mul(&Expr::Var(v).pow(&q(k as i64), g), g)).collect(),
            g,
        )
    }

    pub fn from_series_poly(p: &[Series], v: usize, g: &Group) -> Expr {
        let ps: Vec<Expr> = p.iter().cloned().map(Expr::series).collect();
        Expr::from_poly(&ps, v, g)
    }

    // ------------------------------------------------------------------ rendering

    pub fn render(&self, names: &[String]) -> String {
        let mut s = String::new();
        self.render_into(names, 0, &mut s);
        s
    }

    fn render_into(&self, names: &[String], prec: u8, out: &mut String) {
        match self {
            Expr::Const(c) => {
                let s = c.to_string();
                let compound = s.trim_start_matches('-').contains(' ');
                let wrap = (prec >= 1 && compound) || (prec >= 2 && (s.starts_with('-') || s.contains('/') || s.contains('*') || s.contains('^')));
                if wrap {
                    let _ = write!(out, "({s})");
                } else {
                    out.push_str(&s);
                }
            }
            Expr::Var(i) => match names.get(*i) {
                Some(n) => out.push_str(n),
                None => {
                    let _ = write!(out, "{}", default_name(*i));
                }
            },
            Expr::Add(xs) => {
                let mut s = String::new();
                let mut order: Vec<&Expr> = xs.iter().collect();
                if matches!(order.last(), Some(Expr::Const(_))) && signed_body(order[0], names).0 && !signed_body(order[order.len() - 1], names).0 {
                    order.rotate_right(1);
                }
                for (k, x) in order.into_iter().enumerate() {
                    let (neg, body) = signed_body(x, names);
                    if k == 0 {
                        if neg {
                            s.push('-');
                        }
                    } else {
                        s.push_str(if neg { " - " } else { " + " });
                    }
                    s.push_str(&body);
                }
                if prec >= 1 {
                    let _ = write!(out, "({s})");
                } else {
                    out.push_str(&s);
                }
            }
            Expr::Mul(_) => {
                let (neg, body) = signed_body(self, names);
                let s = if neg { format!("-{body}") } else { body };
                if prec >= 2 || (prec >= 1 && neg) {
                    let _ = write!(out, "({s})");
                } else {
                    out.push_str(&s);
                }
            }
            Expr::Pow(b, e) => {
                if e.is_negative() {
                    let inner = pow_raw(b, -e.clone());
                    let s = format!("1/{}", inner.render_at(names, 2));
                    if prec >= 1 {
                        let _ = write!(out, "({s})");
                    } else {
                        out.push_str(&s);
                    }
                } else if *e == Q::new(BigInt::one(), BigInt::from(2)) {
                    let _ = write!(out, "sqrt({})", b.render_at(names, 0));
                } else {
                    let es = if e.is_integer() { e.to_string() } else { format!("({})", render_rational(e)) };
                    let s = format!("{}^{es}", b.render_at(names, 3));
                    if prec >= 3 {
                        let _ = write!(out, "({s})");
                    } else {
                        out.push_str(&s);
                    }
                }
            }
            Expr::Fn(f, a) => {
                let _ = write!(out, "{}({})", f.name(), a.render_at(names, 0));
            }
            Expr::Piecewise(bs, d) => {
                out.push_str("piecewise(");
                for (gd, e) in bs {
                    let _ = write!(out, "{} {} 0: {}, ", gd.expr.render_at(names, 0), gd.op.symbol(), e.render_at(names, 0));
                }
                let _ = write!(out, "{})", d.render_at(names, 0));
            }
        }
    }

    fn render_at(&self, names: &[String], prec: u8) -> String {
        let mut s = String::new();
        self.render_into(names, prec, &mut s);
        s
    }

    // ------------------------------------------------------------------ parsing

    pub fn parse(src: &str, names: &[String], ctx: &Ctx) -> Result<Expr> {
        Expr::from_ast(&syntax::parse_ast(src)?, names, ctx)
    }

    pub fn from_ast(a: &Ast, names: &[String], ctx: &Ctx) -> Result<Expr> {
        let g = &ctx.group;
        let rec = |x: &Ast| Expr::from_ast(x, names, ctx);
        Ok(match a {
            Ast::Num(r) => Expr::rational(g, r.clone()),
            Ast::Ident(n) => {
                if let Some(i) = names.iter().position(|m| m == n) {
                    Expr::Var(i)
                } else if n == "X" {
                    Expr::x_symbol(g)
                } else if n == "t" {
                    Expr::series(Series::t(g))
                } else {
                    Expr::real(g, syntax::ast_to_real_expr(a)?.normalize()?)
                }
            }
            Ast::Neg(x) => rec(x)?.neg(g),
            Ast::Add(x, y) => rec(x)?.add(&rec(y)?, g),
            Ast::Sub(x, y) => rec(x)?.sub(&rec(y)?, g),
            Ast::Mul(x, y) => rec(x)?.mul(&rec(y)?, g),
            Ast::Div(x, y) => {
                let d = rec(y)?;
                if d.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                if let Some(s) = d.as_series() {
                    if !s.is_monomial() {
                        if let (Some(n), true) = (rec(x)?.as_series(), true) {
                            return Ok(Expr::series(n.div(&s, &ctx.target)?));
                        }
                    }
                }
                rec(x)?.div(&d, g)
            }
            Ast::Pow(b, e) => {
                let base = rec(b)?;
                let ex = rec(e)?;
                if let Some(r) = ex.as_rational() {
                    if base.is_zero() && r.is_negative() {
                        return Err(Error::DivisionByZero);
                    }
                    if base.as_series().is_some() && !base.is_zero() {
                        let s = base.as_series().unwrap();
                        return Ok(Expr::series(s.pow_rational(&r, &ctx.target)?));
                    }
                    return Ok(base.pow(&r, g));
                }
                if matches!(&**b, Ast::Ident(n) if n == "t") {
                    if let Some(s) = ex.as_series().and_then(|s| s.as_constant()) {
                        return Ok(Expr::series(Series::monomial(g.element(&s)?, RealConstant::one())));
                    }
                    // t^e = exp(−e·X)
                    return Ok(Expr::func(Func::Exp, ex.mul(&Expr::x_symbol(g), g).neg(g), g));
                }
                if matches!(&**b, Ast::Ident(n) if n == "e") {
                    return Ok(Expr::func(Func::Exp, ex, g));
                }
                return Err(Error::domain("exponents must be rational constants"));
            }
            Ast::Call(f, args) => {
                let arity = |n: usize| -> Result<()> {
                    if args.len() == n {
                        Ok(())
                    } else {
                        Err(syntax::syntax(0, 0, &format!("{f} expects {n} argument(s)")))
                    }
                };
                match f.as_str() {
                    "sqrt" => {
                        arity(1)?;
                        rec(&args[0])?.sqrt(g)
                    }
                    "cbrt" => {
                        arity(1)?;
                        rec(&args[0])?.pow(&Q::new(BigInt::one(), BigInt::from(3)), g)
                    }
                    "abs" => {
                        arity(1)?;
                        Expr::func(Func::Abs, rec(&args[0])?, g)
                    }
                    "arctan" | "atan" => {
                        arity(1)?;
                        Expr::func(Func::Atan, rec(&args[0])?, g)
                    }
                    "arcsin" | "asin" => {
                        arity(1)?;
                        Expr::func(Func::Asin, rec(&args[0])?, g)
                    }
                    "exp" => {
                        arity(1)?;
                        Expr::func(Func::Exp, rec(&args[0])?, g)
                    }
                    "log" | "ln" => {
                        arity(1)?;
                        Expr::func(Func::Log, rec(&args[0])?, g)
                    }
                    "max" | "min" => {
                        arity(2)?;
                        let (x, y) = (rec(&args[0])?, rec(&args[1])?);
                        let op = if f == "max" { CmpOp::Ge } else { CmpOp::Le };
                        Expr::piecewise(vec![(Guard { expr: x.sub(&y, g), op }, x)], y)
                    }
                    "O" => return Err(Error::domain("O(...) is only allowed in series literals")),
                    _ => return Err(syntax::syntax(0, 0, &format!("unknown function '{f}'"))),
                }
            }
            Ast::Piecewise(bs, d) => {
                let mut out = Vec::new();
                for (c, v) in bs {
                    let Ast::Cmp(op, l, r) = c else {
                        return Err(syntax::syntax(0, 0, "piecewise guards must be comparisons"));
                    };
                    out.push((Guard { expr: rec(l)?.sub(&rec(r)?, g), op: *op }, rec(v)?));
                }
                simplify_piecewise(out, rec(d)?, g)
            }
            Ast::Cmp(..) => return Err(syntax::syntax(0, 0, "comparison outside piecewise")),
        })
    }
}

fn simplify_piecewise(bs: Vec<(Guard, Expr)>, d: Expr, g: &Group) -> Expr {
    let ctx = fold_ctx(g);
    let mut kept = Vec::new();
    for (gd, e) in bs {
        if let Some(c) = gd.expr.as_const() {
            if let Ok(s) = c.sign() {
                if gd.holds(s) {
                    return Expr::piecewise(kept, e);
                }
                continue;
            }
        }
        kept.push((gd, e));
    }
    let _ = ctx;
    Expr::piecewise(kept, d)
}

fn pow_raw(b: &Expr, e: Q) -> Expr {
    if e.is_one() {
        b.clone()
    } else {
        Expr::Pow(Box::new(b.clone()), e)
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let n = self.max_var().map_or(0, |m| m + 1);
        f.write_str(&self.render(&default_names(n)))
    }
}

pub fn default_name(i: usize) -> String {
    const N: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
    N.get(i).map(|s| s.to_string()).unwrap_or_else(|| format!("x{i}"))
}

pub fn default_names(n: usize) -> Vec<String> {
    (0..n).map(default_name).collect()
}

/// (negative?, body) of a summand for sign-aware joining.
fn signed_body(x: &Expr, names: &[String]) -> (bool, String) {
    match x {
        Expr::Const(c) => {
            let s = c.to_string();
            if !s.trim_start_matches('-').contains(' ') {
                if let Some(r) = s.strip_prefix('-') {
                    return (true, r.to_string());
                }
            }
            (false, s)
        }
        Expr::Mul(fs) => {
            let (coef, rest): (Option<&AlgebraElement>, &[Expr]) = match fs.first() {
                Some(Expr::Const(c)) => (Some(c), &fs[1..]),
                _ => (None, &fs[..]),
            };
            let mut neg = false;
            let mut num: Vec<String> = Vec::new();
            let mut den: Vec<String> = Vec::new();
            let mut den_count = 0usize;
            if let Some(c) = coef {
                match c.as_series().and_then(|s| s.as_rational()) {
                    Some(r) => {
                        neg = r.is_negative();
                        let r = r.abs();
                        if !r.numer().is_one() {
                            num.push(r.numer().to_string());
                        }
                        if !r.denom().is_one() {
                            den.push(r.denom().to_string());
                            den_count += 1;
                        }
                    }
                    None => {
                        let s = c.to_string();
                        let single = !s.trim_start_matches('-').contains(' ');
                        if single && s.starts_with('-') {
                            neg = true;
                            let body = s[1..].to_string();
                            num.push(if body.contains('/') { format!("({body})") } else { body });
                        } else if single && !s.contains('/') {
                            num.push(s);
                        } else {
                            num.push(format!("({s})"));
                        }
                    }
                }
            }
            for f in rest {
                match f {
                    Expr::Pow(b, e) if e.is_negative() => {
                        den.push(pow_raw(b, -e.clone()).render_at(names, 2));
                        den_count += 1;
                    }
                    f => num.push(f.render_at(names, 2)),
                }
            }
            let mut s = if num.is_empty() { "1".to_string() } else { num.join("*") };
            if !den.is_empty() {
                let d = den.join("*");
                if den_count > 1 {
                    s = format!("{s}/({d})");
                } else {
                    s = format!("{s}/{d}");
                }
            }
            (neg, s)
        }
        other => (false, other.render_at(names, 1)),
    }
}

pub fn poly_trim(mut p: Vec<Expr>) -> Vec<Expr> {
    while p.last().map(Expr::is_zero).unwrap_or(false) {
        p.pop();
    }
    p
}

pub fn poly_add(a: &[Expr], b: &[Expr], g: &Group) -> Vec<Expr> {
    let n = a.len().max(b.len());
    let z = Expr::int(g, 0);
    poly_trim((0..n).map(|i| a.get(i).unwrap_or(&z).add(b.get(i).unwrap_or(&z), g)).collect())
}

pub fn poly_mul(a: &[Expr], b: &[Expr], g: &Group) -> Vec<Expr> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out: Vec<Vec<Expr>> = vec![Vec::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j].push(x.mul(y, g));
        }
    }
    poly_trim(out.into_iter().map(|ts| Expr::sum(ts, g)).collect())
}

/// Applies a function symbol to a value in R[X].
pub fn apply_func(f: Func, v: &AlgebraElement, ctx: &Ctx) -> Result<AlgebraElement> {
    let t = &ctx.target;
    if f == Func::Abs {
        return Ok(if v.sign()? == Ordering::Less { v.neg() } else { v.clone() });
    }
    if f == Func::Exp && v.degree_or_zero() == 1 {
        // exp(−rX + c) = t^r·exp(c) for r ∈ Γ
        let r = v.coeff(1).as_constant().ok_or_else(|| Error::domain("exp of a non-constant multiple of X"))?;
        let e: Exponent = ctx.group.element(&-r)?;
        let rest = logexp::exp(&v.coeff(0), t)?;
        return Ok(AlgebraElement::from_series(rest.shift(&e)));
    }
    let s = v.as_series().ok_or_else(|| Error::domain(format!("{} of an element with an X part", f.name())))?;
    Ok(match f {
        Func::Atan => AlgebraElement::from_series(logexp::atan(&s, t)?),
        Func::Asin => AlgebraElement::from_series(logexp::asin(&s, t)?),
        Func::Exp => AlgebraElement::from_series(logexp::exp(&s, t)?),
        Func::Log => logexp::extended_log(&s, t)?,
        Func::Abs => unreachable!(),
    })
}
