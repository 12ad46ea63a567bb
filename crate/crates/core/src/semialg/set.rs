//! One-dimensional sets and cylindrical regions.

use super::expr::Expr;
use crate::error::{Error, Result};
use crate::exponents::Group;
use crate::series::{Ctx, Series};
use crate::syntax::{self, ComponentAst, DomainAst, EndAst};
use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Endpoint {
    NegInf,
    PosInf,
    Finite(Series),
}

impl Endpoint {
    pub fn finite(&self) -> Option<&Series> {
        match self {
            Endpoint::Finite(s) => Some(s),
            _ => None,
        }
    }

    pub fn compare(&self, o: &Endpoint) -> Result<Ordering> {
        use Endpoint::*;
        Ok(match (self, o) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (PosInf, _) | (_, NegInf) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.compare(b)?,
        })
    }

    fn shift(&self, c: &Series) -> Endpoint {
        match self {
            Endpoint::Finite(s) => Endpoint::Finite(s.add(c)),
            e => e.clone(),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::NegInf => write!(f, "-inf"),
            Endpoint::PosInf => write!(f, "inf"),
            Endpoint::Finite(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Component {
    Interval { lo: Endpoint, lo_closed: bool, hi: Endpoint, hi_closed: bool },
    Point(Series),
}

impl Component {
    pub fn closed(a: Series, b: Series) -> Component {
        Component::Interval { lo: Endpoint::Finite(a), lo_closed: true, hi: Endpoint::Finite(b), hi_closed: true }
    }

    pub fn open(a: Endpoint, b: Endpoint) -> Component {
        Component::Interval { lo: a, lo_closed: false, hi: b, hi_closed: false }
    }

    /// (lo, lo_closed, hi, hi_closed) with points as degenerate closed intervals.
    fn bounds(&self) -> (Endpoint, bool, Endpoint, bool) {
        match self {
            Component::Interval { lo, lo_closed, hi, hi_closed } => (lo.clone(), *lo_closed, hi.clone(), *hi_closed),
            Component::Point(p) => (Endpoint::Finite(p.clone()), true, Endpoint::Finite(p.clone()), true),
        }
    }

    fn from_bounds(lo: Endpoint, lo_closed: bool, hi: Endpoint, hi_closed: bool) -> Result<Option<Component>> {
        match lo.compare(&hi)? {
            Ordering::Greater => Ok(None),
            Ordering::Equal => {
                if lo_closed && hi_closed {
                    if let Endpoint::Finite(p) = lo {
                        return Ok(Some(Component::Point(p)));
                    }
                }
                Ok(None)
            }
            Ordering::Less => Ok(Some(Component::Interval {
                lo_closed: lo_closed && matches!(lo, Endpoint::Finite(_)),
                hi_closed: hi_closed && matches!(hi, Endpoint::Finite(_)),
                lo,
                hi,
            })),
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Point(p) => write!(f, "{{{p}}}"),
            Component::Interval { lo, lo_closed, hi, hi_closed } => write!(
                f,
                "{}{lo}, {hi}{}",
                if *lo_closed { "[" } else { "]" },
                if *hi_closed { "]" } else { "[" }
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SetOneD {
    pub components: Vec<Component>,
}

impl SetOneD {
    pub fn empty() -> Self {
        SetOneD { components: Vec::new() }
    }

    pub fn interval(a: Series, b: Series) -> Self {
        SetOneD { components: vec![Component::closed(a, b)] }
    }

    pub fn new(components: Vec<Component>) -> Self {
        SetOneD { components }
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Sorted, pairwise disjoint components; touching pieces are merged.
    pub fn normalize(&self) -> Result<SetOneD> {
        let mut items = Vec::new();
        for c in &self.components {
            let (lo, lc, hi, hc) = c.bounds();
            if let Some(c) = Component::from_bounds(lo, lc, hi, hc)? {
                items.push(c.bounds());
            }
        }
        let mut err = None;
        items.sort_by(|a, b| {
            let o = a.0.compare(&b.0).and_then(|o| {
                Ok(if o == Ordering::Equal { b.1.cmp(&a.1) } else { o })
            });
            o.unwrap_or_else(|e| {
                err.get_or_insert(e);
                Ordering::Equal
            })
        });
        if let Some(e) = err {
            return Err(e);
        }
        let mut merged: Vec<(Endpoint, bool, Endpoint, bool)> = Vec::new();
        for it in items {
            if let Some(last) = merged.last_mut() {
                let o = it.0.compare(&last.2)?;
                let joins = o == Ordering::Less || (o == Ordering::Equal && (it.1 || last.3));
                if joins {
                    match it.2.compare(&last.2)? {
                        Ordering::Greater => {
                            last.2 = it.2;
                            last.3 = it.3;
                        }
                        Ordering::Equal => last.3 |= it.3,
                        Ordering::Less => {}
                    }
                    continue;
                }
            }
            merged.push(it);
        }
        let mut out = Vec::new();
        for (lo, lc, hi, hc) in merged {
            if let Some(c) = Component::from_bounds(lo, lc, hi, hc)? {
                out.push(c);
            }
        }
        Ok(SetOneD { components: out })
    }

    pub fn translate(&self, c: &Series) -> SetOneD {
        SetOneD {
            components: self
                .components
                .iter()
                .map(|k| match k {
                    Component::Point(p) => Component::Point(p.add(c)),
                    Component::Interval { lo, lo_closed, hi, hi_closed } => Component::Interval {
                        lo: lo.shift(c),
                        lo_closed: *lo_closed,
                        hi: hi.shift(c),
                        hi_closed: *hi_closed,
                    },
                })
                .collect(),
        }
    }

    pub fn union(&self, o: &SetOneD) -> Result<SetOneD> {
        let mut c = self.components.clone();
        c.extend(o.components.iter().cloned());
        SetOneD { components: c }.normalize()
    }

    pub fn contains(&self, x: &Series) -> Result<bool> {
        let p = Endpoint::Finite(x.clone());
        for c in &self.components {
            let (lo, lc, hi, hc) = c.bounds();
            let a = lo.compare(&p)?;
            let b = p.compare(&hi)?;
            let left = a == Ordering::Less || (a == Ordering::Equal && lc);
            let right = b == Ordering::Less || (b == Ordering::Equal && hc);
            if left && right {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Every endpoint finite with finite standard part.
    pub fn is_r_bounded(&self) -> Result<bool> {
        for c in &self.components {
            let (lo, _, hi, _) = c.bounds();
            for e in [lo, hi] {
                match e {
                    Endpoint::Finite(s) => {
                        if !s.is_bounded()? {
                            return Ok(false);
                        }
                    }
                    _ => return Ok(false),
                }
            }
        }
        Ok(true)
    }

    pub fn from_components(comps: &[ComponentAst], ctx: &Ctx) -> Result<SetOneD> {
        let end = |e: &EndAst| -> Result<Endpoint> {
            Ok(match e {
                EndAst::NegInf => Endpoint::NegInf,
                EndAst::PosInf => Endpoint::PosInf,
                EndAst::Finite(a) => Endpoint::Finite(Series::from_ast(a, &ctx.group, &ctx.target)?),
            })
        };
        let mut out = Vec::new();
        for c in comps {
            match c {
                ComponentAst::Points(ps) => {
                    for p in ps {
                        out.push(Component::Point(Series::from_ast(p, &ctx.group, &ctx.target)?));
                    }
                }
                ComponentAst::Interval { lo, lo_closed, hi, hi_closed } => out.push(Component::Interval {
                    lo: end(lo)?,
                    lo_closed: *lo_closed,
                    hi: end(hi)?,
                    hi_closed: *hi_closed,
                }),
            }
        }
        Ok(SetOneD { components: out })
    }

    pub fn parse(src: &str, ctx: &Ctx) -> Result<SetOneD> {
        match syntax::parse_domain(src)? {
            DomainAst::Set(c) => SetOneD::from_components(&c, ctx),
            DomainAst::Region(_) => Err(Error::domain("expected a one-dimensional set")),
        }
    }
}

impl fmt::Display for SetOneD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" u "))
    }
}

/// {(x₀, …, x_{n−1}) : x₀ ∈ base, lower_k(x₀..x_{k−1}) ≤ x_k ≤ upper_k(…)}.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub names: Vec<String>,
    pub base: SetOneD,
    pub layers: Vec<(Expr, Expr)>,
}

impl Region {
    pub fn dim(&self) -> usize {
        1 + self.layers.len()
    }

    pub fn from_set(s: SetOneD, name: &str) -> Region {
        Region { names: vec![name.to_string()], base: s, layers: Vec::new() }
    }

    /// Product of closed intervals.
    pub fn boxed(sides: &[(Series, Series)], g: &Group) -> Result<Region> {
        let (first, rest) = sides.split_first().ok_or_else(|| Error::domain("a box needs at least one side"))?;
        Ok(Region {
            names: super::expr::default_names(sides.len()),
            base: SetOneD::interval(first.0.clone(), first.1.clone()),
            layers: rest
                .iter()
                .map(|(a, b)| (Expr::series(a.clone()), Expr::series(b.clone())))
                .map(|(a, b)| (a.simplify(g), b.simplify(g)))
                .collect(),
        })
    }

    pub fn parse(src: &str, ctx: &Ctx) -> Result<Region> {
        match syntax::parse_domain(src)? {
            DomainAst::Set(c) => Ok(Region::from_set(SetOneD::from_components(&c, ctx)?, "x")),
            DomainAst::Region(r) => {
                let base = SetOneD::from_components(&r.base, ctx)?;
                let mut layers = Vec::new();
                for (k, (lo, hi)) in r.layers.iter().enumerate() {
                    let scope = &r.vars[..=k];
                    let lo = Expr::from_ast(lo, scope, ctx)?;
                    let hi = Expr::from_ast(hi, scope, ctx)?;
                    if lo.depends_on(k + 1) || hi.depends_on(k + 1) {
                        return Err(Error::domain("fiber bounds may only use earlier variables"));
                    }
                    layers.push((lo, hi));
                }
                Ok(Region { names: r.vars, base, layers })
            }
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.layers.is_empty() {
            return write!(f, "{}", self.base);
        }
        write!(f, "region {} in {}", self.names[0], self.base)?;
        for (k, (lo, hi)) in self.layers.iter().enumerate() {
            write!(f, "; {} in [{}, {}]", self.names[k + 1], lo.render(&self.names), hi.render(&self.names))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(src: &str) -> SetOneD {
        SetOneD::parse(src, &Ctx::rational()).unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(set("[0,2] u [1,3]").normalize().unwrap().to_string(), "[0, 3]");
        assert_eq!(set("[0,1] u {2}").normalize().unwrap().to_string(), "[0, 1] u {2}");
        assert_eq!(set("[3*t, 1] u [t, 2*t]").normalize().unwrap().to_string(), "[t, 2*t] u [3*t, 1]");
        assert_eq!(set("]0,1[ u [1,2]").normalize().unwrap().to_string(), "]0, 2]");
        assert_eq!(set("]0,1[ u ]1,2[").normalize().unwrap().components.len(), 2);
        assert_eq!(set("[0,1] u {1/2}").normalize().unwrap().to_string(), "[0, 1]");
    }

    #[test]
    fn translate_examples() {
        let c = Ctx::rational();
        let s = set("[0,1]").translate(&c.series("t^(-1)").unwrap());
        assert_eq!(s.to_string(), "[t^(-1), t^(-1) + 1]");
        assert!(SetOneD::empty().translate(&c.int(3)).is_empty());
    }

    #[test]
    fn regions() {
        let c = Ctx::rational();
        let r = Region::parse("region x in [1, t^(-1)]; y in [0, 1/x]", &c).unwrap();
        assert_eq!(r.dim(), 2);
        assert_eq!(r.to_string(), "region x in [1, t^(-1)]; y in [0, 1/x]");
        let b = Region::boxed(&[(c.int(0), c.int(1)), (c.int(0), c.int(2))], &c.group).unwrap();
        assert_eq!(b.layers[0].1.as_rational().unwrap(), crate::syntax::q_from(2, 1));
    }
}
