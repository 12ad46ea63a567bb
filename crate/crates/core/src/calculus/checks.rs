//! Consistency checks: FTC, change of variables, differentiation under ∫, standard parts.

use super::antideriv::antiderivative;
use super::integrate::{
    critical_points, end_value, integrate_interval, integrate_layer, measure_region, sample, set_total, specialize,
    zeros_of, MeasureValue, Total,
};
use crate::algebra::AlgebraElement;
use crate::constants::{RealConstant, Q};
use crate::constructible::limit::Side;
use crate::error::{Error, Result};
use crate::semialg::expr::Expr;
use crate::semialg::set::{Component, Endpoint, Region, SetOneD};
use crate::series::{Ctx, Series, StandardPart};
use std::cmp::Ordering;

/// Equality of algebra elements up to the precision both sides actually carry.
pub fn agree(a: &AlgebraElement, b: &AlgebraElement, ctx: &Ctx) -> bool {
    let d = a.sub(b);
    d.coeffs().iter().all(|s| {
        let w = match s.precision().bound() {
            Some(p) if *p < ctx.target => p.clone(),
            _ => ctx.target.clone(),
        };
        s.terms().iter().all(|(e, _)| *e >= w)
    })
}

fn cell_samples(a: &Endpoint, b: &Endpoint, ctx: &Ctx) -> Vec<Series> {
    let g = &ctx.group;
    let m = sample(a, b, ctx);
    let mut out = vec![m.clone()];
    match (a, b) {
        (Endpoint::Finite(x), Endpoint::Finite(y)) => {
            let third = y.sub(x).scale_q(&Q::new(1.into(), 3.into()));
            out.push(x.add(&third));
            out.push(y.sub(&third));
        }
        (Endpoint::Finite(x), _) => {
            out.push(x.add(&Series::from_int(g, 3)));
            out.push(x.add(&Series::t_pow(g, Q::from_integer((-1).into()))));
        }
        (_, Endpoint::Finite(y)) => {
            out.push(y.sub(&Series::from_int(g, 3)));
            out.push(y.sub(&Series::t_pow(g, Q::from_integer((-1).into()))));
        }
        _ => {
            out.push(Series::from_int(g, 2));
            out.push(Series::from_int(g, -3));
        }
    }
    out
}

fn cells(e: &Expr, v: usize, ctx: &Ctx) -> Result<Vec<(Endpoint, Endpoint)>> {
    let mut cuts = vec![Endpoint::NegInf];
    cuts.extend(critical_points(e, v, ctx)?.into_iter().map(Endpoint::Finite));
    cuts.push(Endpoint::PosInf);
    Ok(cuts.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect())
}

#[derive(Clone, Debug)]
pub struct FtcReport {
    pub antiderivative: Expr,
    pub symbolic: bool,
    pub points_checked: usize,
    pub ok: bool,
}

/// differentiate(antiderivative(e)) against e, symbolically when possible and at points of each cell.
pub fn check_ftc(e: &Expr, v: usize, ctx: &Ctx) -> Result<FtcReport> {
    let g = &ctx.group;
    let big = antiderivative(e, v, ctx)?;
    let symbolic = big.derivative(v, g).sub(e, g).simplify(g).is_zero();
    let mut points_checked = 0;
    let mut ok = true;
    for (a, b) in cells(e, v, ctx)? {
        let m = sample(&a, &b, ctx);
        let cell = specialize(e, v, &m, ctx)?;
        let dg = antiderivative(&cell, v, ctx)?.derivative(v, g);
        for p in cell_samples(&a, &b, ctx) {
            let (lhs, rhs) = match (dg.eval(std::slice::from_ref(&p), ctx), cell.eval(std::slice::from_ref(&p), ctx)) {
                (Ok(l), Ok(r)) => (l, r),
                (Err(_), Err(_)) => continue,
                _ => {
                    ok = false;
                    continue;
                }
            };
            points_checked += 1;
            ok &= agree(&lhs, &rhs, ctx);
        }
    }
    Ok(FtcReport { antiderivative: big, symbolic, points_checked, ok: ok || symbolic })
}

/// Two antiderivatives differ by something constant in `v`: the difference has zero derivative.
pub fn differ_by_constant(f1: &Expr, f2: &Expr, v: usize, ctx: &Ctx, points: &[Series]) -> Result<bool> {
    let g = &ctx.group;
    let d = f1.sub(f2, g).derivative(v, g).simplify(g);
    if d.is_zero() {
        return Ok(true);
    }
    for p in points {
        match d.eval(std::slice::from_ref(p), ctx) {
            Ok(val) if !agree(&val, &AlgebraElement::zero(g), ctx) => return Ok(false),
            _ => {}
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------- transformation formula

#[derive(Clone, Debug)]
pub struct TransformReport {
    pub image: SetOneD,
    pub lhs: AlgebraElement,
    pub rhs: AlgebraElement,
    pub equal: bool,
}

fn image_point(phi: &Expr, v: usize, p: &Endpoint, side: Side, ctx: &Ctx) -> Result<Endpoint> {
    match end_value(phi, v, p, side, ctx)? {
        Total::Finite(a) => a
            .as_series()
            .map(Endpoint::Finite)
            .ok_or_else(|| Error::domain("transformation leaves the series field")),
        Total::PosInf => Ok(Endpoint::PosInf),
        Total::NegInf => Ok(Endpoint::NegInf),
        Total::NoLimit => Err(Error::NotMonotone("transformation has no limit at an endpoint".into())),
    }
}

/// Sign of φ′ on `u`, which must be constant and nonzero away from isolated zeros.
fn monotone_sign(dphi: &Expr, v: usize, u: &SetOneD, ctx: &Ctx) -> Result<Ordering> {
    let mut cuts = zeros_of(dphi, v, ctx).unwrap_or_default();
    cuts.extend(critical_points(dphi, v, ctx)?);
    let mut sign = None;
    for c in &u.components {
        let Component::Interval { lo, hi, .. } = c else { continue };
        let mut pts = vec![lo.clone()];
        for z in &cuts {
            let ep = Endpoint::Finite(z.clone());
            if lo.compare(&ep)? == Ordering::Less && ep.compare(hi)? == Ordering::Less {
                pts.push(ep);
            }
        }
        pts.push(hi.clone());
        for w in pts.windows(2) {
            let m = sample(&w[0], &w[1], ctx);
            let s = dphi.eval(std::slice::from_ref(&m), ctx)?.sign()?;
            if s == Ordering::Equal || sign.is_some_and(|o| o != s) {
                return Err(Error::NotMonotone(format!("derivative changes sign near {m}")));
            }
            sign = Some(s);
        }
    }
    sign.ok_or_else(|| Error::NotMonotone("empty domain".into()))
}

/// Compares ∫_{φ(U)} f with ∫_U (f∘φ)|φ′|.
pub fn check_transformation(phi: &Expr, f: &Expr, u: &SetOneD, v: usize, ctx: &Ctx) -> Result<TransformReport> {
    let g = &ctx.group;
    let u = u.normalize()?;
    let dphi = phi.derivative(v, g);
    let s = monotone_sign(&dphi, v, &u, ctx)?;
    let mut comps = Vec::new();
    for c in &u.components {
        match c {
            Component::Interval { lo, lo_closed, hi, hi_closed } => {
                let a = image_point(phi, v, lo, Side::Right, ctx)?;
                let b = image_point(phi, v, hi, Side::Left, ctx)?;
                comps.push(if s == Ordering::Greater {
                    Component::Interval { lo: a, lo_closed: *lo_closed, hi: b, hi_closed: *hi_closed }
                } else {
                    Component::Interval { lo: b, lo_closed: *hi_closed, hi: a, hi_closed: *lo_closed }
                });
            }
            Component::Point(p) => {
                if let Endpoint::Finite(q) = image_point(phi, v, &Endpoint::Finite(p.clone()), Side::Right, ctx)? {
                    comps.push(Component::Point(q));
                }
            }
        }
    }
    let image = SetOneD::new(comps).normalize()?;
    let lhs = set_total(f, v, &image, ctx)?.into_integral("image-side integral")?;
    let jac = if s == Ordering::Greater { dphi } else { dphi.neg(g) };
    let pulled = f.substitute(v, phi, g).mul(&jac, g);
    let rhs = set_total(&pulled, v, &u, ctx)?.into_integral("pulled-back integral")?;
    let equal = agree(&lhs, &rhs, ctx);
    Ok(TransformReport { image, lhs, rhs, equal })
}

// ---------------------------------------------------------------- differentiation under the integral

#[derive(Clone, Debug)]
pub struct DiffReport {
    pub integral: Expr,
    pub derivative: Expr,
    pub symbolic: bool,
    pub samples: Vec<(Series, AlgebraElement, AlgebraElement)>,
    pub ok: bool,
}

/// Family e(s, x) with s = var 0 and x = var 1 over x ∈ [a, b].
pub fn differentiate_under_integral(e: &Expr, a: &Series, b: &Series, points: &[Series], ctx: &Ctx) -> Result<DiffReport> {
    let g = &ctx.group;
    let (lo, hi) = (Expr::series(a.clone()), Expr::series(b.clone()));
    let integral = integrate_layer(e, 1, &lo, &hi, ctx)?;
    let derivative = integral.derivative(0, g);
    let de = e.derivative(0, g);
    let symbolic = match integrate_layer(&de, 1, &lo, &hi, ctx) {
        Ok(inner) => inner.sub(&derivative, g).simplify(g).is_zero(),
        Err(_) => false,
    };
    let mut samples = Vec::new();
    let mut ok = true;
    for s in points {
        let left = derivative.eval(&[s.clone()], ctx)?;
        let slice = de.substitute(0, &Expr::series(s.clone()), g).map_vars(&|i| (i == 1).then(|| Expr::var(0)), g);
        let right = integrate_interval(&slice, 0, &Endpoint::Finite(a.clone()), &Endpoint::Finite(b.clone()), ctx)?;
        ok &= agree(&left, &right, ctx);
        samples.push((s.clone(), left, right));
    }
    Ok(DiffReport { integral, derivative, symbolic, samples, ok })
}

// ---------------------------------------------------------------- standard part

#[derive(Clone, Debug, PartialEq)]
pub enum RealMeasure {
    Finite(RealConstant),
    Infinite,
}

impl std::fmt::Display for RealMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RealMeasure::Finite(c) => write!(f, "{c}"),
            RealMeasure::Infinite => write!(f, "infinite"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StdPartReport {
    /// st(λ(A))
    pub st_of_measure: RealMeasure,
    /// λ(st(A))
    pub measure_of_st: RealMeasure,
    pub r_bounded: bool,
    pub equal: bool,
}

fn st_endpoint(p: &Endpoint) -> Result<Option<RealConstant>> {
    match p {
        Endpoint::Finite(x) => Ok(match x.standard_part()? {
            StandardPart::Finite(c) => Some(c),
            StandardPart::Infinite => None,
        }),
        _ => Ok(None),
    }
}

/// Real length of st of one interval; `None` when unbounded.
fn st_length(lo: &Endpoint, hi: &Endpoint) -> Result<Option<RealConstant>> {
    Ok(match (st_endpoint(lo)?, st_endpoint(hi)?) {
        (Some(a), Some(b)) => Some(&b - &a),
        _ => None,
    })
}

fn st_measure_1d(s: &SetOneD) -> Result<RealMeasure> {
    let mut acc = RealConstant::zero();
    for c in &s.normalize()?.components {
        if let Component::Interval { lo, hi, .. } = c {
            match st_length(lo, hi)? {
                Some(l) => acc = &acc + &l,
                None => return Ok(RealMeasure::Infinite),
            }
        }
    }
    Ok(RealMeasure::Finite(acc))
}

fn box_sides(r: &Region) -> Result<Vec<(Endpoint, Endpoint)>> {
    let base = r.base.normalize()?;
    let [Component::Interval { lo, hi, .. }] = base.components.as_slice() else {
        return Err(Error::unsupported("standard parts are computed for intervals and boxes"));
    };
    let mut sides = vec![(lo.clone(), hi.clone())];
    for (a, b) in &r.layers {
        match (a.as_series(), b.as_series()) {
            (Some(a), Some(b)) => sides.push((Endpoint::Finite(a), Endpoint::Finite(b))),
            _ => return Err(Error::unsupported("standard parts are computed for intervals and boxes")),
        }
    }
    Ok(sides)
}

/// Lebesgue measure of st(A) ∩ ℝⁿ, with 0·∞ = 0.
fn measure_of_st(r: &Region) -> Result<RealMeasure> {
    if r.dim() == 1 {
        return st_measure_1d(&r.base);
    }
    let mut zero = false;
    let mut infinite = false;
    let mut acc = RealConstant::one();
    for (lo, hi) in box_sides(r)? {
        match st_length(&lo, &hi)? {
            Some(l) if l.is_zero() => zero = true,
            Some(l) => acc = &acc * &l,
            None => infinite = true,
        }
    }
    Ok(if zero {
        RealMeasure::Finite(RealConstant::zero())
    } else if infinite {
        RealMeasure::Infinite
    } else {
        RealMeasure::Finite(acc)
    })
}

fn region_r_bounded(r: &Region) -> Result<bool> {
    if r.dim() == 1 {
        return r.base.is_r_bounded();
    }
    for (lo, hi) in box_sides(r)? {
        if st_endpoint(&lo)?.is_none() || st_endpoint(&hi)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn st_of(m: &MeasureValue) -> Result<RealMeasure> {
    match m {
        MeasureValue::Infinite => Ok(RealMeasure::Infinite),
        MeasureValue::Finite(a) => match a.as_series() {
            None => Ok(RealMeasure::Infinite),
            Some(s) => Ok(match s.standard_part()? {
                StandardPart::Finite(c) => RealMeasure::Finite(c),
                StandardPart::Infinite => RealMeasure::Infinite,
            }),
        },
    }
}

fn same(a: &RealMeasure, b: &RealMeasure) -> Result<bool> {
    Ok(match (a, b) {
        (RealMeasure::Finite(x), RealMeasure::Finite(y)) => x.cmp_default(y)? == Ordering::Equal,
        (RealMeasure::Infinite, RealMeasure::Infinite) => true,
        _ => false,
    })
}

/// Both sides of st(λ(A)) = λ(st(A)); never fails on unbounded input, only reports.
pub fn standard_part_measure(r: &Region, ctx: &Ctx) -> Result<StdPartReport> {
    let st_of_measure = st_of(&measure_region(r, ctx)?)?;
    let measure_of_st = measure_of_st(r)?;
    let equal = same(&st_of_measure, &measure_of_st)?;
    Ok(StdPartReport { st_of_measure, measure_of_st, r_bounded: region_r_bounded(r)?, equal })
}

/// The asserting form: NotRBounded for unbounded input, Invariant on a mismatch.
pub fn assert_standard_part(r: &Region, ctx: &Ctx) -> Result<StdPartReport> {
    let rep = standard_part_measure(r, ctx)?;
    if !rep.r_bounded {
        return Err(Error::NotRBounded);
    }
    if !rep.equal {
        return Err(Error::Invariant(format!("{} != {}", rep.st_of_measure, rep.measure_of_st)));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semialg::expr::default_names;

    fn ctx() -> Ctx {
        Ctx::rational()
    }

    #[test]
    fn ftc_examples() {
        let c = ctx();
        for src in ["x^3 - 2*x", "1/x", "1/(1 + x^2)", "x*exp(x)", "log(x)", "abs(x - 1)", "1/(x^2 - 1)", "sqrt(1 - x^2)"] {
            let e = Expr::parse(src, &default_names(1), &c).unwrap();
            let rep = check_ftc(&e, 0, &c).unwrap();
            assert!(rep.ok, "{src}: {:?}", rep);
        }
    }

    #[test]
    fn transformations() {
        let c = ctx();
        let n = default_names(1);
        let u = SetOneD::parse("[0, 1]", &c).unwrap();
        let one = Expr::int(&c.group, 1);
        let rep = check_transformation(&Expr::parse("2*x", &n, &c).unwrap(), &one, &u, 0, &c).unwrap();
        assert!(rep.equal);
        assert_eq!(rep.lhs.to_string(), "2");
        let rep = check_transformation(&Expr::parse("x + 3", &n, &c).unwrap(), &one, &u, 0, &c).unwrap();
        assert_eq!((rep.lhs.to_string(), rep.rhs.to_string()), ("1".into(), "1".into()));
        let phi = Expr::parse("1 - x", &n, &c).unwrap();
        let f = Expr::parse("x^2", &n, &c).unwrap();
        assert!(check_transformation(&phi, &f, &u, 0, &c).unwrap().equal);
        let bad = Expr::parse("x^2", &n, &c).unwrap();
        let sym = SetOneD::parse("[-1, 1]", &c).unwrap();
        assert!(matches!(check_transformation(&bad, &one, &sym, 0, &c), Err(Error::NotMonotone(_))));
    }

    #[test]
    fn under_the_integral() {
        let c = ctx();
        let n = vec!["s".to_string(), "x".to_string()];
        let pts = [c.series("1 + t").unwrap(), c.int(2)];
        let e = Expr::parse("1/(s^2 + x^2)", &n, &c).unwrap();
        let rep = differentiate_under_integral(&e, &c.int(0), &c.int(1), &pts, &c).unwrap();
        assert!(rep.ok, "{rep:?}");
        let e = Expr::parse("s", &n, &c).unwrap();
        let rep = differentiate_under_integral(&e, &c.int(0), &c.int(1), &pts, &c).unwrap();
        assert!(rep.ok && rep.symbolic);
        assert_eq!(rep.derivative.to_string(), "1");
    }

    #[test]
    fn standard_parts() {
        let c = ctx();
        let r = Region::parse("[t, 1 + t]", &c).unwrap();
        let rep = assert_standard_part(&r, &c).unwrap();
        assert_eq!(rep.st_of_measure, RealMeasure::Finite(RealConstant::one()));
        let r = Region::parse("[-t, t]", &c).unwrap();
        assert!(assert_standard_part(&r, &c).unwrap().equal);
        let r = Region::parse("region x in [-t, t]; y in [-1/t, 1/t]", &c).unwrap();
        let rep = standard_part_measure(&r, &c).unwrap();
        assert_eq!(rep.st_of_measure, RealMeasure::Finite(RealConstant::from_int(4)));
        assert_eq!(rep.measure_of_st, RealMeasure::Finite(RealConstant::zero()));
        assert!(!rep.r_bounded && !rep.equal);
        assert!(matches!(assert_standard_part(&r, &c), Err(Error::NotRBounded)));
    }
}
