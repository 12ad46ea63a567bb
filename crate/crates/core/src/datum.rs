//! Sections, Lebesgue isomorphisms over Γ = ℚ, the rank-2 witness, reduced invariance.

use crate::algebra::AlgebraElement;
use crate::calculus::checks::agree;
use crate::calculus::integrate::{integrate_interval, measure_region, MeasureValue};
use crate::constants::{RealConstant, Q};
use crate::error::{Error, Result};
use crate::exponents::{Exponent, ExponentGroup, Group};
use crate::logexp::extended_log;
use crate::semialg::expr::Expr;
use crate::semialg::set::{Endpoint, Region};
use crate::series::{Ctx, Series};
use num_traits::One;
use std::cmp::Ordering;
use std::fmt;

/// Images of the generators γ_i; extended multiplicatively.
#[derive(Clone, Debug)]
pub struct Section {
    pub group: Group,
    pub gens: Vec<(Exponent, Series)>,
}

impl Section {
    /// s(γ) = t^γ on the generator −1 of ℚ.
    pub fn standard(g: &Group) -> Section {
        let gen = Exponent::from_int(g, -1);
        Section { group: g.clone(), gens: vec![(gen.clone(), Series::monomial(gen, RealConstant::one()))] }
    }

    pub fn new(gens: Vec<(Exponent, Series)>) -> Result<Section> {
        let (first, _) = gens.first().ok_or_else(|| Error::domain("a section needs a generator"))?;
        let group = first.group().clone();
        for (gamma, img) in &gens {
            if img.sign()? != Ordering::Greater {
                return Err(Error::domain("section images must be positive"));
            }
            if img.ord()? != *gamma {
                return Err(Error::domain(format!("s({gamma}) = {img} does not have order {gamma}")));
            }
        }
        Ok(Section { group, gens })
    }

    /// Single generator −r of Γ = ℚ with image `img`.
    pub fn rational(img: Series) -> Result<Section> {
        let gamma = img.ord()?;
        if !gamma.is_negative() || gamma.as_rational().is_none() {
            return Err(Error::domain("the generator image must have negative rational order"));
        }
        Section::new(vec![(gamma, img)])
    }

    fn generator(&self) -> Result<(Q, &Series)> {
        match self.gens.as_slice() {
            [(g, img)] => Ok((g.as_rational().ok_or_else(|| Error::domain("generator is not rational"))?, img)),
            _ => Err(Error::domain("expected a section over Γ = ℚ with one generator")),
        }
    }

    /// s(γ) for γ a rational multiple of the generator.
    pub fn image(&self, gamma: &Exponent, target: &Exponent) -> Result<Series> {
        let (g, img) = self.generator()?;
        let q = gamma.as_rational().ok_or_else(|| Error::domain("γ is not rational"))?;
        img.pow_rational(&(q / g), target)
    }

    /// Unit part s(gen)·t^(−gen).
    fn unit(&self) -> Result<Series> {
        let (g, img) = self.generator()?;
        Ok(img.shift(&Exponent::from_rational(&self.group, -g)))
    }
}

/// Order-preserving algebra automorphism: a series automorphism K with K(t^{−r}) = ρ·t^{−r}, and X ↦ X + log(ρ)/r.
#[derive(Clone, Debug)]
pub struct AlgebraMap {
    pub r: Q,
    pub rho: Series,
    pub x_image: AlgebraElement,
    target: Exponent,
}

impl AlgebraMap {
    pub fn identity(g: &Group, target: &Exponent) -> AlgebraMap {
        AlgebraMap { r: Q::one(), rho: Series::one(g), x_image: AlgebraElement::x(g), target: target.clone() }
    }

    fn with_rho(r: Q, rho: Series, target: &Exponent) -> Result<AlgebraMap> {
        let g = rho.group().clone();
        let f_star = extended_log(&rho, target)?;
        if f_star.degree_or_zero() > 0 {
            return Err(Error::Invariant("the unit ratio must have order 0".into()));
        }
        let shift = f_star.coeff(0).scale_q(&r.recip());
        let x_image = AlgebraElement::x(&g).add(&AlgebraElement::from_series(shift));
        Ok(AlgebraMap { r, rho, x_image, target: target.clone() })
    }

    /// f*/r, the bounded shift of X.
    pub fn shift(&self) -> Series {
        self.x_image.coeff(0)
    }

    pub fn apply_series(&self, s: &Series) -> Result<Series> {
        let target = self.target.clone();
        s.substitute(
            &|e: &Exponent| {
                let q = e.as_rational().ok_or_else(|| Error::domain("K acts on rational exponents only"))?;
                let unit = self.rho.pow_rational(&(-q.clone() / &self.r), &target)?;
                Ok(unit.shift(e))
            },
            &target,
        )
    }

    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        let g = a.group().clone();
        let mut acc = AlgebraElement::zero(&g);
        let mut xp = AlgebraElement::from_int(&g, 1);
        for c in a.coeffs() {
            acc = acc.add(&xp.scale(&self.apply_series(c)?));
            xp = xp.mul(&self.x_image);
        }
        Ok(acc.truncate(&self.target))
    }

    pub fn apply_expr(&self, e: &Expr, g: &Group) -> Result<Expr> {
        e.map_consts(&|a| self.apply(a), g)
    }

    /// self ∘ other.
    pub fn compose(&self, other: &AlgebraMap) -> Result<AlgebraMap> {
        if self.r != other.r {
            return Err(Error::domain("maps use different generators"));
        }
        let rho = self.rho.mul(&self.apply_series(&other.rho)?).truncate(&self.target);
        AlgebraMap::with_rho(self.r.clone(), rho, &self.target)
    }

    /// Sign of K(b) − K(a) agrees with sign of b − a on the given pairs.
    pub fn preserves_order(&self, pairs: &[(Series, Series)]) -> Result<bool> {
        for (a, b) in pairs {
            let before = b.sub(a).sign()?;
            let after = self.apply_series(b)?.sub(&self.apply_series(a)?).sign()?;
            if before != after {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for AlgebraMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t^(-{}) -> ({})*t^(-{}), X -> {}", self.r, self.rho, self.r, self.x_image)
    }
}

/// Φ with K(s(γ)) = s′(γ) and Φ(X) = X + f*/r.
pub fn build_isomorphism_q(s: &Section, s2: &Section, ctx: &Ctx) -> Result<AlgebraMap> {
    let (g1, _) = s.generator()?;
    let (g2, _) = s2.generator()?;
    if g1 != g2 {
        return Err(Error::domain("sections must use the same generator"));
    }
    let r = -g1;
    let (u1, u2) = (s.unit()?, s2.unit()?);
    let mut rho = u2.div(&u1, &ctx.target)?;
    // ρ = u′ / K_ρ(u); K_ρ moves u only at higher order, so this settles
    for _ in 0..256 {
        let k = AlgebraMap::with_rho(r.clone(), rho.clone(), &ctx.target)?;
        let next = u2.div(&k.apply_series(&u1)?, &ctx.target)?;
        if next.equal_up_to(&rho, &ctx.target) {
            let map = AlgebraMap::with_rho(r, next, &ctx.target)?;
            verify_generators(&map, s, s2, ctx)?;
            return Ok(map);
        }
        rho = next;
    }
    Err(Error::precision("unit ratio did not settle"))
}

fn verify_generators(map: &AlgebraMap, s: &Section, s2: &Section, ctx: &Ctx) -> Result<()> {
    for ((_, a), (_, b)) in s.gens.iter().zip(&s2.gens) {
        let lhs = map.apply(&extended_log(a, &ctx.target)?)?;
        let rhs = extended_log(b, &ctx.target)?;
        if !agree(&lhs, &rhs, ctx) {
            return Err(Error::Invariant(format!("Φ(log s(γ)) = {lhs} but log s′(γ) = {rhs}")));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- rank 2

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    NonIsomorphic,
    Isomorphic,
}

#[derive(Clone, Debug)]
pub struct Rank2Report {
    pub zeta: RealConstant,
    pub unit: Series,
    pub alpha: [AlgebraElement; 2],
    pub beta: [AlgebraElement; 2],
    pub g: Series,
    /// β₂ − Φ(α₂) for the only Φ compatible with the first pair.
    pub residual: AlgebraElement,
    pub verdict: Verdict,
}

fn hyperbola(upper: &Series, ctx: &Ctx) -> Result<AlgebraElement> {
    let g = &ctx.group;
    let e = Expr::var(0).pow(&-Q::one(), g);
    integrate_interval(&e, 0, &Endpoint::Finite(Series::one(g)), &Endpoint::Finite(upper.clone()), ctx)
}

/// Γ = ℚ + ℚζ; α uses t^{−1}, t^{−ζ}; β uses t^{−1}, u·t^{−ζ}.
pub fn verify_nonisomorphism_rank2(zeta: &RealConstant, unit: &str, omega: Q) -> Result<Rank2Report> {
    let group = ExponentGroup::new(vec![zeta.clone()])?;
    let ctx = Ctx::new(group.clone(), omega);
    let u = ctx.series(unit)?;
    if u.sign()? != Ordering::Greater || !u.ord()?.is_zero() {
        return Err(Error::domain("the unit must be positive of order 0"));
    }
    if u.sub(&Series::one(&group)).is_zero() {
        return Err(Error::domain("u = 1 gives identical data; nothing to separate"));
    }
    let minus_one = Exponent::from_int(&group, -1);
    let minus_zeta = group.element(&-zeta.clone())?;
    let a1 = Series::monomial(minus_one, RealConstant::one());
    let a2 = Series::monomial(minus_zeta, RealConstant::one());
    let b2 = a2.mul(&u);
    let alpha = [hyperbola(&a1, &ctx)?, hyperbola(&a2, &ctx)?];
    let beta = [alpha[0].clone(), hyperbola(&b2, &ctx)?];
    let g = extended_log(&u, &ctx.target)?.coeff(0);
    // Φ(X) = rX + g′ is pinned by the first pair; Φ fixes the real ζ
    let r = beta[0].coeff(1);
    let g_prime = beta[0].coeff(0);
    let phi_x = AlgebraElement::from_coeffs(&group, vec![g_prime, r]);
    let phi_a2 = phi_x.scale(&Series::constant(&group, zeta.clone()));
    let residual = beta[1].sub(&phi_a2);
    let verdict = match residual.sign()? {
        Ordering::Equal => Verdict::Isomorphic,
        _ => Verdict::NonIsomorphic,
    };
    Ok(Rank2Report { zeta: zeta.clone(), unit: u, alpha, beta, g, residual, verdict })
}

// ---------------------------------------------------------------- reduced invariance

#[derive(Clone, Debug)]
pub struct InvarianceRow {
    pub set: String,
    pub under_s: MeasureValue,
    pub under_s2: MeasureValue,
    pub equal: bool,
}

fn transport(r: &Region, k: &AlgebraMap, ctx: &Ctx) -> Result<Region> {
    let g = &ctx.group;
    let map_ep = |p: &Endpoint| -> Result<Endpoint> {
        Ok(match p {
            Endpoint::Finite(x) => Endpoint::Finite(k.apply_series(x)?),
            other => other.clone(),
        })
    };
    let mut base = r.base.clone();
    for c in &mut base.components {
        match c {
            crate::semialg::set::Component::Interval { lo, hi, .. } => {
                *lo = map_ep(lo)?;
                *hi = map_ep(hi)?;
            }
            crate::semialg::set::Component::Point(p) => *p = k.apply_series(p)?,
        }
    }
    let layers = r
        .layers
        .iter()
        .map(|(a, b)| Ok((k.apply_expr(a, g)?, k.apply_expr(b, g)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Region { names: r.names.clone(), base, layers })
}

fn reduced(m: &MeasureValue) -> Result<MeasureValue> {
    Ok(match m {
        MeasureValue::Finite(a) => MeasureValue::Finite(a.reduce()?),
        MeasureValue::Infinite => MeasureValue::Infinite,
    })
}

/// reduce(λ^{s′}(A)) against Ψ(reduce(λ^s(A))) with Ψ = K on series and X ↦ X.
pub fn reduced_invariance_check(s: &Section, s2: &Section, sets: &[Region], ctx: &Ctx) -> Result<Vec<InvarianceRow>> {
    let std = Section::standard(&ctx.group);
    let k1 = build_isomorphism_q(&std, s, ctx)?;
    let k2 = build_isomorphism_q(&std, s2, ctx)?;
    let k12 = build_isomorphism_q(s, s2, ctx)?;
    let psi = AlgebraMap { x_image: AlgebraElement::x(&ctx.group), ..k12 };
    let mut rows = Vec::new();
    for r in sets {
        let m1 = reduced(&measure_region(&transport(r, &k1, ctx)?, ctx)?)?;
        let m2 = reduced(&measure_region(&transport(r, &k2, ctx)?, ctx)?)?;
        let equal = match (&m1, &m2) {
            (MeasureValue::Finite(a), MeasureValue::Finite(b)) => agree(&psi.apply(a)?.reduce()?, b, ctx),
            (MeasureValue::Infinite, MeasureValue::Infinite) => true,
            _ => false,
        };
        rows.push(InvarianceRow { set: r.to_string(), under_s: m1, under_s2: m2, equal });
    }
    Ok(rows)
}

/// The measure of [1, c] × [0, 1/x] under the image of `k`: log K(c).
pub fn hyperbola_measure(c: &Series, k: &AlgebraMap, ctx: &Ctx) -> Result<AlgebraElement> {
    let region = Region::parse(&format!("region x in [1, {c}]; y in [0, 1/x]"), ctx)?;
    match measure_region(&transport(&region, k, ctx)?, ctx)? {
        MeasureValue::Finite(a) => Ok(a),
        MeasureValue::Infinite => Err(Error::Invariant("bounded region with infinite measure".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Ctx {
        Ctx::rational()
    }

    #[test]
    fn isomorphisms() {
        let c = ctx();
        let std = Section::standard(&c.group);
        let id = build_isomorphism_q(&std, &std, &c).unwrap();
        assert!(id.shift().is_zero());
        let two = Section::rational(c.series("2*t^(-1)").unwrap()).unwrap();
        let phi = build_isomorphism_q(&std, &two, &c).unwrap();
        assert_eq!(phi.x_image.to_string(), "X + log(2)");
        let one_t = Section::rational(c.series("t^(-1) + 1").unwrap()).unwrap();
        let phi = build_isomorphism_q(&std, &one_t, &c).unwrap();
        let l = crate::logexp::log_series_l(&c.series("t").unwrap(), &c.target).unwrap();
        assert!(phi.shift().equal_up_to(&l, &c.target));
    }

    #[test]
    fn hyperbola_is_transported() {
        let c = ctx();
        let std = Section::standard(&c.group);
        let s2 = Section::rational(c.series("3*t^(-1) - 1 + t").unwrap()).unwrap();
        let phi = build_isomorphism_q(&std, &s2, &c).unwrap();
        let cc = c.series("t^(-2) + 5").unwrap();
        let a = hyperbola_measure(&cc, &AlgebraMap::identity(&c.group, &c.target), &c).unwrap();
        let b = hyperbola_measure(&cc, &phi, &c).unwrap();
        assert!(agree(&phi.apply(&a).unwrap(), &b, &c));
        assert!(phi.preserves_order(&[(c.int(1), c.series("1 + t").unwrap()), (c.series("t").unwrap(), c.series("t^(-1)").unwrap())]).unwrap());
    }

    #[test]
    fn rank_two() {
        let zeta = RealConstant::from_int(2).sqrt().unwrap();
        let rep = verify_nonisomorphism_rank2(&zeta, "1 + t", Q::from_integer(8.into())).unwrap();
        assert_eq!(rep.verdict, Verdict::NonIsomorphic);
        assert_eq!(rep.alpha[0].to_string(), "X");
        assert!(verify_nonisomorphism_rank2(&zeta, "1", Q::from_integer(8.into())).is_err());
        let rep = verify_nonisomorphism_rank2(&zeta, "1 + t^(sqrt(2))", Q::from_integer(8.into())).unwrap();
        assert_eq!(rep.verdict, Verdict::NonIsomorphic);
    }

    #[test]
    fn reduced_measures() {
        let c = ctx();
        let s = Section::rational(c.series("2*t^(-1)").unwrap()).unwrap();
        let s2 = Section::rational(c.series("t^(-1)*(1 + t)").unwrap()).unwrap();
        let sets: Vec<Region> = ["[0, 1 + t^(-1)]", "region x in [1, t^(-1)]; y in [0, 1/x]", "region x in [0, t^(-1)]; y in [0, 2]"]
            .iter()
            .map(|s| Region::parse(s, &c).unwrap())
            .collect();
        for row in reduced_invariance_check(&s, &s2, &sets, &c).unwrap() {
            assert!(row.equal, "{row:?}");
        }
    }
}
