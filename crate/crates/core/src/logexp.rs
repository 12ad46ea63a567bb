//! Partial logarithm and exponential, the extended logarithm into R[X], and
//! evaluation of restricted analytic functions at series points.

use crate::algebra::AlgebraElement;
use crate::constants::{RealConstant, Q};
use crate::error::{Error, Result};
use crate::exponents::Exponent;
use crate::series::{Series, StandardPart};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::cmp::Ordering;

/// Number of Taylor terms needed so that k·ord(δ) reaches the target.
fn terms_needed(delta: &Series, target: &Exponent) -> usize {
    let Ok(e) = delta.ord() else { return 0 };
    let mut k = 0usize;
    while e.scale_int(k as i64 + 1) < *target && k < 100_000 {
        k += 1;
    }
    k + 1
}

/// Σ_{k≥0} a_k δ^k for infinitesimal δ, truncated below the target.
pub fn taylor(delta: &Series, coeffs: &[RealConstant], target: &Exponent) -> Result<Series> {
    let g = delta.group().clone();
    let mut sum = Series::constant(&g, coeffs.first().cloned().unwrap_or_else(RealConstant::zero)).truncate(target);
    if delta.is_zero() {
        return Ok(sum);
    }
    if let Ok(e) = delta.ord() {
        if !e.is_positive() {
            return Err(Error::Invariant("Taylor expansion point is not infinitesimal".into()));
        }
    }
    let mut pw = Series::one(&g);
    for a in coeffs.iter().skip(1) {
        pw = pw.mul(delta).truncate(target);
        if !a.is_zero() {
            sum = sum.add(&pw.scale(a));
        }
    }
    Ok(sum.add(&Series::big_o(target.clone())))
}

/// Coefficients (−1)^(j+1)/j of L.
pub fn l_coeff(j: usize) -> Q {
    if j == 0 {
        return Q::zero();
    }
    let s = if j % 2 == 1 { 1 } else { -1 };
    Q::new(BigInt::from(s), BigInt::from(j as i64))
}

/// L(h) = Σ (−1)^(j+1) h^j / j for infinitesimal h.
pub fn log_series_l(h: &Series, target: &Exponent) -> Result<Series> {
    if h.is_zero() {
        return Ok(Series::zero(h.group()));
    }
    let k = terms_needed(h, target);
    let coeffs: Vec<RealConstant> = (0..=k).map(|j| RealConstant::from_rational(l_coeff(j))).collect();
    taylor(h, &coeffs, target)
}

/// f = a·t^γ·(1 + h).
pub fn unit_decompose(f: &Series) -> Result<(Exponent, RealConstant, Series)> {
    let (g, a) = match f.leading() {
        Some((g, a)) => (g.clone(), a.clone()),
        None => return Err(f.ord().unwrap_err()),
    };
    let h = f.shift(&g.neg()).scale(&a.inv()?).sub(&Series::one(f.group()));
    Ok((g, a, h))
}

pub fn partial_log(f: &Series, target: &Exponent) -> Result<Series> {
    let (g, a, h) = unit_decompose(f)?;
    if !g.is_zero() {
        return Err(Error::domain("partial logarithm needs ord(f) = 0"));
    }
    if a.sign()? != Ordering::Greater {
        return Err(Error::domain("partial logarithm needs a positive leading coefficient"));
    }
    Ok(Series::constant(f.group(), a.log()?).add(&log_series_l(&h, target)?))
}

pub fn partial_exp(g: &Series, target: &Exponent) -> Result<Series> {
    if g.is_zero() {
        return Ok(Series::one(g.group()));
    }
    if let Some((e, _)) = g.leading() {
        if e.is_negative() {
            return Err(Error::domain("partial exponential needs a bounded argument"));
        }
    }
    let z = Exponent::zero(g.group());
    let c = g.coeff_at(&z);
    let h = g.sub(&Series::constant(g.group(), c.clone()));
    let k = terms_needed(&h, target);
    let mut coeffs = Vec::with_capacity(k + 1);
    let mut fact = Q::one();
    for j in 0..=k {
        if j > 0 {
            fact *= Q::from_integer(BigInt::from(j as i64));
        }
        coeffs.push(RealConstant::from_rational(fact.recip()));
    }
    Ok(taylor(&h, &coeffs, target)?.scale(&c.exp()?))
}

/// log f = −τ(ord f)·X + log a + L(h).
pub fn extended_log(f: &Series, target: &Exponent) -> Result<AlgebraElement> {
    if f.sign()? != Ordering::Greater {
        return Err(Error::domain("logarithm of a non-positive element"));
    }
    let (g, a, h) = unit_decompose(f)?;
    let grp = f.group().clone();
    let x_coeff = Series::constant(&grp, -g.embed());
    let c0 = Series::constant(&grp, a.log()?).add(&log_series_l(&h, target)?);
    Ok(AlgebraElement::from_coeffs(&grp, vec![c0, x_coeff]))
}

/// Splits x = c + δ with c = st(x) finite and δ infinitesimal.
fn split_standard(x: &Series) -> Result<Option<(RealConstant, Series)>> {
    match x.standard_part()? {
        StandardPart::Infinite => Ok(None),
        StandardPart::Finite(c) => {
            let d = x.sub(&Series::constant(x.group(), c.clone()));
            Ok(Some((c, d)))
        }
    }
}

/// Truncated power series in δ with constant coefficients.
fn tp_mul(a: &[RealConstant], b: &[RealConstant], n: usize) -> Vec<RealConstant> {
    let mut out = vec![RealConstant::zero(); n];
    for (i, x) in a.iter().enumerate().take(n) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

fn integrate_coeffs(d: &[RealConstant], c0: RealConstant) -> Vec<RealConstant> {
    let mut out = vec![c0];
    for (k, b) in d.iter().enumerate() {
        out.push(b.scale(&Q::new(BigInt::one(), BigInt::from(k as i64 + 1))));
    }
    out
}

pub fn atan(x: &Series, target: &Exponent) -> Result<Series> {
    if x.is_zero() {
        return Ok(x.clone());
    }
    let g = x.group().clone();
    match split_standard(x)? {
        None => {
            let s = x.sign()?;
            let half_pi = RealConstant::pi().scale(&Q::new(BigInt::one(), BigInt::from(2)));
            let hp = if s == Ordering::Greater { half_pi } else { -half_pi };
            let inv = x.inv(target)?;
            Ok(Series::constant(&g, hp).sub(&atan(&inv, target)?))
        }
        Some((c, d)) => {
            let k = terms_needed(&d, target);
            // 1/(A + Bδ + δ²) with A = 1 + c², B = 2c
            let a = &RealConstant::one() + &(&c * &c);
            let a_inv = a.inv()?;
            let b = c.scale(&Q::from_integer(BigInt::from(2)));
            let mut bs: Vec<RealConstant> = Vec::with_capacity(k);
            for j in 0..k {
                let v = if j == 0 {
                    a_inv.clone()
                } else {
                    let mut s = &b * &bs[j - 1];
                    if j >= 2 {
                        s = &s + &bs[j - 2];
                    }
                    -(&(&s * &a_inv))
                };
                bs.push(v);
            }
            let coeffs = integrate_coeffs(&bs, c.atan()?);
            taylor(&d, &coeffs, target)
        }
    }
}

pub fn asin(x: &Series, target: &Exponent) -> Result<Series> {
    if let Some(c) = x.as_constant() {
        return Ok(Series::constant(x.group(), c.asin()?));
    }
    let Some((c, d)) = split_standard(x)? else {
        return Err(Error::domain("arcsin of an infinite element"));
    };
    let one = RealConstant::one();
    let a = &one - &(&c * &c);
    match a.sign()? {
        Ordering::Greater => {}
        Ordering::Equal => return asin_near_one(x, &c, target),
        Ordering::Less => return Err(Error::domain("arcsin argument outside [-1, 1]")),
    }
    let k = terms_needed(&d, target);
    // (1 − (c+δ)²)^(−1/2) = A^(−1/2) (1 + u)^(−1/2), u = (−2cδ − δ²)/A
    let a_inv = a.inv()?;
    let mut u = vec![RealConstant::zero(); k.max(1)];
    if k > 1 {
        u[1] = -(&(&c.scale(&Q::from_integer(BigInt::from(2))) * &a_inv));
    }
    if k > 2 {
        u[2] = -&a_inv;
    }
    let mut acc = vec![RealConstant::zero(); k.max(1)];
    let mut pw = vec![RealConstant::zero(); k.max(1)];
    pw[0] = one.clone();
    let half = Q::new(BigInt::one(), BigInt::from(2));
    let mut binom = Q::one();
    for m in 0..k.max(1) {
        if m > 0 {
            binom = binom * (-&half - Q::from_integer(BigInt::from(m as i64 - 1))) / Q::from_integer(BigInt::from(m as i64));
            pw = tp_mul(&pw, &u, k.max(1));
        }
        for (i, p) in pw.iter().enumerate() {
            acc[i] = &acc[i] + &p.scale(&binom);
        }
    }
    let scale = a.pow_rational(&-half)?;
    let deriv: Vec<RealConstant> = acc.iter().map(|v| v * &scale).collect();
    let coeffs = integrate_coeffs(&deriv, c.asin()?);
    taylor(&d, &coeffs, target)
}

/// arcsin(±(1 − δ)) = ±(π/2 − 2·arcsin(√(δ/2))).
fn asin_near_one(x: &Series, c: &RealConstant, target: &Exponent) -> Result<Series> {
    let g = x.group();
    let unit = Series::constant(g, c.clone());
    let delta = Series::one(g).sub(&x.mul(&unit));
    let half_pi = Series::constant(g, RealConstant::pi().scale(&Q::new(BigInt::one(), BigInt::from(2))));
    let inner = match delta.sign()? {
        Ordering::Less => return Err(Error::domain("arcsin argument outside [-1, 1]")),
        Ordering::Equal => Series::zero(g),
        Ordering::Greater => {
            let root = delta.scale_q(&Q::new(BigInt::one(), BigInt::from(2))).sqrt(target)?;
            asin(&root, target)?.scale_q(&Q::from_integer(BigInt::from(2)))
        }
    };
    Ok(half_pi.sub(&inner).mul(&unit))
}

pub fn exp(x: &Series, target: &Exponent) -> Result<Series> {
    partial_exp(x, target)
}

pub fn sqrt(x: &Series, target: &Exponent) -> Result<Series> {
    x.sqrt(target)
}

/// A user power series Σ a_k y^k with rational coefficients and radius ρ.
pub struct PowerSeries<'a> {
    pub coeff: &'a dyn Fn(usize) -> Q,
    pub radius: Q,
    /// Some(n) when a_k = 0 for k > n.
    pub degree: Option<usize>,
}

pub fn eval_power_series(p: &PowerSeries<'_>, x: &Series, target: &Exponent) -> Result<Series> {
    if let Some(n) = p.degree {
        let mut acc = Series::zero(x.group());
        for k in (0..=n).rev() {
            acc = acc.mul(x).add(&Series::rational(x.group(), (p.coeff)(k)));
            if !acc.is_exact() {
                acc = acc.truncate(target);
            }
        }
        return Ok(acc);
    }
    match x.standard_part()? {
        StandardPart::Finite(c) if c.is_zero() => {
            let k = terms_needed(x, target);
            let coeffs: Vec<RealConstant> = (0..=k).map(|j| RealConstant::from_rational((p.coeff)(j))).collect();
            taylor(x, &coeffs, target)
        }
        StandardPart::Finite(c) => {
            let r = RealConstant::from_rational(p.radius.clone());
            if c.abs()?.cmp_default(&r)? != Ordering::Less {
                return Err(Error::domain("outside the radius of convergence"));
            }
            Err(Error::unsupported("user power series are expanded only at standard part 0"))
        }
        StandardPart::Infinite => Err(Error::domain("outside the radius of convergence")),
    }
}

/// Evaluation by name, as used by the series parser.
pub fn apply_named(name: &str, x: &Series, target: &Exponent) -> Result<Series> {
    match name {
        "arctan" | "atan" => atan(x, target),
        "arcsin" | "asin" => asin(x, target),
        "exp" => exp(x, target),
        "sqrt" => sqrt(x, target),
        "abs" => x.abs(),
        "log" | "ln" => {
            let l = extended_log(x, target)?;
            l.as_series().ok_or_else(|| Error::domain("log of a non-unit series has an X part; evaluate it in R[X]"))
        }
        _ => Err(crate::syntax::syntax(0, 0, &format!("unknown function '{name}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::ExponentGroup;
    use crate::series::default_target;
    use proptest::prelude::*;

    fn qr(n: i64, d: i64) -> RealConstant {
        RealConstant::from_rational(Q::new(BigInt::from(n), BigInt::from(d)))
    }

    fn g() -> crate::exponents::Group {
        ExponentGroup::rational()
    }

    fn s(src: &str) -> Series {
        Series::parse(src, &g(), &default_target(&g())).unwrap()
    }

    fn w(n: i64) -> Exponent {
        Exponent::from_int(&g(), n)
    }

    #[test]
    fn partial_log_examples() {
        assert_eq!(partial_log(&s("1+t"), &w(4)).unwrap().to_string(), "t - t^2/2 + t^3/3 + O(t^4)");
        assert_eq!(partial_log(&s("2"), &w(4)).unwrap(), s("log(2)"));
        let e = Series::constant(&g(), RealConstant::e());
        let got = partial_log(&e.mul(&s("1+t")), &w(3)).unwrap();
        assert_eq!(got.to_string(), "1 + t - t^2/2 + O(t^3)");
        assert!(partial_log(&s("t"), &w(3)).is_err());
    }

    #[test]
    fn partial_exp_examples() {
        assert_eq!(partial_exp(&s("t"), &w(4)).unwrap().to_string(), "1 + t + t^2/2 + t^3/6 + O(t^4)");
        assert_eq!(partial_exp(&Series::zero(&g()), &w(4)).unwrap(), s("1"));
        let back = partial_exp(&partial_log(&s("1+t"), &w(6)).unwrap(), &w(6)).unwrap();
        assert!(back.equal_up_to(&s("1+t"), &w(6)));
    }

    #[test]
    fn extended_log_examples() {
        let x = AlgebraElement::x(&g());
        assert_eq!(extended_log(&s("t^(-1)"), &w(4)).unwrap(), x);
        assert_eq!(extended_log(&s("t^(1/2)"), &w(4)).unwrap(), x.scale_const(&qr(-1, 2)));
        assert!(extended_log(&s("1"), &w(4)).unwrap().is_zero());
        assert_eq!(extended_log(&s("2*t^(-1)"), &w(4)).unwrap().to_string(), "X + log(2)");
    }

    #[test]
    fn analytic_examples() {
        let got = atan(&s("t^(-1)"), &w(5)).unwrap();
        assert_eq!(got.to_string(), "pi/2 - t + t^3/3 + O(t^5)");
        assert!(atan(&Series::zero(&g()), &w(5)).unwrap().is_zero());
        let r = sqrt(&s("4+t"), &w(3)).unwrap();
        assert_eq!(r.to_string(), "2 + t/4 - t^2/64 + O(t^3)");
        assert_eq!(asin(&s("1"), &w(3)).unwrap(), s("pi/2"));
        assert!(asin(&s("1 + t"), &w(3)).is_err());
        let a = asin(&s("1 - t"), &w(4)).unwrap();
        let tau = 1e-4f64;
        assert!((a.eval_f64(tau) - (1.0 - tau).asin()).abs() < 1e-9);
        let b = asin(&s("-1 + t^2"), &w(4)).unwrap();
        assert!((b.eval_f64(tau) - (-1.0 + tau * tau).asin()).abs() < 1e-9);
    }

    #[test]
    fn taylor_at_nonzero_points_matches_floats() {
        let tau = 1e-3f64;
        let target = w(6);
        let cases: Vec<(Series, f64)> = vec![
            (atan(&s("1/2 + t"), &target).unwrap(), (0.5 + tau).atan()),
            (atan(&s("-3 + 2*t^(1/2)"), &target).unwrap(), (-3.0 + 2.0 * tau.sqrt()).atan()),
            (asin(&s("1/3 - t"), &target).unwrap(), (1.0 / 3.0 - tau).asin()),
            (exp(&s("1 + t^(1/2)"), &target).unwrap(), (1.0 + tau.sqrt()).exp()),
        ];
        for (x, want) in cases {
            let got = x.eval_f64(tau);
            assert!(((got - want) / want).abs() < 1e-9, "{x}: {got} vs {want}");
        }
    }

    #[test]
    fn user_power_series() {
        let c = |k: usize| Q::new(BigInt::one(), BigInt::from(k as i64 + 1));
        let p = PowerSeries { coeff: &c, radius: Q::one(), degree: None };
        let got = eval_power_series(&p, &s("t"), &w(3)).unwrap();
        assert_eq!(got.to_string(), "1 + t/2 + t^2/3 + O(t^3)");
        let q = PowerSeries { coeff: &c, radius: Q::one(), degree: Some(1) };
        assert_eq!(eval_power_series(&q, &s("5 + t"), &w(3)).unwrap(), s("1 + (5+t)/2"));
    }

    fn arb_pos() -> impl Strategy<Value = Series> {
        (1i64..5, -3i64..3, 1i64..3, -4i64..5, 1i64..4).prop_map(|(a, e, d, b, f)| {
            let grp = ExponentGroup::rational();
            let lead = Series::monomial(Exponent::from_rational(&grp, Q::new(BigInt::from(e), BigInt::from(d))), RealConstant::from_int(a));
            let unit = Series::one(&grp).add(&Series::monomial(Exponent::from_rational(&grp, Q::new(BigInt::one(), BigInt::from(f))), RealConstant::from_int(b)));
            lead.mul(&unit)
        })
    }

    proptest! {
        #[test]
        fn extended_log_is_a_homomorphism(f in arb_pos(), h in arb_pos()) {
            let target = w(3);
            let lhs = extended_log(&f.mul(&h), &target).unwrap();
            let rhs = extended_log(&f, &target).unwrap().add(&extended_log(&h, &target).unwrap());
            let d = lhs.sub(&rhs);
            for c in d.coeffs() {
                prop_assert!(c.equal_up_to(&Series::zero(&g()), &target));
            }
        }

        #[test]
        fn log_exp_round_trip(b in -4i64..5, f in 1i64..4) {
            let grp = g();
            let target = w(3);
            let h = Series::monomial(Exponent::from_rational(&grp, Q::new(BigInt::one(), BigInt::from(f))), RealConstant::from_int(b));
            let there = partial_log(&partial_exp(&h, &target).unwrap(), &target).unwrap();
            prop_assert!(there.equal_up_to(&h, &target));
        }

        #[test]
        fn extended_log_is_increasing(f in arb_pos(), h in arb_pos()) {
            let target = w(3);
            let ord = f.compare(&h).unwrap();
            prop_assume!(ord != Ordering::Equal);
            let lf = extended_log(&f, &target).unwrap();
            let lh = extended_log(&h, &target).unwrap();
            if let Ok(o) = lf.compare(&lh) {
                prop_assert_eq!(o, ord);
            }
        }

        #[test]
        fn real_instantiation_of_log_and_exp(f in arb_pos()) {
            let tau = 1e-3f64;
            let target = w(10);
            let l = extended_log(&f, &target).unwrap();
            let want = f.eval_f64(tau).ln();
            prop_assert!(((l.eval_f64(tau) - want) / want.abs().max(1.0)).abs() < 1e-9);
        }
    }
}
