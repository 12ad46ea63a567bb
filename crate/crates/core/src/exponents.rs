//! Finitely generated archimedean value groups with their embedding into ℝ.

use crate::constants::{self, RealConstant, Q};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

/// Γ given by a ℚ-basis of real numbers. The first basis element is 1.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct ExponentGroup {
    basis: Vec<RealConstant>,
}

pub type Group = Arc<ExponentGroup>;

static RATIONAL: OnceLock<Group> = OnceLock::new();

impl ExponentGroup {
    /// Γ = ℚ.
    pub fn rational() -> Group {
        RATIONAL.get_or_init(|| Arc::new(ExponentGroup { basis: vec![RealConstant::one()] })).clone()
    }

    /// Γ = ℚ + ℚb₂ + … ; linear independence of the basis is the caller's contract.
    pub fn new(extra: Vec<RealConstant>) -> Result<Group> {
        if extra.is_empty() {
            return Ok(Self::rational());
        }
        let mut basis = vec![RealConstant::one()];
        for b in extra {
            if b.is_rational() || basis.contains(&b) {
                return Err(Error::domain(format!("basis element {b} is dependent")));
            }
            basis.push(b);
        }
        Ok(Arc::new(ExponentGroup { basis }))
    }

    /// `Q`, `Q+Q*sqrt(2)`, `Q + Q*pi + Q*log(2)`.
    pub fn parse(src: &str) -> Result<Group> {
        let parts: Vec<&str> = src.split('+').map(str::trim).collect();
        if parts.first().copied() != Some("Q") {
            return Err(crate::syntax::syntax(1, 1, "group must start with 'Q'"));
        }
        let mut extra = Vec::new();
        let mut col = 2;
        for p in &parts[1..] {
            let body = p
                .strip_prefix("Q*")
                .ok_or_else(|| crate::syntax::syntax(1, col, "expected 'Q*<constant>'"))?;
            extra.push(crate::syntax::parse_constant(body)?.0);
            col += p.len() + 1;
        }
        Self::new(extra)
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[RealConstant] {
        &self.basis
    }

    pub fn is_rational(&self) -> bool {
        self.basis.len() == 1
    }

    pub fn describe(&self) -> String {
        let mut s = "Q".to_string();
        for b in &self.basis[1..] {
            s.push_str(&format!("+Q*{}", paren(&b.to_string())));
        }
        s
    }

    pub fn element(self: &Arc<Self>, c: &RealConstant) -> Result<Exponent> {
        let coords = c
            .linear_coords(&self.basis)
            .ok_or_else(|| Error::domain(format!("{c} is not in the value group {}", self.describe())))?;
        Ok(Exponent { coords, group: self.clone() })
    }
}

fn paren(s: &str) -> String {
    if s.contains(' ') {
        format!("({s})")
    } else {
        s.to_string()
    }
}

/// An element γ of Γ in rational coordinates.
#[derive(Clone)]
pub struct Exponent {
    coords: Vec<Q>,
    group: Group,
}

impl Exponent {
    pub fn zero(g: &Group) -> Self {
        Exponent { coords: vec![Q::zero(); g.rank()], group: g.clone() }
    }

    pub fn from_rational(g: &Group, q: Q) -> Self {
        let mut e = Self::zero(g);
        e.coords[0] = q;
        e
    }

    pub fn from_int(g: &Group, n: i64) -> Self {
        Self::from_rational(g, Q::from_integer(BigInt::from(n)))
    }

    pub fn from_coords(g: &Group, coords: Vec<Q>) -> Result<Self> {
        if coords.len() != g.rank() {
            return Err(Error::GroupMismatch);
        }
        Ok(Exponent { coords, group: g.clone() })
    }

    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn as_rational(&self) -> Option<Q> {
        if self.coords[1..].iter().all(Zero::is_zero) {
            Some(self.coords[0].clone())
        } else {
            None
        }
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational().filter(|q| q.is_integer()).map(|q| q.to_integer())
    }

    fn check(&self, o: &Exponent) -> Result<()> {
        if Arc::ptr_eq(&self.group, &o.group) || self.group == o.group {
            Ok(())
        } else {
            Err(Error::GroupMismatch)
        }
    }

    pub fn add(&self, o: &Exponent) -> Exponent {
        self.check(o).expect("exponents from different groups");
        Exponent { coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect(), group: self.group.clone() }
    }

    pub fn sub(&self, o: &Exponent) -> Exponent {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Exponent {
        Exponent { coords: self.coords.iter().map(|a| -a).collect(), group: self.group.clone() }
    }

    pub fn scale(&self, q: &Q) -> Exponent {
        Exponent { coords: self.coords.iter().map(|a| a * q).collect(), group: self.group.clone() }
    }

    pub fn scale_int(&self, n: i64) -> Exponent {
        self.scale(&Q::from_integer(BigInt::from(n)))
    }

    /// τ(γ) = Σ coords_i · b_i.
    pub fn embed(&self) -> RealConstant {
        let mut acc = RealConstant::zero();
        for (c, b) in self.coords.iter().zip(&self.group.basis) {
            if !c.is_zero() {
                acc = &acc + &b.scale(c);
            }
        }
        acc
    }

    pub fn sign_with(&self, bits: u32) -> Result<Ordering> {
        if let Some(q) = self.as_rational() {
            return Ok(q.cmp(&Q::zero()));
        }
        self.embed().sign_with(bits)
    }

    pub fn try_cmp(&self, o: &Exponent) -> Result<Ordering> {
        self.check(o)?;
        if self.coords == o.coords {
            return Ok(Ordering::Equal);
        }
        self.sub(o).sign_with(constants::budget())
    }

    pub fn is_positive(&self) -> bool {
        self.cmp(&Exponent::zero(&self.group)) == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.cmp(&Exponent::zero(&self.group)) == Ordering::Less
    }

    pub fn min(a: &Exponent, b: &Exponent) -> Exponent {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max(a: &Exponent, b: &Exponent) -> Exponent {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// Smallest n ∈ ℕ with |self| ≤ n·|o|; `o` must be nonzero.
    pub fn archimedean_witness(&self, o: &Exponent) -> Result<BigInt> {
        if o.is_zero() {
            return Err(Error::domain("archimedean witness needs a nonzero bound"));
        }
        let a = self.embed().abs()?;
        let b = o.embed().abs()?;
        let mut bits = 64;
        loop {
            let ia = a.approx(bits);
            let ib = b.approx(bits);
            if ib.lo.is_positive() {
                let n = (&ia.hi / &ib.lo).ceil().to_integer();
                return Ok(n.max(BigInt::one()));
            }
            bits *= 2;
            if bits > constants::budget().max(64) * 4 {
                return Err(Error::precision("archimedean witness"));
            }
        }
    }

    /// Least common denominator of the coordinates.
    pub fn denominator(&self) -> BigInt {
        self.coords.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    pub fn to_f64(&self) -> f64 {
        match self.as_rational() {
            Some(q) => q.to_f64().unwrap_or(f64::NAN),
            None => self.embed().to_f64(),
        }
    }
}

impl PartialEq for Exponent {
    fn eq(&self, o: &Self) -> bool {
        self.coords == o.coords
    }
}

impl Eq for Exponent {}

impl Hash for Exponent {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.coords.hash(h)
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Exponent {
    /// Distinct coordinate vectors have distinct embeddings for an independent
    /// basis, so raising the bit budget always terminates.
    fn cmp(&self, o: &Self) -> Ordering {
        if self.coords == o.coords {
            return Ordering::Equal;
        }
        let d = self.sub(o);
        let mut bits = constants::budget();
        loop {
            match d.sign_with(bits) {
                Ok(s) => return s,
                Err(_) if bits < 1 << 16 => bits *= 4,
                Err(e) => panic!("exponent comparison failed: {e}"),
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(q) => write!(f, "{}", constants::render_rational(&q)),
            None => write!(f, "{}", self.embed()),
        }
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    fn rank2() -> Group {
        ExponentGroup::parse("Q+Q*sqrt(2)").unwrap()
    }

    #[test]
    fn embed_examples() {
        let g = ExponentGroup::rational();
        assert_eq!(Exponent::from_rational(&g, q(-1, 2)).embed(), RealConstant::from_frac(-1, 2));
        let g2 = rank2();
        let e = Exponent::from_coords(&g2, vec![q(1, 1), q(-1, 1)]).unwrap();
        let want = crate::syntax::parse_constant("1 - sqrt(2)").unwrap().0;
        assert_eq!(e.embed(), want);
        assert!(e.is_negative());
        assert!(Exponent::zero(&g2).embed().is_zero());
    }

    #[test]
    fn compare_examples() {
        let g = ExponentGroup::rational();
        assert_eq!(Exponent::from_rational(&g, q(1, 2)).cmp(&Exponent::from_rational(&g, q(1, 3))), Ordering::Greater);
        let g2 = rank2();
        let a = Exponent::from_coords(&g2, vec![q(0, 1), q(1, 1)]).unwrap();
        let b = Exponent::from_coords(&g2, vec![q(1, 1), q(0, 1)]).unwrap();
        assert_eq!(a.cmp(&b), Ordering::Greater);
        assert_eq!(a.cmp(&a.clone()), Ordering::Equal);
    }

    #[test]
    fn archimedean_witness_bounds() {
        let g2 = rank2();
        let a = Exponent::from_coords(&g2, vec![q(7, 1), q(3, 1)]).unwrap();
        let b = Exponent::from_coords(&g2, vec![q(-3, 2), q(1, 1)]).unwrap();
        let n = a.archimedean_witness(&b).unwrap();
        let lhs = a.embed().abs().unwrap();
        let rhs = b.embed().abs().unwrap().scale(&Q::from_integer(n));
        assert_ne!(lhs.cmp_default(&rhs).unwrap(), Ordering::Greater);
    }

    #[test]
    fn group_elements_from_constants() {
        let g2 = rank2();
        let c = crate::syntax::parse_constant("1/2 - 3*sqrt(2)").unwrap().0;
        assert_eq!(g2.element(&c).unwrap().coords(), &[q(1, 2), q(-3, 1)]);
        assert!(g2.element(&RealConstant::pi()).is_err());
        assert_eq!(g2.describe(), "Q+Q*sqrt(2)");
    }

    fn arb_pair() -> impl Strategy<Value = (i64, i64, i64, i64)> {
        (-40i64..40, 1i64..9, -40i64..40, 1i64..9)
    }

    proptest! {
        #[test]
        fn embed_is_an_ordered_homomorphism((a, b, c, d) in arb_pair(), (e, f, g, h) in arb_pair()) {
            let grp = rank2();
            let x = Exponent::from_coords(&grp, vec![q(a, b), q(c, d)]).unwrap();
            let y = Exponent::from_coords(&grp, vec![q(e, f), q(g, h)]).unwrap();
            prop_assert_eq!(x.add(&y).embed(), &x.embed() + &y.embed());
            let ord = x.cmp(&y);
            let real = x.embed().cmp_default(&y.embed()).unwrap_or(Ordering::Equal);
            prop_assert_eq!(ord, real);
            let z = Exponent::from_coords(&grp, vec![q(1, 3), q(-1, 5)]).unwrap();
            prop_assert_eq!(x.add(&z).cmp(&y.add(&z)), ord);
            prop_assert_eq!(x.add(&y.neg()).add(&y), x.clone());
        }
    }
}
