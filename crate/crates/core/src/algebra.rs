//! The Lebesgue algebra R[X] with X = log(t⁻¹).

use crate::constants::RealConstant;
use crate::error::{Error, Result};
use crate::exponents::{Exponent, Group};
use crate::series::{join_signed, Series};
use crate::syntax::{self, Ast};
use serde_json::{json, Value};
use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, PartialEq)]
pub struct AlgebraElement {
    group: Group,
    coeffs: Vec<Series>,
}

impl AlgebraElement {
    pub fn zero(g: &Group) -> Self {
        AlgebraElement { group: g.clone(), coeffs: Vec::new() }
    }

    pub fn from_series(s: Series) -> Self {
        let g = s.group().clone();
        Self::from_coeffs(&g, vec![s])
    }

    pub fn constant(g: &Group, c: RealConstant) -> Self {
        Self::from_series(Series::constant(g, c))
    }

    pub fn from_int(g: &Group, n: i64) -> Self {
        Self::from_series(Series::from_int(g, n))
    }

    /// X itself.
    pub fn x(g: &Group) -> Self {
        Self::from_coeffs(g, vec![Series::zero(g), Series::one(g)])
    }

    pub fn x_pow(g: &Group, k: usize) -> Self {
        let mut c = vec![Series::zero(g); k + 1];
        c[k] = Series::one(g);
        Self::from_coeffs(g, c)
    }

    pub fn from_coeffs(g: &Group, mut coeffs: Vec<Series>) -> Self {
        while coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        AlgebraElement { group: g.clone(), coeffs }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn coeffs(&self) -> &[Series] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Series {
        self.coeffs.get(i).cloned().unwrap_or_else(|| Series::zero(&self.group))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Result<usize> {
        if self.is_zero() {
            Err(Error::ZeroPolynomial)
        } else {
            Ok(self.coeffs.len() - 1)
        }
    }

    /// Degree with 0 for the zero element.
    pub fn degree_or_zero(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn as_series(&self) -> Option<Series> {
        match self.coeffs.len() {
            0 => Some(Series::zero(&self.group)),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.iter().all(Series::is_exact)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let c = (0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect();
        Self::from_coeffs(&self.group, c)
    }

    pub fn neg(&self) -> Self {
        Self::from_coeffs(&self.group, self.coeffs.iter().map(Series::neg).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(&self.group);
        }
        let mut c = vec![Series::zero(&self.group); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] = c[i + j].add(&a.mul(b));
            }
        }
        Self::from_coeffs(&self.group, c)
    }

    pub fn scale(&self, s: &Series) -> Self {
        Self::from_coeffs(&self.group, self.coeffs.iter().map(|c| c.mul(s)).collect())
    }

    pub fn scale_const(&self, c: &RealConstant) -> Self {
        Self::from_coeffs(&self.group, self.coeffs.iter().map(|x| x.scale(c)).collect())
    }

    pub fn truncate(&self, w: &Exponent) -> Self {
        Self::from_coeffs(&self.group, self.coeffs.iter().map(|c| c.truncate(w)).collect())
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut r = Self::from_int(&self.group, 1);
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// Substitutes X ↦ image (a ring endomorphism fixing the coefficients).
    pub fn compose_x(&self, image: &AlgebraElement) -> Self {
        let mut acc = Self::zero(&self.group);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(image).add(&Self::from_series(c.clone()));
        }
        acc
    }

    pub fn map_coeffs(&self, f: impl Fn(&Series) -> Result<Series>) -> Result<Self> {
        Ok(Self::from_coeffs(&self.group, self.coeffs.iter().map(f).collect::<Result<_>>()?))
    }

    /// Sign by dominance: least valuation first, then highest X-power.
    pub fn sign(&self) -> Result<Ordering> {
        let mut best: Option<(Exponent, usize)> = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            if let Some((e, _)) = c.leading() {
                let better = match &best {
                    None => true,
                    Some((be, _)) => e <= be,
                };
                if better {
                    best = Some((e.clone(), i));
                }
            }
        }
        for c in &self.coeffs {
            if !c.has_known_terms() && !c.is_zero() {
                let w = match c.precision() {
                    crate::series::Precision::KnownBelow(w) => w,
                    _ => unreachable!(),
                };
                match &best {
                    Some((be, _)) if w > be => {}
                    _ => return Err(Error::precision("algebra comparison cancels beyond the known terms")),
                }
            }
        }
        match best {
            None => Ok(Ordering::Equal),
            Some((_, i)) => self.coeffs[i].sign(),
        }
    }

    pub fn compare(&self, o: &Self) -> Result<Ordering> {
        self.sub(o).sign()
    }

    /// Representative of the class modulo the bounded series O_R.
    pub fn reduce(&self) -> Result<Self> {
        let c0 = self.coeff(0);
        if let crate::series::Precision::KnownBelow(w) = c0.precision() {
            if !w.is_positive() && !w.is_zero() {
                return Err(Error::precision("bounded part of the constant coefficient is not certified"));
            }
        }
        let mut c = self.coeffs.clone();
        if !c.is_empty() {
            c[0] = c0.principal_part();
        }
        Ok(Self::from_coeffs(&self.group, c))
    }

    /// Infinitesimal iff every coefficient has positive valuation.
    pub fn is_infinitesimal(&self) -> Result<bool> {
        for c in &self.coeffs {
            if c.is_zero() {
                continue;
            }
            if !c.ord()?.is_positive() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Value at t := τ, X := log(1/τ).
    pub fn eval_f64(&self, tau: f64) -> f64 {
        self.eval_float(tau)
    }

    pub fn eval_float<F: num_traits::Float>(&self, tau: F) -> F {
        let x = (F::one() / tau).ln();
        let mut acc = F::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c.eval_float(tau);
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        json!(self.coeffs.iter().map(Series::to_json).collect::<Vec<_>>())
    }

    pub fn parse(src: &str, g: &Group, target: &Exponent) -> Result<Self> {
        Self::from_ast(&syntax::parse_ast(src)?, g, target)
    }

    pub fn from_ast(a: &Ast, g: &Group, target: &Exponent) -> Result<Self> {
        if !mentions_x(a) {
            return Ok(Self::from_series(Series::from_ast(a, g, target)?));
        }
        Ok(match a {
            Ast::Ident(n) if n == "X" => Self::x(g),
            Ast::Neg(x) => Self::from_ast(x, g, target)?.neg(),
            Ast::Add(x, y) => Self::from_ast(x, g, target)?.add(&Self::from_ast(y, g, target)?),
            Ast::Sub(x, y) => Self::from_ast(x, g, target)?.sub(&Self::from_ast(y, g, target)?),
            Ast::Mul(x, y) => Self::from_ast(x, g, target)?.mul(&Self::from_ast(y, g, target)?),
            Ast::Div(x, y) if !mentions_x(y) => {
                let d = Series::from_ast(y, g, target)?;
                let inv = Series::one(g).div(&d, target)?;
                Self::from_ast(x, g, target)?.scale(&inv)
            }
            Ast::Pow(b, e) => {
                let k = syntax::ast_to_real_expr(e)?.normalize()?.as_rational();
                match k {
                    Some(k) if k.is_integer() && k >= num_traits::Zero::zero() => {
                        let k: usize = num_traits::ToPrimitive::to_usize(&k.to_integer()).ok_or_else(|| Error::domain("exponent too large"))?;
                        Self::from_ast(b, g, target)?.pow(k)
                    }
                    _ => return Err(Error::domain("X may only be raised to non-negative integer powers")),
                }
            }
            _ => return Err(Error::domain("X cannot appear in this position")),
        })
    }
}

pub fn mentions_x(a: &Ast) -> bool {
    match a {
        Ast::Ident(n) => n == "X",
        Ast::Num(_) => false,
        Ast::Call(_, xs) => xs.iter().any(mentions_x),
        Ast::Neg(x) => mentions_x(x),
        Ast::Add(x, y) | Ast::Sub(x, y) | Ast::Mul(x, y) | Ast::Div(x, y) | Ast::Pow(x, y) | Ast::Cmp(_, x, y) => {
            mentions_x(x) || mentions_x(y)
        }
        Ast::Piecewise(bs, d) => mentions_x(d) || bs.iter().any(|(c, v)| mentions_x(c) || mentions_x(v)),
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(bool, String)> = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let xp = match i {
                0 => None,
                1 => Some("X".to_string()),
                k => Some(format!("X^{k}")),
            };
            match xp {
                None => {
                    let s = c.to_string();
                    let (neg, body) = split_sign(&s);
                    if parts.is_empty() || c.terms().len() + usize::from(!c.is_exact()) <= 1 {
                        parts.push((neg, body));
                    } else {
                        parts.push((false, s));
                    }
                }
                Some(xp) => {
                    let single = c.is_exact() && c.terms().len() == 1;
                    if single {
                        let (e, k) = &c.terms()[0];
                        if e.is_zero() {
                            parts.push(crate::series::render_scaled(k, Some(xp)));
                        } else {
                            let s = Series::monomial(e.clone(), RealConstant::one()).to_string();
                            parts.push(crate::series::render_scaled(k, Some(format!("{s}*{xp}"))));
                        }
                    } else {
                        parts.push((false, format!("({c})*{xp}")));
                    }
                }
            }
        }
        write!(f, "{}", join_signed(parts))
    }
}

fn split_sign(s: &str) -> (bool, String) {
    match s.strip_prefix('-') {
        Some(r) => (true, r.to_string()),
        None => (false, s.to_string()),
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
