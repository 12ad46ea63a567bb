//! Simple descriptions at +∞ and differentiation.

use super::limit::expansion_at_infinity;
use crate::calculus::integrate::critical_points;
use crate::constants::Q;
use crate::error::Result;
use crate::semialg::expr::Expr;
use crate::series::{Ctx, Series};
use num_traits::Zero;
use std::fmt;

/// h · x^σ₁ · (log x)^σ₂ · X^σ₃ with h → limit.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleTerm {
    pub sigma1: Q,
    pub sigma2: i64,
    pub sigma3: usize,
    pub limit: Series,
}

#[derive(Clone, Debug)]
pub struct SimpleDescription {
    /// Descending in (σ₁, σ₂), then σ₃ ascending.
    pub terms: Vec<SimpleTerm>,
    /// Terms of order x^q for q below this are not listed.
    pub remainder: Option<Q>,
    /// The description holds for x > x0.
    pub x0: Option<Series>,
}

impl SimpleDescription {
    pub fn is_ultimately_zero(&self) -> bool {
        self.terms.is_empty() && self.remainder.is_none()
    }

    /// μ = lexicographic max of (σ₁, σ₂).
    pub fn mu(&self) -> Option<(Q, i64)> {
        self.terms.first().map(|t| (t.sigma1.clone(), t.sigma2))
    }
}

pub fn simple_description(f: &Expr, v: usize, ctx: &Ctx) -> Result<SimpleDescription> {
    let a = expansion_at_infinity(f, v, ctx)?;
    let mut terms = Vec::new();
    for t in &a.terms {
        for (k, c) in t.c.coeffs().iter().enumerate() {
            if !c.is_zero() {
                terms.push(SimpleTerm { sigma1: t.q.clone(), sigma2: t.j, sigma3: k, limit: c.clone() });
            }
        }
    }
    let x0 = match critical_points(f, v, ctx) {
        Ok(pts) => Some(pts.last().map_or_else(|| Series::zero(&ctx.group), |p| p.add(&Series::one(&ctx.group)))),
        Err(_) => None,
    };
    Ok(SimpleDescription { terms, remainder: a.rem, x0 })
}

pub fn differentiate(f: &Expr, v: usize, ctx: &Ctx) -> Expr {
    f.derivative(v, &ctx.group).simplify(&ctx.group)
}

fn monomial(t: &SimpleTerm) -> String {
    let mut parts = vec![format!("({})", t.limit)];
    if !t.sigma1.is_zero() {
        parts.push(format!("x^({})", t.sigma1));
    }
    if t.sigma2 != 0 {
        parts.push(format!("log(x)^{}", t.sigma2));
    }
    if t.sigma3 != 0 {
        parts.push(format!("X^{}", t.sigma3));
    }
    parts.join("*")
}

impl fmt::Display for SimpleDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<String> = self.terms.iter().map(monomial).collect();
        if let Some(r) = &self.remainder {
            items.push(format!("O(x^({r}))"));
        }
        if items.is_empty() {
            items.push("0".into());
        }
        write!(f, "{}", items.join(" + "))?;
        if let Some(x0) = &self.x0 {
            write!(f, "  for x > {x0}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semialg::expr::default_names;

    fn sd(src: &str) -> SimpleDescription {
        let ctx = Ctx::rational();
        simple_description(&Expr::parse(src, &default_names(1), &ctx).unwrap(), 0, &ctx).unwrap()
    }

    fn sig(d: &SimpleDescription) -> Vec<(String, i64, usize, String)> {
        d.terms.iter().map(|t| (t.sigma1.to_string(), t.sigma2, t.sigma3, t.limit.to_string())).collect()
    }

    #[test]
    fn descriptions() {
        let d = sd("(x + 1)/x");
        assert_eq!(sig(&d), vec![("0".into(), 0, 0, "1".into()), ("-1".into(), 0, 0, "1".into())]);
        assert!(d.remainder.is_none());
        assert_eq!(sig(&sd("log(x)")), vec![("0".into(), 1, 0, "1".into())]);
        let d = sd("arctan(x)");
        assert_eq!(&sig(&d)[0], &("0".into(), 0, 0, "pi/2".into()));
        assert_eq!(d.mu(), Some((Q::zero(), 0)));
        assert!(sd("x - x").is_ultimately_zero());
        assert_eq!(sig(&sd("X*x^2"))[0], ("2".into(), 0, 1, "1".into()));
    }

    #[test]
    fn derivatives() {
        let ctx = Ctx::rational();
        let n = default_names(1);
        let d = |s: &str| differentiate(&Expr::parse(s, &n, &ctx).unwrap(), 0, &ctx).to_string();
        assert_eq!(d("log(x)"), "1/x");
        assert_eq!(d("x*X"), "X");
        assert_eq!(d("arctan(x)"), "1/(x^2 + 1)");
    }
}
