//! Real instantiation t := τ, X := log(1/τ) and adaptive Gauss–Kronrod quadrature.

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::semialg::expr::Expr;
use crate::semialg::set::{Component, Endpoint, Region, SetOneD};
use num_traits::Float;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Clone, Copy, Debug)]
pub struct Quadrature<F: Float> {
    pub rel_tol: F,
    pub abs_tol: F,
    pub max_intervals: usize,
}

pub type Quadrature64 = Quadrature<f64>;
pub type Quadrature32 = Quadrature<f32>;

struct Piece<F> {
    a: F,
    b: F,
    val: F,
    err: F,
}

impl<F: Float> PartialEq for Piece<F> {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl<F: Float> Eq for Piece<F> {}
impl<F: Float> PartialOrd for Piece<F> {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl<F: Float> Ord for Piece<F> {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.partial_cmp(&o.err).unwrap_or(std::cmp::Ordering::Equal)
    }
}

fn c<F: Float>(x: f64) -> F {
    F::from(x).expect("float conversion")
}

impl<F: Float> Default for Quadrature<F> {
    fn default() -> Self {
        let eps = F::epsilon();
        Quadrature { rel_tol: (eps * c(64.0)).max(c(1e-12)), abs_tol: eps * c(16.0), max_intervals: 4000 }
    }
}

impl<F: Float> Quadrature<F> {
    fn gk15(f: &dyn Fn(F) -> F, a: F, b: F) -> (F, F) {
        let half = c::<F>(0.5);
        let center = (a + b) * half;
        let h = (b - a) * half;
        let fc = f(center);
        let mut k = fc * c(WGK[7]);
        let mut g = fc * c(WG[3]);
        for i in 0..7 {
            let dx = h * c(XGK[i]);
            let s = f(center - dx) + f(center + dx);
            k = k + s * c(WGK[i]);
            if i % 2 == 1 {
                g = g + s * c(WG[i / 2]);
            }
        }
        let val = k * h;
        let err = ((k - g) * h).abs();
        (val, err)
    }

    /// ∫_a^b f on a finite interval; singular endpoints are fine since nodes are interior.
    pub fn finite(&self, f: &dyn Fn(F) -> F, a: F, b: F) -> Result<F> {
        if a == b {
            return Ok(F::zero());
        }
        let mut heap = BinaryHeap::new();
        let (val, err) = Self::gk15(f, a, b);
        heap.push(Piece { a, b, val, err });
        let (mut total, mut total_err) = (val, err);
        while total_err > self.abs_tol.max(self.rel_tol * total.abs()) {
            if heap.len() >= self.max_intervals {
                return Err(Error::OracleUnavailable(format!(
                    "quadrature did not converge (error estimate {:e})",
                    total_err.to_f64().unwrap_or(f64::NAN)
                )));
            }
            let p = heap.pop().expect("nonempty");
            let m = (p.a + p.b) * c(0.5);
            let (v1, e1) = Self::gk15(f, p.a, m);
            let (v2, e2) = Self::gk15(f, m, p.b);
            total = total - p.val + v1 + v2;
            total_err = total_err - p.err + e1 + e2;
            heap.push(Piece { a: p.a, b: m, val: v1, err: e1 });
            heap.push(Piece { a: m, b: p.b, val: v2, err: e2 });
        }
        if !total.is_finite() {
            return Err(Error::OracleUnavailable("integrand is not finite at quadrature nodes".into()));
        }
        Ok(total)
    }

    /// Infinite ends are mapped by x = a + u/(1 − u), x = u/(1 − u²) or their mirrors.
    pub fn integrate(&self, f: &dyn Fn(F) -> F, a: F, b: F) -> Result<F> {
        let one = F::one();
        match (a.is_finite(), b.is_finite()) {
            (true, true) => self.finite(f, a, b),
            (true, false) => {
                let g = |u: F| {
                    let d = one - u;
                    f(a + u / d) / (d * d)
                };
                self.finite(&g, F::zero(), one)
            }
            (false, true) => {
                let g = |u: F| {
                    let d = one - u;
                    f(b - u / d) / (d * d)
                };
                self.finite(&g, F::zero(), one)
            }
            (false, false) => {
                let g = |u: F| {
                    let d = one - u * u;
                    f(u / d) * (one + u * u) / (d * d)
                };
                self.finite(&g, -one, one)
            }
        }
    }
}

fn endpoint<F: Float>(p: &Endpoint, tau: F) -> F {
    match p {
        Endpoint::NegInf => F::neg_infinity(),
        Endpoint::PosInf => F::infinity(),
        Endpoint::Finite(s) => s.eval_float(tau),
    }
}

/// ∫_S e(x) dx with the problem instantiated at τ.
pub fn integrate_set<F: Float>(q: &Quadrature<F>, e: &Expr, s: &SetOneD, tau: F) -> Result<F> {
    let mut acc = F::zero();
    for comp in &s.normalize()?.components {
        if let Component::Interval { lo, hi, .. } = comp {
            let f = |x: F| e.eval_float(&[x], tau);
            acc = acc + q.integrate(&f, endpoint(lo, tau), endpoint(hi, tau))?;
        }
    }
    Ok(acc)
}

fn nested<F: Float>(q: &Quadrature<F>, e: &Expr, r: &Region, tau: F, pt: &mut Vec<F>) -> Result<F> {
    let k = pt.len();
    if k == r.dim() {
        return Ok(e.eval_float(pt, tau));
    }
    let (lo, hi) = &r.layers[k - 1];
    let (a, b) = (lo.eval_float(pt, tau), hi.eval_float(pt, tau));
    if !(a < b) {
        return Ok(F::zero());
    }
    let failure = std::cell::RefCell::new(None);
    let f = |x: F| {
        let mut p = pt.clone();
        p.push(x);
        match nested(q, e, r, tau, &mut p) {
            Ok(v) => v,
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                F::nan()
            }
        }
    };
    let v = q.integrate(&f, a, b);
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    v
}

/// Iterated quadrature over a region.
pub fn integrate_region<F: Float>(q: &Quadrature<F>, e: &Expr, r: &Region, tau: F) -> Result<F> {
    if r.dim() == 1 {
        return integrate_set(q, e, &r.base, tau);
    }
    let inner = Quadrature { rel_tol: q.rel_tol, abs_tol: q.abs_tol, max_intervals: q.max_intervals.min(400) };
    let mut acc = F::zero();
    for comp in &r.base.normalize()?.components {
        if let Component::Interval { lo, hi, .. } = comp {
            let failure = std::cell::RefCell::new(None);
            let f = |x: F| match nested(&inner, e, r, tau, &mut vec![x]) {
                Ok(v) => v,
                Err(err) => {
                    failure.borrow_mut().get_or_insert(err);
                    F::nan()
                }
            };
            let v = q.integrate(&f, endpoint(lo, tau), endpoint(hi, tau));
            if let Some(err) = failure.into_inner() {
                return Err(err);
            }
            acc = acc + v?;
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug)]
pub struct OracleCheck {
    pub tau0: f64,
    pub symbolic: f64,
    pub numeric: f64,
    pub rel_err: f64,
}

pub fn rel_err(symbolic: f64, numeric: f64) -> f64 {
    let d = (symbolic - numeric).abs();
    if symbolic == 0.0 {
        d
    } else {
        d / symbolic.abs()
    }
}

/// Compares an exact result with quadrature of the instantiated problem.
pub fn check_region(value: &AlgebraElement, e: &Expr, r: &Region, tau0: f64) -> Result<OracleCheck> {
    let q = Quadrature64::default();
    let numeric = integrate_region(&q, e, r, tau0)?;
    let symbolic = value.eval_f64(tau0);
    Ok(OracleCheck { tau0, symbolic, numeric, rel_err: rel_err(symbolic, numeric) })
}
