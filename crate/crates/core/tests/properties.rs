use hm_core::algebra::AlgebraElement;
use hm_core::calculus::checks::{agree, check_ftc, differ_by_constant};
use hm_core::calculus::{antiderivative, integrate_region, measure_1d, measure_region, MeasureValue};
use hm_core::constructible::{limit_at_infinity, Limit};
use hm_core::datum::{build_isomorphism_q, Section};
use hm_core::oracle::{self, Quadrature64};
use hm_core::semialg::expr::{default_names, Expr};
use hm_core::semialg::{Component, Region, SetOneD};
use hm_core::series::{Ctx, Series, StandardPart};
use proptest::prelude::*;
use std::cmp::Ordering;

const EXPS: [&str; 7] = ["(-2)", "(-1)", "(-1/2)", "0", "(1/2)", "1", "2"];
const BOUNDED: [&str; 4] = ["0", "(1/2)", "1", "2"];

fn ctx() -> Ctx {
    Ctx::rational()
}

fn render(terms: &[(usize, i64)], exps: &[&str]) -> String {
    let mut s = String::from("0");
    for (k, c) in terms {
        s.push_str(&format!(" + ({c})*t^{}", exps[*k % exps.len()]));
    }
    s
}

fn arb_series() -> impl Strategy<Value = String> {
    prop::collection::vec((0usize..EXPS.len(), -6i64..=6), 0..3).prop_map(|ts| render(&ts, &EXPS))
}

/// Positive, with leading exponent ≤ 0 so real instantiation stays well conditioned.
fn arb_width() -> impl Strategy<Value = String> {
    (1i64..=6, 0usize..3, prop::collection::vec((4usize..7, -3i64..=3), 0..2)).prop_map(|(c, k, rest)| {
        let lead = ["(-1)", "(-1/2)", "0"][k];
        format!("{c}*t^{lead} + {}", render(&rest, &EXPS))
    })
}

fn arb_bounded() -> impl Strategy<Value = String> {
    prop::collection::vec((0usize..BOUNDED.len(), -6i64..=6), 0..3).prop_map(|ts| render(&ts, &BOUNDED))
}

fn interval(c: &Ctx, a: &str, w: &str) -> (Series, Series) {
    let a = c.series(a).unwrap();
    let b = a.add(&c.series(w).unwrap());
    (a, b)
}

fn finite(m: MeasureValue) -> AlgebraElement {
    match m {
        MeasureValue::Finite(a) => a,
        MeasureValue::Infinite => panic!("infinite measure"),
    }
}

fn poly_in(vars: &[&str], coeffs: &[i64]) -> String {
    let mut s = String::from("0");
    for (i, c) in coeffs.iter().enumerate() {
        let a = i % 3;
        let b = (i / 3) % 3;
        s.push_str(&format!(" + ({c})*{}^{a}*{}^{b}", vars[0], vars[1]));
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn normalize_is_idempotent_and_keeps_measure(parts in prop::collection::vec((arb_series(), arb_width()), 1..4)) {
        let c = ctx();
        let comps: Vec<Component> = parts.iter().map(|(a, w)| {
            let (lo, hi) = interval(&c, a, w);
            Component::closed(lo, hi)
        }).collect();
        let s = SetOneD::new(comps);
        let n1 = s.normalize().unwrap();
        prop_assert_eq!(n1.normalize().unwrap(), n1.clone());
        prop_assert_eq!(measure_1d(&s, &c).unwrap(), measure_1d(&n1, &c).unwrap());
    }

    #[test]
    fn additivity_monotonicity_translation(a in arb_series(), w1 in arb_width(), gap in arb_width(), w2 in arb_width(), shift in arb_series()) {
        let c = ctx();
        let (lo1, hi1) = interval(&c, &a, &w1);
        let lo2 = hi1.add(&c.series(&gap).unwrap());
        let hi2 = lo2.add(&c.series(&w2).unwrap());
        let first = SetOneD::interval(lo1.clone(), hi1.clone());
        let second = SetOneD::interval(lo2.clone(), hi2.clone());
        let both = first.union(&second).unwrap();
        let m = |s: &SetOneD| finite(measure_1d(s, &c).unwrap());
        prop_assert_eq!(m(&both), m(&first).add(&m(&second)));
        let hull = SetOneD::interval(lo1, hi2);
        prop_assert_ne!(m(&both).compare(&m(&hull)).unwrap(), Ordering::Greater);
        let sh = c.series(&shift).unwrap();
        prop_assert_eq!(m(&both.translate(&sh)), m(&both));
    }

    #[test]
    fn boxes_are_products(sides in prop::collection::vec((arb_series(), arb_width()), 1..=3)) {
        let c = ctx();
        let pairs: Vec<(Series, Series)> = sides.iter().map(|(a, w)| interval(&c, a, w)).collect();
        let want = pairs.iter().fold(AlgebraElement::from_int(&c.group, 1), |acc, (a, b)| acc.mul(&AlgebraElement::from_series(b.sub(a))));
        let r = Region::boxed(&pairs, &c.group).unwrap();
        let got = finite(measure_region(&r, &c).unwrap());
        prop_assert_eq!(&got, &want);
        prop_assert!(got.is_zero() || got.degree().unwrap() < r.dim());
    }

    #[test]
    fn fubini_order_swap(x in (arb_series(), arb_width()), y in (arb_series(), arb_width()), coeffs in prop::collection::vec(-3i64..=3, 1..6)) {
        let c = ctx();
        let (xa, xb) = interval(&c, &x.0, &x.1);
        let (ya, yb) = interval(&c, &y.0, &y.1);
        let f = Expr::parse(&poly_in(&["x", "y"], &coeffs), &default_names(2), &c).unwrap();
        let f_swapped = Expr::parse(&poly_in(&["y", "x"], &coeffs), &default_names(2), &c).unwrap();
        let r1 = Region::boxed(&[(xa.clone(), xb.clone()), (ya.clone(), yb.clone())], &c.group).unwrap();
        let r2 = Region::boxed(&[(ya, yb), (xa, xb)], &c.group).unwrap();
        let v1 = integrate_region(&f, &r1, &c).unwrap();
        let v2 = integrate_region(&f_swapped, &r2, &c).unwrap();
        prop_assert_eq!(&v1, &v2);
        prop_assert!(v1.degree_or_zero() <= 2);
    }

    #[test]
    fn real_instantiation_of_box_integrals(x in (arb_series(), arb_width()), y in (arb_series(), arb_width()), coeffs in prop::collection::vec(-3i64..=3, 1..4)) {
        let c = ctx();
        let (xa, xb) = interval(&c, &x.0, &x.1);
        let (ya, yb) = interval(&c, &y.0, &y.1);
        let f = Expr::parse(&poly_in(&["x", "y"], &coeffs), &default_names(2), &c).unwrap();
        let r = Region::boxed(&[(xa, xb), (ya, yb)], &c.group).unwrap();
        let v = integrate_region(&f, &r, &c).unwrap();
        let sym = v.eval_f64(1e-3);
        let num = oracle::integrate_region(&Quadrature64::default(), &f, &r, 1e-3).unwrap();
        let scale = sym.abs().max(1.0);
        prop_assert!((sym - num).abs() / scale < 1e-6, "{} vs {}", sym, num);
    }

    #[test]
    fn standard_part_commutes_with_eval(x in arb_bounded(), coeffs in prop::collection::vec(-4i64..=4, 1..5)) {
        let c = ctx();
        let xs = c.series(&x).unwrap();
        let f = Expr::parse(&poly_in(&["x", "x"], &coeffs), &default_names(1), &c).unwrap();
        let StandardPart::Finite(x0) = xs.standard_part().unwrap() else { panic!("bounded input") };
        let direct = f.eval(std::slice::from_ref(&xs), &c).unwrap().as_series().unwrap().standard_part().unwrap();
        let at_st = f.eval(&[Series::constant(&c.group, x0)], &c).unwrap().as_series().unwrap().standard_part().unwrap();
        prop_assert_eq!(direct, at_st);
    }
}

fn arb_fragment() -> impl Strategy<Value = Vec<String>> {
    let piece = prop_oneof![
        (-4i64..=4, 0u32..5).prop_map(|(c, k)| format!("({c})*x^{k}")),
        (1i64..=4, 1i64..=3).prop_map(|(c, a)| format!("{c}/(x^2 + {a})")),
        (1i64..=4, 1i64..=3).prop_map(|(c, a)| format!("{c}/(x + {a})")),
        (1i64..=3).prop_map(|k| format!("exp({k}*x)")),
        (1i64..=3).prop_map(|a| format!("abs(x - {a})")),
        Just("log(x)".to_string()),
        Just("x*exp(x)".to_string()),
    ];
    prop::collection::vec(piece, 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ftc_round_trip_and_uniqueness(pieces in arb_fragment(), shift in -5i64..5) {
        let c = ctx();
        let src = pieces.join(" + ");
        let g = &c.group;
        let f = Expr::parse(&src, &default_names(1), &c).unwrap();
        let rep = check_ftc(&f, 0, &c).unwrap();
        prop_assert!(rep.ok, "{}", src);
        let mut parts = vec![Expr::int(g, shift)];
        for p in &pieces {
            parts.push(antiderivative(&Expr::parse(p, &default_names(1), &c).unwrap(), 0, &c).unwrap());
        }
        let pts: Vec<Series> = ["1/2", "1", "2", "1 + t", "5"].iter().map(|p| c.series(p).unwrap()).collect();
        prop_assert!(differ_by_constant(&rep.antiderivative, &Expr::sum(parts, g), 0, &c, &pts).unwrap());
    }

    #[test]
    fn limit_ignores_factors_tending_to_one(qs in prop::collection::vec((-4i64..=4, 0i64..=2, 1i64..=4), 1..4), pick in 0usize..4, which in 0usize..3) {
        let c = ctx();
        let terms: Vec<String> = qs.iter().map(|(q, n, k)| format!("({k})*x^({q}/2)*log(x)^{n}")).collect();
        let one_like = ["(1 + 1/x)", "exp(1/x)", "(x^2 + 1)/(x^2 - 3)"][which];
        let mut perturbed = terms.clone();
        let i = pick % terms.len();
        perturbed[i] = format!("{}*{one_like}", terms[i]);
        let f = Expr::parse(&terms.join(" + "), &default_names(1), &c).unwrap();
        let h = Expr::parse(&perturbed.join(" + "), &default_names(1), &c).unwrap();
        let a = limit_at_infinity(&f, 0, &c).unwrap();
        let b = limit_at_infinity(&h, 0, &c).unwrap();
        match (&a, &b) {
            (Limit::Finite(x), Limit::Finite(y)) => prop_assert!(agree(x, y, &c)),
            _ => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn isomorphisms_preserve_order_and_compose(u1 in (1i64..6, -3i64..=3), u2 in (1i64..6, -3i64..=3), pts in prop::collection::vec((arb_series(), arb_width()), 1..4)) {
        let c = ctx();
        let g = &c.group;
        let std = Section::standard(g);
        let s1 = Section::rational(c.series(&format!("({} + ({})*t)*t^(-1)", u1.0, u1.1)).unwrap()).unwrap();
        let s2 = Section::rational(c.series(&format!("({} + ({})*t^2)*t^(-1)", u2.0, u2.1)).unwrap()).unwrap();
        let a = build_isomorphism_q(&std, &s1, &c).unwrap();
        let b = build_isomorphism_q(&s1, &s2, &c).unwrap();
        let direct = build_isomorphism_q(&std, &s2, &c).unwrap();
        let pairs: Vec<(Series, Series)> = pts.iter().map(|(x, w)| interval(&c, x, w)).collect();
        prop_assert!(a.preserves_order(&pairs).unwrap());
        let composed = b.compose(&a).unwrap();
        prop_assert!(agree(&composed.x_image, &direct.x_image, &c));
        let gen = c.series("t^(-1)").unwrap();
        let lhs = AlgebraElement::from_series(composed.apply_series(&gen).unwrap());
        let rhs = AlgebraElement::from_series(direct.apply_series(&gen).unwrap());
        prop_assert!(agree(&lhs, &rhs, &c));
        for (x, _) in &pairs {
            let lhs = b.apply(&a.apply(&AlgebraElement::from_series(x.clone())).unwrap()).unwrap();
            let rhs = direct.apply(&AlgebraElement::from_series(x.clone())).unwrap();
            prop_assert!(agree(&lhs, &rhs, &c));
        }
    }
}
