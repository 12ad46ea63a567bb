//! The `hm` command line.

use crate::algebra::AlgebraElement;
use crate::calculus::{self, antiderivative, MeasureValue};
use crate::constants::{self, RealConstant, Q};
use crate::constructible::{self, Limit, Side};
use crate::datum::{self, Section};
use crate::error::{Error, Result};
use crate::exponents::{ExponentGroup, Group};
use crate::oracle::{self, OracleCheck};
use crate::semialg::expr::Expr;
use crate::semialg::set::{Component, Region, SetOneD};
use crate::series::{Ctx, Series};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::cmp::Ordering;

#[derive(Parser, Debug)]
#[command(name = "hm", version, about = "Exact measure and integration over Puiseux and Hahn series fields")]
pub struct Cli {
    /// Series are computed up to t^ω
    #[arg(long, global = true, env = "HM_PRECISION", default_value = "8")]
    pub precision: String,
    /// Bits used when certifying signs of real constants
    #[arg(long, global = true, default_value_t = 256)]
    pub const_bits: u32,
    /// Value group, e.g. `Q` or `Q+Q*sqrt(2)`
    #[arg(long, global = true, default_value = "Q")]
    pub group: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Instantiation point t := τ for the numerical cross-check
    #[arg(long, global = true, default_value = "1/1000")]
    pub oracle_tau: String,
    /// Name of the variable in one-dimensional problems
    #[arg(long, global = true, default_value = "x")]
    pub var: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a closed expression to an element of R[X]
    Eval { expr: String },
    /// Measure of a set or region
    Measure { domain: String },
    /// Integral over a set or region: `integrate EXPR on DOMAIN`
    Integrate {
        expr: String,
        #[arg(num_args = 1..=2)]
        rest: Vec<String>,
    },
    /// Antiderivative in one variable
    Antideriv { expr: String },
    /// Limit at inf, -inf or a point (append + or - to pick a side)
    Limit {
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        expr: String,
    },
    /// Smoothing by the Cauchy kernel of width h
    Convolve {
        #[arg(long)]
        h: String,
        expr: String,
    },
    /// Coefficients h_j with f = Σ h_j X^j on an interval or at a point
    Coeffs {
        #[arg(long)]
        interval: String,
        expr: String,
    },
    /// Order comparison of two elements of R[X]
    Compare { a: String, b: String },
    /// st(λ(A)) against λ(st(A))
    Stdpart { domain: String },
    /// Both sides of the transformation formula
    TransformCheck {
        #[arg(long)]
        phi: String,
        expr: String,
        #[arg(num_args = 1..=2)]
        rest: Vec<String>,
    },
    /// Isomorphism between the standard section and `gen -> image`
    Iso {
        #[arg(long)]
        section: String,
        /// Source section; the standard one when omitted
        #[arg(long)]
        from: Option<String>,
    },
    /// Certificate that two data over Q + Qζ are not isomorphic
    WitnessRank2 {
        #[arg(long, default_value = "sqrt(2)")]
        zeta: String,
        #[arg(long, default_value = "1+t")]
        unit: String,
    },
    /// Numerical cross-check of an integral or measure: `oracle [EXPR on] DOMAIN`
    Oracle {
        #[arg(num_args = 1..=3)]
        args: Vec<String>,
    },
}

pub struct Output {
    pub text: String,
    pub json: Value,
}

fn out(text: impl Into<String>, json: Value) -> Output {
    Output { text: text.into(), json }
}

pub struct Env {
    pub ctx: Ctx,
    pub omega: Q,
    pub tau: f64,
    pub var: String,
}

impl Env {
    pub fn from_cli(cli: &Cli) -> Result<Env> {
        constants::set_budget(cli.const_bits);
        let group: Group = ExponentGroup::parse(&cli.group)?;
        let omega = parse_q(&cli.precision)?;
        let tau = parse_q(&cli.oracle_tau)?;
        let tau_f = RealConstant::from_rational(tau.clone()).to_f64();
        if !(tau_f > 0.0 && tau_f < 1.0) {
            return Err(Error::domain("--oracle-tau must lie in (0, 1)"));
        }
        Ok(Env { ctx: Ctx::new(group, omega.clone()), omega, tau: tau_f, var: cli.var.clone() })
    }

    fn names(&self) -> Vec<String> {
        vec![self.var.clone()]
    }

    fn expr1(&self, src: &str) -> Result<Expr> {
        Expr::parse(src, &self.names(), &self.ctx)
    }

    fn series(&self, src: &str) -> Result<Series> {
        Series::parse(src, &self.ctx.group, &self.ctx.target)
    }

    fn element(&self, src: &str) -> Result<AlgebraElement> {
        AlgebraElement::parse(src, &self.ctx.group, &self.ctx.target)
    }

    fn region(&self, src: &str) -> Result<Region> {
        let mut r = Region::parse(src, &self.ctx)?;
        if r.dim() == 1 {
            r.names = self.names();
        }
        Ok(r)
    }
}

fn parse_q(src: &str) -> Result<Q> {
    let (c, _) = crate::syntax::parse_constant(src)?;
    c.as_rational().ok_or_else(|| Error::domain(format!("{src} is not rational")))
}

/// `EXPR on DOMAIN` or `EXPR DOMAIN`.
fn split_on<'a>(rest: &'a [String]) -> Result<&'a str> {
    match rest {
        [d] => Ok(d),
        [on, d] if on == "on" => Ok(d),
        _ => Err(crate::syntax::syntax(1, 1, "expected `on DOMAIN`")),
    }
}

fn oracle_json(c: &Option<OracleCheck>) -> Value {
    match c {
        Some(c) => json!({ "tau0": c.tau0, "rel_err": c.rel_err }),
        None => Value::Null,
    }
}

fn measure_json(env: &Env, m: &MeasureValue, check: &Option<OracleCheck>) -> Value {
    let value = match m {
        MeasureValue::Finite(a) => json!(a.to_string()),
        MeasureValue::Infinite => json!("infinite"),
    };
    json!({
        "schema": 1,
        "value": value,
        "degree": m.degree(),
        "precision": env.omega.to_string(),
        "oracle_check": oracle_json(check),
    })
}

fn value_json(env: &Env, text: &str) -> Value {
    json!({ "schema": 1, "value": text, "precision": env.omega.to_string() })
}

fn measure(env: &Env, domain: &str) -> Result<(MeasureValue, Option<OracleCheck>)> {
    let r = env.region(domain)?;
    let m = calculus::measure_region(&r, &env.ctx)?;
    let check = match &m {
        MeasureValue::Finite(a) => oracle::check_region(a, &Expr::int(&env.ctx.group, 1), &r, env.tau).ok(),
        MeasureValue::Infinite => None,
    };
    Ok((m, check))
}

fn integrate(env: &Env, expr: &str, domain: &str) -> Result<(AlgebraElement, Option<OracleCheck>)> {
    let r = env.region(domain)?;
    let e = Expr::parse(expr, &r.names, &env.ctx)?;
    let v = calculus::integrate_region(&e, &r, &env.ctx)?;
    let check = oracle::check_region(&v, &e, &r, env.tau).ok();
    Ok((v, check))
}

fn limit_target(at: &str, env: &Env) -> Result<(Option<Series>, Side, bool)> {
    let at = at.trim();
    match at {
        "inf" | "+inf" => return Ok((None, Side::Left, true)),
        "-inf" => return Ok((None, Side::Right, false)),
        _ => {}
    }
    let (body, side) = if let Some(b) = at.strip_suffix('+') {
        (b, Side::Right)
    } else if let Some(b) = at.strip_suffix('-') {
        (b, Side::Left)
    } else {
        (at, Side::Right)
    };
    Ok((Some(env.series(body)?), side, true))
}

fn coeff_domain(src: &str, env: &Env) -> Result<Component> {
    let s = SetOneD::parse(src, &env.ctx)?;
    match s.components.as_slice() {
        [c] => Ok(c.clone()),
        _ => Err(Error::domain("expected a single interval or point")),
    }
}

/// `gen -> image` with gen a power of t.
fn parse_section(src: &str, env: &Env) -> Result<Section> {
    let (lhs, rhs) = src.split_once("->").ok_or_else(|| crate::syntax::syntax(1, 1, "expected `t^g -> image`"))?;
    let gen = env.series(lhs.trim())?;
    let img = env.series(rhs.trim())?;
    if !gen.is_monomial() || gen.leading().map(|(_, c)| !c.is_one()).unwrap_or(true) {
        return Err(Error::domain("the left side must be a power of t"));
    }
    if img.ord()? != gen.ord()? {
        return Err(Error::domain("the image must have the same order as the generator"));
    }
    Section::rational(img)
}

pub fn run(cli: &Cli) -> Result<Output> {
    let env = Env::from_cli(cli)?;
    let g = env.ctx.group.clone();
    Ok(match &cli.command {
        Command::Eval { expr } => {
            let e = Expr::parse(expr, &[], &env.ctx)?;
            let v = e.eval(&[], &env.ctx)?;
            out(v.to_string(), json!({ "schema": 1, "value": v.to_string(), "degree": v.degree_or_zero(), "precision": env.omega.to_string() }))
        }
        Command::Measure { domain } => {
            let (m, check) = measure(&env, domain)?;
            out(m.to_string(), measure_json(&env, &m, &check))
        }
        Command::Integrate { expr, rest } => {
            let (v, check) = integrate(&env, expr, split_on(rest)?)?;
            let m = MeasureValue::Finite(v);
            out(m.to_string(), measure_json(&env, &m, &check))
        }
        Command::Antideriv { expr } => {
            let e = env.expr1(expr)?;
            let f = antiderivative(&e, 0, &env.ctx)?;
            let text = f.render(&env.names());
            out(text.clone(), value_json(&env, &text))
        }
        Command::Limit { at, expr } => {
            let e = env.expr1(expr)?;
            let (point, side, plus) = limit_target(at, &env)?;
            let l = match point {
                None if plus => constructible::limit_at_infinity(&e, 0, &env.ctx)?,
                None => constructible::limit::limit_at_neg_infinity(&e, 0, &env.ctx)?,
                Some(a) => constructible::limit_at_point(&e, 0, &a, side, &env.ctx)?,
            };
            let text = l.to_string();
            let mut j = value_json(&env, &text);
            j["kind"] = json!(match l {
                Limit::Finite(_) => "finite",
                Limit::PosInf => "+inf",
                Limit::NegInf => "-inf",
                Limit::NoLimit => "no-limit",
            });
            out(text, j)
        }
        Command::Convolve { h, expr } => {
            let e = env.expr1(expr)?;
            let s = constructible::convolve(&e, &env.series(h)?, &env.ctx)?;
            let text = s.render(&env.names());
            out(text.clone(), value_json(&env, &text))
        }
        Command::Coeffs { interval, expr } => {
            let e = env.expr1(expr)?;
            let k = coeff_domain(interval, &env)?;
            let hs: Vec<String> = constructible::extract_coefficients(&e, 0, &k, &env.ctx)?
                .iter()
                .map(|h| h.render(&env.names()))
                .collect();
            let text = hs.iter().enumerate().map(|(j, h)| format!("h{j} = {h}")).collect::<Vec<_>>().join("\n");
            out(text, json!({ "schema": 1, "value": hs, "precision": env.omega.to_string() }))
        }
        Command::Compare { a, b } => {
            let (x, y) = (env.element(a)?, env.element(b)?);
            let sym = match x.compare(&y)? {
                Ordering::Less => "<",
                Ordering::Equal => "=",
                Ordering::Greater => ">",
            };
            out(sym, value_json(&env, sym))
        }
        Command::Stdpart { domain } => {
            let r = env.region(domain)?;
            let rep = calculus::standard_part_measure(&r, &env.ctx)?;
            let text = format!(
                "st(measure) = {}\nmeasure(st) = {}\nR-bounded: {}\nequal: {}",
                rep.st_of_measure, rep.measure_of_st, rep.r_bounded, rep.equal
            );
            out(
                text,
                json!({
                    "schema": 1,
                    "st_of_measure": rep.st_of_measure.to_string(),
                    "measure_of_st": rep.measure_of_st.to_string(),
                    "r_bounded": rep.r_bounded,
                    "equal": rep.equal,
                }),
            )
        }
        Command::TransformCheck { phi, expr, rest } => {
            let u = SetOneD::parse(split_on(rest)?, &env.ctx)?;
            let rep = calculus::check_transformation(&env.expr1(phi)?, &env.expr1(expr)?, &u, 0, &env.ctx)?;
            let text = format!("image = {}\nlhs = {}\nrhs = {}\nequal: {}", rep.image, rep.lhs, rep.rhs, rep.equal);
            out(
                text,
                json!({
                    "schema": 1,
                    "image": rep.image.to_string(),
                    "lhs": rep.lhs.to_string(),
                    "rhs": rep.rhs.to_string(),
                    "equal": rep.equal,
                }),
            )
        }
        Command::Iso { section, from } => {
            let s2 = parse_section(section, &env)?;
            let s = match from {
                Some(f) => parse_section(f, &env)?,
                None => Section::standard(&g),
            };
            let map = datum::build_isomorphism_q(&s, &s2, &env.ctx)?;
            let text = format!("X -> {}", map.x_image);
            out(
                text,
                json!({
                    "schema": 1,
                    "x_image": map.x_image.to_string(),
                    "unit_ratio": map.rho.to_string(),
                    "precision": env.omega.to_string(),
                }),
            )
        }
        Command::WitnessRank2 { zeta, unit } => {
            let (z, _) = crate::syntax::parse_constant(zeta)?;
            let rep = datum::verify_nonisomorphism_rank2(&z, unit, env.omega.clone())?;
            let verdict = format!("{:?}", rep.verdict);
            let text = format!(
                "alpha: {}, {}\nbeta: {}, {}\ng = {}\nresidual = {}\nverdict: {}",
                rep.alpha[0], rep.alpha[1], rep.beta[0], rep.beta[1], rep.g, rep.residual, verdict
            );
            out(
                text,
                json!({
                    "schema": 1,
                    "alpha": [rep.alpha[0].to_string(), rep.alpha[1].to_string()],
                    "beta": [rep.beta[0].to_string(), rep.beta[1].to_string()],
                    "g": rep.g.to_string(),
                    "residual": rep.residual.to_string(),
                    "verdict": verdict,
                }),
            )
        }
        Command::Oracle { args } => {
            let (value, check) = match args.as_slice() {
                [d] => match measure(&env, d)? {
                    (MeasureValue::Finite(a), c) => (a, c),
                    (MeasureValue::Infinite, _) => {
                        return Err(Error::OracleUnavailable("infinite measure has no real instantiation".into()))
                    }
                },
                [e, rest @ ..] => integrate_rest(&env, e, rest)?,
                [] => return Err(crate::syntax::syntax(1, 1, "nothing to check")),
            };
            let c = check.ok_or_else(|| Error::OracleUnavailable("quadrature of the instantiated problem failed".into()))?;
            let text = format!(
                "value = {value}\ninstantiated = {:.12e}\nquadrature = {:.12e}\nrel_err = {:.3e}",
                c.symbolic, c.numeric, c.rel_err
            );
            let m = MeasureValue::Finite(value);
            out(text, measure_json(&env, &m, &Some(c)))
        }
    })
}

fn integrate_rest(env: &Env, e: &str, rest: &[String]) -> Result<(AlgebraElement, Option<OracleCheck>)> {
    integrate(env, e, split_on(rest)?)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. } => 1,
        Error::PrecisionExhausted(_) => 3,
        _ => 2,
    }
}

fn error_json(e: &Error) -> Value {
    let kind = format!("{e:?}");
    let kind = kind.split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
    json!({ "schema": 1, "error": { "kind": kind, "message": e.to_string() } })
}

/// Parses arguments, runs, prints, and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(o) => {
            match cli.format {
                Format::Text => println!("{}", o.text),
                Format::Json => println!("{}", o.json),
            }
            0
        }
        Err(e) => {
            match cli.format {
                Format::Text => eprintln!("error: {e}"),
                Format::Json => println!("{}", error_json(&e)),
            }
            exit_code(&e)
        }
    }
}
