//! Lexer and parser for the textual language shared by constants, series,
//! integrands, sets and regions.

use crate::constants::{RealConstant, RealExpr, Q};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Num(Q),
    Ident(String),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMS: [&str; 18] = ["<=", ">=", "->", "+", "-", "*", "/", "^", "(", ")", "[", "]", "{", "}", ",", ";", "<", ">"];

pub fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start_col = col;
        if c.is_ascii_digit() || (c == '.' && i + 1 < chars.len() && chars[i + 1].is_ascii_digit()) {
            let mut j = i;
            let mut int = String::new();
            let mut frac = String::new();
            while j < chars.len() && chars[j].is_ascii_digit() {
                int.push(chars[j]);
                j += 1;
            }
            if j < chars.len() && chars[j] == '.' {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    frac.push(chars[j]);
                    j += 1;
                }
            }
            let mut exp10: i64 = 0;
            if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                let mut k = j + 1;
                let mut s = String::new();
                if k < chars.len() && (chars[k] == '-' || chars[k] == '+') {
                    s.push(chars[k]);
                    k += 1;
                }
                let digits_start = k;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    s.push(chars[k]);
                    k += 1;
                }
                if k > digits_start {
                    exp10 = s.parse().map_err(|_| syntax(line, start_col, "bad exponent"))?;
                    j = k;
                }
            }
            let digits = format!("{int}{frac}");
            let mantissa: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().unwrap() };
            let scale = exp10 - frac.len() as i64;
            let ten = BigInt::from(10);
            let v = if scale >= 0 {
                Q::from_integer(mantissa * ten.pow(scale as u32))
            } else {
                Q::new(mantissa, ten.pow((-scale) as u32))
            };
            out.push(Token { tok: Tok::Num(v), line, col: start_col });
            col += j - i;
            i = j;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut j = i;
            let mut s = String::new();
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                s.push(chars[j]);
                j += 1;
            }
            out.push(Token { tok: Tok::Ident(s), line, col: start_col });
            col += j - i;
            i = j;
            continue;
        }
        if c == '∞' {
            out.push(Token { tok: Tok::Ident("inf".into()), line, col: start_col });
            i += 1;
            col += 1;
            continue;
        }
        let mut matched = false;
        for s in SYMS {
            let sc: Vec<char> = s.chars().collect();
            if i + sc.len() <= chars.len() && chars[i..i + sc.len()] == sc[..] {
                out.push(Token { tok: Tok::Sym(s), line, col: start_col });
                i += sc.len();
                col += sc.len();
                matched = true;
                break;
            }
        }
        if !matched {
            if c == ':' {
                out.push(Token { tok: Tok::Sym(":"), line, col: start_col });
                i += 1;
                col += 1;
                continue;
            }
            return Err(syntax(line, start_col, &format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

pub fn syntax(line: usize, col: usize, msg: &str) -> Error {
    Error::Syntax { line, col, msg: msg.to_string() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Num(Q),
    Ident(String),
    Call(String, Vec<Ast>),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, Box<Ast>),
    Cmp(CmpOp, Box<Ast>, Box<Ast>),
    /// `piecewise(c1: e1, c2: e2, default)`
    Piecewise(Vec<(Ast, Ast)>, Box<Ast>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum EndAst {
    NegInf,
    PosInf,
    Finite(Ast),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ComponentAst {
    Interval { lo: EndAst, lo_closed: bool, hi: EndAst, hi_closed: bool },
    Points(Vec<Ast>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionAst {
    pub vars: Vec<String>,
    pub base: Vec<ComponentAst>,
    /// (lower, upper) for each further variable
    pub layers: Vec<(Ast, Ast)>,
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof_line: usize,
    eof_col: usize,
}

impl Parser {
    pub fn new(src: &str) -> Result<Self> {
        let toks = lex(src)?;
        let lines: Vec<&str> = src.split('\n').collect();
        let eof_line = lines.len();
        let eof_col = lines.last().map(|l| l.chars().count() + 1).unwrap_or(1);
        Ok(Parser { toks, pos: 0, eof_line, eof_col })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => (self.eof_line, self.eof_col),
        }
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        let (l, c) = self.here();
        Err(syntax(l, c, msg))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(&format!("expected '{s}'"))
        }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn finish(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }

    pub fn expr(&mut self) -> Result<Ast> {
        let lhs = self.sum()?;
        let op = match self.peek() {
            Some(Tok::Sym("<")) => Some(CmpOp::Lt),
            Some(Tok::Sym("<=")) => Some(CmpOp::Le),
            Some(Tok::Sym(">")) => Some(CmpOp::Gt),
            Some(Tok::Sym(">=")) => Some(CmpOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            self.pos += 1;
            let rhs = self.sum()?;
            return Ok(Ast::Cmp(op, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn sum(&mut self) -> Result<Ast> {
        let mut lhs = self.product()?;
        loop {
            if self.eat_sym("+") {
                let r = self.product()?;
                lhs = Ast::Add(Box::new(lhs), Box::new(r));
            } else if self.eat_sym("-") {
                let r = self.product()?;
                lhs = Ast::Sub(Box::new(lhs), Box::new(r));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Ast> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_sym("*") {
                let r = self.unary()?;
                lhs = Ast::Mul(Box::new(lhs), Box::new(r));
            } else if self.eat_sym("/") {
                let r = self.unary()?;
                lhs = Ast::Div(Box::new(lhs), Box::new(r));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Ast> {
        if self.eat_sym("-") {
            let e = self.unary()?;
            return Ok(match e {
                Ast::Num(q) => Ast::Num(-q),
                e => Ast::Neg(Box::new(e)),
            });
        }
        if self.eat_sym("+") {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast> {
        let base = self.atom()?;
        if self.eat_sym("^") {
            let e = self.unary()?;
            return Ok(Ast::Pow(Box::new(base), Box::new(e)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast> {
        match self.peek().cloned() {
            Some(Tok::Num(q)) => {
                self.pos += 1;
                Ok(Ast::Num(q))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat_sym("(") {
                    if name == "piecewise" {
                        return self.piecewise_body();
                    }
                    let mut args = Vec::new();
                    if !self.is_sym(")") {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat_sym(",") {
                                break;
                            }
                        }
                    }
                    self.expect_sym(")")?;
                    Ok(Ast::Call(name, args))
                } else {
                    Ok(Ast::Ident(name))
                }
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            _ => self.err("expected a number, name or '('"),
        }
    }

    fn piecewise_body(&mut self) -> Result<Ast> {
        let mut branches = Vec::new();
        loop {
            let e = self.expr()?;
            if self.eat_sym(":") {
                let v = self.expr()?;
                branches.push((e, v));
                self.expect_sym(",")?;
            } else {
                self.expect_sym(")")?;
                return Ok(Ast::Piecewise(branches, Box::new(e)));
            }
        }
    }

    fn endpoint(&mut self) -> Result<EndAst> {
        if self.is_ident("inf") || self.is_ident("oo") {
            self.pos += 1;
            return Ok(EndAst::PosInf);
        }
        if self.is_sym("-") {
            if let Some(Tok::Ident(n)) = self.toks.get(self.pos + 1).map(|t| &t.tok) {
                if n == "inf" || n == "oo" {
                    self.pos += 2;
                    return Ok(EndAst::NegInf);
                }
            }
        }
        if self.is_sym("+") {
            if let Some(Tok::Ident(n)) = self.toks.get(self.pos + 1).map(|t| &t.tok) {
                if n == "inf" || n == "oo" {
                    self.pos += 2;
                    return Ok(EndAst::PosInf);
                }
            }
        }
        Ok(EndAst::Finite(self.sum()?))
    }

    pub fn component(&mut self) -> Result<ComponentAst> {
        if self.eat_sym("{") {
            let mut pts = Vec::new();
            loop {
                pts.push(self.sum()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym("}")?;
            return Ok(ComponentAst::Points(pts));
        }
        let lo_closed = if self.eat_sym("[") {
            true
        } else if self.eat_sym("]") || self.eat_sym("(") {
            false
        } else {
            return self.err("expected an interval or a point set");
        };
        let lo = self.endpoint()?;
        self.expect_sym(",")?;
        let hi = self.endpoint()?;
        let hi_closed = if self.eat_sym("]") {
            true
        } else if self.eat_sym("[") || self.eat_sym(")") {
            false
        } else {
            return self.err("expected ']' , '[' or ')'");
        };
        Ok(ComponentAst::Interval { lo, lo_closed, hi, hi_closed })
    }

    pub fn set(&mut self) -> Result<Vec<ComponentAst>> {
        let mut comps = vec![self.component()?];
        while self.is_ident("u") || self.is_ident("U") {
            self.pos += 1;
            comps.push(self.component()?);
        }
        Ok(comps)
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected a variable name"),
        }
    }

    pub fn region(&mut self) -> Result<RegionAst> {
        if !self.is_ident("region") {
            return self.err("expected 'region'");
        }
        self.pos += 1;
        let v0 = self.ident()?;
        if !self.is_ident("in") {
            return self.err("expected 'in'");
        }
        self.pos += 1;
        let base = self.set()?;
        let mut vars = vec![v0];
        let mut layers = Vec::new();
        while self.eat_sym(";") {
            if self.at_end() {
                break;
            }
            vars.push(self.ident()?);
            if !self.is_ident("in") {
                return self.err("expected 'in'");
            }
            self.pos += 1;
            self.expect_sym("[")?;
            let lo = self.sum()?;
            self.expect_sym(",")?;
            let hi = self.sum()?;
            self.expect_sym("]")?;
            layers.push((lo, hi));
        }
        Ok(RegionAst { vars, base, layers })
    }

    /// True if the remaining input starts like a set or region literal.
    pub fn looks_like_domain(&self) -> bool {
        self.is_ident("region") || self.is_sym("[") || self.is_sym("]") || self.is_sym("{")
    }
}

pub fn parse_ast(src: &str) -> Result<Ast> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainAst {
    Set(Vec<ComponentAst>),
    Region(RegionAst),
}

pub fn parse_domain(src: &str) -> Result<DomainAst> {
    let mut p = Parser::new(src)?;
    let d = if p.is_ident("region") { DomainAst::Region(p.region()?) } else { DomainAst::Set(p.set()?) };
    p.finish()?;
    Ok(d)
}

// ---------------------------------------------------------------------------
// constants

pub fn ast_to_real_expr(a: &Ast) -> Result<RealExpr> {
    use RealExpr as R;
    Ok(match a {
        Ast::Num(q) => R::Rational(q.clone()),
        Ast::Ident(n) if n == "pi" => R::Pi,
        Ast::Ident(n) if n == "e" => R::Exp(Box::new(R::Rational(Q::one()))),
        Ast::Ident(n) => return Err(syntax(0, 0, &format!("unknown constant '{n}'"))),
        Ast::Neg(x) => R::Neg(Box::new(ast_to_real_expr(x)?)),
        Ast::Add(x, y) => R::Add(Box::new(ast_to_real_expr(x)?), Box::new(ast_to_real_expr(y)?)),
        Ast::Sub(x, y) => R::Sub(Box::new(ast_to_real_expr(x)?), Box::new(ast_to_real_expr(y)?)),
        Ast::Mul(x, y) => R::Mul(Box::new(ast_to_real_expr(x)?), Box::new(ast_to_real_expr(y)?)),
        Ast::Div(x, y) => R::Div(Box::new(ast_to_real_expr(x)?), Box::new(ast_to_real_expr(y)?)),
        Ast::Pow(x, y) => {
            let e = ast_to_real_expr(y)?.normalize()?;
            let q = e.as_rational().ok_or_else(|| Error::domain("constant exponents must be rational"))?;
            R::PowRational(Box::new(ast_to_real_expr(x)?), q)
        }
        Ast::Call(f, args) if args.len() == 1 => {
            let x = Box::new(ast_to_real_expr(&args[0])?);
            match f.as_str() {
                "log" | "ln" => R::Log(x),
                "exp" => R::Exp(x),
                "arctan" | "atan" => R::Arctan(x),
                "arcsin" | "asin" => R::Arcsin(x),
                "sqrt" => R::Sqrt(x),
                _ => return Err(syntax(0, 0, &format!("unknown function '{f}'"))),
            }
        }
        _ => return Err(syntax(0, 0, "not a constant expression")),
    })
}

pub fn parse_constant(src: &str) -> Result<(RealConstant, RealExpr)> {
    let ast = parse_ast(src)?;
    let e = ast_to_real_expr(&ast)?;
    Ok((e.normalize()?, e))
}

pub fn q_from(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_are_reported() {
        match parse_ast("1 +\n  * 2") {
            Err(Error::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sets_and_regions() {
        let d = parse_domain("[0,1] u [2,3]").unwrap();
        match d {
            DomainAst::Set(c) => assert_eq!(c.len(), 2),
            _ => panic!(),
        }
        let r = parse_domain("region x in [1, t^(-1)]; y in [0, 1/x]").unwrap();
        match r {
            DomainAst::Region(r) => {
                assert_eq!(r.vars, vec!["x".to_string(), "y".to_string()]);
                assert_eq!(r.layers.len(), 1);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn decimals_and_powers() {
        assert_eq!(parse_ast("0.001").unwrap(), Ast::Num(q_from(1, 1000)));
        assert_eq!(parse_ast("1e-3").unwrap(), Ast::Num(q_from(1, 1000)));
        let a = parse_ast("t^-1").unwrap();
        assert!(matches!(a, Ast::Pow(_, _)));
    }
}
