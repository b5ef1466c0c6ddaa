//! Expression language for integrands and closed forms.
//!
//! ```text
//! 2*int(K(x)^2)            ∫₀¹ 2K(x)² dx
//! int_t(K(sin(t))*cos(t))  ∫₀^{π/2} K(sin t) cos t dt
//! pi^3/4*hyp([1/2,1/2,1/2,1/2],[1,1,1],1)
//! ```
//!
//! Every intermediate value carries its complement `1 - v` as well, so
//! quantities such as `1 - x^2`, `log(1 - x)` or `K(x)` with `x` within
//! `10^-100` of 1 keep full relative accuracy.

use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;

use rug::Rational;

use crate::elliptic::{complete_pair, cubic_2f1_from_root, e_imag_at, k_imag_at, CompletePair, EllipticKind};
use crate::error::{domain, Error, Result};
use crate::hyper::{pfq, HypSpec, Param};
use crate::mp::{cancellation_detected, constant_at, pi, BigReal, ConstantName, PrecisionContext};
use crate::quad::{integrate, integrate_unit};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Log,
    Atan,
    Asin,
    Atanh,
    Sqrt,
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn name(&self) -> &'static str {
        match self {
            Func::Log => "log",
            Func::Atan => "atan",
            Func::Asin => "asin",
            Func::Atanh => "atanh",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    /// integration variable on (0, 1)
    X,
    /// `sqrt(1 - x^2)`
    Xp,
    /// integration variable on (0, π/2)
    T,
}

/// Integration range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Range {
    /// `x` over (0, 1)
    Unit,
    /// `t` over (0, π/2)
    Angle,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    Const(ConstantName),
    Var(Var),
    Ell(EllipticKind, Box<Expr>),
    /// `K(a) - E(a)` without cancellation near 0
    KminusE(Box<Expr>),
    /// `K(i a)`
    ImagK(Box<Expr>),
    /// `E(i a)`
    ImagE(Box<Expr>),
    /// `2F1(1/3, 2/3; 1; a)`
    Cubic(Box<Expr>),
    /// constant series value
    Hyp(HypSpec),
    Func(Func, Box<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Integral(Range, Box<Expr>),
}

impl Expr {
    pub fn num(n: i64) -> Self {
        Expr::Num(Rational::from(n))
    }

    pub fn contains_integral(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::Integral(..)));
        found
    }

    fn walk(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Num(_) | Expr::Const(_) | Expr::Var(_) | Expr::Hyp(_) => {}
            Expr::Ell(_, a)
            | Expr::KminusE(a)
            | Expr::ImagK(a)
            | Expr::ImagE(a)
            | Expr::Cubic(a)
            | Expr::Func(_, a)
            | Expr::Neg(a)
            | Expr::Integral(_, a) => a.walk(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.walk(f);
                b.walk(f);
            }
        }
    }

    /// Checks variable scoping: `x`, `xp` only inside `int`, `t` only inside
    /// `int_t`, no nested integrals.
    pub fn validate(&self) -> Result<()> {
        self.check_scope(None)
    }

    fn check_scope(&self, range: Option<Range>) -> Result<()> {
        match self {
            Expr::Var(v) => {
                let ok = matches!(
                    (v, range),
                    (Var::X | Var::Xp, Some(Range::Unit)) | (Var::T, Some(Range::Angle))
                );
                if ok {
                    Ok(())
                } else {
                    Err(Error::Parse(format!(
                        "variable `{}` is not bound by an enclosing integral of the right kind",
                        Expr::Var(*v)
                    )))
                }
            }
            Expr::Integral(r, body) => {
                if range.is_some() {
                    return Err(Error::Parse("nested integrals are not supported".into()));
                }
                body.check_scope(Some(*r))
            }
            Expr::Num(_) | Expr::Const(_) | Expr::Hyp(_) => Ok(()),
            Expr::Ell(_, a)
            | Expr::KminusE(a)
            | Expr::ImagK(a)
            | Expr::ImagE(a)
            | Expr::Cubic(a)
            | Expr::Func(_, a)
            | Expr::Neg(a) => a.check_scope(range),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.check_scope(range)?;
                b.check_scope(range)
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(q) if *q < 0 => 3,
            Expr::Num(q) if *q.denom() != 1 => 2,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.precedence() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn write_params(f: &mut fmt::Formatter<'_>, ps: &[Param]) -> fmt::Result {
    write!(f, "[")?;
    for (i, p) in ps.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{p}")?;
    }
    write!(f, "]")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(q) => write!(f, "{q}"),
            Expr::Const(c) => write!(
                f,
                "{}",
                match c {
                    ConstantName::Pi => "pi",
                    ConstantName::Catalan => "G",
                    ConstantName::Zeta3 => "zeta3",
                    ConstantName::GammaQuarter => "gamma14",
                }
            ),
            Expr::Var(Var::X) => write!(f, "x"),
            Expr::Var(Var::Xp) => write!(f, "xp"),
            Expr::Var(Var::T) => write!(f, "t"),
            Expr::Ell(k, a) => write!(f, "{}({a})", k.as_str()),
            Expr::KminusE(a) => write!(f, "KmE({a})"),
            Expr::ImagK(a) => write!(f, "Ki({a})"),
            Expr::ImagE(a) => write!(f, "Ei({a})"),
            Expr::Cubic(a) => write!(f, "cubic({a})"),
            Expr::Hyp(s) => {
                write!(f, "hyp(")?;
                write_params(f, &s.upper)?;
                write!(f, ",")?;
                write_params(f, &s.lower)?;
                write!(f, ",{})", s.z)
            }
            Expr::Func(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Integral(Range::Unit, a) => write!(f, "int({a})"),
            Expr::Integral(Range::Angle, a) => write!(f, "int_t({a})"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_child(f, a, 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                write_child(f, a, 1)?;
                write!(f, "{}", if matches!(self, Expr::Add(..)) { "+" } else { "-" })?;
                write_child(f, b, 2)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "{}", if matches!(self, Expr::Mul(..)) { "*" } else { "/" })?;
                write_child(f, b, 3)
            }
            Expr::Pow(a, b) => {
                write_child(f, a, 5)?;
                write!(f, "^")?;
                write_child(f, b, 5)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let p: Param = text.parse()?;
            match p {
                Param::Exact(q) => out.push(Tok::Num(q)),
                Param::Real(_) => return Err(Error::Parse(format!("bad number {text:?}"))),
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()[],".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

fn fold(op: char, a: Expr, b: Expr) -> Expr {
    if let (Expr::Num(x), Expr::Num(y)) = (&a, &b) {
        match op {
            '+' => return Expr::Num(x.clone() + y),
            '-' => return Expr::Num(x.clone() - y),
            '*' => return Expr::Num(x.clone() * y),
            '/' if *y != 0 => return Expr::Num(x.clone() / y),
            _ => {}
        }
    }
    let (a, b) = (Box::new(a), Box::new(b));
    match op {
        '+' => Expr::Add(a, b),
        '-' => Expr::Sub(a, b),
        '*' => Expr::Mul(a, b),
        '/' => Expr::Div(a, b),
        _ => Expr::Pow(a, b),
    }
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "expected `{c}` at token {}, found {:?}",
                self.pos,
                self.peek()
            )))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                '+'
            } else if self.eat('-') {
                '-'
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = fold(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                '*'
            } else if self.eat('/') {
                '/'
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = fold(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Num(q) => Expr::Num(-q),
                other => Expr::Neg(Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn params(&mut self) -> Result<Vec<Param>> {
        self.expect('[')?;
        let mut out = Vec::new();
        if self.eat(']') {
            return Ok(out);
        }
        loop {
            match self.expr()? {
                Expr::Num(q) => out.push(Param::Exact(q)),
                other => {
                    return Err(Error::Parse(format!(
                        "hypergeometric parameters must be rational literals, got `{other}`"
                    )))
                }
            }
            if self.eat(']') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn call_arg(&mut self) -> Result<Box<Expr>> {
        self.expect('(')?;
        let e = self.expr()?;
        self.expect(')')?;
        Ok(Box::new(e))
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Tok::Num(q)) => Ok(Expr::Num(q)),
            Some(Tok::Sym('(')) => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => self.ident(&name),
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }

    fn ident(&mut self, name: &str) -> Result<Expr> {
        let func = |f| Ok::<_, Error>(Expr::Func(f, Box::new(Expr::num(0))));
        let unary = match name {
            "x" => return Ok(Expr::Var(Var::X)),
            "xp" | "x'" => return Ok(Expr::Var(Var::Xp)),
            "t" => return Ok(Expr::Var(Var::T)),
            "pi" => return Ok(Expr::Const(ConstantName::Pi)),
            "G" | "catalan" => return Ok(Expr::Const(ConstantName::Catalan)),
            "zeta3" => return Ok(Expr::Const(ConstantName::Zeta3)),
            "gamma14" | "gamma_quarter" => return Ok(Expr::Const(ConstantName::GammaQuarter)),
            "hyp" => {
                self.expect('(')?;
                let upper = self.params()?;
                self.expect(',')?;
                let lower = self.params()?;
                self.expect(',')?;
                let z = match self.expr()? {
                    Expr::Num(q) => Param::Exact(q),
                    other => {
                        return Err(Error::Parse(format!(
                            "hypergeometric argument must be a rational literal, got `{other}`"
                        )))
                    }
                };
                self.expect(')')?;
                return Ok(Expr::Hyp(HypSpec::new(upper, lower, z)));
            }
            "log" | "ln" => func(Func::Log)?,
            "atan" | "arctan" => func(Func::Atan)?,
            "asin" | "arcsin" => func(Func::Asin)?,
            "atanh" | "arctanh" => func(Func::Atanh)?,
            "sqrt" => func(Func::Sqrt)?,
            "sin" => func(Func::Sin)?,
            "cos" => func(Func::Cos)?,
            "exp" => func(Func::Exp)?,
            "KmE" => Expr::KminusE(Box::new(Expr::num(0))),
            "Ki" => Expr::ImagK(Box::new(Expr::num(0))),
            "Ei" => Expr::ImagE(Box::new(Expr::num(0))),
            "cubic" => Expr::Cubic(Box::new(Expr::num(0))),
            "int" => Expr::Integral(Range::Unit, Box::new(Expr::num(0))),
            "int_t" => Expr::Integral(Range::Angle, Box::new(Expr::num(0))),
            other => match other.parse::<EllipticKind>() {
                Ok(kind) => Expr::Ell(kind, Box::new(Expr::num(0))),
                Err(_) => return Err(Error::Parse(format!("unknown identifier `{other}`"))),
            },
        };
        let arg = self.call_arg()?;
        Ok(match unary {
            Expr::Func(f, _) => Expr::Func(f, arg),
            Expr::KminusE(_) => Expr::KminusE(arg),
            Expr::ImagK(_) => Expr::ImagK(arg),
            Expr::ImagE(_) => Expr::ImagE(arg),
            Expr::Cubic(_) => Expr::Cubic(arg),
            Expr::Integral(r, _) => Expr::Integral(r, arg),
            Expr::Ell(k, _) => Expr::Ell(k, arg),
            _ => unreachable!(),
        })
    }
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser {
            toks: tokenize(s)?,
            pos: 0,
        };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(Error::Parse(format!(
                "trailing input after `{e}` in {s:?}"
            )));
        }
        e.validate()?;
        Ok(e)
    }
}

/// A value together with its complement `1 - v`.
#[derive(Clone, Debug)]
struct Val {
    v: BigReal,
    om: BigReal,
}

impl Val {
    fn plain(v: BigReal) -> Self {
        let om = BigReal::one(v.digits()) - &v;
        Self { v, om }
    }
}

enum Point {
    X { x: BigReal, xc: BigReal },
    T { t: BigReal, tc: BigReal },
}

type EllEntry<'e> = (&'e Expr, Option<CompletePair>, Option<CompletePair>);

struct Evaluator<'a, 'e> {
    ctx: &'a PrecisionContext,
    w: u32,
    point: Option<&'a Point>,
    cache: RefCell<Vec<EllEntry<'e>>>,
}

impl<'a, 'e> Evaluator<'a, 'e> {
    fn new(ctx: &'a PrecisionContext, point: Option<&'a Point>) -> Self {
        Self {
            ctx,
            w: ctx.working_digits(),
            point,
            cache: RefCell::new(Vec::new()),
        }
    }

    fn one(&self) -> BigReal {
        BigReal::one(self.w)
    }

    /// `(K, E)` at the argument and at its complementary modulus.
    fn pairs(&self, arg: &'e Expr, complement: bool) -> Result<CompletePair> {
        let hit = self
            .cache
            .borrow()
            .iter()
            .position(|(e, _, _)| *e == arg);
        let idx = match hit {
            Some(i) => i,
            None => {
                self.cache.borrow_mut().push((arg, None, None));
                self.cache.borrow().len() - 1
            }
        };
        if let Some(p) = {
            let c = self.cache.borrow();
            if complement { c[idx].2.clone() } else { c[idx].1.clone() }
        } {
            return Ok(p);
        }
        let a = self.eval(arg)?;
        if a.om.is_negative() && !a.om.is_zero() {
            return Err(domain(format!(
                "elliptic modulus {} exceeds 1",
                a.v.to_decimal(20)
            )));
        }
        let y = a.v.abs();
        let yc = (&a.om * &(&a.v + 1i64)).sqrt();
        let pair = if complement {
            complete_pair(&yc, &y, self.w)?
        } else {
            complete_pair(&y, &yc, self.w)?
        };
        let mut c = self.cache.borrow_mut();
        if complement {
            c[idx].2 = Some(pair.clone());
        } else {
            c[idx].1 = Some(pair.clone());
        }
        Ok(pair)
    }

    fn ell(&self, kind: EllipticKind, arg: &'e Expr) -> Result<BigReal> {
        let complement = matches!(kind, EllipticKind::Kc | EllipticKind::Ec);
        let want_e = matches!(kind, EllipticKind::E | EllipticKind::Ec);
        match self.pairs(arg, complement) {
            Ok(p) => Ok(if want_e { p.e } else { p.k }),
            // E at modulus 1 is finite
            Err(err) if want_e => {
                let a = self.eval(arg)?;
                let at_one = if complement { a.v.is_zero() } else { a.om.is_zero() };
                if at_one {
                    Ok(self.one())
                } else {
                    Err(err)
                }
            }
            Err(err) => Err(err),
        }
    }

    fn ln_val(&self, a: &Val) -> Result<BigReal> {
        if !(a.v > 0) {
            return Err(domain(format!("log of nonpositive value {}", a.v.to_decimal(20))));
        }
        Ok(if a.om.abs() < BigReal::from_ratio(1, 2, self.w) {
            (-&a.om).ln_1p()
        } else {
            a.v.ln()
        })
    }

    fn eval(&self, e: &'e Expr) -> Result<Val> {
        let w = self.w;
        Ok(match e {
            Expr::Num(q) => Val {
                v: BigReal::from_rational(q, w),
                om: BigReal::from_rational(&(Rational::from(1) - q), w),
            },
            Expr::Const(c) => Val::plain(constant_at(*c, w)),
            Expr::Var(var) => match (var, self.point) {
                (Var::X, Some(Point::X { x, xc })) => Val {
                    v: x.clone(),
                    om: xc.clone(),
                },
                (Var::Xp, Some(Point::X { x, xc })) => {
                    let xp = (xc * &(x + 1i64)).sqrt();
                    let om = x.square() / (&xp + 1i64);
                    Val { v: xp, om }
                }
                (Var::T, Some(Point::T { t, .. })) => Val::plain(t.clone()),
                _ => return Err(Error::Parse(format!("unbound variable in `{e}`"))),
            },
            Expr::Ell(kind, arg) => Val::plain(self.ell(*kind, arg)?),
            Expr::KminusE(arg) => Val::plain(self.pairs(arg, false)?.k_minus_e),
            Expr::ImagK(arg) => Val::plain(k_imag_at(&self.eval(arg)?.v, w)?),
            Expr::ImagE(arg) => Val::plain(e_imag_at(&self.eval(arg)?.v, w)?),
            Expr::Cubic(arg) => {
                let a = self.eval(arg)?;
                if !(a.om > 0) || a.om > 1 {
                    return Err(domain("cubic 2F1 needs an argument in [0, 1)"));
                }
                Val::plain(cubic_2f1_from_root(&a.om.cbrt(), w)?)
            }
            Expr::Hyp(spec) => Val::plain(pfq(spec, self.ctx)?),
            Expr::Func(f, arg) => self.func(*f, arg)?,
            Expr::Neg(a) => {
                let a = self.eval(a)?;
                Val {
                    om: &a.v + 1i64,
                    v: -a.v,
                }
            }
            Expr::Add(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                Val {
                    v: &a.v + &b.v,
                    om: &a.om - &b.v,
                }
            }
            Expr::Sub(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                let via_complement = a.om.abs() + b.om.abs() < a.v.abs() + b.v.abs();
                let v = if via_complement { &b.om - &a.om } else { &a.v - &b.v };
                Val {
                    v,
                    om: &a.om + &b.v,
                }
            }
            Expr::Mul(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                Val {
                    v: &a.v * &b.v,
                    om: &a.om + &b.om - &a.om * &b.om,
                }
            }
            Expr::Div(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                if b.v.is_zero() {
                    return Err(domain(format!("division by zero in `{e}`")));
                }
                Val {
                    v: &a.v / &b.v,
                    om: (&a.om - &b.om) / &b.v,
                }
            }
            Expr::Pow(base, exp) => self.pow(base, exp)?,
            Expr::Integral(range, body) => Val::plain(self.integral(*range, body)?),
        })
    }

    fn pow(&self, base: &'e Expr, exp: &'e Expr) -> Result<Val> {
        let b = self.eval(base)?;
        if let Expr::Num(q) = exp {
            if *q.denom() == 1 {
                let k = q.numer().to_i32().ok_or_else(|| domain("integer exponent out of range"))?;
                let v = b.v.powi(k);
                if b.v > 0 && b.om.abs() < BigReal::from_ratio(1, 2, self.w) {
                    let l = (-&b.om).ln_1p() * k as i64;
                    return Ok(Val { v, om: -l.exp_m1() });
                }
                return Ok(Val::plain(v));
            }
        }
        let e = self.eval(exp)?;
        if b.v.is_zero() && e.v > 0 {
            return Ok(Val::plain(BigReal::zero(self.w)));
        }
        let l = self.ln_val(&b)? * &e.v;
        Ok(Val {
            v: l.exp(),
            om: -l.exp_m1(),
        })
    }

    fn func(&self, f: Func, arg: &'e Expr) -> Result<Val> {
        let w = self.w;
        if let (Expr::Var(Var::T), Some(Point::T { t, tc })) = (arg, self.point) {
            // 1 - sin t = 2 sin²((π/2 - t)/2), 1 - cos t = 2 sin²(t/2)
            match f {
                Func::Sin => {
                    return Ok(Val {
                        v: tc.cos(),
                        om: tc.mul_pow2(-1).sin().square().mul_pow2(1),
                    })
                }
                Func::Cos => {
                    return Ok(Val {
                        v: tc.sin(),
                        om: t.mul_pow2(-1).sin().square().mul_pow2(1),
                    })
                }
                _ => {}
            }
        }
        let a = self.eval(arg)?;
        let half = BigReal::from_ratio(1, 2, w);
        Ok(match f {
            Func::Log => Val::plain(self.ln_val(&a)?),
            Func::Exp => Val {
                v: a.v.exp(),
                om: -a.v.exp_m1(),
            },
            Func::Sqrt => {
                if a.v.is_negative() {
                    return Err(domain(format!("sqrt of negative value {}", a.v.to_decimal(20))));
                }
                let s = a.v.sqrt();
                let om = &a.om / &(&s + 1i64);
                Val { v: s, om }
            }
            Func::Atan => Val::plain(a.v.atan()),
            Func::Asin => {
                if a.om.is_negative() || (&a.v + 1i64).is_negative() {
                    return Err(domain("asin argument outside [-1, 1]"));
                }
                let c = (&a.om * &(&a.v + 1i64)).sqrt();
                Val::plain(a.v.atan2(&c))
            }
            Func::Atanh => {
                if !(a.om > 0) || !(&a.v + 1i64 > 0) {
                    return Err(domain("atanh argument outside (-1, 1)"));
                }
                let v = if a.v.abs() < half {
                    (a.v.ln_1p() - (-&a.v).ln_1p()) * &half
                } else {
                    (a.v.ln_1p() - a.om.ln()) * &half
                };
                Val::plain(v)
            }
            Func::Sin => Val::plain(a.v.sin()),
            Func::Cos => Val::plain(a.v.cos()),
        })
    }

    fn integral(&self, range: Range, body: &'e Expr) -> Result<BigReal> {
        let ctx = self.ctx;
        let r = match range {
            Range::Unit => integrate_unit(
                |p| {
                    let point = Point::X {
                        x: p.x.clone(),
                        xc: p.from_hi.clone(),
                    };
                    Evaluator::new(ctx, Some(&point)).eval(body).map(|v| v.v)
                },
                ctx,
            )?,
            Range::Angle => {
                let w = self.w;
                integrate(
                    |p| {
                        let point = Point::T {
                            t: p.x.clone(),
                            tc: p.from_hi.clone(),
                        };
                        Evaluator::new(ctx, Some(&point)).eval(body).map(|v| v.v)
                    },
                    &BigReal::zero(w),
                    &pi(w).mul_pow2(-1),
                    ctx,
                )?
            }
        };
        Ok(r.value)
    }
}

/// Outcome of a top-level evaluation.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: BigReal,
    /// The guard was doubled after cancellation among top-level terms.
    pub guard_doubled: bool,
}

fn top_terms(e: &Expr) -> Vec<&Expr> {
    match e {
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let mut v = top_terms(a);
            v.extend(top_terms(b));
            v
        }
        other => vec![other],
    }
}

/// Evaluates a closed expression, doubling the guard digits once when the
/// top-level sum cancels most of them.
pub fn evaluate_detailed(e: &Expr, ctx: &PrecisionContext) -> Result<Evaluation> {
    e.validate()?;
    let value = Evaluator::new(ctx, None).eval(e)?.v;
    let terms = top_terms(e);
    if terms.len() > 1 {
        let ev = Evaluator::new(ctx, None);
        let mut largest = BigReal::zero(ctx.working_digits());
        for t in terms {
            largest = largest.max(ev.eval(t)?.v.abs());
        }
        if cancellation_detected(&value, &largest, ctx.guard()) {
            let wider = ctx.doubled_guard();
            let value = Evaluator::new(&wider, None).eval(e)?.v;
            return Ok(Evaluation {
                value,
                guard_doubled: true,
            });
        }
    }
    Ok(Evaluation {
        value,
        guard_doubled: false,
    })
}

pub fn evaluate(e: &Expr, ctx: &PrecisionContext) -> Result<BigReal> {
    evaluate_detailed(e, ctx).map(|r| r.value)
}

/// Integrand value at `x` for an expression in `x` (used by tests and bindings).
pub fn evaluate_at(e: &Expr, x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    let w = ctx.working_digits();
    let x = x.with_digits(w);
    let point = Point::X {
        xc: BigReal::one(w) - &x,
        x,
    };
    Evaluator::new(ctx, Some(&point)).eval(e).map(|v| v.v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(30).unwrap()
    }

    fn ev(s: &str) -> BigReal {
        evaluate(&s.parse().unwrap(), &ctx()).unwrap()
    }

    fn close(a: &BigReal, b: &BigReal, digits: i32) -> bool {
        (a - b).abs() < BigReal::pow10(-digits, a.digits().min(b.digits()))
    }

    #[test]
    fn parse_and_print() {
        for s in [
            "2*int(K(x)^2)",
            "pi^3/4*hyp([1/2,1/2,1/2,1/2],[1,1,1],1)",
            "int_t(K(sin(t))*cos(t))",
            "int(-x^2)",
            "int((1-x)^(-1/2)*xp/(x*(x+1)))",
            "-(7/4)^2*int(x/(7/4))",
            "a",
        ] {
            match s.parse::<Expr>() {
                Ok(e) => {
                    let again: Expr = e.to_string().parse().unwrap();
                    assert_eq!(again, e, "{s}");
                }
                Err(_) => assert_eq!(s, "a"),
            }
        }
        assert!("K(x)".parse::<Expr>().is_err());
        assert!("int(K(t))".parse::<Expr>().is_err());
        assert!("int(int(x))".parse::<Expr>().is_err());
        assert!("1+".parse::<Expr>().is_err());
        assert_eq!("7/4".parse::<Expr>().unwrap(), Expr::Num(Rational::from((7, 4))));
    }

    #[test]
    fn constants() {
        let v = ev("pi^2/8");
        assert!(v.to_decimal(11) == "1.2337005501");
        let w = ctx().working_digits();
        assert!(close(&ev("K(1/2)*2/pi"), &pfq(&"1/2,1/2;1;1/4".parse().unwrap(), &ctx()).unwrap(), 30));
        assert!(close(&ev("Kc(1)"), &(pi(w) / 2), 30));
        assert!(close(&ev("E(1)"), &BigReal::one(w), 30));
        assert!(close(&ev("Ec(0)"), &BigReal::one(w), 30));
        assert!("K(1)".parse::<Expr>().ok().map(|e| evaluate(&e, &ctx()).is_err()).unwrap());
    }

    #[test]
    fn complement_tracking_near_one() {
        let c = ctx();
        let w = c.working_digits();
        let x = BigReal::one(w) - BigReal::pow10(-40, w);
        let point = Point::X {
            x: x.clone(),
            xc: BigReal::pow10(-40, w),
        };
        let e: Expr = "1-x^2".parse::<Expr>().unwrap_or(Expr::num(0));
        // parse in an integral context to bind x, then take the body
        let body = match "int(1-x^2)".parse::<Expr>().unwrap() {
            Expr::Integral(_, b) => *b,
            _ => e,
        };
        let v = Evaluator::new(&c, Some(&point)).eval(&body).unwrap().v;
        let expected = BigReal::pow10(-40, w) * 2 - BigReal::pow10(-80, w);
        assert!(((&v - &expected) / &expected).abs() < BigReal::pow10(-30, w));
    }

    #[test]
    fn integrals() {
        let c = ctx();
        let w = c.working_digits();
        let p = pi(w);
        assert!(close(&ev("int(1/sqrt(x*(1-x)))"), &p, 28));
        assert!(close(&ev("int(K(x)/(x+1))"), &(p.square() / 8), 28));
        assert!(close(&ev("int_t(cos(t))"), &BigReal::one(w), 28));
        assert!(close(&ev("int(atanh(x)) "), &BigReal::from_int(2, w).ln(), 28));
        assert!(close(&ev("int(KmE(x)/x^2)"), &BigReal::one(w), 28));
    }

    #[test]
    fn guard_doubling_on_cancellation() {
        let e: Expr = "(1+10^(-20))-1".parse().unwrap();
        let r = evaluate_detailed(&e, &ctx()).unwrap();
        assert!(r.guard_doubled);
        let e: Expr = "2-1".parse().unwrap();
        assert!(!evaluate_detailed(&e, &ctx()).unwrap().guard_doubled);
    }
}
