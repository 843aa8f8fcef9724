//! A small arithmetic expression language shared by the polynomial parser,
//! point parser and the bundled table files.
//!
//! Grammar: `+ - * / ^`, parentheses, implicit multiplication (`2x`,
//! `z^2(z-1)`), decimal literals (read exactly), function calls
//! `abs max min sqrt divides`, and one comparison `== != < <= > >=`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numth::{QuadPoint, Rational};
use crate::poly::Poly;
use crate::real::{Dyadic, Interval};

const FUNCTIONS: [&str; 5] = ["abs", "max", "min", "sqrt", "divides"];

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    Var(String),
    Neg(Box<Expr>),
    Bin(char, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    Cmp(String, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(String),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let lit: String = chars[start..i].iter().collect();
            out.push(Tok::Num(parse_decimal(&lit)?));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            if ["==", "!=", "<=", ">="].contains(&two.as_str()) {
                out.push(Tok::Op(two));
                i += 2;
                continue;
            }
            let op = match c {
                '\u{2212}' => '-',
                '+' | '-' | '*' | '/' | '^' | '(' | ')' | ',' | '<' | '>' => c,
                _ => return Err(Error::Parse(format!("unexpected character {c:?} in {s:?}"))),
            };
            out.push(Tok::Op(op.to_string()));
            i += 1;
        }
    }
    Ok(out)
}

fn parse_decimal(lit: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad number {lit:?}"));
    match lit.split_once('.') {
        None => Ok(Rational::from_integer(
            lit.parse::<BigInt>().map_err(|_| bad())?,
        )),
        Some((int, frac)) => {
            if frac.contains('.') {
                return Err(bad());
            }
            let digits = format!("{int}{frac}");
            let n: BigInt = digits.parse().map_err(|_| bad())?;
            Ok(Rational::new(n, BigInt::from(10u32).pow(frac.len() as u32)))
        }
    }
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Some(Tok::Op(o)) if o == op)
    }

    fn expect(&mut self, op: &str) -> Result<()> {
        if self.is_op(op) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!("expected {op:?}")))
        }
    }

    fn comparison(&mut self) -> Result<Expr> {
        let lhs = self.sum()?;
        if let Some(Tok::Op(o)) = self.peek() {
            if ["==", "!=", "<", "<=", ">", ">="].contains(&o.as_str()) {
                let o = o.clone();
                self.pos += 1;
                let rhs = self.sum()?;
                return Ok(Expr::Cmp(o, Box::new(lhs), Box::new(rhs)));
            }
        }
        Ok(lhs)
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            if self.is_op("+") || self.is_op("-") {
                let op = if self.is_op("+") { '+' } else { '-' };
                self.pos += 1;
                let r = self.term()?;
                e = Expr::Bin(op, Box::new(e), Box::new(r));
            } else {
                return Ok(e);
            }
        }
    }

    fn starts_primary(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_)) | Some(Tok::Ident(_))) || self.is_op("(")
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            if self.is_op("*") || self.is_op("/") {
                let op = if self.is_op("*") { '*' } else { '/' };
                self.pos += 1;
                let r = self.unary()?;
                e = Expr::Bin(op, Box::new(e), Box::new(r));
            } else if self.starts_primary() {
                let r = self.power()?;
                e = Expr::Bin('*', Box::new(e), Box::new(r));
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.is_op("-") {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.is_op("+") {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.is_op("^") {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(q)) => {
                self.pos += 1;
                Ok(Expr::Num(q))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if FUNCTIONS.contains(&name.as_str()) {
                    self.expect("(")?;
                    let mut args = vec![self.comparison()?];
                    while self.is_op(",") {
                        self.pos += 1;
                        args.push(self.comparison()?);
                    }
                    self.expect(")")?;
                    Ok(Expr::Call(name, args))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some(Tok::Op(o)) if o == "(" => {
                self.pos += 1;
                let e = self.comparison()?;
                self.expect(")")?;
                Ok(e)
            }
            Some(t) => Err(Error::Parse(format!("unexpected token {t:?}"))),
            None => Err(Error::Parse("unexpected end of input".into())),
        }
    }
}

pub fn parse(s: &str) -> Result<Expr> {
    let toks = tokenize(s)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut p = Parser { toks, pos: 0 };
    let e = p.comparison()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input in {s:?}")));
    }
    Ok(e)
}

impl Expr {
    /// Names of free variables, in order of first appearance.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Expr::Neg(a) => a.collect_vars(out),
            Expr::Bin(_, a, b) | Expr::Cmp(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }
}

/// A domain expressions can be evaluated in.
pub trait Value: Clone + Sized {
    fn constant(q: &Rational) -> Result<Self>;
    fn add(self, o: Self) -> Result<Self>;
    fn sub(self, o: Self) -> Result<Self>;
    fn mul(self, o: Self) -> Result<Self>;
    fn div(self, o: Self) -> Result<Self>;
    fn neg(self) -> Result<Self>;
    fn call(name: &str, args: Vec<Self>) -> Result<Self> {
        let _ = args;
        Err(Error::Parse(format!("{name} not available here")))
    }

    fn powi(self, k: i64) -> Result<Self> {
        let mut acc = Self::constant(&Rational::one())?;
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(self.clone())?;
        }
        if k < 0 {
            Self::constant(&Rational::one())?.div(acc)
        } else {
            Ok(acc)
        }
    }
}

pub fn eval<V: Value>(e: &Expr, env: &dyn Fn(&str) -> Option<V>) -> Result<V> {
    match e {
        Expr::Num(q) => V::constant(q),
        Expr::Var(v) => env(v).ok_or_else(|| Error::Parse(format!("unknown variable {v:?}"))),
        Expr::Neg(a) => eval(a, env)?.neg(),
        Expr::Bin('^', a, b) => {
            let k = eval::<Rational>(b, &|_| None)?;
            if !k.is_integer() {
                return Err(Error::Parse("exponent must be an integer constant".into()));
            }
            let k = k
                .to_integer()
                .to_i64()
                .filter(|k| k.abs() <= 1000)
                .ok_or_else(|| Error::Parse("exponent too large".into()))?;
            eval(a, env)?.powi(k)
        }
        Expr::Bin(op, a, b) => {
            let (x, y) = (eval(a, env)?, eval(b, env)?);
            match op {
                '+' => x.add(y),
                '-' => x.sub(y),
                '*' => x.mul(y),
                '/' => x.div(y),
                _ => unreachable!(),
            }
        }
        Expr::Call(name, args) => {
            let vals = args
                .iter()
                .map(|a| eval(a, env))
                .collect::<Result<Vec<_>>>()?;
            V::call(name, vals)
        }
        Expr::Cmp(..) => Err(Error::Parse("comparison used as a value".into())),
    }
}

/// Truth value of a condition over rational variables.
pub fn eval_bool(e: &Expr, env: &dyn Fn(&str) -> Option<Rational>) -> Result<bool> {
    match e {
        Expr::Cmp(op, a, b) => {
            let (x, y) = (eval(a, env)?, eval(b, env)?);
            Ok(match op.as_str() {
                "==" => x == y,
                "!=" => x != y,
                "<" => x < y,
                "<=" => x <= y,
                ">" => x > y,
                ">=" => x >= y,
                _ => unreachable!(),
            })
        }
        Expr::Call(name, args) if name == "divides" && args.len() == 2 => {
            let d = eval(&args[0], env)?;
            let n = eval(&args[1], env)?;
            if !d.is_integer() || !n.is_integer() || d.is_zero() {
                return Err(Error::Parse("divides expects nonzero integers".into()));
            }
            Ok((n.to_integer() % d.to_integer()).is_zero())
        }
        _ => Err(Error::Parse("expected a condition".into())),
    }
}

fn arity(name: &str, args: &[impl Sized], n: usize) -> Result<()> {
    if args.len() != n {
        return Err(Error::Parse(format!("{name} expects {n} argument(s)")));
    }
    Ok(())
}

impl Value for Rational {
    fn constant(q: &Rational) -> Result<Self> {
        Ok(q.clone())
    }
    fn add(self, o: Self) -> Result<Self> {
        Ok(self + o)
    }
    fn sub(self, o: Self) -> Result<Self> {
        Ok(self - o)
    }
    fn mul(self, o: Self) -> Result<Self> {
        Ok(self * o)
    }
    fn div(self, o: Self) -> Result<Self> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self / o)
    }
    fn neg(self) -> Result<Self> {
        Ok(-self)
    }
    fn call(name: &str, args: Vec<Self>) -> Result<Self> {
        match name {
            "abs" => {
                arity(name, &args, 1)?;
                Ok(args[0].abs())
            }
            "max" | "min" if !args.is_empty() => {
                let it = args.into_iter();
                Ok(if name == "max" { it.max() } else { it.min() }.unwrap())
            }
            "sqrt" => {
                arity(name, &args, 1)?;
                let q = &args[0];
                let (n, d) = (q.numer(), q.denom());
                if q.is_negative() {
                    return Err(Error::Parse("sqrt of a negative rational".into()));
                }
                let (rn, rd) = (n.sqrt(), d.sqrt());
                if &(&rn * &rn) == n && &(&rd * &rd) == d {
                    Ok(Rational::new(rn, rd))
                } else {
                    Err(Error::Parse("sqrt of a non-square rational".into()))
                }
            }
            _ => Err(Error::Parse(format!("{name} not available for rationals"))),
        }
    }
}

impl Value for QuadPoint {
    fn constant(q: &Rational) -> Result<Self> {
        Ok(QuadPoint::rational(q.clone()))
    }
    fn add(self, o: Self) -> Result<Self> {
        QuadPoint::add(&self, &o)
    }
    fn sub(self, o: Self) -> Result<Self> {
        QuadPoint::sub(&self, &o)
    }
    fn mul(self, o: Self) -> Result<Self> {
        QuadPoint::mul(&self, &o)
    }
    fn div(self, o: Self) -> Result<Self> {
        QuadPoint::div(&self, &o)
    }
    fn neg(self) -> Result<Self> {
        Ok(QuadPoint::neg(&self))
    }
    fn call(name: &str, args: Vec<Self>) -> Result<Self> {
        arity(name, &args, 1)?;
        if name == "abs" && args[0].is_rational() {
            return Ok(QuadPoint::rational(args[0].a().abs()));
        }
        if name != "sqrt" || !args[0].is_rational() {
            return Err(Error::Parse(format!("{name} not available for points")));
        }
        let q = args[0].a().clone();
        if !q.is_negative() {
            return Ok(QuadPoint::rational(Rational::call("sqrt", vec![q])?));
        }
        for (d, unit) in [(1i64, QuadPoint::i()), (3, QuadPoint::sqrt_m3())] {
            let t2 = -&q / Rational::from_integer(BigInt::from(d));
            if let Ok(t) = Rational::call("sqrt", vec![t2]) {
                return Ok(unit.scale(&t));
            }
        }
        Err(Error::UnsupportedField(
            q.to_integer().to_i64().unwrap_or(0),
        ))
    }
}

/// Interval evaluation at a fixed working precision.
#[derive(Clone, Debug)]
pub struct Iv(pub Interval);

const IV_PREC: u64 = 256;

fn iv_abs(x: &Interval) -> Interval {
    if x.lo().signum() >= 0 {
        x.clone()
    } else if x.hi().signum() <= 0 {
        x.neg()
    } else {
        let m = x.lo().neg().max(x.hi().clone());
        Interval::new(Dyadic::zero(), m)
    }
}

impl Value for Iv {
    fn constant(q: &Rational) -> Result<Self> {
        Ok(Iv(Interval::from_rational(q, IV_PREC)))
    }
    fn add(self, o: Self) -> Result<Self> {
        Ok(Iv(self.0.add(&o.0).round(IV_PREC)))
    }
    fn sub(self, o: Self) -> Result<Self> {
        Ok(Iv(self.0.sub(&o.0).round(IV_PREC)))
    }
    fn mul(self, o: Self) -> Result<Self> {
        Ok(Iv(self.0.mul(&o.0).round(IV_PREC)))
    }
    fn div(self, o: Self) -> Result<Self> {
        Ok(Iv(self.0.div(&o.0, IV_PREC)?))
    }
    fn neg(self) -> Result<Self> {
        Ok(Iv(self.0.neg()))
    }
    fn call(name: &str, args: Vec<Self>) -> Result<Self> {
        match name {
            "sqrt" => {
                arity(name, &args, 1)?;
                Ok(Iv(args[0].0.sqrt(IV_PREC)?))
            }
            "abs" => {
                arity(name, &args, 1)?;
                Ok(Iv(iv_abs(&args[0].0)))
            }
            "max" | "min" if !args.is_empty() => {
                let mut it = args.into_iter().map(|a| a.0);
                let first = it.next().unwrap();
                Ok(Iv(it.fold(first, |acc, x| {
                    let (lo, hi) = if name == "max" {
                        (
                            acc.lo().clone().max(x.lo().clone()),
                            acc.hi().clone().max(x.hi().clone()),
                        )
                    } else {
                        (
                            acc.lo().clone().min(x.lo().clone()),
                            acc.hi().clone().min(x.hi().clone()),
                        )
                    };
                    Interval::new(lo, hi)
                })))
            }
            _ => Err(Error::Parse(format!("{name} not available for intervals"))),
        }
    }
}

impl Value for Complex64 {
    fn constant(q: &Rational) -> Result<Self> {
        Ok(Complex64::new(q.to_f64().unwrap_or(f64::NAN), 0.0))
    }
    fn add(self, o: Self) -> Result<Self> {
        Ok(self + o)
    }
    fn sub(self, o: Self) -> Result<Self> {
        Ok(self - o)
    }
    fn mul(self, o: Self) -> Result<Self> {
        Ok(self * o)
    }
    fn div(self, o: Self) -> Result<Self> {
        Ok(self / o)
    }
    fn neg(self) -> Result<Self> {
        Ok(-self)
    }
    fn call(name: &str, args: Vec<Self>) -> Result<Self> {
        match name {
            "abs" => {
                arity(name, &args, 1)?;
                Ok(Complex64::new(args[0].norm(), 0.0))
            }
            "sqrt" => {
                arity(name, &args, 1)?;
                Ok(args[0].sqrt())
            }
            "max" | "min" if !args.is_empty() => {
                let it = args.into_iter();
                let pick = |a: Complex64, b: Complex64| {
                    if (a.re > b.re) == (name == "max") {
                        a
                    } else {
                        b
                    }
                };
                Ok(it.reduce(pick).unwrap())
            }
            _ => Err(Error::Parse(format!(
                "{name} not available for complex values"
            ))),
        }
    }
}

/// Polynomial with rational coefficients, used while evaluating.
#[derive(Clone, Debug)]
struct QPoly(Vec<Rational>);

impl QPoly {
    fn trim(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    fn get(&self, i: usize) -> Rational {
        self.0.get(i).cloned().unwrap_or_else(Rational::zero)
    }
}

impl Value for QPoly {
    fn constant(q: &Rational) -> Result<Self> {
        Ok(QPoly(vec![q.clone()]).trim())
    }
    fn add(self, o: Self) -> Result<Self> {
        let n = self.0.len().max(o.0.len());
        Ok(QPoly((0..n).map(|i| self.get(i) + o.get(i)).collect()).trim())
    }
    fn sub(self, o: Self) -> Result<Self> {
        let n = self.0.len().max(o.0.len());
        Ok(QPoly((0..n).map(|i| self.get(i) - o.get(i)).collect()).trim())
    }
    fn mul(self, o: Self) -> Result<Self> {
        if self.0.is_empty() || o.0.is_empty() {
            return Ok(QPoly(vec![]));
        }
        let mut c = vec![Rational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Ok(QPoly(c).trim())
    }
    fn div(self, o: Self) -> Result<Self> {
        if o.0.len() != 1 {
            return Err(Error::Parse("division by a non-constant polynomial".into()));
        }
        let d = &o.0[0];
        Ok(QPoly(self.0.iter().map(|c| c / d).collect()))
    }
    fn neg(self) -> Result<Self> {
        Ok(QPoly(self.0.into_iter().map(|c| -c).collect()))
    }
    fn powi(self, k: i64) -> Result<Self> {
        if k < 0 {
            return Err(Error::Parse("negative power of a polynomial".into()));
        }
        let mut acc = QPoly(vec![Rational::one()]);
        for _ in 0..k {
            acc = acc.mul(self.clone())?;
        }
        Ok(acc)
    }
}

/// Evaluates `e` as an integer polynomial in `var`, other names resolved
/// through `params`.
pub fn eval_poly(e: &Expr, var: &str, params: &dyn Fn(&str) -> Option<Rational>) -> Result<Poly> {
    let q = eval::<QPoly>(e, &|name| {
        if name == var {
            Some(QPoly(vec![Rational::zero(), Rational::one()]))
        } else {
            params(name).map(|r| QPoly(vec![r]).trim())
        }
    })?;
    let coeffs =
        q.0.iter()
            .map(|c| {
                if c.is_integer() {
                    Ok(c.to_integer())
                } else {
                    Err(Error::Parse(
                        "polynomial coefficients must be integers".into(),
                    ))
                }
            })
            .collect::<Result<Vec<_>>>()?;
    Ok(Poly::new(coeffs))
}

/// Parses an integer polynomial in `x` or `z`.
pub fn parse_poly(s: &str) -> Result<Poly> {
    let e = parse(s)?;
    let vars = e.variables();
    let var = match vars.as_slice() {
        [] => "x".to_string(),
        [v] if v == "x" || v == "z" => v.clone(),
        _ => {
            return Err(Error::Parse(format!(
                "expected a polynomial in x or z: {s:?}"
            )))
        }
    };
    eval_poly(&e, &var, &|_| None)
}

/// Parses an exact point such as `"1/2+1/2*sqrt(-3)"`, `"(1+2i)/5"` or `"inf"`.
pub fn parse_point(s: &str) -> Result<crate::numth::ExtendedPoint> {
    let t = s.trim();
    if matches!(t, "inf" | "oo" | "infinity" | "\u{221e}") {
        return Ok(crate::numth::ExtendedPoint::Infinity);
    }
    Ok(crate::numth::ExtendedPoint::Finite(eval_quad_expr(
        &parse(t)?,
        &|_| None,
    )?))
}

/// Evaluates a point expression, with `i` bound to the imaginary unit.
pub fn eval_quad_expr(e: &Expr, params: &dyn Fn(&str) -> Option<Rational>) -> Result<QuadPoint> {
    eval::<QuadPoint>(e, &|name| {
        if name == "i" {
            Some(QuadPoint::i())
        } else {
            params(name).map(QuadPoint::rational)
        }
    })
}
