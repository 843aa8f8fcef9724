//! Integer polynomials.

mod cyclotomic;
mod factor;
mod modp;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numth::{QuadPoint, Rational};

pub use cyclotomic::{cyclotomic, euler_phi, is_cyclotomic_product, strip_cyclotomic};
pub use factor::{factor, is_irreducible};

/// Coefficients `a_0..a_n`; the zero polynomial is the empty vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    c: Vec<BigInt>,
}

impl Poly {
    pub fn new(mut c: Vec<BigInt>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Poly::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero() -> Self {
        Poly { c: vec![] }
    }

    pub fn one() -> Self {
        Poly::constant(BigInt::one())
    }

    pub fn constant(k: BigInt) -> Self {
        Poly::new(vec![k])
    }

    pub fn x() -> Self {
        Poly::from_i64(&[0, 1])
    }

    /// `a z + b`
    pub fn linear(a: &BigInt, b: &BigInt) -> Self {
        Poly::new(vec![b.clone(), a.clone()])
    }

    pub fn monomial(k: usize) -> Self {
        let mut c = vec![BigInt::zero(); k + 1];
        c[k] = BigInt::one();
        Poly { c }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.c.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    /// Degree; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn lead(&self) -> BigInt {
        self.c.last().cloned().unwrap_or_default()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            c: self.c.iter().map(|x| -x).collect(),
        }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![BigInt::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }

    pub fn scale(&self, k: &BigInt) -> Poly {
        Poly::new(self.c.iter().map(|x| x * k).collect())
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn shift_up(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![BigInt::zero(); k];
        c.extend(self.c.iter().cloned());
        Poly { c }
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * BigInt::from(i))
                .collect(),
        )
    }

    /// `x^n f(1/x)`
    pub fn reverse(&self) -> Poly {
        Poly::new(self.c.iter().rev().cloned().collect())
    }

    /// Polynomial whose roots are the squares of the roots of `self`.
    pub fn graeffe(&self) -> Poly {
        let n = self.degree();
        let even = Poly::new(self.c.iter().step_by(2).cloned().collect());
        let odd = Poly::new(self.c.iter().skip(1).step_by(2).cloned().collect());
        let e2 = even.mul(&even);
        let o2 = odd.mul(&odd).shift_up(1);
        let g = e2.sub(&o2);
        if n % 2 == 1 {
            g.neg()
        } else {
            g
        }
    }

    /// Multiplicity of the root 0 and the cofactor.
    pub fn strip_x(&self) -> (usize, Poly) {
        let k = self.c.iter().take_while(|a| a.is_zero()).count();
        if self.is_zero() {
            return (0, Poly::zero());
        }
        (k, Poly::new(self.c[k..].to_vec()))
    }

    pub fn content(&self) -> BigInt {
        self.c.iter().fold(BigInt::zero(), |g, a| g.gcd(a))
    }

    /// `f = content * primitive`, the primitive part keeping the sign of `f`.
    pub fn content_primitive(&self) -> Result<(BigInt, Poly)> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let g = self.content();
        Ok((
            g.clone(),
            Poly::new(self.c.iter().map(|a| a / &g).collect()),
        ))
    }

    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.content_primitive().expect("nonzero").1
    }

    pub fn is_primitive(&self) -> bool {
        !self.is_zero() && self.content().is_one()
    }

    /// Primitive part with positive leading coefficient.
    pub fn normalized(&self) -> Poly {
        let p = self.primitive();
        if p.lead().is_negative() {
            p.neg()
        } else {
            p
        }
    }

    /// Pseudo-remainder of `self` by `g`: remainder of `lead(g)^k self` by `g`.
    pub fn prem(&self, g: &Poly) -> Poly {
        assert!(!g.is_zero(), "pseudo-division by zero");
        let m = g.degree();
        let lg = g.lead();
        let mut r = self.clone();
        while !r.is_zero() && r.degree() >= m {
            let k = r.degree() - m;
            let lr = r.lead();
            r = r.scale(&lg).sub(&g.scale(&lr).shift_up(k));
        }
        r
    }

    /// Quotient when `g` divides `self` exactly in `Z[x]`.
    pub fn div_exact(&self, g: &Poly) -> Option<Poly> {
        if g.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if self.degree() < g.degree() {
            return None;
        }
        let m = g.degree();
        let lg = g.lead();
        let mut r = self.c.clone();
        let mut q = vec![BigInt::zero(); self.degree() - m + 1];
        for k in (0..q.len()).rev() {
            let top = &r[k + m];
            if top.is_zero() {
                continue;
            }
            let (qk, rem) = top.div_rem(&lg);
            if !rem.is_zero() {
                return None;
            }
            for (j, b) in g.c.iter().enumerate() {
                r[k + j] -= &qk * b;
            }
            q[k] = qk;
        }
        if r.iter().all(|a| a.is_zero()) {
            Some(Poly::new(q))
        } else {
            None
        }
    }

    pub fn divides(&self, f: &Poly) -> bool {
        f.div_exact(self).is_some()
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        self.c
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, a| acc * x + a)
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        self.c.iter().rev().fold(Rational::zero(), |acc, a| {
            acc * x + Rational::from_integer(a.clone())
        })
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.c
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, a| {
                acc * z + a.to_f64().unwrap_or(f64::NAN)
            })
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.c
            .iter()
            .map(|a| a.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn is_squarefree(&self) -> bool {
        if self.degree() < 1 {
            return true;
        }
        poly_gcd(self, &self.derivative())
            .map(|g| g.is_constant())
            .unwrap_or(true)
    }

    /// Squarefree decomposition of the primitive part: pairs `(s_i, i)` with
    /// `prim(f) = ± prod s_i^i`, each `s_i` primitive, squarefree and nonconstant.
    pub fn squarefree_decomposition(&self) -> Vec<(Poly, usize)> {
        let f = self.normalized();
        if f.degree() < 1 {
            return vec![];
        }
        let mut out = Vec::new();
        let mut b = poly_gcd(&f, &f.derivative()).expect("nonzero");
        let mut c = f.div_exact(&b).expect("gcd divides").normalized();
        let mut i = 1;
        while c.degree() >= 1 {
            let y = poly_gcd(&b, &c).expect("nonzero");
            let z = c.div_exact(&y).expect("gcd divides").normalized();
            if z.degree() >= 1 {
                out.push((z, i));
            }
            b = b.div_exact(&y).expect("gcd divides");
            c = y;
            i += 1;
        }
        out
    }

    /// Lexicographic key: degree first, then coefficients from the leading one.
    pub fn lex_cmp(&self, o: &Poly) -> Ordering {
        self.degree()
            .cmp(&o.degree())
            .then_with(|| self.c.iter().rev().cmp(o.c.iter().rev()))
    }

    pub fn display_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let neg = a.is_negative();
            let mag = a.abs();
            if neg {
                s.push('-');
            } else if !s.is_empty() {
                s.push('+');
            }
            if i == 0 || !mag.is_one() {
                s.push_str(&mag.to_string());
            }
            match i {
                0 => {}
                1 => s.push_str(var),
                _ => s.push_str(&format!("{var}^{i}")),
            }
        }
        s
    }

    /// Accepts `"x^2-3x+1"`-style expressions (variable `x` or `z`) and
    /// coefficient lists `"[a0,a1,...]"`.
    pub fn parse(s: &str) -> Result<Poly> {
        let t = s.trim();
        if let Some(inner) = t.strip_prefix('[') {
            let inner = inner
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse(format!("unterminated coefficient list: {t}")))?;
            let c = inner
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<BigInt>()
                        .map_err(|_| Error::Parse(format!("bad coefficient {x:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(Poly::new(c));
        }
        crate::expr::parse_poly(t)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_var("x"))
    }
}

impl FromStr for Poly {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Poly::parse(s)
    }
}

pub fn content_primitive(f: &Poly) -> Result<(BigInt, Poly)> {
    f.content_primitive()
}

/// Primitive gcd with positive leading coefficient.
pub fn poly_gcd(f: &Poly, g: &Poly) -> Result<Poly> {
    match (f.is_zero(), g.is_zero()) {
        (true, true) => return Err(Error::GcdOfZeros),
        (true, false) => return Ok(g.normalized()),
        (false, true) => return Ok(f.normalized()),
        _ => {}
    }
    let (mut a, mut b) = if f.degree() >= g.degree() {
        (f.primitive(), g.primitive())
    } else {
        (g.primitive(), f.primitive())
    };
    while !b.is_zero() {
        let r = a.prem(&b);
        a = b;
        b = r.primitive();
    }
    Ok(a.normalized())
}

/// Exact value of `f` at a quadratic point.
pub fn eval_quad(f: &Poly, p: &QuadPoint) -> QuadPoint {
    f.c.iter().rev().fold(QuadPoint::int(0), |acc, a| {
        acc.mul(p)
            .expect("same field")
            .add(&QuadPoint::rational(Rational::from_integer(a.clone())))
            .expect("same field")
    })
}

/// A reduced quotient `num/den` of integer polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    pub num: Poly,
    pub den: Poly,
}

/// Cancels the common factor of `num/den`, then removes the joint content of
/// all coefficients and makes the leading coefficient of `den` positive.
pub fn ratfunc_reduce(num: &Poly, den: &Poly) -> Result<RationalFunction> {
    if den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    if num.is_zero() {
        return Ok(RationalFunction {
            num: Poly::zero(),
            den: Poly::one(),
        });
    }
    let g = poly_gcd(num, den)?;
    let mut n = num.div_exact(&g).expect("gcd divides numerator");
    let mut d = den.div_exact(&g).expect("gcd divides denominator");
    let c = n.content().gcd(&d.content());
    n = Poly::new(n.c.iter().map(|a| a / &c).collect());
    d = Poly::new(d.c.iter().map(|a| a / &c).collect());
    if d.lead().is_negative() {
        n = n.neg();
        d = d.neg();
    }
    Ok(RationalFunction { num: n, den: d })
}

impl RationalFunction {
    pub fn eval_complex(&self, z: Complex64) -> (Complex64, Complex64) {
        (self.num.eval_complex(z), self.den.eval_complex(z))
    }

    pub fn display_var(&self, var: &str) -> String {
        if self.den.is_constant() && self.den.lead().is_one() {
            self.num.display_var(var).to_string()
        } else {
            format!(
                "({})/({})",
                self.num.display_var(var),
                self.den.display_var(var)
            )
        }
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_var("z"))
    }
}
