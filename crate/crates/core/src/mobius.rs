//! Elements of PGL2(Q) and their finite subgroups.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numth::{ExtendedPoint, QuadPoint, Rational};
use crate::poly::Poly;

/// `z -> (az+b)/(cz+d)` as a primitive integer matrix whose first nonzero
/// entry is positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MobiusMap {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

/// Order of an element; torsion in PGL2(Q) has order at most 6.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(k) => write!(f, "{k}"),
            Order::Infinite => write!(f, "infinite"),
        }
    }
}

impl MobiusMap {
    pub fn from_ints(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<Self> {
        if (&a * &d - &b * &c).is_zero() {
            return Err(Error::SingularMatrix);
        }
        let g = a.gcd(&b).gcd(&c).gcd(&d);
        let (mut a, mut b, mut c, mut d) = (a / &g, b / &g, c / &g, d / &g);
        let first = [&a, &b, &c, &d]
            .into_iter()
            .find(|x| !x.is_zero())
            .expect("nonzero determinant")
            .clone();
        if first.is_negative() {
            a = -a;
            b = -b;
            c = -c;
            d = -d;
        }
        Ok(MobiusMap { a, b, c, d })
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        MobiusMap::from_ints(a.into(), b.into(), c.into(), d.into())
    }

    /// Canonical representative of the class of a rational matrix.
    pub fn normalize(a: &Rational, b: &Rational, c: &Rational, d: &Rational) -> Result<Self> {
        let l = [a, b, c, d]
            .iter()
            .fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        let int = |x: &Rational| (x * Rational::from_integer(l.clone())).to_integer();
        MobiusMap::from_ints(int(a), int(b), int(c), int(d))
    }

    pub fn identity() -> Self {
        MobiusMap::from_i64(1, 0, 0, 1).unwrap()
    }

    pub fn entries(&self) -> [&BigInt; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn is_identity(&self) -> bool {
        self.b.is_zero() && self.c.is_zero() && self.a == self.d
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    /// `self ∘ t`
    pub fn compose(&self, t: &MobiusMap) -> MobiusMap {
        MobiusMap::from_ints(
            &self.a * &t.a + &self.b * &t.c,
            &self.a * &t.b + &self.b * &t.d,
            &self.c * &t.a + &self.d * &t.c,
            &self.c * &t.b + &self.d * &t.d,
        )
        .expect("product of nonsingular matrices")
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap::from_ints(self.d.clone(), -&self.b, -&self.c, self.a.clone())
            .expect("adjugate of nonsingular matrix")
    }

    pub fn pow(&self, k: u32) -> MobiusMap {
        (0..k).fold(MobiusMap::identity(), |acc, _| acc.compose(self))
    }

    pub fn order(&self) -> Order {
        let mut acc = self.clone();
        for k in 1..=6 {
            if acc.is_identity() {
                return Order::Finite(k);
            }
            acc = acc.compose(self);
        }
        Order::Infinite
    }

    pub fn apply_point(&self, p: &ExtendedPoint) -> ExtendedPoint {
        let q = |x: &BigInt| QuadPoint::rational(Rational::from_integer(x.clone()));
        match p {
            ExtendedPoint::Infinity => {
                if self.c.is_zero() {
                    ExtendedPoint::Infinity
                } else {
                    ExtendedPoint::Finite(QuadPoint::rational(Rational::new(
                        self.a.clone(),
                        self.c.clone(),
                    )))
                }
            }
            ExtendedPoint::Finite(z) => {
                let den = q(&self.c)
                    .mul(z)
                    .and_then(|v| v.add(&q(&self.d)))
                    .expect("same field");
                if den.is_zero() {
                    return ExtendedPoint::Infinity;
                }
                let num = q(&self.a)
                    .mul(z)
                    .and_then(|v| v.add(&q(&self.b)))
                    .expect("same field");
                ExtendedPoint::Finite(num.div(&den).expect("nonzero denominator"))
            }
        }
    }

    /// Image of a complex number; `None` at the pole.
    pub fn apply_complex(&self, z: Complex64) -> Option<Complex64> {
        let [a, b, c, d] = self.entries_f64();
        let den = c * z + d;
        if den == Complex64::new(0.0, 0.0) {
            return None;
        }
        Some((a * z + b) / den)
    }

    pub fn entries_f64(&self) -> [f64; 4] {
        [&self.a, &self.b, &self.c, &self.d].map(|x| x.to_f64().unwrap_or(f64::NAN))
    }

    /// The pole `-d/c`, or `None` when `c = 0`.
    pub fn pole(&self) -> Option<Rational> {
        if self.c.is_zero() {
            None
        } else {
            Some(Rational::new(-&self.d, self.c.clone()))
        }
    }

    /// `(cz+d)^n f((az+b)/(cz+d))` without normalization. Its degree is
    /// `n` minus the multiplicity of `a/c` as a root of `f`.
    pub fn homogeneous_pullback(&self, f: &Poly) -> Poly {
        let n = f.degree();
        let num = Poly::linear(&self.a, &self.b);
        let den = Poly::linear(&self.c, &self.d);
        let mut num_pows = vec![Poly::one()];
        let mut den_pows = vec![Poly::one()];
        for _ in 0..n {
            num_pows.push(num_pows.last().unwrap().mul(&num));
            den_pows.push(den_pows.last().unwrap().mul(&den));
        }
        let mut acc = Poly::zero();
        for (k, a) in f.coeffs().iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            acc = acc.add(&num_pows[k].mul(&den_pows[n - k]).scale(a));
        }
        acc
    }

    /// Primitive polynomial (positive leading coefficient) whose roots are
    /// the finite points among `self^{-1}(alpha)` for the roots `alpha` of
    /// `f`, with the number of conjugates sent to infinity.
    pub fn pullback_parts(&self, f: &Poly) -> (Poly, usize) {
        let g = self.homogeneous_pullback(f);
        let dropped = f.degree() - g.degree();
        (g.normalized(), dropped)
    }

    pub fn pullback_minpoly(&self, f: &Poly) -> Result<Poly> {
        let (g, dropped) = self.pullback_parts(f);
        if dropped > 0 {
            return Err(Error::OrbitHitsInfinity { dropped });
        }
        Ok(g)
    }
}

impl fmt::Display for MobiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{};{},{}", self.a, self.b, self.c, self.d)
    }
}

/// Parses `"a,b;c,d"` with rational (or expression) entries.
impl FromStr for MobiusMap {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let rows: Vec<&str> = s.split(';').collect();
        if rows.len() != 2 {
            return Err(Error::Parse(format!("expected \"a,b;c,d\", got {s:?}")));
        }
        let mut e = Vec::new();
        for r in rows {
            let cols: Vec<&str> = r.split(',').collect();
            if cols.len() != 2 {
                return Err(Error::Parse(format!("expected \"a,b;c,d\", got {s:?}")));
            }
            for c in cols {
                let ex = crate::expr::parse(c)?;
                e.push(crate::expr::eval::<Rational>(&ex, &|_| None)?);
            }
        }
        MobiusMap::normalize(&e[0], &e[1], &e[2], &e[3])
    }
}

pub fn normalize(a: &Rational, b: &Rational, c: &Rational, d: &Rational) -> Result<MobiusMap> {
    MobiusMap::normalize(a, b, c, d)
}

pub fn compose(s: &MobiusMap, t: &MobiusMap) -> MobiusMap {
    s.compose(t)
}

pub fn inverse(s: &MobiusMap) -> MobiusMap {
    s.inverse()
}

pub fn order(s: &MobiusMap) -> Order {
    s.order()
}

pub fn apply_point(s: &MobiusMap, p: &ExtendedPoint) -> ExtendedPoint {
    s.apply_point(p)
}

pub fn pullback_minpoly(f: &Poly, s: &MobiusMap) -> Result<Poly> {
    s.pullback_minpoly(f)
}

pub const CLOSURE_BOUND: usize = 24;

/// A finite subgroup, elements sorted canonically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    elements: Vec<MobiusMap>,
    generators: Vec<MobiusMap>,
}

impl FiniteGroup {
    pub fn generate(gens: &[MobiusMap]) -> Result<FiniteGroup> {
        let mut set: BTreeSet<MobiusMap> = BTreeSet::new();
        set.insert(MobiusMap::identity());
        let mut frontier = vec![MobiusMap::identity()];
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = g.compose(&x);
                if set.insert(y.clone()) {
                    if set.len() > CLOSURE_BOUND {
                        return Err(Error::GroupNotFinite(CLOSURE_BOUND));
                    }
                    frontier.push(y);
                }
            }
        }
        Ok(FiniteGroup {
            elements: set.into_iter().collect(),
            generators: gens.to_vec(),
        })
    }

    /// Generators separated by `|`, e.g. `"1,-1;3,1 | 1,0;0,-1"`.
    pub fn parse(s: &str) -> Result<FiniteGroup> {
        let gens = s
            .split('|')
            .map(|g| g.trim().parse::<MobiusMap>())
            .collect::<Result<Vec<_>>>()?;
        FiniteGroup::generate(&gens)
    }

    pub fn elements(&self) -> &[MobiusMap] {
        &self.elements
    }

    pub fn generators(&self) -> &[MobiusMap] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, s: &MobiusMap) -> bool {
        self.elements.binary_search(s).is_ok()
    }

    pub fn is_cyclic(&self) -> bool {
        self.elements
            .iter()
            .any(|s| s.order() == Order::Finite(self.len() as u32))
    }
}

impl fmt::Display for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        write!(f, "<{}>", gens.join(" | "))
    }
}

pub fn generate_group(gens: &[MobiusMap]) -> Result<FiniteGroup> {
    FiniteGroup::generate(gens)
}
