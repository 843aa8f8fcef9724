//! Exact points of Q, Q(i) and Q(sqrt(-3)), extended by infinity.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int<T: Into<BigInt>>(n: T) -> Rational {
    Rational::from_integer(n.into())
}

/// `a + b*sqrt(d)` with `d` in `{0, -1, -3}`; `d == 0` iff `b == 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadPoint {
    a: Rational,
    b: Rational,
    d: i64,
}

impl QuadPoint {
    pub fn new(a: Rational, b: Rational, d: i64) -> Result<Self> {
        if !matches!(d, 0 | -1 | -3) {
            return Err(Error::UnsupportedField(d));
        }
        if b.is_zero() || d == 0 {
            if d == 0 && !b.is_zero() {
                return Err(Error::Invalid("nonzero b with d = 0".into()));
            }
            return Ok(QuadPoint {
                a,
                b: Rational::zero(),
                d: 0,
            });
        }
        Ok(QuadPoint { a, b, d })
    }

    pub fn rational(a: Rational) -> Self {
        QuadPoint {
            a,
            b: Rational::zero(),
            d: 0,
        }
    }

    pub fn int(n: i64) -> Self {
        QuadPoint::rational(rat_int(n))
    }

    pub fn i() -> Self {
        QuadPoint {
            a: Rational::zero(),
            b: Rational::one(),
            d: -1,
        }
    }

    pub fn sqrt_m3() -> Self {
        QuadPoint {
            a: Rational::zero(),
            b: Rational::one(),
            d: -3,
        }
    }

    /// `(sa + sb*sqrt(-3))/2` for signs `sa, sb` in {1, -1}.
    pub fn omega(sa: i64, sb: i64) -> Self {
        QuadPoint {
            a: rat(sa, 2),
            b: rat(sb, 2),
            d: -3,
        }
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.d == 0
    }

    fn field_with(&self, other: &QuadPoint) -> Result<i64> {
        match (self.d, other.d) {
            (0, d) | (d, 0) => Ok(d),
            (d1, d2) if d1 == d2 => Ok(d1),
            (d1, d2) => Err(Error::MixedFields(d1, d2)),
        }
    }

    pub fn add(&self, other: &QuadPoint) -> Result<QuadPoint> {
        let d = self.field_with(other)?;
        QuadPoint::new(&self.a + &other.a, &self.b + &other.b, d)
    }

    pub fn sub(&self, other: &QuadPoint) -> Result<QuadPoint> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> QuadPoint {
        QuadPoint {
            a: -&self.a,
            b: -&self.b,
            d: self.d,
        }
    }

    pub fn mul(&self, other: &QuadPoint) -> Result<QuadPoint> {
        let d = self.field_with(other)?;
        let dr = rat_int(d);
        let a = &self.a * &other.a + &self.b * &other.b * &dr;
        let b = &self.a * &other.b + &self.b * &other.a;
        QuadPoint::new(a, b, d)
    }

    pub fn scale(&self, k: &Rational) -> QuadPoint {
        QuadPoint::new(&self.a * k, &self.b * k, self.d).expect("same field")
    }

    pub fn conj(&self) -> QuadPoint {
        QuadPoint {
            a: self.a.clone(),
            b: -&self.b,
            d: self.d,
        }
    }

    /// `a^2 - d b^2`, which is `|p|^2` since `d <= 0`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - rat_int(self.d) * &self.b * &self.b
    }

    pub fn inv(&self) -> Result<QuadPoint> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm();
        Ok(self.conj().scale(&n.recip()))
    }

    pub fn div(&self, other: &QuadPoint) -> Result<QuadPoint> {
        self.mul(&other.inv()?)
    }

    pub fn pow(&self, k: u32) -> QuadPoint {
        let mut acc = QuadPoint::int(1);
        for _ in 0..k {
            acc = acc.mul(self).expect("same field");
        }
        acc
    }

    pub fn to_complex(&self) -> Complex64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        Complex64::new(a, b * ((-self.d) as f64).sqrt())
    }

    /// Primitive integer minimal polynomial coefficients, constant term first.
    pub fn minpoly_coeffs(&self) -> Vec<BigInt> {
        let (coeffs, den) = if self.d == 0 {
            (
                vec![-self.a.clone(), Rational::one()],
                self.a.denom().clone(),
            )
        } else {
            let c1 = -(&self.a * BigInt::from(2));
            let c0 = self.norm();
            let l = num_integer::lcm(c1.denom().clone(), c0.denom().clone());
            (vec![c0, c1, Rational::one()], l)
        };
        let ints: Vec<BigInt> = coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(den.clone())).to_integer())
            .collect();
        let g = ints
            .iter()
            .fold(BigInt::zero(), |g, c| num_integer::Integer::gcd(&g, c));
        ints.into_iter().map(|c| c / &g).collect()
    }
}

/// True iff `|p| = 1`, tested exactly as `a^2 - d b^2 = 1`.
pub fn unit_circle_test(p: &QuadPoint) -> bool {
    p.norm().is_one()
}

/// True iff `p` is one of the roots of unity of degree at most two:
/// `±1, ±i, (±1 ± sqrt(-3))/2`.
pub fn is_root_of_unity_quad(p: &QuadPoint) -> bool {
    let half = rat(1, 2);
    let one = Rational::one();
    match p.d {
        0 => p.a.abs() == one,
        -1 => p.a.is_zero() && p.b.abs() == one,
        -3 => p.a.abs() == half && p.b.abs() == half,
        _ => false,
    }
}

impl fmt::Display for QuadPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unit = match self.d {
            0 => return write!(f, "{}", self.a),
            -1 => "i",
            _ => "sqrt(-3)",
        };
        let b = &self.b;
        let bpart = if b.is_one() {
            unit.to_string()
        } else if (-b).is_one() {
            format!("-{unit}")
        } else {
            format!("{b}*{unit}")
        };
        if self.a.is_zero() {
            write!(f, "{bpart}")
        } else if bpart.starts_with('-') {
            write!(f, "{}{}", self.a, bpart)
        } else {
            write!(f, "{}+{}", self.a, bpart)
        }
    }
}

/// A point of the Riemann sphere with exact finite part.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtendedPoint {
    Finite(QuadPoint),
    Infinity,
}

impl ExtendedPoint {
    pub fn finite(&self) -> Option<&QuadPoint> {
        match self {
            ExtendedPoint::Finite(p) => Some(p),
            ExtendedPoint::Infinity => None,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, ExtendedPoint::Infinity)
    }
}

impl From<QuadPoint> for ExtendedPoint {
    fn from(p: QuadPoint) -> Self {
        ExtendedPoint::Finite(p)
    }
}

impl fmt::Display for ExtendedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedPoint::Finite(p) => write!(f, "{p}"),
            ExtendedPoint::Infinity => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_circle_examples() {
        assert!(unit_circle_test(&QuadPoint::i()));
        let p = QuadPoint::new(rat(1, 5), rat(2, 5), -1).unwrap();
        assert_eq!(p.norm(), rat(1, 5));
        assert!(!unit_circle_test(&p));
        let q = QuadPoint::new(rat(3, 5), rat(4, 5), -1).unwrap();
        assert!(unit_circle_test(&q));
    }

    #[test]
    fn root_of_unity_examples() {
        assert!(is_root_of_unity_quad(&QuadPoint::omega(1, 1)));
        let q = QuadPoint::new(rat(3, 5), rat(4, 5), -1).unwrap();
        assert!(!is_root_of_unity_quad(&q));
        assert!(!is_root_of_unity_quad(&QuadPoint::int(2)));
        assert!(!is_root_of_unity_quad(&QuadPoint::int(0)));
    }

    #[test]
    fn roots_of_unity_have_order_dividing_twelve() {
        let pts = [
            QuadPoint::int(1),
            QuadPoint::int(-1),
            QuadPoint::i(),
            QuadPoint::i().neg(),
            QuadPoint::omega(1, 1),
            QuadPoint::omega(1, -1),
            QuadPoint::omega(-1, 1),
            QuadPoint::omega(-1, -1),
        ];
        for p in &pts {
            assert!(is_root_of_unity_quad(p));
            assert!(unit_circle_test(p));
            assert_eq!(p.pow(12), QuadPoint::int(1));
        }
    }

    #[test]
    fn mixed_fields_rejected() {
        assert_eq!(
            QuadPoint::i().add(&QuadPoint::sqrt_m3()),
            Err(Error::MixedFields(-1, -3))
        );
        assert!(QuadPoint::new(rat(1, 1), rat(1, 1), 5).is_err());
    }

    #[test]
    fn minpolys() {
        let to_i64 = |v: Vec<BigInt>| v.iter().map(|c| c.to_i64().unwrap()).collect::<Vec<_>>();
        assert_eq!(
            to_i64(QuadPoint::omega(1, 1).minpoly_coeffs()),
            vec![1, -1, 1]
        );
        let p = QuadPoint::new(rat(1, 5), rat(2, 5), -1).unwrap();
        assert_eq!(to_i64(p.minpoly_coeffs()), vec![1, -2, 5]);
        assert_eq!(
            to_i64(QuadPoint::rational(rat(-2, 3)).minpoly_coeffs()),
            vec![2, 3]
        );
    }

    #[test]
    fn display() {
        assert_eq!(QuadPoint::omega(1, -1).to_string(), "1/2-1/2*sqrt(-3)");
        assert_eq!(QuadPoint::i().neg().to_string(), "-i");
        assert_eq!(ExtendedPoint::Infinity.to_string(), "inf");
    }

    fn arb_point() -> impl Strategy<Value = QuadPoint> {
        (
            -50i64..50,
            1i64..20,
            -50i64..50,
            1i64..20,
            prop_oneof![Just(0i64), Just(-1), Just(-3)],
        )
            .prop_map(|(an, ad, bn, bd, d)| {
                let b = if d == 0 { rat(0, 1) } else { rat(bn, bd) };
                QuadPoint::new(rat(an, ad), b, d).unwrap()
            })
    }

    proptest! {
        #[test]
        fn inverse_is_exact(p in arb_point()) {
            prop_assume!(!p.is_zero());
            prop_assert_eq!(p.mul(&p.inv().unwrap()).unwrap(), QuadPoint::int(1));
        }

        #[test]
        fn norm_is_multiplicative(p in arb_point(), q in arb_point()) {
            prop_assume!(p.d() == 0 || q.d() == 0 || p.d() == q.d());
            prop_assert_eq!(p.mul(&q).unwrap().norm(), p.norm() * q.norm());
        }
    }
}
