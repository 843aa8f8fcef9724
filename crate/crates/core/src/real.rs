//! Dyadic numbers and outward-rounded intervals.
//!
//! A [`Dyadic`] is `mant * 2^exp` with an arbitrary-precision mantissa. Addition
//! and multiplication are exact; division, square roots and logarithms take a
//! target precision (significant bits) and a rounding direction. An
//! [`Interval`] is a pair of dyadic endpoints and every transcendental
//! operation on it rounds the lower endpoint down and the upper endpoint up.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
    Nearest,
}

/// `mant * 2^exp`, kept with an odd mantissa (or zero mantissa and zero exponent).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

fn pow2(k: u64) -> BigInt {
    BigInt::one() << k
}

fn div_round(num: &BigInt, den: &BigInt, mode: Round) -> BigInt {
    match mode {
        Round::Down => num.div_floor(den),
        Round::Up => -((-num).div_floor(den)),
        Round::Nearest => {
            let twice: BigInt = num * 2 + den;
            twice.div_floor(&(den * 2))
        }
    }
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        if mant.is_zero() {
            return Dyadic { mant, exp: 0 };
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            Dyadic {
                mant: mant >> tz,
                exp: exp + tz as i64,
            }
        } else {
            Dyadic { mant, exp }
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            mant: BigInt::one(),
            exp: 0,
        }
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Self {
        Dyadic::new(v.into(), 0)
    }

    /// Exact conversion; panics on NaN or infinity.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite f64 {x}");
        if x == 0.0 {
            return Dyadic::zero();
        }
        let (m, e, s) = x.integer_decode();
        let mant = BigInt::from(m) * i64::from(s);
        Dyadic::new(mant, i64::from(e))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn bits(&self) -> u64 {
        self.mant.bits()
    }

    pub fn neg(&self) -> Self {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub fn mul_int(&self, k: &BigInt) -> Dyadic {
        Dyadic::new(&self.mant * k, self.exp)
    }

    /// Multiply by `2^k`.
    pub fn shl(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    pub fn round(&self, prec: u64, mode: Round) -> Dyadic {
        let b = self.bits();
        if b <= prec {
            return self.clone();
        }
        let k = b - prec;
        let q = div_round(&self.mant, &pow2(k), mode);
        Dyadic::new(q, self.exp + k as i64)
    }

    pub fn div(&self, other: &Dyadic, prec: u64, mode: Round) -> Dyadic {
        assert!(!other.is_zero(), "dyadic division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let s = (prec as i64 + other.bits() as i64 + 2 - self.bits() as i64).max(0) as u64;
        let num = &self.mant << s;
        let q = div_round(&num, &other.mant, mode);
        Dyadic::new(q, self.exp - s as i64 - other.exp).round(prec, mode)
    }

    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u64, mode: Round) -> Dyadic {
        Dyadic::from_int(num.clone()).div(&Dyadic::from_int(den.clone()), prec, mode)
    }

    pub fn from_rational(q: &BigRational, prec: u64, mode: Round) -> Dyadic {
        Dyadic::from_ratio(q.numer(), q.denom(), prec, mode)
    }

    pub fn sqrt(&self, prec: u64, mode: Round) -> Dyadic {
        assert!(self.signum() >= 0, "square root of a negative dyadic");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let mut s = (2 * prec + 2).saturating_sub(self.bits());
        if (self.exp - s as i64).rem_euclid(2) != 0 {
            s += 1;
        }
        let m = &self.mant << s;
        let mut r = m.sqrt();
        if mode != Round::Down && &r * &r != m {
            // floor sqrt; bump for an upper bound (nearest treated as up)
            r += 1;
        }
        Dyadic::new(r, (self.exp - s as i64) / 2).round(prec, mode)
    }

    /// Natural logarithm rounded in direction `mode` (`Nearest` behaves like `Down`).
    pub fn ln(&self, prec: u64, mode: Round) -> Dyadic {
        assert!(self.signum() > 0, "logarithm of a non-positive dyadic");
        if *self == Dyadic::one() {
            return Dyadic::zero();
        }
        let w = prec + 40;
        let (lo, hi) = ln_scaled_bounds(self, w);
        match mode {
            Round::Up => Dyadic::new(hi, -(w as i64)).round(prec, Round::Up),
            _ => Dyadic::new(lo, -(w as i64)).round(prec, Round::Down),
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let b = self.bits();
        let (m, e) = if b > 64 {
            let k = b - 64;
            (&self.mant >> k, self.exp + k as i64)
        } else {
            (self.mant.clone(), self.exp)
        };
        ldexp(m.to_f64().unwrap_or(f64::NAN), e)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as u64)
        } else {
            BigRational::new(self.mant.clone(), pow2((-self.exp) as u64))
        }
    }

    /// Decimal expansion with at most `digits` fractional digits, rounded to nearest.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scaled = if self.exp >= 0 {
            (&self.mant << self.exp as u64) * BigInt::from(10u32).pow(digits as u32)
        } else {
            let num = &self.mant * BigInt::from(10u32).pow(digits as u32);
            div_round(&num, &pow2((-self.exp) as u64), Round::Nearest)
        };
        format_scaled(&scaled, digits)
    }
}

fn format_scaled(scaled: &BigInt, digits: usize) -> String {
    let neg = scaled.is_negative();
    let s = scaled.abs().to_string();
    let s = if s.len() <= digits {
        format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
    } else {
        s
    };
    let (int_part, frac_part) = s.split_at(s.len() - digits);
    let frac = frac_part.trim_end_matches('0');
    let body = if frac.is_empty() {
        int_part.to_string()
    } else {
        format!("{int_part}.{frac}")
    };
    if neg && body.chars().any(|c| c != '0' && c != '.') {
        format!("-{body}")
    } else {
        body
    }
}

pub(crate) fn ldexp(x: f64, mut e: i64) -> f64 {
    let mut v = x;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e as i32)
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sub(other).signum().cmp(&0)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(40))
    }
}

/// Lower and upper bounds of `atanh(num/den) * 2^w` for `0 <= num/den <= 1/3`.
fn atanh_scaled_bounds(num: &BigInt, den: &BigInt, w: u64) -> (BigInt, BigInt) {
    if num.is_zero() {
        return (BigInt::zero(), BigInt::zero());
    }
    let one = pow2(w);
    let t_lo = (num * &one).div_floor(den);
    let t_hi = div_round(&(num * &one), den, Round::Up);
    let t2_lo = (&t_lo * &t_lo) >> w;
    let t2_hi = div_round(&(&t_hi * &t_hi), &one, Round::Up);
    let (mut p_lo, mut p_hi) = (t_lo, t_hi);
    let (mut s_lo, mut s_hi) = (BigInt::zero(), BigInt::zero());
    let mut k: u64 = 0;
    loop {
        let d = BigInt::from(2 * k + 1);
        s_lo += p_lo.div_floor(&d);
        s_hi += div_round(&p_hi, &d, Round::Up);
        p_lo = (&p_lo * &t2_lo) >> w;
        p_hi = div_round(&(&p_hi * &t2_hi), &one, Round::Up);
        k += 1;
        if p_hi <= BigInt::one() {
            // remainder <= t^(2k+1) / ((2k+1)(1 - t^2)) and 1/(1 - t^2) <= 9/8
            let tail = div_round(&(&p_hi * 9), &BigInt::from(8 * (2 * k + 1)), Round::Up);
            s_hi += tail + 1;
            break;
        }
    }
    (s_lo, s_hi)
}

/// Bounds of `ln(x) * 2^w` as integers.
fn ln_scaled_bounds(x: &Dyadic, w: u64) -> (BigInt, BigInt) {
    let b = x.bits();
    let e = x.exp + b as i64 - 1;
    let half = pow2(b - 1);
    let (m_lo, m_hi) = atanh_scaled_bounds(&(&x.mant - &half), &(&x.mant + &half), w);
    let (l2_lo, l2_hi) = atanh_scaled_bounds(&BigInt::one(), &BigInt::from(3), w);
    let eb = BigInt::from(e);
    let (lo, hi) = if e >= 0 {
        (&eb * l2_lo * 2 + m_lo * 2, &eb * l2_hi * 2 + m_hi * 2)
    } else {
        (&eb * l2_hi * 2 + m_lo * 2, &eb * l2_lo * 2 + m_hi * 2)
    };
    (lo, hi)
}

/// Closed interval `[lo, hi]` with dyadic endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        debug_assert!(lo <= hi, "interval with lo > hi");
        Interval { lo, hi }
    }

    pub fn point(x: Dyadic) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Self {
        Interval::point(Dyadic::from_int(v))
    }

    pub fn zero() -> Self {
        Interval::point(Dyadic::zero())
    }

    pub fn one() -> Self {
        Interval::point(Dyadic::one())
    }

    pub fn from_rational(q: &BigRational, prec: u64) -> Self {
        Interval {
            lo: Dyadic::from_rational(q, prec, Round::Down),
            hi: Dyadic::from_rational(q, prec, Round::Up),
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64()
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64()
    }

    pub fn mid(&self) -> Dyadic {
        self.lo.add(&self.hi).shl(-1)
    }

    pub fn mid_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn width_f64(&self) -> f64 {
        self.width().to_f64()
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() <= 0 && self.hi.signum() >= 0
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// True when the interval is within `tol` of `x` (`|y - x| <= tol` for some `y` in it).
    pub fn near(&self, x: f64, tol: f64) -> bool {
        self.lo_f64() - tol <= x && x <= self.hi_f64() + tol
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn is_positive(&self) -> bool {
        self.lo.signum() > 0
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.add(&other.lo),
            hi: self.hi.add(&other.hi),
        }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.sub(&other.hi),
            hi: self.hi.sub(&other.lo),
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let c = [
            self.lo.mul(&other.lo),
            self.lo.mul(&other.hi),
            self.hi.mul(&other.lo),
            self.hi.mul(&other.hi),
        ];
        let lo = c.iter().min().cloned().unwrap();
        let hi = c.iter().max().cloned().unwrap();
        Interval { lo, hi }
    }

    pub fn mul_int(&self, k: &BigInt) -> Interval {
        self.mul(&Interval::from_int(k.clone()))
    }

    pub fn pow(&self, n: u32) -> Interval {
        let mut acc = Interval::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn recip(&self, prec: u64) -> Result<Interval> {
        if self.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        let one = Dyadic::one();
        Ok(Interval {
            lo: one.div(&self.hi, prec, Round::Down),
            hi: one.div(&self.lo, prec, Round::Up),
        })
    }

    pub fn div(&self, other: &Interval, prec: u64) -> Result<Interval> {
        Ok(self.mul(&other.recip(prec)?).round(prec))
    }

    pub fn div_int(&self, n: u64, prec: u64) -> Interval {
        assert!(n > 0);
        let d = Dyadic::from_int(n);
        Interval {
            lo: self.lo.div(&d, prec, Round::Down),
            hi: self.hi.div(&d, prec, Round::Up),
        }
    }

    pub fn max_with(&self, x: &Dyadic) -> Interval {
        Interval {
            lo: self.lo.clone().max(x.clone()),
            hi: self.hi.clone().max(x.clone()),
        }
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn round(&self, prec: u64) -> Interval {
        Interval {
            lo: self.lo.round(prec, Round::Down),
            hi: self.hi.round(prec, Round::Up),
        }
    }

    pub fn sqrt(&self, prec: u64) -> Result<Interval> {
        if self.hi.signum() < 0 {
            return Err(Error::Invalid("square root of a negative interval".into()));
        }
        let lo = if self.lo.signum() <= 0 {
            Dyadic::zero()
        } else {
            self.lo.sqrt(prec, Round::Down)
        };
        Ok(Interval {
            lo,
            hi: self.hi.sqrt(prec, Round::Up),
        })
    }

    pub fn ln(&self, prec: u64) -> Result<Interval> {
        if self.lo.signum() <= 0 {
            return Err(Error::Invalid(
                "logarithm of an interval touching zero".into(),
            ));
        }
        Ok(Interval {
            lo: self.lo.ln(prec, Round::Down),
            hi: self.hi.ln(prec, Round::Up),
        })
    }

    /// `mid ± radius` with `digits` fractional digits for the midpoint.
    pub fn to_decimal(&self, digits: usize) -> String {
        let rad = self.width().shl(-1);
        if rad.is_zero() {
            format!("{} ± 0", self.lo.to_decimal(digits))
        } else {
            // radius rounded up so the printed enclosure stays valid
            let r = rad.to_f64() * (1.0 + 1e-12) + 0.5 * 10f64.powi(-(digits as i32));
            format!("{} ± {:.1e}", self.mid().to_decimal(digits), r)
        }
    }

    /// Number of fractional digits matching a working precision in bits.
    pub fn digits_for(prec: u64) -> usize {
        ((prec as f64) * std::f64::consts::LOG10_2).ceil() as usize
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(30))
    }
}
