//! Orbits of the special points, the orbit set O and zeros of h_G.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heights::orbit_height_poly;
use crate::mobius::{FiniteGroup, MobiusMap};
use crate::numth::{is_root_of_unity_quad, unit_circle_test, ExtendedPoint, QuadPoint};
use crate::poly::{cyclotomic, euler_phi, Poly};
use crate::real::Interval;

/// `0, ±1, ±i, (±1 ± sqrt(-3))/2`.
pub fn special_points() -> Vec<QuadPoint> {
    vec![
        QuadPoint::int(0),
        QuadPoint::int(1),
        QuadPoint::int(-1),
        QuadPoint::i(),
        QuadPoint::i().neg(),
        QuadPoint::omega(1, 1),
        QuadPoint::omega(1, -1),
        QuadPoint::omega(-1, 1),
        QuadPoint::omega(-1, -1),
    ]
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Orbit {
    points: BTreeSet<ExtendedPoint>,
}

impl Orbit {
    pub fn points(&self) -> impl Iterator<Item = &ExtendedPoint> {
        self.points.iter()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &ExtendedPoint) -> bool {
        self.points.contains(p)
    }

    /// Smallest point in canonical order.
    pub fn representative(&self) -> &ExtendedPoint {
        self.points.iter().next().expect("orbits are nonempty")
    }

    pub fn from_points<I: IntoIterator<Item = ExtendedPoint>>(pts: I) -> Self {
        Orbit {
            points: pts.into_iter().collect(),
        }
    }

    /// True iff every point is 0 or on the unit circle.
    pub fn in_o(&self) -> bool {
        self.points.iter().all(|p| match p.finite() {
            Some(q) => q.is_zero() || unit_circle_test(q),
            None => false,
        })
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.points.iter().map(|p| p.to_string()).collect()
    }
}

impl fmt::Display for Orbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.to_strings().join(", "))
    }
}

impl Serialize for Orbit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Orbit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        let pts = v
            .iter()
            .map(|s| crate::expr::parse_point(s))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Ok(Orbit::from_points(pts))
    }
}

pub fn orbit_of(g: &FiniteGroup, p: &ExtendedPoint) -> Orbit {
    Orbit::from_points(g.elements().iter().map(|s| s.apply_point(p)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitSetO {
    Infinite,
    Finite(Vec<Orbit>),
}

fn is_swap(s: &MobiusMap) -> bool {
    let [a, b, c, d] = s.entries();
    a.is_zero() && d.is_zero() && b == c
}

/// `(x, y)` for `s = (x, y; -y, -x)` up to scalar, with `x >= 0`.
fn flip_pair(s: &MobiusMap) -> Option<(BigInt, BigInt)> {
    let [a, b, c, d] = s.entries();
    if *c != -b || *d != -a || a.abs() == b.abs() {
        return None;
    }
    if a.is_negative() || (a.is_zero() && b.is_negative()) {
        Some((-a, -b))
    } else {
        Some((a.clone(), b.clone()))
    }
}

/// True iff `G` lies in `{I, (0,1;1,0), (a,b;-b,-a), (b,a;-a,-b)}` for some
/// `a^2 != b^2`, i.e. iff O is infinite.
pub fn is_o_infinite(g: &FiniteGroup) -> bool {
    let mut pairs = Vec::new();
    for s in g.elements() {
        if s.is_identity() || is_swap(s) {
            continue;
        }
        match flip_pair(s) {
            Some(p) => pairs.push(p),
            None => return false,
        }
    }
    let Some((a, b)) = pairs.first().cloned() else {
        return true;
    };
    let scale = |(x, y): (BigInt, BigInt)| {
        if x.is_negative() || (x.is_zero() && y.is_negative()) {
            (-x, -y)
        } else {
            (x, y)
        }
    };
    let swapped = scale((b.clone(), a.clone()));
    pairs
        .iter()
        .all(|p| *p == (a.clone(), b.clone()) || *p == swapped)
}

pub fn compute_o(g: &FiniteGroup) -> OrbitSetO {
    if is_o_infinite(g) {
        return OrbitSetO::Infinite;
    }
    let set: BTreeSet<Orbit> = special_points()
        .into_iter()
        .map(|p| orbit_of(g, &p.into()))
        .filter(Orbit::in_o)
        .collect();
    OrbitSetO::Finite(set.into_iter().collect())
}

/// Special points whose orbit consists of 0, infinity and roots of unity only.
pub fn height_zeros(g: &FiniteGroup) -> Result<Vec<QuadPoint>> {
    if is_o_infinite(g) {
        return Err(Error::OrbitSetInfinite);
    }
    Ok(special_points()
        .into_iter()
        .filter(|p| {
            orbit_of(g, &p.clone().into())
                .points()
                .all(|q| match q.finite() {
                    None => true,
                    Some(q) => q.is_zero() || is_root_of_unity_quad(q),
                })
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnityWitness {
    pub order: u64,
    pub minpoly: Poly,
    pub height: Interval,
}

pub const DEFAULT_WITNESS_BOUND: u64 = 60;

/// A primitive `n`-th root of unity with `h_G > 0`, trying orders by
/// increasing `phi(n)`, then `n`.
pub fn unity_witness(g: &FiniteGroup, order_bound: u64, prec: u64) -> Result<UnityWitness> {
    if order_bound < 1 {
        return Err(Error::Invalid("order bound must be at least 1".into()));
    }
    let mut orders: Vec<u64> = (1..=order_bound).collect();
    orders.sort_by_key(|&n| (euler_phi(n), n));
    for n in orders {
        let f = cyclotomic(n);
        let h = orbit_height_poly(g, &f, prec)?;
        if h.is_positive() {
            return Ok(UnityWitness {
                order: n,
                minpoly: f,
                height: h,
            });
        }
    }
    if is_o_infinite(g) {
        Err(Error::NoWitness)
    } else {
        Err(Error::BoundTooSmall(order_bound as u32))
    }
}
